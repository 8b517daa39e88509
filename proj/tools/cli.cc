/* Copyright 2026 The semcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cli.h"

// semcast headers pull in Eigen and must precede anything that includes
// <resolv.h>.
#include "semcast/common.h"
#include "semcast/metrics.h"
#include "semcast/mllm_client.h"
#include "semcast/mock_oracle.h"
#include "semcast/pipeline.h"
#include "semcast/predictor.h"
#include "semcast/response_parser.h"
#include "semcast/scene_model.h"
#include "semcast/semantic_schema.h"
#include "semcast/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace semcast::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Resolved run configuration; every field is reachable from the TOML file
// and from a flag of the same name.
struct RunConfig {
  // Paths. Empty means "derive from work_dir".
  std::string work_dir = "semcast_run";
  std::string train_scenarios;
  std::string eval_scenarios;
  std::string cache;
  std::string features;
  std::string parse_report;
  std::string checkpoint_dir;
  std::string reports_dir;

  // Dataset.
  std::string profile = "womd";
  int history_len = 0;  // 0: profile default
  int future_len = 0;   // 0: profile default
  int num_train = 500;
  int num_eval = 200;
  std::vector<std::string> families = {"ambiguous_turn"};
  int context_agents = 2;
  double position_noise_m = 0.05;
  double occluded_fraction = 0.1;
  double adverse_weather_fraction = 0.3;
  double reveal_window_s = 3.0;
  uint64_t gen_seed = 1;

  // Model access.
  std::string backend = "mock";
  double p_wrong_answer = 0.0;
  double p_malformed_table = 0.0;
  double p_missing_row = 0.0;
  double p_out_of_vocab = 0.0;
  uint64_t fault_seed = 0;
  std::string endpoint;
  std::string api_key_env;
  std::string model;
  std::string adapter = "openai_chat";
  std::string decoding_json = "{}";
  int timeout_ms = 60000;
  int max_concurrency = 4;
  double requests_per_s = 0.0;
  int max_attempts = 5;
  std::vector<double> delays = {0.0, 1.0, 2.0};

  // Predictor.
  int d_model = 128;
  int num_heads = 4;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int d_ff = 1024;
  int head_hidden = 1024;
  int num_modes = 6;
  int gain_hidden = 32;
  int map_points = 8;
  double position_scale = 10.0;
  bool use_semantics = true;
  std::string gain = "learned";
  std::vector<std::string> groups = {"signal", "intent", "type", "scene"};

  // Training.
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double grad_clip_norm = 5.0;
  int checkpoint_every = 0;
  uint64_t train_seed = 1;

  // Evaluation and reporting.
  std::string label;
  int k = 6;
  double delay = 0.0;
  std::string grid = "reasoning";
  std::vector<std::string> inputs;
  std::string baseline;
  double hardest_fraction = 0.1;
  std::string output;
};

void AddOptions(CLI::App& app, RunConfig& c) {
  app.add_option("--work_dir", c.work_dir, "Directory for all derived artifact paths");
  app.add_option("--train_scenarios", c.train_scenarios, "Training scenarios (JSON lines)");
  app.add_option("--eval_scenarios", c.eval_scenarios, "Evaluation scenarios (JSON lines)");
  app.add_option("--cache", c.cache, "Response cache (JSON lines)");
  app.add_option("--features", c.features, "Semantic feature records (JSON lines)");
  app.add_option("--parse_report", c.parse_report, "Per-response parse report (CSV)");
  app.add_option("--checkpoint_dir", c.checkpoint_dir, "Checkpoint directory");
  app.add_option("--reports_dir", c.reports_dir, "Metrics report directory");

  app.add_option("--profile", c.profile, "Dataset profile")
      ->check(CLI::IsMember({"womd", "nusc"}));
  app.add_option("--history_len", c.history_len, "History steps (0: profile default)");
  app.add_option("--future_len", c.future_len, "Future steps (0: profile default)");
  app.add_option("--num_train", c.num_train, "Training scenarios to generate");
  app.add_option("--num_eval", c.num_eval, "Evaluation scenarios to generate");
  app.add_option("--families", c.families, "Scenario families (equal mix)");
  app.add_option("--context_agents", c.context_agents, "Non-target agents per scenario");
  app.add_option("--position_noise_m", c.position_noise_m, "History position noise");
  app.add_option("--occluded_fraction", c.occluded_fraction, "Heavily occluded targets");
  app.add_option("--adverse_weather_fraction", c.adverse_weather_fraction,
                 "Scenes with non-sunny weather");
  app.add_option("--reveal_window_s", c.reveal_window_s, "Intent reveal window");
  app.add_option("--gen_seed", c.gen_seed, "Generator seed");

  app.add_option("--backend", c.backend, "Model backend")
      ->check(CLI::IsMember({"mock", "http", "cache"}));
  app.add_option("--p_wrong_answer", c.p_wrong_answer, "Mock: wrong-answer rate per cell");
  app.add_option("--p_malformed_table", c.p_malformed_table, "Mock: malformed response rate");
  app.add_option("--p_missing_row", c.p_missing_row, "Mock: missing-row rate");
  app.add_option("--p_out_of_vocab", c.p_out_of_vocab, "Mock: out-of-vocabulary rate");
  app.add_option("--fault_seed", c.fault_seed, "Mock: fault seed");
  app.add_option("--endpoint", c.endpoint, "HTTP: endpoint URL");
  app.add_option("--api_key_env", c.api_key_env, "HTTP: environment variable holding the key");
  app.add_option("--model", c.model, "HTTP: model name");
  app.add_option("--adapter", c.adapter, "HTTP: request envelope")
      ->check(CLI::IsMember({"openai_chat", "gemini"}));
  app.add_option("--decoding_json", c.decoding_json, "HTTP: decoding settings (JSON object)");
  app.add_option("--timeout_ms", c.timeout_ms, "HTTP: request timeout");
  app.add_option("--max_concurrency", c.max_concurrency, "Concurrent requests");
  app.add_option("--requests_per_s", c.requests_per_s, "Rate limit (0: unlimited)");
  app.add_option("--max_attempts", c.max_attempts, "Attempts per request");
  app.add_option("--delays", c.delays, "Feature delays to query, seconds");

  app.add_option("--d_model", c.d_model, "Model width");
  app.add_option("--num_heads", c.num_heads, "Attention heads");
  app.add_option("--encoder_layers", c.encoder_layers, "Encoder blocks");
  app.add_option("--decoder_layers", c.decoder_layers, "Decoder blocks");
  app.add_option("--d_ff", c.d_ff, "Feed-forward width");
  app.add_option("--head_hidden", c.head_hidden, "Output head hidden width");
  app.add_option("--num_modes", c.num_modes, "Mixture modes");
  app.add_option("--gain_hidden", c.gain_hidden, "Gain MLP hidden width");
  app.add_option("--map_points", c.map_points, "Points per map polyline");
  app.add_option("--position_scale", c.position_scale, "Position normalization, meters");
  app.add_option("--use_semantics", c.use_semantics, "Feed semantic features");
  app.add_option("--gain", c.gain, "Gain mode")
      ->check(CLI::IsMember({"none", "added", "constant", "learned"}));
  app.add_option("--groups", c.groups, "Question groups kept")
      ->check(CLI::IsMember({"signal", "intent", "type", "scene"}));

  app.add_option("--epochs", c.epochs, "Training epochs");
  app.add_option("--batch_size", c.batch_size, "Mini-batch size");
  app.add_option("--learning_rate", c.learning_rate, "Peak learning rate");
  app.add_option("--grad_clip_norm", c.grad_clip_norm, "Gradient clip norm");
  app.add_option("--checkpoint_every", c.checkpoint_every, "Steps between checkpoints");
  app.add_option("--train_seed", c.train_seed, "Initialization and shuffling seed");

  app.add_option("--label", c.label, "Model label (default: pnf or baseline)");
  app.add_option("--k", c.k, "Modes scored by the metrics");
  app.add_option("--delay", c.delay, "Evaluation feature delay, seconds");
  app.add_option("--grid", c.grid, "Ablation grid")
      ->check(CLI::IsMember({"reasoning", "gain", "delay", "all"}));
  app.add_option("--inputs", c.inputs, "Report files or directories to tabulate");
  app.add_option("--baseline", c.baseline, "Baseline label for the hardest split");
  app.add_option("--hardest_fraction", c.hardest_fraction, "Hardest split fraction");
  app.add_option("--output", c.output, "Report output prefix");
}

Json Resolved(const RunConfig& c) {
  return Json{{"work_dir", c.work_dir},
              {"train_scenarios", c.train_scenarios},
              {"eval_scenarios", c.eval_scenarios},
              {"cache", c.cache},
              {"features", c.features},
              {"parse_report", c.parse_report},
              {"checkpoint_dir", c.checkpoint_dir},
              {"reports_dir", c.reports_dir},
              {"profile", c.profile},
              {"history_len", c.history_len},
              {"future_len", c.future_len},
              {"num_train", c.num_train},
              {"num_eval", c.num_eval},
              {"families", c.families},
              {"context_agents", c.context_agents},
              {"position_noise_m", c.position_noise_m},
              {"occluded_fraction", c.occluded_fraction},
              {"adverse_weather_fraction", c.adverse_weather_fraction},
              {"reveal_window_s", c.reveal_window_s},
              {"gen_seed", c.gen_seed},
              {"backend", c.backend},
              {"p_wrong_answer", c.p_wrong_answer},
              {"p_malformed_table", c.p_malformed_table},
              {"p_missing_row", c.p_missing_row},
              {"p_out_of_vocab", c.p_out_of_vocab},
              {"fault_seed", c.fault_seed},
              {"endpoint", c.endpoint},
              {"api_key_env", c.api_key_env},
              {"model", c.model},
              {"adapter", c.adapter},
              {"decoding_json", c.decoding_json},
              {"timeout_ms", c.timeout_ms},
              {"max_concurrency", c.max_concurrency},
              {"requests_per_s", c.requests_per_s},
              {"max_attempts", c.max_attempts},
              {"delays", c.delays},
              {"d_model", c.d_model},
              {"num_heads", c.num_heads},
              {"encoder_layers", c.encoder_layers},
              {"decoder_layers", c.decoder_layers},
              {"d_ff", c.d_ff},
              {"head_hidden", c.head_hidden},
              {"num_modes", c.num_modes},
              {"gain_hidden", c.gain_hidden},
              {"map_points", c.map_points},
              {"position_scale", c.position_scale},
              {"use_semantics", c.use_semantics},
              {"gain", c.gain},
              {"groups", c.groups},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"grad_clip_norm", c.grad_clip_norm},
              {"checkpoint_every", c.checkpoint_every},
              {"train_seed", c.train_seed},
              {"label", c.label},
              {"k", c.k},
              {"delay", c.delay},
              {"grid", c.grid},
              {"inputs", c.inputs},
              {"baseline", c.baseline},
              {"hardest_fraction", c.hardest_fraction},
              {"output", c.output}};
}

// Fills derived paths.
void ResolvePaths(RunConfig& c) {
  const fs::path w = c.work_dir;
  auto fill = [&](std::string& field, const char* name) {
    if (field.empty()) field = (w / name).string();
  };
  fill(c.train_scenarios, "train_scenarios.jsonl");
  fill(c.eval_scenarios, "eval_scenarios.jsonl");
  fill(c.cache, "cache.jsonl");
  fill(c.features, "features.jsonl");
  fill(c.parse_report, "parse_report.csv");
  fill(c.checkpoint_dir, "checkpoints");
  fill(c.reports_dir, "reports");
}

// Shared state of one invocation.
struct Run {
  RunConfig config;
  std::string command;
  std::string config_hash;
  std::ostream* out = nullptr;
};

void EnsureParent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void WriteText(const fs::path& path, const std::string& text) {
  EnsureParent(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
}

std::string ReadText(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Snapshot of the resolved configuration next to the outputs in `dir`.
void WriteRunConfig(const Run& run, const fs::path& dir) {
  Json j{{"command", run.command},
         {"config_hash", run.config_hash},
         {"config", Resolved(run.config)}};
  WriteText(dir / ("run_config." + run.command + ".json"), j.dump(2) + "\n");
}

// Provenance for formats without a header slot (JSON lines, CSV).
void WriteSidecar(const Run& run, const fs::path& artifact, const Json& extra = Json::object()) {
  Json j{{"artifact", artifact.filename().string()},
         {"producer", run.command},
         {"config_hash", run.config_hash}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  WriteText(artifact.string() + ".meta.json", j.dump(2) + "\n");
}

// Missing upstream artifact: name it and the subcommand that produces it.
void RequireArtifact(const fs::path& path, const char* what, const char* producer) {
  if (!fs::exists(path)) {
    throw DataError("missing " + std::string(what) + " '" + path.string() + "'; run `semcast " +
                    producer + "` first");
  }
}

TimingProfile Timing(const RunConfig& c) {
  TimingProfile t = c.profile == "nusc" ? TimingProfile::NuscStyle() : TimingProfile::WomdStyle();
  if (c.history_len > 0) t.history_len = c.history_len;
  if (c.future_len > 0) t.future_len = c.future_len;
  return t;
}

MetricsConfig Metrics(const RunConfig& c, double step_hz) {
  MetricsConfig m = c.profile == "nusc" ? MetricsConfig::Nusc(c.k) : MetricsConfig::Womd();
  m.k = c.k;
  m.step_hz = step_hz;
  return m;
}

QuestionGroup GroupFromName(const std::string& name) {
  if (name == "signal") return QuestionGroup::kSignal;
  if (name == "intent") return QuestionGroup::kIntent;
  if (name == "type") return QuestionGroup::kType;
  if (name == "scene") return QuestionGroup::kScene;
  throw ConfigError("unknown question group '" + name + "'");
}

std::vector<QuestionGroup> Groups(const RunConfig& c) {
  std::vector<QuestionGroup> g;
  for (const std::string& n : c.groups) g.push_back(GroupFromName(n));
  return g;
}

PredictorConfig ModelConfig(const RunConfig& c) {
  const TimingProfile t = Timing(c);
  PredictorConfig p;
  p.d_model = c.d_model;
  p.num_heads = c.num_heads;
  p.encoder_layers = c.encoder_layers;
  p.decoder_layers = c.decoder_layers;
  p.d_ff = c.d_ff;
  p.head_hidden = c.head_hidden;
  p.num_modes = c.num_modes;
  p.gain_hidden = c.gain_hidden;
  p.map_points = c.map_points;
  p.history_len = t.history_len;
  p.future_len = t.future_len;
  p.position_scale = c.position_scale;
  p.use_semantics = c.use_semantics;
  p.gain_mode = GainModeFromString(c.gain);
  p.Validate();
  return p;
}

TrainConfig TrainingConfig(const Run& run, const fs::path& checkpoint_dir) {
  const RunConfig& c = run.config;
  TrainConfig t;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.learning_rate = c.learning_rate;
  t.grad_clip_norm = c.grad_clip_norm;
  t.checkpoint_every = c.checkpoint_every;
  t.checkpoint_dir = checkpoint_dir;
  t.config_hash = run.config_hash;
  t.Validate();
  return t;
}

std::string DefaultLabel(const RunConfig& c) {
  if (!c.label.empty()) return c.label;
  return c.use_semantics ? "pnf" : "baseline";
}

// File-name-safe form of a label.
std::string Slug(const std::string& label) {
  std::string s;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') {
      s.push_back(ch);
    } else if (ch == '=' || ch == ',' || ch == '_') {
      s.push_back('_');
    }
  }
  return s.empty() ? "row" : s;
}

std::vector<Scenario> LoadSplit(const RunConfig& c, bool train) {
  const fs::path p = train ? c.train_scenarios : c.eval_scenarios;
  RequireArtifact(p, train ? "training scenarios" : "evaluation scenarios", "gen");
  return LoadScenarios(p);
}

SemanticIndex LoadIndex(const RunConfig& c) {
  RequireArtifact(c.features, "semantic features", "parse");
  return IndexFeatures(LoadFeatures(c.features));
}

std::unique_ptr<Backend> MakeBackend(const RunConfig& c) {
  if (c.backend == "mock") {
    FaultProfile f;
    f.p_wrong_answer = c.p_wrong_answer;
    f.p_malformed_table = c.p_malformed_table;
    f.p_missing_row = c.p_missing_row;
    f.p_out_of_vocab = c.p_out_of_vocab;
    f.seed = c.fault_seed;
    f.Validate();
    return std::make_unique<MockBackend>(f);
  }
  if (c.backend == "http") {
    HttpConfig h;
    h.endpoint = c.endpoint;
    h.api_key_env = c.api_key_env;
    h.model = c.model;
    h.adapter = HttpAdapterFromString(c.adapter);
    h.timeout_ms = c.timeout_ms;
    h.decoding_json = c.decoding_json;
    return std::make_unique<HttpBackend>(h);
  }
  return std::make_unique<CacheOnlyBackend>();
}

ClientConfig ClientSettings(const RunConfig& c) {
  ClientConfig cc;
  cc.max_concurrency = c.max_concurrency;
  cc.requests_per_s = c.requests_per_s;
  cc.max_attempts = c.max_attempts;
  return cc;
}

std::vector<MllmExchange> QueryJobs(MllmClient& client, const std::vector<PromptJob>& jobs) {
  std::vector<QueryItem> items;
  items.reserve(jobs.size());
  for (const PromptJob& j : jobs) items.push_back({&j.payload, j.scenario});
  return client.QueryMany(items);
}

// --- subcommands -----------------------------------------------------------

void CmdGen(Run& run) {
  const RunConfig& c = run.config;
  GeneratorConfig g;
  g.timing = Timing(c);
  g.family_mix.clear();
  for (const std::string& f : c.families) g.family_mix[ScenarioFamilyFromString(f)] = 1.0;
  g.context_agents = c.context_agents;
  g.position_noise_m = c.position_noise_m;
  g.occluded_fraction = c.occluded_fraction;
  g.adverse_weather_fraction = c.adverse_weather_fraction;
  g.reveal_window_s = c.reveal_window_s;
  const struct {
    const std::string& path;
    int count;
    const char* prefix;
    uint64_t salt;
  } splits[] = {{c.train_scenarios, c.num_train, "train", 1},
                {c.eval_scenarios, c.num_eval, "eval", 2}};
  for (const auto& s : splits) {
    g.num_scenarios = s.count;
    g.id_prefix = s.prefix;
    const std::vector<Scenario> scenarios = GenerateSynthetic(g, MixSeed(c.gen_seed, s.salt));
    EnsureParent(s.path);
    SaveScenarios(scenarios, s.path);
    WriteSidecar(run, s.path, {{"split_fingerprint", SplitFingerprint(scenarios)},
                               {"count", scenarios.size()}});
    *run.out << "wrote " << scenarios.size() << " scenarios to " << s.path << "\n";
  }
  WriteRunConfig(run, fs::path(c.train_scenarios).parent_path());
}

void CmdQuery(Run& run) {
  const RunConfig& c = run.config;
  std::vector<Scenario> scenarios = LoadSplit(c, true);
  std::vector<Scenario> eval = LoadSplit(c, false);
  scenarios.insert(scenarios.end(), eval.begin(), eval.end());
  const std::vector<PromptJob> jobs = BuildPromptJobs(scenarios, c.delays);
  EnsureParent(c.cache);
  MllmClient client(ClientSettings(c), MakeBackend(c), std::make_unique<ResponseCache>(c.cache));
  const std::vector<MllmExchange> exchanges = QueryJobs(client, jobs);
  std::map<std::string, int> by_source;
  for (const MllmExchange& e : exchanges) ++by_source[std::string(ToString(e.source))];
  // Hit/miss counts vary between runs, so they go to stdout only.
  WriteSidecar(run, c.cache, {{"prompts", jobs.size()}});
  WriteRunConfig(run, fs::path(c.cache).parent_path());
  *run.out << "queried " << jobs.size() << " prompts into " << c.cache << " (";
  bool first = true;
  for (const auto& [k, v] : by_source) {
    *run.out << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  *run.out << ")\n";
}

void CmdParse(Run& run) {
  const RunConfig& c = run.config;
  std::vector<Scenario> scenarios = LoadSplit(c, true);
  std::vector<Scenario> eval = LoadSplit(c, false);
  scenarios.insert(scenarios.end(), eval.begin(), eval.end());
  RequireArtifact(c.cache, "response cache", "query");
  const std::vector<PromptJob> jobs = BuildPromptJobs(scenarios, c.delays);
  MllmClient client(ClientSettings(c), std::make_unique<CacheOnlyBackend>(),
                    std::make_unique<ResponseCache>(c.cache));
  std::vector<MllmExchange> exchanges;
  try {
    exchanges = QueryJobs(client, jobs);
  } catch (const TransportError& e) {
    throw DataError(std::string("response cache is incomplete (") + e.what() +
                    "); run `semcast query` first");
  }
  const Extraction ex = ParseExchanges(jobs, exchanges);
  EnsureParent(c.features);
  SaveFeatures(ex.features, c.features);
  EnsureParent(c.parse_report);
  SaveParseReportCsv(ex.reports, c.parse_report);
  std::map<std::string, int> by_status;
  for (const ParseReportRow& r : ex.reports) ++by_status[std::string(ToString(r.status))];
  Json status = Json::object();
  for (const auto& [k, v] : by_status) status[k] = v;
  WriteSidecar(run, c.features, {{"records", ex.features.size()}});
  WriteSidecar(run, c.parse_report, {{"responses", ex.reports.size()}, {"status", status}});
  WriteRunConfig(run, fs::path(c.features).parent_path());
  *run.out << "parsed " << ex.reports.size() << " responses into " << ex.features.size()
           << " feature records\n";
}

struct TrainedModel {
  Predictor model;
  TrainResult result;
};

TrainedModel TrainOne(const Run& run, const PredictorConfig& pc,
                      const std::vector<QuestionGroup>* groups, const fs::path& checkpoint_dir) {
  const RunConfig& c = run.config;
  const std::vector<Scenario> train = LoadSplit(c, true);
  SemanticIndex index;
  if (pc.use_semantics) index = LoadIndex(c);
  SampleOptions opt;
  if (groups != nullptr) {
    opt.mask_groups = true;
    opt.groups = *groups;
  }
  const std::vector<PreparedSample> samples =
      PrepareSamples(train, pc.use_semantics ? &index : nullptr, opt, pc);
  if (samples.empty()) throw DataError("no trainable targets in the training scenarios");
  Predictor model(pc, c.train_seed);
  TrainResult r = Train(model, samples, TrainingConfig(run, checkpoint_dir), c.train_seed);
  return {std::move(model), std::move(r)};
}

MetricsReport EvaluateModel(const Run& run, const Predictor& model, const std::string& label,
                            double delay_s, const std::vector<QuestionGroup>* groups) {
  const RunConfig& c = run.config;
  const std::vector<Scenario> eval = LoadSplit(c, false);
  SemanticIndex index;
  const bool sem = model.config().use_semantics;
  if (sem) index = LoadIndex(c);
  SampleOptions opt;
  opt.delay_s = delay_s;
  if (groups != nullptr) {
    opt.mask_groups = true;
    opt.groups = *groups;
  }
  const std::vector<PreparedSample> samples =
      PrepareSamples(eval, sem ? &index : nullptr, opt, model.config());
  const double hz = eval.empty() ? 10.0 : eval.front().step_hz;
  MetricsReport report =
      Evaluate(PredictAll(model, samples), GroundTruths(eval, samples), Metrics(c, hz));
  report.label = label;
  report.config_hash = run.config_hash;
  report.split_fingerprint = SplitFingerprint(eval);
  return report;
}

void SaveReport(const Run& run, const MetricsReport& report, const fs::path& json_path) {
  WriteText(json_path, ReportToJson(report) + "\n");
  fs::path csv = json_path;
  csv.replace_extension(".csv");
  SaveReportCsv({report}, csv);
  WriteSidecar(run, csv, {{"split_fingerprint", report.split_fingerprint}});
}

void CmdTrain(Run& run) {
  const RunConfig& c = run.config;
  const std::string label = DefaultLabel(c);
  const fs::path dir = c.checkpoint_dir;
  fs::create_directories(dir);
  const PredictorConfig pc = ModelConfig(c);
  const std::vector<QuestionGroup> groups = Groups(c);
  TrainedModel t = TrainOne(run, pc, &groups, dir / label);
  t.model.SaveCheckpoint(dir / (label + ".json"), run.config_hash);
  const fs::path log = dir / (label + "_log.csv");
  SaveTrainLogCsv(t.result.log, log);
  WriteSidecar(run, log);
  WriteRunConfig(run, dir);
  *run.out << "trained '" << label << "' for " << t.result.steps << " steps; final loss "
           << (t.result.log.empty() ? 0.0 : t.result.log.back().loss) << "\n";
}

void CmdEval(Run& run) {
  const RunConfig& c = run.config;
  const std::string label = DefaultLabel(c);
  const fs::path ckpt = fs::path(c.checkpoint_dir) / (label + ".json");
  RequireArtifact(ckpt, "checkpoint", "train");
  const Predictor model = Predictor::LoadCheckpoint(ckpt);
  std::string report_label = label;
  if (c.delay > 0.0) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "@delay=%gs", c.delay);
    report_label += buf;
  }
  const std::vector<QuestionGroup> groups = Groups(c);
  const MetricsReport report = EvaluateModel(run, model, report_label, c.delay, &groups);
  fs::create_directories(c.reports_dir);
  SaveReport(run, report, fs::path(c.reports_dir) / (Slug(report_label) + ".json"));
  WriteRunConfig(run, c.reports_dir);
  *run.out << ReportMarkdown({report});
}

std::vector<AblationRow> Grid(const RunConfig& c, const std::string& name) {
  if (name == "reasoning") return ReasoningTypeGrid();
  if (name == "gain") return GainGrid();
  if (name == "delay") return DelayGrid(c.delays);
  std::vector<AblationRow> all;
  for (const char* g : {"reasoning", "gain", "delay"}) {
    for (AblationRow& r : Grid(c, g)) all.push_back(std::move(r));
  }
  return all;
}

void CmdAblate(Run& run) {
  const RunConfig& c = run.config;
  const std::vector<AblationRow> rows = Grid(c, c.grid);
  const fs::path dir = fs::path(c.reports_dir) / ("ablate_" + c.grid);
  fs::create_directories(dir);
  // Rows that differ only in evaluation delay share one trained model.
  std::map<std::string, std::unique_ptr<Predictor>> trained;
  std::vector<MetricsReport> reports;
  int index = 0;
  for (const AblationRow& row : rows) {
    PredictorConfig pc = ModelConfig(c);
    pc.use_semantics = row.use_semantics;
    pc.gain_mode = row.gain_mode;
    std::string key = std::string(ToString(row.gain_mode)) + (row.use_semantics ? "+" : "-");
    for (QuestionGroup g : row.groups) key += std::to_string(static_cast<int>(g));
    const std::vector<QuestionGroup>* groups = row.use_semantics ? &row.groups : nullptr;
    auto it = trained.find(key);
    if (it == trained.end()) {
      TrainedModel t = TrainOne(run, pc, groups, {});
      it = trained.emplace(key, std::make_unique<Predictor>(std::move(t.model))).first;
      *run.out << "trained row '" << row.label << "' (" << t.result.steps << " steps)\n";
    }
    const MetricsReport report = EvaluateModel(run, *it->second, row.label, row.delay_s, groups);
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%02d_", index++);
    SaveReport(run, report, dir / (prefix + Slug(row.label) + ".json"));
    reports.push_back(report);
  }
  WriteText(dir / "summary.md", ReportMarkdown(reports));
  SaveReportCsv(reports, dir / "summary.csv");
  WriteSidecar(run, dir / "summary.md");
  WriteSidecar(run, dir / "summary.csv");
  WriteRunConfig(run, dir);
  *run.out << ReportMarkdown(reports);
}

std::vector<fs::path> ReportFiles(const RunConfig& c) {
  std::vector<std::string> inputs = c.inputs;
  if (inputs.empty()) inputs.push_back(c.reports_dir);
  std::vector<fs::path> files;
  for (const std::string& in : inputs) {
    RequireArtifact(in, "report input", "eval` or `semcast ablate");
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && e.path().extension() == ".json" &&
            name.rfind("run_config.", 0) != 0 && name.find(".meta.") == std::string::npos) {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  if (files.empty()) throw DataError("no report files found; run `semcast eval` first");
  return files;
}

// Hardest-split table: minADE restricted to the scenarios where the baseline
// is worst, with relative change against the baseline.
std::string HardestTable(const std::vector<MetricsReport>& reports, const std::string& baseline,
                         double fraction) {
  const auto base = std::find_if(reports.begin(), reports.end(),
                                 [&](const MetricsReport& r) { return r.label == baseline; });
  if (base == reports.end()) throw ConfigError("baseline label '" + baseline + "' not found");
  const std::map<std::string, double> base_per = PerScenarioMinAde(*base);
  const std::set<std::string> hard = HardestSplit(base_per, fraction);
  auto subset_mean = [&](const MetricsReport& r) {
    const std::map<std::string, double> per = PerScenarioMinAde(r);
    double sum = 0.0;
    int n = 0;
    for (const std::string& id : hard) {
      if (const auto it = per.find(id); it != per.end()) {
        sum += it->second;
        ++n;
      }
    }
    return n > 0 ? sum / n : 0.0;
  };
  const double base_hard = subset_mean(*base);
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "\nHardest %.0f%% split (%zu scenarios)\n\n", fraction * 100.0,
                hard.size());
  os << buf;
  os << "| Method | minADE (hardest) | Delta vs baseline | minADE (all) | Delta vs baseline |\n";
  os << "|---|---|---|---|---|\n";
  for (const MetricsReport& r : reports) {
    const double h = subset_mean(r);
    std::snprintf(buf, sizeof(buf), "| %s | %.4f | %+.2f%% | %.4f | %+.2f%% |\n", r.label.c_str(),
                  h, base_hard > 0 ? 100.0 * (h - base_hard) / base_hard : 0.0, r.min_ade.value,
                  100.0 * (r.min_ade.value - base->min_ade.value) / base->min_ade.value);
    os << buf;
  }
  return os.str();
}

void CmdReport(Run& run) {
  const RunConfig& c = run.config;
  std::vector<MetricsReport> reports;
  for (const fs::path& f : ReportFiles(c)) {
    try {
      reports.push_back(ReportFromJson(ReadText(f)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("'" + f.string() + "' is not a metrics report: " + e.what());
    }
  }
  for (const MetricsReport& r : reports) {
    if (r.split_fingerprint != reports.front().split_fingerprint) {
      throw DataError("reports '" + reports.front().label + "' and '" + r.label +
                      "' were computed on different evaluation splits (" +
                      reports.front().split_fingerprint + " vs " + r.split_fingerprint + ")");
    }
  }
  std::string md = ReportMarkdown(reports);
  if (!c.baseline.empty()) md += HardestTable(reports, c.baseline, c.hardest_fraction);
  const fs::path prefix = c.output.empty() ? fs::path(c.reports_dir) / "report" : fs::path(c.output);
  EnsureParent(prefix);
  const fs::path md_path = prefix.string() + ".md";
  const fs::path csv_path = prefix.string() + ".csv";
  WriteText(md_path, md);
  SaveReportCsv(reports, csv_path);
  WriteSidecar(run, md_path, {{"split_fingerprint", reports.front().split_fingerprint}});
  WriteSidecar(run, csv_path, {{"split_fingerprint", reports.front().split_fingerprint}});
  WriteRunConfig(run, prefix.has_parent_path() ? prefix.parent_path() : fs::path("."));
  *run.out << md;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"semcast: semantic features for trajectory forecasting"};
  app.set_config("--config", "", "TOML configuration file");
  app.require_subcommand(1, 1);
  RunConfig config;
  AddOptions(app, config);
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(Run&);
  };
  const Command commands[] = {
      {"gen", "Generate training and evaluation scenarios", CmdGen},
      {"query", "Query the model backend for every prompt into the cache", CmdQuery},
      {"parse", "Parse cached responses into semantic features", CmdParse},
      {"train", "Train a predictor", CmdTrain},
      {"eval", "Evaluate a trained predictor", CmdEval},
      {"ablate", "Train and evaluate an ablation grid", CmdAblate},
      {"report", "Tabulate metrics reports", CmdReport},
  };
  for (const Command& cmd : commands) app.add_subcommand(cmd.name, cmd.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Run run;
  run.config = config;
  ResolvePaths(run.config);
  run.out = &out;
  run.config_hash = ShortFingerprint(Resolved(run.config).dump());
  try {
    for (const Command& cmd : commands) {
      if (app.got_subcommand(cmd.name)) {
        run.command = cmd.name;
        cmd.fn(run);
      }
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace semcast::cli
