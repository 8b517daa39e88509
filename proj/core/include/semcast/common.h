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

#ifndef SEMCAST_COMMON_H_
#define SEMCAST_COMMON_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semcast {

// Error taxonomy. The CLI maps these onto exit codes (usage=1, data=2,
// transport=3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed records; carries the 1-based line and offending field.
class ParseError : public DataError {
 public:
  ParseError(int line, std::string field, const std::string& what);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// First 16 hex characters of Sha256Hex; used for fingerprints in file headers.
std::string ShortFingerprint(std::string_view data);

// SplitMix64 finalizer. Used to derive independent per-item seeds from a batch
// seed so that generation order does not matter.
uint64_t MixSeed(uint64_t seed, uint64_t salt);

// FNV-1a over bytes, folded into a seed.
uint64_t HashToSeed(std::string_view data, uint64_t seed = 0);

// Portable random draws on top of mt19937_64. The engine output is fixed by
// the standard; the std:: distributions are not, so they are avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Inclusive on both ends.
  int UniformInt(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(engine_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }
  uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::string ToUpper(std::string_view s);
std::string Trim(std::string_view s);

}  // namespace semcast

#endif  // SEMCAST_COMMON_H_
