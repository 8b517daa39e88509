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

#include "semcast/nn.h"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace semcast {

Linear::Linear(ParamSet& ps, const std::string& name, int in, int out, bool bias, Rng& rng)
    : w_(&ps.AddGlorot(name + "/w", in, out, rng)),
      b_(bias ? &ps.AddZeros(name + "/b", 1, out) : nullptr) {}

Var Linear::operator()(Graph& g, Var x) const {
  Var y = MatMul(g, x, g.Param(*w_));
  return b_ != nullptr ? AddRowBroadcast(g, y, g.Param(*b_)) : y;
}

Mlp2::Mlp2(ParamSet& ps, const std::string& name, int in, int hidden, int out, bool bias,
           Rng& rng)
    : l1_(ps, name + "/l1", in, hidden, bias, rng), l2_(ps, name + "/l2", hidden, out, bias, rng) {}

Var Mlp2::operator()(Graph& g, Var x) const { return l2_(g, Relu(g, l1_(g, x))); }

LayerNormLayer::LayerNormLayer(ParamSet& ps, const std::string& name, int d)
    : gamma_(&ps.AddConstant(name + "/gamma", 1, d, 1.0)),
      beta_(&ps.AddZeros(name + "/beta", 1, d)) {}

Var LayerNormLayer::operator()(Graph& g, Var x) const {
  return LayerNorm(g, x, g.Param(*gamma_), g.Param(*beta_));
}

MultiHeadAttention::MultiHeadAttention(ParamSet& ps, const std::string& name, int d,
                                       int heads, Rng& rng)
    : q_(ps, name + "/q", d, d, true, rng),
      k_(ps, name + "/k", d, d, true, rng),
      v_(ps, name + "/v", d, d, true, rng),
      o_(ps, name + "/o", d, d, true, rng),
      d_(d),
      heads_(heads) {
  if (heads <= 0 || d % heads != 0) {
    throw std::invalid_argument("model width must be divisible by the head count");
  }
}

Var MultiHeadAttention::operator()(Graph& g, Var queries, Var keys_values) const {
  const Var q = q_(g, queries);
  const Var k = k_(g, keys_values);
  const Var v = v_(g, keys_values);
  const int dh = d_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  outs.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    const Var qh = SliceCols(g, q, h * dh, dh);
    const Var kh = SliceCols(g, k, h * dh, dh);
    const Var vh = SliceCols(g, v, h * dh, dh);
    const Var scores = Scale(g, MatMul(g, qh, Transpose(g, kh)), scale);
    outs.push_back(MatMul(g, SoftmaxRows(g, scores), vh));
  }
  return o_(g, heads_ == 1 ? outs[0] : ConcatCols(g, outs));
}

SelfAttentionBlock::SelfAttentionBlock(ParamSet& ps, const std::string& name, int d,
                                       int heads, int d_ff, Rng& rng)
    : ln1_(ps, name + "/ln1", d),
      ln2_(ps, name + "/ln2", d),
      attn_(ps, name + "/attn", d, heads, rng),
      ffn_(ps, name + "/ffn", d, d_ff, d, true, rng) {}

Var SelfAttentionBlock::operator()(Graph& g, Var x) const {
  const Var h = ln1_(g, x);
  x = Add(g, x, attn_(g, h, h));
  return Add(g, x, ffn_(g, ln2_(g, x)));
}

CrossAttentionBlock::CrossAttentionBlock(ParamSet& ps, const std::string& name, int d,
                                         int heads, int d_ff, Rng& rng)
    : ln1_(ps, name + "/ln1", d),
      ln2_(ps, name + "/ln2", d),
      ln3_(ps, name + "/ln3", d),
      self_(ps, name + "/self", d, heads, rng),
      cross_(ps, name + "/cross", d, heads, rng),
      ffn_(ps, name + "/ffn", d, d_ff, d, true, rng) {}

Var CrossAttentionBlock::operator()(Graph& g, Var queries, Var memory) const {
  Var h = ln1_(g, queries);
  queries = Add(g, queries, self_(g, h, h));
  queries = Add(g, queries, cross_(g, ln2_(g, queries), memory));
  return Add(g, queries, ffn_(g, ln3_(g, queries)));
}

}  // namespace semcast
