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

// Layers built on the autograd graph. Each layer registers its tensors in a
// ParamSet under a name prefix and keeps pointers to them.

#ifndef SEMCAST_NN_H_
#define SEMCAST_NN_H_

#include <string>

#include "semcast/autograd.h"
#include "semcast/common.h"

namespace semcast {

class Linear {
 public:
  Linear() = default;
  Linear(ParamSet& ps, const std::string& name, int in, int out, bool bias, Rng& rng);
  Var operator()(Graph& g, Var x) const;

  Parameter* weight() const { return w_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

// Linear -> ReLU -> Linear.
class Mlp2 {
 public:
  Mlp2() = default;
  Mlp2(ParamSet& ps, const std::string& name, int in, int hidden, int out, bool bias,
       Rng& rng);
  Var operator()(Graph& g, Var x) const;

 private:
  Linear l1_, l2_;
};

class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParamSet& ps, const std::string& name, int d);
  Var operator()(Graph& g, Var x) const;

 private:
  Parameter* gamma_ = nullptr;
  Parameter* beta_ = nullptr;
};

// Scaled dot-product attention with `heads` heads and no positional terms.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamSet& ps, const std::string& name, int d, int heads, Rng& rng);
  Var operator()(Graph& g, Var queries, Var keys_values) const;

 private:
  Linear q_, k_, v_, o_;
  int d_ = 0;
  int heads_ = 1;
};

// Pre-LN transformer block over one token set.
class SelfAttentionBlock {
 public:
  SelfAttentionBlock() = default;
  SelfAttentionBlock(ParamSet& ps, const std::string& name, int d, int heads, int d_ff,
                     Rng& rng);
  Var operator()(Graph& g, Var x) const;

 private:
  LayerNormLayer ln1_, ln2_;
  MultiHeadAttention attn_;
  Mlp2 ffn_;
};

// Pre-LN decoder block: self-attention over queries, cross-attention into the
// encoded tokens, feed-forward.
class CrossAttentionBlock {
 public:
  CrossAttentionBlock() = default;
  CrossAttentionBlock(ParamSet& ps, const std::string& name, int d, int heads, int d_ff,
                      Rng& rng);
  Var operator()(Graph& g, Var queries, Var memory) const;

 private:
  LayerNormLayer ln1_, ln2_, ln3_;
  MultiHeadAttention self_, cross_;
  Mlp2 ffn_;
};

}  // namespace semcast

#endif  // SEMCAST_NN_H_
