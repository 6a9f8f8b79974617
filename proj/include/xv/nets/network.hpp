// Copyright 2026 The crossview Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xv/nets/autodiff.hpp"

namespace xv::nets {

// Declarative generator description. The channel schedule doubles from
// base_width and caps at 8x base_width; encoder depth is log2(resolution)
// minus block_trim (the trim drops the last encoder and first decoder
// blocks, bottlenecking above 1x1).
struct GeneratorSpec {
  int in_channels = 3;
  int out_heads = 1;
  int out_channels_per_head = 3;
  int resolution = 256;
  int base_width = 64;
  int block_trim = 0;  // 0 or 2
  double dropout_rate = 0.5;
  bool skip_connections = false;  // off by default; ablation flag

  void validate() const;
  int encoder_depth() const;
  std::vector<int> encoder_widths() const;
  // Output widths of the non-final decoder blocks (mirror of the encoder).
  std::vector<int> decoder_widths() const;
  int shared_decoder_blocks() const { return encoder_depth() - 2; }
  std::string canonical() const;
};

struct DiscriminatorSpec {
  int in_channels = 6;  // conditioning + candidate channels
  int resolution = 256;
  int depth = 3;  // stride-2 blocks
  int base_width = 64;

  void validate() const;
  std::string canonical() const;
};

// A trainable network: named parameter leaves plus batch-norm running stats,
// a forward contract, and a serializable weight container.
class Network {
 public:
  struct Param {
    std::string name;
    ad::Var var;
  };
  struct NamedState {
    std::string name;
    Tensor* tensor;  // points into the network; includes running stats
  };

  virtual ~Network() = default;

  const std::vector<Param>& params() const { return params_; }
  std::vector<ad::Var> param_vars() const;
  int64_t param_count() const;  // trainable parameters only

  // Heads in declaration order (generators may emit 2); discriminators emit
  // a single patch-score grid in (0,1). Training mode draws dropout from
  // dropout_seed; inference is deterministic and uses running BN stats.
  virtual std::vector<ad::Var> forward(const ad::Var& input, bool training,
                                       uint64_t dropout_seed) = 0;

  virtual std::string kind() const = 0;
  std::string fingerprint() const;
  virtual std::string canonical_spec() const = 0;

  std::vector<NamedState> state_tensors();
  void save_weights(const std::filesystem::path& path);
  // Verifies the stored fingerprint against this network's spec.
  void load_weights(const std::filesystem::path& path);

 protected:
  ad::Var add_param(const std::string& name, Tensor t);
  void add_state(const std::string& name, Tensor* t);

  std::vector<Param> params_;
  std::vector<NamedState> extra_state_;
};

struct BnState {
  ad::Var gamma, beta;
  Tensor run_mean, run_var;
};

class Generator : public Network {
 public:
  Generator(const GeneratorSpec& spec, uint64_t init_seed);

  std::vector<ad::Var> forward(const ad::Var& input, bool training,
                               uint64_t dropout_seed) override;
  std::string kind() const override { return "generator"; }
  std::string canonical_spec() const override { return spec_.canonical(); }
  const GeneratorSpec& spec() const { return spec_; }

 private:
  struct EncBlock {
    ad::Var w, b;
    std::optional<BnState> bn;
  };
  struct DecBlock {
    ad::Var w, b;
    std::optional<BnState> bn;
    bool dropout = false;
    bool final_block = false;
  };

  DecBlock make_dec_block(const std::string& name, int c_in, int c_out,
                          bool bn, bool dropout, bool final_block, Rng& rng);
  ad::Var run_dec_block(DecBlock& blk, const ad::Var& x, bool training,
                        Rng& rng);

  GeneratorSpec spec_;
  std::vector<EncBlock> enc_;
  std::vector<DecBlock> shared_dec_;
  std::vector<std::vector<DecBlock>> head_tails_;  // one tail per head
};

class Discriminator : public Network {
 public:
  Discriminator(const DiscriminatorSpec& spec, uint64_t init_seed);

  std::vector<ad::Var> forward(const ad::Var& input, bool training,
                               uint64_t dropout_seed) override;
  std::string kind() const override { return "discriminator"; }
  std::string canonical_spec() const override { return spec_.canonical(); }
  const DiscriminatorSpec& spec() const { return spec_; }

 private:
  struct Block {
    ad::Var w, b;
    std::optional<BnState> bn;
    int stride = 2;
  };
  std::vector<Block> blocks_;
  ad::Var final_w_, final_b_;
  DiscriminatorSpec spec_;
};

// Builders. build_generator rejects out_heads != 1; the fork builder demands
// out_heads == 2 and shares the encoder plus the first (depth-2) decoder
// blocks between heads.
std::unique_ptr<Generator> build_generator(const GeneratorSpec& spec,
                                           uint64_t init_seed = 0);
std::unique_ptr<Generator> build_fork_generator(const GeneratorSpec& spec,
                                                uint64_t init_seed = 0);
std::unique_ptr<Discriminator> build_discriminator(const DiscriminatorSpec& spec,
                                                   uint64_t init_seed = 0);

uint64_t fnv1a64(const std::string& s);

}  // namespace xv::nets
