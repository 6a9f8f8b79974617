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

#include "xv/nets/network.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace xv::nets {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int ilog2(int v) {
  int r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

Tensor gaussian_tensor(std::vector<int> shape, double mean, double sd, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(rng.gaussian(mean, sd));
  }
  return t;
}

}  // namespace

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------- specs ----

void GeneratorSpec::validate() const {
  require(is_pow2(resolution) && resolution >= 64, "config",
          "generator resolution must be a power of two >= 64");
  require(out_heads == 1 || out_heads == 2, "config", "out_heads must be 1 or 2");
  require(in_channels > 0 && out_channels_per_head > 0, "config",
          "channel counts must be positive");
  require(base_width > 0, "config", "base_width must be positive");
  require(block_trim == 0 || block_trim == 2, "config", "block_trim must be 0 or 2");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "config",
          "dropout_rate must lie in [0,1)");
  require(encoder_depth() >= 3, "config",
          "generator too shallow: log2(resolution) - block_trim must be >= 3");
}

int GeneratorSpec::encoder_depth() const { return ilog2(resolution) - block_trim; }

std::vector<int> GeneratorSpec::encoder_widths() const {
  std::vector<int> w;
  const int n = encoder_depth();
  for (int i = 0; i < n; ++i) {
    w.push_back(base_width * std::min(1 << i, 8));
  }
  return w;
}

std::vector<int> GeneratorSpec::decoder_widths() const {
  const std::vector<int> e = encoder_widths();
  std::vector<int> d;
  for (size_t i = e.size() - 1; i-- > 0;) d.push_back(e[i]);
  return d;  // n-1 entries; the final block emits out_channels_per_head
}

std::string GeneratorSpec::canonical() const {
  std::ostringstream os;
  os << "gen:in=" << in_channels << ",heads=" << out_heads
     << ",out=" << out_channels_per_head << ",res=" << resolution
     << ",base=" << base_width << ",trim=" << block_trim
     << ",drop=" << dropout_rate << ",skip=" << (skip_connections ? 1 : 0);
  return os.str();
}

void DiscriminatorSpec::validate() const {
  require(in_channels > 0, "config", "discriminator in_channels must be positive");
  require(depth >= 3, "config", "discriminator depth must be >= 3");
  require(is_pow2(resolution) && resolution >= 64, "config",
          "discriminator resolution must be a power of two >= 64");
  require(resolution >> depth >= 4, "config",
          "discriminator too deep for this resolution");
  require(base_width > 0, "config", "base_width must be positive");
}

std::string DiscriminatorSpec::canonical() const {
  std::ostringstream os;
  os << "disc:in=" << in_channels << ",res=" << resolution << ",depth=" << depth
     << ",base=" << base_width;
  return os.str();
}

// -------------------------------------------------------------- network ----

std::vector<ad::Var> Network::param_vars() const {
  std::vector<ad::Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.var);
  return out;
}

int64_t Network::param_count() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.var->value.size();
  return n;
}

std::string Network::fingerprint() const {
  std::ostringstream os;
  os << std::hex << fnv1a64(canonical_spec());
  return os.str();
}

ad::Var Network::add_param(const std::string& name, Tensor t) {
  ad::Var v = ad::leaf(std::move(t), true);
  params_.push_back({name, v});
  return v;
}

void Network::add_state(const std::string& name, Tensor* t) {
  extra_state_.push_back({name, t});
}

std::vector<Network::NamedState> Network::state_tensors() {
  std::vector<NamedState> out;
  for (auto& p : params_) out.push_back({p.name, &p.var->value});
  for (auto& s : extra_state_) out.push_back(s);
  return out;
}

void Network::save_weights(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "io", "cannot write weights: " + path.string());
  auto tensors = state_tensors();
  out << "XVNET1\n" << kind() << "\n" << fingerprint() << "\n" << tensors.size() << "\n";
  for (auto& nt : tensors) {
    out << nt.name << " " << nt.tensor->rank();
    for (int i = 0; i < nt.tensor->rank(); ++i) out << " " << nt.tensor->dim(i);
    out << "\n";
    out.write(reinterpret_cast<const char*>(nt.tensor->data()),
              static_cast<std::streamsize>(nt.tensor->size() * sizeof(float)));
    out << "\n";
  }
  require(out.good(), "io", "short write: " + path.string());
}

void Network::load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io", "cannot open weights: " + path.string());
  std::string magic, kind_str, fp;
  size_t count = 0;
  in >> magic >> kind_str >> fp >> count;
  require(magic == "XVNET1", "io", "bad weight container: " + path.string());
  require(kind_str == kind(), "state",
          "weight container holds a " + kind_str + ", expected " + kind());
  require(fp == fingerprint(), "state",
          "weight fingerprint mismatch: container " + fp + " vs spec " + fingerprint());
  in.ignore(1);  // newline after header
  auto tensors = state_tensors();
  std::map<std::string, Tensor*> by_name;
  for (auto& nt : tensors) by_name[nt.name] = nt.tensor;
  for (size_t i = 0; i < count; ++i) {
    std::string name;
    int rank = 0;
    in >> name >> rank;
    std::vector<int> dims(static_cast<size_t>(rank));
    for (auto& d : dims) in >> d;
    in.ignore(1);
    auto it = by_name.find(name);
    require(it != by_name.end(), "state", "unknown tensor in container: " + name);
    require(it->second->shape() == dims, "state", "tensor shape mismatch: " + name);
    in.read(reinterpret_cast<char*>(it->second->data()),
            static_cast<std::streamsize>(it->second->size() * sizeof(float)));
    require(in.gcount() == static_cast<std::streamsize>(it->second->size() * sizeof(float)),
            "io", "truncated weight container: " + path.string());
  }
}

// ------------------------------------------------------------ generator ----

Generator::Generator(const GeneratorSpec& spec, uint64_t init_seed) : spec_(spec) {
  spec_.validate();
  Rng rng(derive_seed(init_seed, 0x67656e65ULL));  // one stream, fixed order

  const std::vector<int> ew = spec_.encoder_widths();
  const int n = spec_.encoder_depth();

  auto add_bn = [&](const std::string& prefix, int ch) {
    BnState bn;
    bn.gamma = add_param(prefix + ".gamma", gaussian_tensor({ch}, 1.0, 0.02, rng));
    bn.beta = add_param(prefix + ".beta", Tensor({ch}, 0.0f));
    bn.run_mean = Tensor({ch}, 0.0f);
    bn.run_var = Tensor({ch}, 1.0f);
    return bn;
  };

  int c_prev = spec_.in_channels;
  for (int i = 0; i < n; ++i) {
    EncBlock blk;
    const std::string prefix = "enc" + std::to_string(i);
    blk.w = add_param(prefix + ".w", gaussian_tensor({ew[static_cast<size_t>(i)], c_prev, 4, 4}, 0.0, 0.02, rng));
    blk.b = add_param(prefix + ".b", Tensor({ew[static_cast<size_t>(i)]}, 0.0f));
    // No norm on the first block, and none on a 1x1 bottleneck: a batch-1
    // spatial BN over a single element collapses to its bias and cuts the
    // encoder out of the gradient path.
    const int out_spatial = spec_.resolution >> (i + 1);
    if (i > 0 && out_spatial > 1) blk.bn = add_bn(prefix, ew[static_cast<size_t>(i)]);
    enc_.push_back(std::move(blk));
    c_prev = ew[static_cast<size_t>(i)];
  }
  // Register running stats after params so the container layout is stable.
  for (size_t i = 0; i < enc_.size(); ++i) {
    if (enc_[i].bn) {
      add_state("enc" + std::to_string(i) + ".run_mean", &enc_[i].bn->run_mean);
      add_state("enc" + std::to_string(i) + ".run_var", &enc_[i].bn->run_var);
    }
  }

  const std::vector<int> dw = spec_.decoder_widths();
  const int n_shared = spec_.out_heads == 2 ? spec_.shared_decoder_blocks()
                                            : static_cast<int>(dw.size());
  shared_dec_.reserve(static_cast<size_t>(n_shared));
  c_prev = ew[static_cast<size_t>(n - 1)];
  for (int j = 0; j < n_shared; ++j) {
    const int c_in = j == 0 ? c_prev
                            : dw[static_cast<size_t>(j - 1)] +
                                  (spec_.skip_connections
                                       ? ew[static_cast<size_t>(n - 1 - j)]
                                       : 0);
    shared_dec_.push_back(make_dec_block("dec" + std::to_string(j), c_in,
                                         dw[static_cast<size_t>(j)], true, j < 3,
                                         false, rng));
  }
  head_tails_.resize(static_cast<size_t>(spec_.out_heads));
  for (int h = 0; h < spec_.out_heads; ++h) {
    const std::string hp = spec_.out_heads == 2 ? "head" + std::to_string(h) + "." : "";
    std::vector<DecBlock>& tail = head_tails_[static_cast<size_t>(h)];
    for (int j = n_shared; j < static_cast<int>(dw.size()); ++j) {
      const int c_in = dw[static_cast<size_t>(j - 1)] +
                       (spec_.skip_connections ? ew[static_cast<size_t>(n - 1 - j)] : 0);
      tail.push_back(make_dec_block(hp + "dec" + std::to_string(j), c_in,
                                    dw[static_cast<size_t>(j)], true, j < 3, false,
                                    rng));
    }
    const int c_in = dw.back() + (spec_.skip_connections ? ew[0] : 0);
    tail.push_back(make_dec_block(hp + "final", c_in, spec_.out_channels_per_head,
                                  false, false, true, rng));
  }
  // Running stats for decoder blocks.
  for (size_t j = 0; j < shared_dec_.size(); ++j) {
    if (shared_dec_[j].bn) {
      add_state("dec" + std::to_string(j) + ".run_mean", &shared_dec_[j].bn->run_mean);
      add_state("dec" + std::to_string(j) + ".run_var", &shared_dec_[j].bn->run_var);
    }
  }
  for (size_t h = 0; h < head_tails_.size(); ++h) {
    const std::string hp = spec_.out_heads == 2 ? "head" + std::to_string(h) + "." : "";
    for (size_t j = 0; j < head_tails_[h].size(); ++j) {
      auto& blk = head_tails_[h][j];
      if (blk.bn) {
        const std::string nm = hp + (blk.final_block ? std::string("final")
                                                     : "dec" + std::to_string(shared_dec_.size() + j));
        add_state(nm + ".run_mean", &blk.bn->run_mean);
        add_state(nm + ".run_var", &blk.bn->run_var);
      }
    }
  }
}

Generator::DecBlock Generator::make_dec_block(const std::string& name, int c_in,
                                              int c_out, bool bn, bool dropout,
                                              bool final_block, Rng& rng) {
  DecBlock blk;
  blk.w = add_param(name + ".w", gaussian_tensor({c_in, c_out, 4, 4}, 0.0, 0.02, rng));
  blk.b = add_param(name + ".b", Tensor({c_out}, 0.0f));
  if (bn) {
    BnState s;
    s.gamma = add_param(name + ".gamma", gaussian_tensor({c_out}, 1.0, 0.02, rng));
    s.beta = add_param(name + ".beta", Tensor({c_out}, 0.0f));
    s.run_mean = Tensor({c_out}, 0.0f);
    s.run_var = Tensor({c_out}, 1.0f);
    blk.bn = std::move(s);
  }
  blk.dropout = dropout;
  blk.final_block = final_block;
  return blk;
}

ad::Var Generator::run_dec_block(DecBlock& blk, const ad::Var& x, bool training,
                                 Rng& rng) {
  ad::Var y = ad::conv_transpose2d(x, blk.w, blk.b, 2, 1);
  if (blk.final_block) return ad::tanh_act(y);
  if (blk.bn) {
    y = ad::batchnorm2d(y, blk.bn->gamma, blk.bn->beta, blk.bn->run_mean,
                        blk.bn->run_var, training);
  }
  if (blk.dropout && spec_.dropout_rate > 0.0) {
    y = ad::dropout(y, spec_.dropout_rate, rng, training);
  }
  return ad::relu(y);
}

std::vector<ad::Var> Generator::forward(const ad::Var& input, bool training,
                                        uint64_t dropout_seed) {
  const Tensor& iv = input->value;
  require(iv.rank() == 4 && iv.dim(1) == spec_.in_channels &&
              iv.dim(2) == spec_.resolution && iv.dim(3) == spec_.resolution,
          "shape", "generator input must be (N," + std::to_string(spec_.in_channels) +
                       "," + std::to_string(spec_.resolution) + "," +
                       std::to_string(spec_.resolution) + "), got " + iv.shape_str());
  Rng rng(derive_seed(dropout_seed, 0x64726f70ULL));

  std::vector<ad::Var> enc_outs;
  ad::Var x = input;
  for (auto& blk : enc_) {
    x = ad::conv2d(x, blk.w, blk.b, 2, 1);
    if (blk.bn) {
      x = ad::batchnorm2d(x, blk.bn->gamma, blk.bn->beta, blk.bn->run_mean,
                          blk.bn->run_var, training);
    }
    x = ad::leaky_relu(x, 0.2);
    enc_outs.push_back(x);
  }

  const int n = spec_.encoder_depth();
  auto dec_input = [&](const ad::Var& prev, int j) {
    if (!spec_.skip_connections || j == 0) return prev;
    return ad::concat_channels(prev, enc_outs[static_cast<size_t>(n - 1 - j)]);
  };

  ad::Var shared = x;
  int j = 0;
  for (auto& blk : shared_dec_) {
    shared = run_dec_block(blk, dec_input(shared, j), training, rng);
    ++j;
  }

  std::vector<ad::Var> heads;
  for (auto& tail : head_tails_) {
    ad::Var y = shared;
    int jj = j;
    for (auto& blk : tail) {
      y = run_dec_block(blk, dec_input(y, jj), training, rng);
      ++jj;
    }
    heads.push_back(y);
  }
  return heads;
}

// -------------------------------------------------------- discriminator ----

Discriminator::Discriminator(const DiscriminatorSpec& spec, uint64_t init_seed)
    : spec_(spec) {
  spec_.validate();
  Rng rng(derive_seed(init_seed, 0x64697363ULL));

  auto add_bn = [&](const std::string& prefix, int ch) {
    BnState bn;
    bn.gamma = add_param(prefix + ".gamma", gaussian_tensor({ch}, 1.0, 0.02, rng));
    bn.beta = add_param(prefix + ".beta", Tensor({ch}, 0.0f));
    bn.run_mean = Tensor({ch}, 0.0f);
    bn.run_var = Tensor({ch}, 1.0f);
    return bn;
  };

  int c_prev = spec_.in_channels;
  for (int i = 0; i < spec_.depth; ++i) {
    Block blk;
    const int c_out = spec_.base_width * std::min(1 << i, 8);
    const std::string prefix = "blk" + std::to_string(i);
    blk.w = add_param(prefix + ".w", gaussian_tensor({c_out, c_prev, 4, 4}, 0.0, 0.02, rng));
    blk.b = add_param(prefix + ".b", Tensor({c_out}, 0.0f));
    if (i > 0) blk.bn = add_bn(prefix, c_out);
    blk.stride = 2;
    blocks_.push_back(std::move(blk));
    c_prev = c_out;
  }
  // Stride-1 widening block, then the 1-channel patch head.
  {
    Block blk;
    const int c_out = spec_.base_width * std::min(1 << spec_.depth, 8);
    blk.w = add_param("pen.w", gaussian_tensor({c_out, c_prev, 4, 4}, 0.0, 0.02, rng));
    blk.b = add_param("pen.b", Tensor({c_out}, 0.0f));
    blk.bn = add_bn("pen", c_out);
    blk.stride = 1;
    blocks_.push_back(std::move(blk));
    c_prev = c_out;
  }
  final_w_ = add_param("out.w", gaussian_tensor({1, c_prev, 4, 4}, 0.0, 0.02, rng));
  final_b_ = add_param("out.b", Tensor({1}, 0.0f));

  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].bn) {
      const std::string prefix =
          i + 1 == blocks_.size() ? "pen" : "blk" + std::to_string(i);
      add_state(prefix + ".run_mean", &blocks_[i].bn->run_mean);
      add_state(prefix + ".run_var", &blocks_[i].bn->run_var);
    }
  }
}

std::vector<ad::Var> Discriminator::forward(const ad::Var& input, bool training,
                                            uint64_t dropout_seed) {
  (void)dropout_seed;
  const Tensor& iv = input->value;
  require(iv.rank() == 4 && iv.dim(1) == spec_.in_channels, "shape",
          "discriminator input must have " + std::to_string(spec_.in_channels) +
              " channels, got " + iv.shape_str());
  ad::Var x = input;
  for (auto& blk : blocks_) {
    x = ad::conv2d(x, blk.w, blk.b, blk.stride, 1);
    if (blk.bn) {
      x = ad::batchnorm2d(x, blk.bn->gamma, blk.bn->beta, blk.bn->run_mean,
                          blk.bn->run_var, training);
    }
    x = ad::leaky_relu(x, 0.2);
  }
  x = ad::conv2d(x, final_w_, final_b_, 1, 1);
  return {ad::sigmoid(x)};
}

// -------------------------------------------------------------- builders ----

std::unique_ptr<Generator> build_generator(const GeneratorSpec& spec,
                                           uint64_t init_seed) {
  require(spec.out_heads == 1, "config",
          "build_generator builds single-head generators; use build_fork_generator for out_heads=2");
  return std::make_unique<Generator>(spec, init_seed);
}

std::unique_ptr<Generator> build_fork_generator(const GeneratorSpec& spec,
                                                uint64_t init_seed) {
  require(spec.out_heads == 2, "config", "fork generator requires out_heads == 2");
  return std::make_unique<Generator>(spec, init_seed);
}

std::unique_ptr<Discriminator> build_discriminator(const DiscriminatorSpec& spec,
                                                   uint64_t init_seed) {
  return std::make_unique<Discriminator>(spec, init_seed);
}

}  // namespace xv::nets
