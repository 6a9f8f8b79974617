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

#include "xv/nets/autodiff.hpp"

#include <cmath>
#include <unordered_set>

#include "xv/core/kernels.hpp"

namespace xv::ad {

namespace {

constexpr float kLogEps = 1e-7f;

Var make_node(Tensor value, std::vector<Var> parents,
              std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  require(a->value.same_shape(b->value), "shape",
          std::string(op) + ": shape mismatch " + a->value.shape_str() + " vs " +
              b->value.shape_str());
}

// im2col / col2im for NCHW single images; col is (C*K*K, OH*OW).
void im2col(const float* x, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* col) {
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* dst = col + ((static_cast<int64_t>(ch) * k + ki) * k + kj) * (static_cast<int64_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) dst[static_cast<int64_t>(oy) * ow + ox] = 0.0f;
            continue;
          }
          const float* src_row = x + (static_cast<int64_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kj;
            dst[static_cast<int64_t>(oy) * ow + ox] =
                (ix < 0 || ix >= w) ? 0.0f : src_row[ix];
          }
        }
      }
    }
  }
}

void col2im(const float* col, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* x /* accumulated into */) {
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* src = col + ((static_cast<int64_t>(ch) * k + ki) * k + kj) * (static_cast<int64_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          float* dst_row = x + (static_cast<int64_t>(ch) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < w) dst_row[ix] += src[static_cast<int64_t>(oy) * ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor& Node::grad_buf() {
  if (grad.empty()) grad = Tensor::zeros_like(value);
  return grad;
}

Var leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

Var detach(const Var& x) { return leaf(x->value, false); }

void backward(const Var& root) {
  require(root->value.size() == 1, "shape", "backward root must be scalar");
  if (!root->requires_grad && root->parents.empty()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx].get();
      ++idx;
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad_buf()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->requires_grad) n->backward_fn(*n);
  }
}

void zero_grad(const std::vector<Var>& params) {
  for (const auto& p : params) {
    if (!p->grad.empty()) p->grad.fill(0.0f);
  }
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->value;
  kern::axpy(out.size(), 1.0f, b->value.data(), out.data());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    for (int pi = 0; pi < 2; ++pi) {
      Var& p = n.parents[static_cast<size_t>(pi)];
      if (p->requires_grad)
        kern::axpy(n.grad.size(), 1.0f, n.grad.data(), p->grad_buf().data());
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->value;
  kern::axpy(out.size(), -1.0f, b->value.data(), out.data());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad)
      kern::axpy(n.grad.size(), 1.0f, n.grad.data(), n.parents[0]->grad_buf().data());
    if (n.parents[1]->requires_grad)
      kern::axpy(n.grad.size(), -1.0f, n.grad.data(), n.parents[1]->grad_buf().data());
  });
}

Var scale(const Var& x, double s) {
  Tensor out = x->value;
  const float fs = static_cast<float>(s);
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= fs;
  return make_node(std::move(out), {x}, [fs](Node& n) {
    kern::axpy(n.grad.size(), fs, n.grad.data(), n.parents[0]->grad_buf().data());
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  require(av.rank() == 4 && bv.rank() == 4 && av.dim(0) == bv.dim(0) &&
              av.dim(2) == bv.dim(2) && av.dim(3) == bv.dim(3),
          "shape", "concat_channels: incompatible shapes");
  const int n = av.dim(0), ca = av.dim(1), cb = bv.dim(1), h = av.dim(2), w = av.dim(3);
  Tensor out({n, ca + cb, h, w});
  const int64_t plane = static_cast<int64_t>(h) * w;
  for (int i = 0; i < n; ++i) {
    std::copy(av.data() + i * ca * plane, av.data() + (i + 1) * ca * plane,
              out.data() + static_cast<int64_t>(i) * (ca + cb) * plane);
    std::copy(bv.data() + i * cb * plane, bv.data() + (i + 1) * cb * plane,
              out.data() + (static_cast<int64_t>(i) * (ca + cb) + ca) * plane);
  }
  return make_node(std::move(out), {a, b}, [n, ca, cb, plane](Node& nd) {
    for (int i = 0; i < n; ++i) {
      const float* g = nd.grad.data() + static_cast<int64_t>(i) * (ca + cb) * plane;
      if (nd.parents[0]->requires_grad) {
        float* ga = nd.parents[0]->grad_buf().data() + static_cast<int64_t>(i) * ca * plane;
        kern::axpy(ca * plane, 1.0f, g, ga);
      }
      if (nd.parents[1]->requires_grad) {
        float* gb = nd.parents[1]->grad_buf().data() + static_cast<int64_t>(i) * cb * plane;
        kern::axpy(cb * plane, 1.0f, g + ca * plane, gb);
      }
    }
  });
}

Var slice_channels(const Var& x, int c0, int c1) {
  const Tensor& xv = x->value;
  require(xv.rank() == 4 && c0 >= 0 && c1 <= xv.dim(1) && c0 < c1, "shape",
          "slice_channels: bad channel range");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  const int cs = c1 - c0;
  const int64_t plane = static_cast<int64_t>(h) * w;
  Tensor out({n, cs, h, w});
  for (int i = 0; i < n; ++i) {
    std::copy(xv.data() + (static_cast<int64_t>(i) * c + c0) * plane,
              xv.data() + (static_cast<int64_t>(i) * c + c1) * plane,
              out.data() + static_cast<int64_t>(i) * cs * plane);
  }
  return make_node(std::move(out), {x}, [n, c, c0, cs, plane](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    for (int i = 0; i < n; ++i) {
      kern::axpy(cs * plane, 1.0f, nd.grad.data() + static_cast<int64_t>(i) * cs * plane,
                 gx + (static_cast<int64_t>(i) * c + c0) * plane);
    }
  });
}

Var mul_mask_hw(const Var& x, const Tensor& mask_hw) {
  const Tensor& xv = x->value;
  require(xv.rank() == 4 && mask_hw.rank() == 2 && xv.dim(2) == mask_hw.dim(0) &&
              xv.dim(3) == mask_hw.dim(1),
          "shape", "mul_mask_hw: mask must be (H,W) matching x");
  const int n = xv.dim(0), c = xv.dim(1);
  const int64_t plane = mask_hw.size();
  Tensor out = xv;
  for (int64_t nc = 0; nc < static_cast<int64_t>(n) * c; ++nc) {
    float* dst = out.data() + nc * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] *= mask_hw[i];
  }
  Tensor mask = mask_hw;
  return make_node(std::move(out), {x}, [mask, n, c, plane](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    const float* g = nd.grad.data();
    for (int64_t nc = 0; nc < static_cast<int64_t>(n) * c; ++nc) {
      for (int64_t i = 0; i < plane; ++i) gx[nc * plane + i] += g[nc * plane + i] * mask[i];
    }
  });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  require(xv.rank() == 4 && wv.rank() == 4, "shape", "conv2d wants 4-d tensors");
  const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int co = wv.dim(0), k = wv.dim(2);
  require(wv.dim(1) == ci && wv.dim(3) == k, "shape",
          "conv2d: weight " + wv.shape_str() + " does not match input " + xv.shape_str());
  require(b->value.size() == co, "shape", "conv2d: bias size mismatch");
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (wd + 2 * pad - k) / stride + 1;
  require(oh > 0 && ow > 0, "shape", "conv2d: output would be empty");

  const int64_t ck = static_cast<int64_t>(ci) * k * k;
  const int64_t ohw = static_cast<int64_t>(oh) * ow;
  auto col = std::make_shared<Tensor>(std::vector<int>{n, static_cast<int>(ck), static_cast<int>(ohw)});
  Tensor out({n, co, oh, ow});
  for (int i = 0; i < n; ++i) {
    float* coli = col->data() + i * ck * ohw;
    im2col(xv.data() + static_cast<int64_t>(i) * ci * h * wd, ci, h, wd, k, stride, pad, oh, ow, coli);
    float* yi = out.data() + static_cast<int64_t>(i) * co * ohw;
    kern::gemm_nn(co, static_cast<int>(ohw), static_cast<int>(ck), wv.data(),
                  static_cast<int>(ck), coli, static_cast<int>(ohw), yi,
                  static_cast<int>(ohw), false);
    for (int c = 0; c < co; ++c) {
      const float bias = b->value[c];
      float* yc = yi + static_cast<int64_t>(c) * ohw;
      for (int64_t j = 0; j < ohw; ++j) yc[j] += bias;
    }
  }

  auto bwd = [col, n, ci, h, wd, co, k, stride, pad, oh, ow, ck, ohw](Node& nd) {
    const Tensor& wv2 = nd.parents[1]->value;
    for (int i = 0; i < n; ++i) {
      const float* gy = nd.grad.data() + static_cast<int64_t>(i) * co * ohw;
      const float* coli = col->data() + i * ck * ohw;
      if (nd.parents[1]->requires_grad) {
        kern::gemm_nt(co, static_cast<int>(ck), static_cast<int>(ohw), gy,
                      static_cast<int>(ohw), coli, static_cast<int>(ohw),
                      nd.parents[1]->grad_buf().data(), static_cast<int>(ck), true);
      }
      if (nd.parents[2]->requires_grad) {
        float* gb = nd.parents[2]->grad_buf().data();
        for (int c = 0; c < co; ++c)
          gb[c] += static_cast<float>(kern::reduce_sum(ohw, gy + static_cast<int64_t>(c) * ohw));
      }
      if (nd.parents[0]->requires_grad) {
        Tensor dcol({static_cast<int>(ck), static_cast<int>(ohw)});
        kern::gemm_tn(static_cast<int>(ck), static_cast<int>(ohw), co, wv2.data(),
                      static_cast<int>(ck), gy, static_cast<int>(ohw), dcol.data(),
                      static_cast<int>(ohw), false);
        col2im(dcol.data(), ci, h, wd, k, stride, pad, oh, ow,
               nd.parents[0]->grad_buf().data() + static_cast<int64_t>(i) * ci * h * wd);
      }
    }
  };
  return make_node(std::move(out), {x, w, b}, bwd);
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;  // (Cin, Cout, K, K)
  require(xv.rank() == 4 && wv.rank() == 4, "shape", "conv_transpose2d wants 4-d tensors");
  const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int co = wv.dim(1), k = wv.dim(2);
  require(wv.dim(0) == ci && wv.dim(3) == k, "shape",
          "conv_transpose2d: weight " + wv.shape_str() + " does not match input " + xv.shape_str());
  require(b->value.size() == co, "shape", "conv_transpose2d: bias size mismatch");
  const int oh = (h - 1) * stride - 2 * pad + k;
  const int ow = (wd - 1) * stride - 2 * pad + k;
  require(oh > 0 && ow > 0, "shape", "conv_transpose2d: output would be empty");

  const int64_t ck = static_cast<int64_t>(co) * k * k;
  const int64_t hw = static_cast<int64_t>(h) * wd;
  Tensor out({n, co, oh, ow}, 0.0f);
  Tensor colbuf({static_cast<int>(ck), static_cast<int>(hw)});
  for (int i = 0; i < n; ++i) {
    // col = W^T x, then scatter-accumulate into the upsampled frame.
    kern::gemm_tn(static_cast<int>(ck), static_cast<int>(hw), ci, wv.data(),
                  static_cast<int>(ck), xv.data() + static_cast<int64_t>(i) * ci * hw,
                  static_cast<int>(hw), colbuf.data(), static_cast<int>(hw), false);
    float* yi = out.data() + static_cast<int64_t>(i) * co * oh * ow;
    col2im(colbuf.data(), co, oh, ow, k, stride, pad, h, wd, yi);
    for (int c = 0; c < co; ++c) {
      const float bias = b->value[c];
      float* yc = yi + static_cast<int64_t>(c) * oh * ow;
      for (int64_t j = 0; j < static_cast<int64_t>(oh) * ow; ++j) yc[j] += bias;
    }
  }

  auto bwd = [n, ci, h, wd, co, k, stride, pad, oh, ow, ck, hw](Node& nd) {
    const Tensor& wv2 = nd.parents[1]->value;
    const Tensor& xv2 = nd.parents[0]->value;
    Tensor gcol({static_cast<int>(ck), static_cast<int>(hw)});
    for (int i = 0; i < n; ++i) {
      const float* gy = nd.grad.data() + static_cast<int64_t>(i) * co * oh * ow;
      im2col(gy, co, oh, ow, k, stride, pad, h, wd, gcol.data());
      if (nd.parents[0]->requires_grad) {
        kern::gemm_nn(ci, static_cast<int>(hw), static_cast<int>(ck), wv2.data(),
                      static_cast<int>(ck), gcol.data(), static_cast<int>(hw),
                      nd.parents[0]->grad_buf().data() + static_cast<int64_t>(i) * ci * hw,
                      static_cast<int>(hw), true);
      }
      if (nd.parents[1]->requires_grad) {
        kern::gemm_nt(ci, static_cast<int>(ck), static_cast<int>(hw),
                      xv2.data() + static_cast<int64_t>(i) * ci * hw, static_cast<int>(hw),
                      gcol.data(), static_cast<int>(hw),
                      nd.parents[1]->grad_buf().data(), static_cast<int>(ck), true);
      }
      if (nd.parents[2]->requires_grad) {
        float* gb = nd.parents[2]->grad_buf().data();
        for (int c = 0; c < co; ++c) {
          gb[c] += static_cast<float>(
              kern::reduce_sum(static_cast<int64_t>(oh) * ow, gy + static_cast<int64_t>(c) * oh * ow));
        }
      }
    }
  };
  return make_node(std::move(out), {x, w, b}, bwd);
}

Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta,
                Tensor& running_mean, Tensor& running_var, bool training,
                double momentum, double eps) {
  const Tensor& xv = x->value;
  require(xv.rank() == 4, "shape", "batchnorm2d wants (N,C,H,W)");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  require(gamma->value.size() == c && beta->value.size() == c &&
              running_mean.size() == c && running_var.size() == c,
          "shape", "batchnorm2d: channel mismatch");
  const int64_t plane = static_cast<int64_t>(h) * w;
  const int64_t m = static_cast<int64_t>(n) * plane;

  Tensor mean({c}), var({c});
  if (training) {
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += kern::reduce_sum(plane, xv.data() + (static_cast<int64_t>(i) * c + ch) * plane);
      }
      const double mu = acc / static_cast<double>(m);
      double vacc = 0.0;
      for (int i = 0; i < n; ++i) {
        const float* p = xv.data() + (static_cast<int64_t>(i) * c + ch) * plane;
        for (int64_t j = 0; j < plane; ++j) {
          const double d = p[j] - mu;
          vacc += d * d;
        }
      }
      mean[ch] = static_cast<float>(mu);
      var[ch] = static_cast<float>(vacc / static_cast<double>(m));  // biased
      running_mean[ch] = static_cast<float>((1.0 - momentum) * running_mean[ch] + momentum * mu);
      running_var[ch] = static_cast<float>((1.0 - momentum) * running_var[ch] +
                                           momentum * (vacc / static_cast<double>(m)));
    }
  } else {
    mean = running_mean;
    var = running_var;
  }

  auto xhat = std::make_shared<Tensor>(std::vector<int>{n, c, h, w});
  auto inv_std = std::make_shared<Tensor>(std::vector<int>{c});
  Tensor out({n, c, h, w});
  for (int ch = 0; ch < c; ++ch) {
    const float is = static_cast<float>(1.0 / std::sqrt(static_cast<double>(var[ch]) + eps));
    (*inv_std)[ch] = is;
    const float mu = mean[ch];
    const float g = gamma->value[ch];
    const float bt = beta->value[ch];
    for (int i = 0; i < n; ++i) {
      const float* src = xv.data() + (static_cast<int64_t>(i) * c + ch) * plane;
      float* xh = xhat->data() + (static_cast<int64_t>(i) * c + ch) * plane;
      float* dst = out.data() + (static_cast<int64_t>(i) * c + ch) * plane;
      for (int64_t j = 0; j < plane; ++j) {
        xh[j] = (src[j] - mu) * is;
        dst[j] = g * xh[j] + bt;
      }
    }
  }

  auto bwd = [xhat, inv_std, n, c, plane, m, training](Node& nd) {
    for (int ch = 0; ch < c; ++ch) {
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int i = 0; i < n; ++i) {
        const float* gy = nd.grad.data() + (static_cast<int64_t>(i) * c + ch) * plane;
        const float* xh = xhat->data() + (static_cast<int64_t>(i) * c + ch) * plane;
        for (int64_t j = 0; j < plane; ++j) {
          sum_gy += gy[j];
          sum_gy_xhat += static_cast<double>(gy[j]) * xh[j];
        }
      }
      if (nd.parents[1]->requires_grad)
        nd.parents[1]->grad_buf()[ch] += static_cast<float>(sum_gy_xhat);
      if (nd.parents[2]->requires_grad)
        nd.parents[2]->grad_buf()[ch] += static_cast<float>(sum_gy);
      if (!nd.parents[0]->requires_grad) continue;
      const double g = nd.parents[1]->value[ch];
      const double is = (*inv_std)[ch];
      for (int i = 0; i < n; ++i) {
        const float* gy = nd.grad.data() + (static_cast<int64_t>(i) * c + ch) * plane;
        const float* xh = xhat->data() + (static_cast<int64_t>(i) * c + ch) * plane;
        float* gx = nd.parents[0]->grad_buf().data() + (static_cast<int64_t>(i) * c + ch) * plane;
        if (training) {
          const double k1 = sum_gy / static_cast<double>(m);
          const double k2 = sum_gy_xhat / static_cast<double>(m);
          for (int64_t j = 0; j < plane; ++j) {
            gx[j] += static_cast<float>(g * is * (gy[j] - k1 - xh[j] * k2));
          }
        } else {
          for (int64_t j = 0; j < plane; ++j) gx[j] += static_cast<float>(g * is * gy[j]);
        }
      }
    }
  };
  return make_node(std::move(out), {x, gamma, beta}, bwd);
}

namespace {

// Derivatives read the input from the parent node and the output from the
// node itself, so no extra buffers are kept alive.
template <class Fwd, class Dfdx>
Var pointwise(const Var& x, Fwd f, Dfdx dfdx) {
  Tensor out = x->value;
  float* p = out.data();
  for (int64_t i = 0; i < out.size(); ++i) p[i] = f(p[i]);
  return make_node(std::move(out), {x}, [dfdx](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    const float* xi = nd.parents[0]->value.data();
    const float* yi = nd.value.data();
    const float* g = nd.grad.data();
    for (int64_t i = 0; i < nd.grad.size(); ++i) {
      gx[i] += g[i] * dfdx(xi[i], yi[i]);
    }
  });
}

}  // namespace

Var leaky_relu(const Var& x, double slope) {
  const float s = static_cast<float>(slope);
  return pointwise(
      x, [s](float v) { return v >= 0.0f ? v : s * v; },
      [s](float xi, float) { return xi >= 0.0f ? 1.0f : s; });
}

Var relu(const Var& x) {
  return pointwise(
      x, [](float v) { return v > 0.0f ? v : 0.0f; },
      [](float xi, float) { return xi > 0.0f ? 1.0f : 0.0f; });
}

Var tanh_act(const Var& x) {
  return pointwise(
      x, [](float v) { return std::tanh(v); },
      [](float, float y) { return 1.0f - y * y; });
}

Var sigmoid(const Var& x) {
  // Output clamped to [1e-7, 1-1e-7]: float sigmoid saturates to exactly 0/1
  // around |z| ~ 17, which would poison the log-losses downstream.
  return pointwise(
      x,
      [](float v) {
        const float y = 1.0f / (1.0f + std::exp(-v));
        return std::min(std::max(y, kLogEps), 1.0f - kLogEps);
      },
      [](float, float y) { return y * (1.0f - y); });
}

Var dropout(const Var& x, double rate, Rng& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  require(rate < 1.0, "config", "dropout rate must be < 1");
  const float keep_scale = static_cast<float>(1.0 / (1.0 - rate));
  auto mask = std::make_shared<Tensor>(Tensor::zeros_like(x->value));
  Tensor out = x->value;
  for (int64_t i = 0; i < out.size(); ++i) {
    const bool keep = rng.uniform() >= rate;
    (*mask)[i] = keep ? keep_scale : 0.0f;
    out[i] *= (*mask)[i];
  }
  return make_node(std::move(out), {x}, [mask](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    for (int64_t i = 0; i < nd.grad.size(); ++i) gx[i] += nd.grad[i] * (*mask)[i];
  });
}

Var global_avg_pool(const Var& x) {
  const Tensor& xv = x->value;
  require(xv.rank() == 4, "shape", "global_avg_pool wants (N,C,H,W)");
  const int n = xv.dim(0), c = xv.dim(1);
  const int64_t plane = static_cast<int64_t>(xv.dim(2)) * xv.dim(3);
  Tensor out({n, c});
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      out.at(i, ch) = static_cast<float>(
          kern::reduce_sum(plane, xv.data() + (static_cast<int64_t>(i) * c + ch) * plane) /
          static_cast<double>(plane));
    }
  }
  return make_node(std::move(out), {x}, [n, c, plane](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    for (int i = 0; i < n; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        const float g = nd.grad.at(i, ch) / static_cast<float>(plane);
        float* dst = gx + (static_cast<int64_t>(i) * c + ch) * plane;
        for (int64_t j = 0; j < plane; ++j) dst[j] += g;
      }
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  require(xv.rank() == 2 && wv.rank() == 2 && xv.dim(1) == wv.dim(1), "shape",
          "linear: x (N,K) and w (C,K) must agree on K");
  const int n = xv.dim(0), k = xv.dim(1), c = wv.dim(0);
  require(b->value.size() == c, "shape", "linear: bias size mismatch");
  Tensor out({n, c});
  kern::gemm_nt(n, c, k, xv.data(), k, wv.data(), k, out.data(), c, false);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) out.at(i, j) += b->value[j];
  }
  return make_node(std::move(out), {x, w, b}, [n, k, c](Node& nd) {
    const Tensor& gy = nd.grad;
    if (nd.parents[0]->requires_grad) {
      kern::gemm_nn(n, k, c, gy.data(), c, nd.parents[1]->value.data(), k,
                    nd.parents[0]->grad_buf().data(), k, true);
    }
    if (nd.parents[1]->requires_grad) {
      kern::gemm_tn(c, k, n, gy.data(), c, nd.parents[0]->value.data(), k,
                    nd.parents[1]->grad_buf().data(), k, true);
    }
    if (nd.parents[2]->requires_grad) {
      float* gb = nd.parents[2]->grad_buf().data();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < c; ++j) gb[j] += gy.at(i, j);
      }
    }
  });
}

Var sum_all(const Var& x) {
  Tensor out({1});
  out[0] = static_cast<float>(kern::reduce_sum(x->value.size(), x->value.data()));
  return make_node(std::move(out), {x}, [](Node& nd) {
    float* gx = nd.parents[0]->grad_buf().data();
    const float g = nd.grad[0];
    for (int64_t i = 0; i < nd.parents[0]->value.size(); ++i) gx[i] += g;
  });
}

Var mean_all(const Var& x) { return scale(sum_all(x), 1.0 / static_cast<double>(x->value.size())); }

Var l1_mean(const Var& x, const Var& y, const Tensor* mask_hw) {
  check_same_shape(x, y, "l1_mean");
  const Tensor& xv = x->value;
  const Tensor& yv = y->value;
  double support = 0.0;
  double acc = 0.0;
  if (mask_hw == nullptr) {
    acc = kern::reduce_abs_diff(xv.size(), xv.data(), yv.data());
    support = static_cast<double>(xv.size());
  } else {
    require(xv.rank() == 4 && mask_hw->rank() == 2 && xv.dim(2) == mask_hw->dim(0) &&
                xv.dim(3) == mask_hw->dim(1),
            "shape", "l1_mean: mask must be (H,W) matching (N,C,H,W) inputs");
    const int64_t plane = mask_hw->size();
    const int64_t nc = xv.size() / plane;
    double msum = 0.0;
    for (int64_t i = 0; i < plane; ++i) msum += (*mask_hw)[i] > 0.5f ? 1.0 : 0.0;
    support = msum * static_cast<double>(nc);
    require(support > 0.0, "config", "l1_mean: empty mask support");
    for (int64_t b = 0; b < nc; ++b) {
      const float* px = xv.data() + b * plane;
      const float* py = yv.data() + b * plane;
      for (int64_t i = 0; i < plane; ++i) {
        if ((*mask_hw)[i] > 0.5f) acc += std::fabs(static_cast<double>(px[i]) - py[i]);
      }
    }
  }
  Tensor out({1});
  out[0] = static_cast<float>(acc / support);

  std::shared_ptr<Tensor> mask =
      mask_hw == nullptr ? nullptr : std::make_shared<Tensor>(*mask_hw);
  const double inv_support = 1.0 / support;
  return make_node(std::move(out), {x, y}, [mask, inv_support](Node& nd) {
    const Tensor& xv2 = nd.parents[0]->value;
    const Tensor& yv2 = nd.parents[1]->value;
    const float g = nd.grad[0];
    const int64_t plane = mask ? mask->size() : 0;
    for (int64_t i = 0; i < xv2.size(); ++i) {
      if (mask && (*mask)[i % plane] <= 0.5f) continue;
      const float d = xv2[i] - yv2[i];
      const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
      const float gi = static_cast<float>(g * inv_support) * s;
      if (nd.parents[0]->requires_grad) nd.parents[0]->grad_buf()[i] += gi;
      if (nd.parents[1]->requires_grad) nd.parents[1]->grad_buf()[i] -= gi;
    }
  });
}

namespace {

void check_open_unit(const Tensor& t, const char* what) {
  for (int64_t i = 0; i < t.size(); ++i) {
    require(t[i] > 0.0f && t[i] < 1.0f, "numeric",
            std::string(what) + ": scores must lie strictly in (0,1)");
  }
}

}  // namespace

Var bce_with_target(const Var& scores, double target) {
  check_open_unit(scores->value, "bce_with_target");
  const Tensor& sv = scores->value;
  double acc = 0.0;
  for (int64_t i = 0; i < sv.size(); ++i) {
    const double s = std::min(std::max(sv[i], kLogEps), 1.0f - kLogEps);
    acc -= target * std::log(s) + (1.0 - target) * std::log(1.0 - s);
  }
  Tensor out({1});
  const double inv_n = 1.0 / static_cast<double>(sv.size());
  out[0] = static_cast<float>(acc * inv_n);
  return make_node(std::move(out), {scores}, [target, inv_n](Node& nd) {
    const Tensor& sv2 = nd.parents[0]->value;
    float* gs = nd.parents[0]->grad_buf().data();
    const double g = nd.grad[0] * inv_n;
    for (int64_t i = 0; i < sv2.size(); ++i) {
      const double s = std::min(std::max(sv2[i], kLogEps), 1.0f - kLogEps);
      gs[i] += static_cast<float>(g * (-(target / s) + (1.0 - target) / (1.0 - s)));
    }
  });
}

Var neg_mean_log(const Var& scores) {
  check_open_unit(scores->value, "neg_mean_log");
  const Tensor& sv = scores->value;
  double acc = 0.0;
  for (int64_t i = 0; i < sv.size(); ++i) {
    acc -= std::log(std::max(sv[i], kLogEps));
  }
  Tensor out({1});
  const double inv_n = 1.0 / static_cast<double>(sv.size());
  out[0] = static_cast<float>(acc * inv_n);
  return make_node(std::move(out), {scores}, [inv_n](Node& nd) {
    const Tensor& sv2 = nd.parents[0]->value;
    float* gs = nd.parents[0]->grad_buf().data();
    const double g = nd.grad[0] * inv_n;
    for (int64_t i = 0; i < sv2.size(); ++i) {
      gs[i] += static_cast<float>(-g / std::max(sv2[i], kLogEps));
    }
  });
}

Var weighted_sum(const std::vector<Var>& xs, const std::vector<double>& ws) {
  require(!xs.empty() && xs.size() == ws.size(), "shape",
          "weighted_sum: needs matching non-empty lists");
  double acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    require(xs[i]->value.size() == 1, "shape", "weighted_sum: scalar inputs only");
    acc += ws[i] * xs[i]->value[0];
  }
  Tensor out({1});
  out[0] = static_cast<float>(acc);
  std::vector<double> wcopy = ws;
  return make_node(std::move(out), xs, [wcopy](Node& nd) {
    for (size_t i = 0; i < nd.parents.size(); ++i) {
      if (nd.parents[i]->requires_grad) {
        nd.parents[i]->grad_buf()[0] += static_cast<float>(nd.grad[0] * wcopy[i]);
      }
    }
  });
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  const Tensor& lv = logits->value;
  require(lv.rank() == 2, "shape", "softmax_cross_entropy wants (N,C) logits");
  const int n = lv.dim(0), c = lv.dim(1);
  require(static_cast<int>(labels.size()) == n, "shape",
          "softmax_cross_entropy: one label per row");
  auto probs = std::make_shared<Tensor>(softmax_rows(lv));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    require(labels[static_cast<size_t>(i)] >= 0 && labels[static_cast<size_t>(i)] < c, "config",
            "softmax_cross_entropy: label out of range");
    acc -= std::log(std::max(probs->at(i, labels[static_cast<size_t>(i)]), kLogEps));
  }
  Tensor out({1});
  out[0] = static_cast<float>(acc / n);
  std::vector<int> lab = labels;
  return make_node(std::move(out), {logits}, [probs, lab, n, c](Node& nd) {
    float* gl = nd.parents[0]->grad_buf().data();
    const float g = nd.grad[0] / static_cast<float>(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < c; ++j) {
        const float onehot = j == lab[static_cast<size_t>(i)] ? 1.0f : 0.0f;
        gl[static_cast<int64_t>(i) * c + j] += g * (probs->at(i, j) - onehot);
      }
    }
  });
}

Tensor softmax_rows(const Tensor& logits) {
  require(logits.rank() == 2, "shape", "softmax_rows wants (N,C)");
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor out({n, c});
  for (int i = 0; i < n; ++i) {
    float mx = logits.at(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += std::exp(static_cast<double>(logits.at(i, j)) - mx);
    for (int j = 0; j < c; ++j) {
      out.at(i, j) = static_cast<float>(std::exp(static_cast<double>(logits.at(i, j)) - mx) / z);
    }
  }
  return out;
}

}  // namespace xv::ad
