#include "alise/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alise/kernels.hpp"

namespace alise {

// ---------------------------------------------------------------- ParamStore

Tensor& ParamStore::create(const std::string& name, Tensor init) {
  ALISE_CHECK(!has(name), "duplicate parameter '" << name << "'");
  order_.push_back(name);
  entries_.push_back({std::move(init), Tensor()});
  Entry& e = entries_.back();
  e.grad = Tensor::zeros(e.value.shape());
  return e.value;
}

int ParamStore::index_of(const std::string& name) const {
  for (size_t i = 0; i < order_.size(); ++i)
    if (order_[i] == name) return static_cast<int>(i);
  return -1;
}

bool ParamStore::has(const std::string& name) const { return index_of(name) >= 0; }

Tensor& ParamStore::value(const std::string& name) {
  int i = index_of(name);
  ALISE_CHECK(i >= 0, "unknown parameter '" << name << "'");
  return entries_[i].value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  int i = index_of(name);
  ALISE_CHECK(i >= 0, "unknown parameter '" << name << "'");
  return entries_[i].value;
}

Tensor& ParamStore::grad(const std::string& name) {
  int i = index_of(name);
  ALISE_CHECK(i >= 0, "unknown parameter '" << name << "'");
  return entries_[i].grad;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_)
    std::fill(e.grad.data(), e.grad.data() + e.grad.numel(), 0.0);
}

int64_t ParamStore::param_count() const {
  int64_t n = 0;
  for (const Entry& e : entries_) n += e.value.numel();
  return n;
}

// --------------------------------------------------------------------- Graph

Graph::Id Graph::emplace(Tensor val, bool needs_grad,
                         std::function<void(Graph&, const Tensor&)> backfn) {
  Node n;
  n.val = std::move(val);
  n.needs_grad = grad_enabled_ && needs_grad;
  if (n.needs_grad) n.backfn = std::move(backfn);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Graph::grad_ref(Id id) {
  Node& n = nodes_[id];
  if (!n.grad.defined()) n.grad = Tensor::zeros(n.val.shape());
  return n.grad;
}

void Graph::accum(Id id, const Tensor& g) { accum_raw(id, g.data(), g.numel()); }

void Graph::accum_raw(Id id, const double* g, int64_t n) {
  Node& node = nodes_[id];
  if (!node.needs_grad) return;
  Tensor& dst = grad_ref(id);
  ALISE_CHECK(dst.numel() == n, "gradient size mismatch");
  kern::ops().add(dst.data(), g, dst.data(), static_cast<size_t>(n));
}

bool Graph::any_needs_grad(std::initializer_list<Id> ids) const {
  for (Id id : ids)
    if (id >= 0 && nodes_[id].needs_grad) return true;
  return false;
}

Graph::Id Graph::input(Tensor t) { return emplace(std::move(t), false); }

Graph::Id Graph::param(ParamStore& store, const std::string& name) {
  Node n;
  n.val = store.value(name);  // shares the buffer
  n.needs_grad = grad_enabled_;
  n.param_grad = &store.grad(name);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Graph::backward(Id root) {
  ALISE_CHECK(nodes_[root].val.numel() == 1, "backward needs a scalar root");
  ALISE_CHECK(grad_enabled_, "backward on a no-grad graph");
  grad_ref(root)[0] = 1.0;
  for (int64_t i = static_cast<int64_t>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.needs_grad || !n.grad.defined()) continue;
    if (n.backfn) n.backfn(*this, n.grad);
    if (n.param_grad != nullptr)
      kern::ops().add(n.param_grad->data(), n.grad.data(), n.param_grad->data(),
                      static_cast<size_t>(n.grad.numel()));
  }
}

// ---- elementwise ----

Graph::Id Graph::add(Id a, Id b) {
  ALISE_CHECK(val(a).same_shape(val(b)), "add shape mismatch");
  Tensor out(val(a).shape());
  kern::ops().add(val(a).data(), val(b).data(), out.data(), out.numel());
  return emplace(std::move(out), any_needs_grad({a, b}), [a, b](Graph& g, const Tensor& go) {
    g.accum(a, go);
    g.accum(b, go);
  });
}

Graph::Id Graph::sub(Id a, Id b) {
  ALISE_CHECK(val(a).same_shape(val(b)), "sub shape mismatch");
  Tensor out(val(a).shape());
  kern::ops().sub(val(a).data(), val(b).data(), out.data(), out.numel());
  return emplace(std::move(out), any_needs_grad({a, b}), [a, b](Graph& g, const Tensor& go) {
    g.accum(a, go);
    if (g.nodes_[b].needs_grad) {
      Tensor neg(go.shape());
      kern::ops().scale(go.data(), -1.0, neg.data(), neg.numel());
      g.accum(b, neg);
    }
  });
}

Graph::Id Graph::mul(Id a, Id b) {
  ALISE_CHECK(val(a).same_shape(val(b)), "mul shape mismatch");
  Tensor out(val(a).shape());
  kern::ops().mul(val(a).data(), val(b).data(), out.data(), out.numel());
  return emplace(std::move(out), any_needs_grad({a, b}), [a, b](Graph& g, const Tensor& go) {
    if (g.nodes_[a].needs_grad) {
      Tensor ga(go.shape());
      kern::ops().mul(go.data(), g.val(b).data(), ga.data(), ga.numel());
      g.accum(a, ga);
    }
    if (g.nodes_[b].needs_grad) {
      Tensor gb(go.shape());
      kern::ops().mul(go.data(), g.val(a).data(), gb.data(), gb.numel());
      g.accum(b, gb);
    }
  });
}

Graph::Id Graph::scale(Id a, double s) {
  Tensor out(val(a).shape());
  kern::ops().scale(val(a).data(), s, out.data(), out.numel());
  return emplace(std::move(out), any_needs_grad({a}), [a, s](Graph& g, const Tensor& go) {
    Tensor ga(go.shape());
    kern::ops().scale(go.data(), s, ga.data(), ga.numel());
    g.accum(a, ga);
  });
}

Graph::Id Graph::add_scalar(Id a, Id b) { return add(a, b); }

Graph::Id Graph::add_bcast(Id x, Id y) {
  const Tensor& xv = val(x);
  const Tensor& yv = val(y);
  const int64_t yn = yv.numel();
  ALISE_CHECK(yn > 0 && xv.numel() % yn == 0, "add_bcast size mismatch");
  const size_t xr = xv.ndim(), yr = yv.ndim();
  ALISE_CHECK(yr <= xr, "add_bcast rank mismatch");
  for (size_t i = 0; i < yr; ++i)
    ALISE_CHECK(yv.shape()[i] == xv.shape()[xr - yr + i], "add_bcast trailing shape mismatch");
  Tensor out(xv.shape());
  const int64_t blocks = xv.numel() / yn;
  for (int64_t bl = 0; bl < blocks; ++bl)
    kern::ops().add(xv.data() + bl * yn, yv.data(), out.data() + bl * yn, yn);
  return emplace(std::move(out), any_needs_grad({x, y}),
                 [x, y, blocks, yn](Graph& g, const Tensor& go) {
    g.accum(x, go);
    if (g.nodes_[y].needs_grad) {
      Tensor gy = Tensor::zeros(g.val(y).shape());
      for (int64_t bl = 0; bl < blocks; ++bl)
        kern::ops().add(gy.data(), go.data() + bl * yn, gy.data(), yn);
      g.accum(y, gy);
    }
  });
}

Graph::Id Graph::relu(Id x) {
  Tensor out(val(x).shape());
  kern::ops().relu(val(x).data(), out.data(), out.numel());
  return emplace(std::move(out), any_needs_grad({x}), [x](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    Tensor& gx = g.grad_ref(x);
    kern::ops().relu_bwd(g.val(x).data(), go.data(), gx.data(), go.numel());
  });
}

Graph::Id Graph::reshape(Id x, std::vector<int64_t> shape) {
  Tensor out = val(x).reshaped(std::move(shape));
  return emplace(std::move(out), any_needs_grad({x}), [x](Graph& g, const Tensor& go) {
    g.accum_raw(x, go.data(), go.numel());
  });
}

Graph::Id Graph::permute(Id x, std::vector<int> perm) {
  Tensor out = tensor_permute(val(x), perm);
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  return emplace(std::move(out), any_needs_grad({x}), [x, inv](Graph& g, const Tensor& go) {
    g.accum(x, tensor_permute(go, inv));
  });
}

Graph::Id Graph::slice(Id x, int axis, int64_t start, int64_t len) {
  Tensor out = tensor_slice(val(x), axis, start, len);
  return emplace(std::move(out), any_needs_grad({x}),
                 [x, axis, start](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    tensor_slice_add(g.grad_ref(x), go, axis, start);
  });
}

Graph::Id Graph::concat(const std::vector<Id>& xs, int axis) {
  std::vector<const Tensor*> parts;
  bool needs = false;
  for (Id id : xs) {
    parts.push_back(&val(id));
    needs = needs || nodes_[id].needs_grad;
  }
  Tensor out = tensor_concat(parts, axis);
  std::vector<Id> ids = xs;
  return emplace(std::move(out), needs, [ids, axis](Graph& g, const Tensor& go) {
    int64_t off = 0;
    for (Id id : ids) {
      const int64_t len = g.val(id).dim(axis);
      if (g.nodes_[id].needs_grad) g.accum(id, tensor_slice(go, axis, off, len));
      off += len;
    }
  });
}

// ---- linear algebra ----

Graph::Id Graph::linear(Id x, Id w, Id b) {
  const Tensor& xv = val(x);
  const Tensor& wv = val(w);
  ALISE_CHECK(wv.ndim() == 2, "linear weight must be 2-d");
  const int64_t in = wv.dim(1), out_f = wv.dim(0);
  ALISE_CHECK(xv.ndim() >= 1 && xv.shape().back() == in,
              "linear: input features " << xv.shape().back() << " != " << in);
  const int64_t rows = xv.numel() / in;

  std::vector<int64_t> out_shape = xv.shape();
  out_shape.back() = out_f;
  Tensor out(out_shape);
  kern::ops().gemm_nt(xv.data(), wv.data(), out.data(), rows, in, out_f);
  if (b >= 0) {
    const Tensor& bv = val(b);
    ALISE_CHECK(bv.numel() == out_f, "linear bias size mismatch");
    for (int64_t r = 0; r < rows; ++r)
      kern::ops().add(out.data() + r * out_f, bv.data(), out.data() + r * out_f, out_f);
  }
  return emplace(std::move(out), any_needs_grad({x, w, b}),
                 [x, w, b, rows, in, out_f](Graph& g, const Tensor& go) {
    if (g.nodes_[x].needs_grad) {
      Tensor gx = Tensor::zeros(g.val(x).shape());
      kern::ops().gemm_nn(go.data(), g.val(w).data(), gx.data(), rows, out_f, in);
      g.accum(x, gx);
    }
    if (g.nodes_[w].needs_grad) {
      Tensor gw = Tensor::zeros(g.val(w).shape());
      kern::ops().gemm_tn(go.data(), g.val(x).data(), gw.data(), out_f, rows, in);
      g.accum(w, gw);
    }
    if (b >= 0 && g.nodes_[b].needs_grad) {
      Tensor gb = Tensor::zeros(g.val(b).shape());
      for (int64_t r = 0; r < rows; ++r)
        kern::ops().add(gb.data(), go.data() + r * out_f, gb.data(), out_f);
      g.accum(b, gb);
    }
  });
}

namespace {

// im2col for 3x3 kernels, pad 1. cols is [N*Ho*Wo][Cin*9].
void im2col_3x3(const Tensor& x, int stride, Tensor& cols, int64_t ho, int64_t wo) {
  const int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  double* cp = cols.data();
  const double* xp = x.data();
  for (int64_t im = 0; im < n; ++im) {
    for (int64_t oy = 0; oy < ho; ++oy) {
      for (int64_t ox = 0; ox < wo; ++ox) {
        for (int64_t c = 0; c < cin; ++c) {
          const double* xc = xp + (im * cin + c) * h * w;
          for (int64_t ky = 0; ky < 3; ++ky) {
            const int64_t iy = oy * stride + ky - 1;
            for (int64_t kx = 0; kx < 3; ++kx) {
              const int64_t ix = ox * stride + kx - 1;
              *cp++ = (iy >= 0 && iy < h && ix >= 0 && ix < w) ? xc[iy * w + ix] : 0.0;
            }
          }
        }
      }
    }
  }
}

void col2im_3x3_add(const Tensor& cols, int stride, Tensor& gx, int64_t ho, int64_t wo) {
  const int64_t n = gx.dim(0), cin = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const double* cp = cols.data();
  double* xp = gx.data();
  for (int64_t im = 0; im < n; ++im) {
    for (int64_t oy = 0; oy < ho; ++oy) {
      for (int64_t ox = 0; ox < wo; ++ox) {
        for (int64_t c = 0; c < cin; ++c) {
          double* xc = xp + (im * cin + c) * h * w;
          for (int64_t ky = 0; ky < 3; ++ky) {
            const int64_t iy = oy * stride + ky - 1;
            for (int64_t kx = 0; kx < 3; ++kx) {
              const int64_t ix = ox * stride + kx - 1;
              const double v = *cp++;
              if (iy >= 0 && iy < h && ix >= 0 && ix < w) xc[iy * w + ix] += v;
            }
          }
        }
      }
    }
  }
}

}  // namespace

Graph::Id Graph::conv2d(Id x, Id w, Id b, int stride) {
  const Tensor& xv = val(x);
  const Tensor& wv = val(w);
  ALISE_CHECK(xv.ndim() == 4, "conv2d input must be [N][C][H][W]");
  ALISE_CHECK(wv.ndim() == 4 && wv.dim(2) == 3 && wv.dim(3) == 3, "conv2d supports 3x3 kernels");
  ALISE_CHECK(stride == 1 || stride == 2, "conv2d stride must be 1 or 2");
  ALISE_CHECK(xv.dim(1) == wv.dim(1),
              "conv2d channel mismatch: input has " << xv.dim(1) << ", weight expects " << wv.dim(1));
  const int64_t n = xv.dim(0), cin = xv.dim(1), h = xv.dim(2), w_in = xv.dim(3);
  const int64_t cout = wv.dim(0);
  const int64_t ho = (h + 2 - 3) / stride + 1;
  const int64_t wo = (w_in + 2 - 3) / stride + 1;
  const int64_t rows = n * ho * wo, cols_k = cin * 9;

  Tensor cols({rows, cols_k});
  im2col_3x3(xv, stride, cols, ho, wo);
  Tensor rows_out({rows, cout});
  kern::ops().gemm_nt(cols.data(), wv.data(), rows_out.data(), rows, cols_k, cout);
  if (b >= 0) {
    const Tensor& bv = val(b);
    for (int64_t r = 0; r < rows; ++r)
      kern::ops().add(rows_out.data() + r * cout, bv.data(), rows_out.data() + r * cout, cout);
  }
  // [N][Ho*Wo][Cout] -> [N][Cout][Ho][Wo]
  Tensor out = tensor_permute(rows_out.reshaped({n, ho * wo, cout}), {0, 2, 1})
                   .reshaped({n, cout, ho, wo});

  return emplace(std::move(out), any_needs_grad({x, w, b}),
                 [x, w, b, stride, n, cin, h, w_in, cout, ho, wo, rows, cols_k](
                     Graph& g, const Tensor& go) {
    Tensor go_rows = tensor_permute(go.reshaped({n, cout, ho * wo}), {0, 2, 1})
                         .reshaped({rows, cout});
    if (g.nodes_[w].needs_grad) {
      // cols are recomputed here instead of cached: the gemm dominates anyway
      Tensor cols({rows, cols_k});
      im2col_3x3(g.val(x), stride, cols, ho, wo);
      Tensor gw = Tensor::zeros({cout, cols_k});
      kern::ops().gemm_tn(go_rows.data(), cols.data(), gw.data(), cout, rows, cols_k);
      g.accum_raw(w, gw.data(), gw.numel());
    }
    if (g.nodes_[x].needs_grad) {
      Tensor gcols = Tensor::zeros({rows, cols_k});
      kern::ops().gemm_nn(go_rows.data(), g.val(w).data(), gcols.data(), rows, cout, cols_k);
      Tensor gx = Tensor::zeros({n, cin, h, w_in});
      col2im_3x3_add(gcols, stride, gx, ho, wo);
      g.accum(x, gx);
    }
    if (b >= 0 && g.nodes_[b].needs_grad) {
      Tensor gb = Tensor::zeros({cout});
      for (int64_t r = 0; r < rows; ++r)
        kern::ops().add(gb.data(), go_rows.data() + r * cout, gb.data(), cout);
      g.accum(b, gb);
    }
  });
}

Graph::Id Graph::upsample2x(Id x) {
  const Tensor& xv = val(x);
  ALISE_CHECK(xv.ndim() == 4, "upsample2x input must be [N][C][H][W]");
  const int64_t n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Tensor out({n, c, 2 * h, 2 * w});
  const double* xp = xv.data();
  double* op = out.data();
  for (int64_t nc = 0; nc < n * c; ++nc) {
    const double* xi = xp + nc * h * w;
    double* oi = op + nc * 4 * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xx = 0; xx < w; ++xx) {
        const double v = xi[y * w + xx];
        double* o0 = oi + (2 * y) * 2 * w + 2 * xx;
        o0[0] = v;
        o0[1] = v;
        o0[2 * w] = v;
        o0[2 * w + 1] = v;
      }
  }
  return emplace(std::move(out), any_needs_grad({x}),
                 [x, n, c, h, w](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    Tensor gx = Tensor::zeros({n, c, h, w});
    const double* gp = go.data();
    double* xp = gx.data();
    for (int64_t nc = 0; nc < n * c; ++nc) {
      const double* gi = gp + nc * 4 * h * w;
      double* xi = xp + nc * h * w;
      for (int64_t y = 0; y < h; ++y)
        for (int64_t xx = 0; xx < w; ++xx) {
          const double* g0 = gi + (2 * y) * 2 * w + 2 * xx;
          xi[y * w + xx] += g0[0] + g0[1] + g0[2 * w] + g0[2 * w + 1];
        }
    }
    g.accum(x, gx);
  });
}

Graph::Id Graph::layer_norm(Id x, Id gamma, Id beta, double eps) {
  const Tensor& xv = val(x);
  const int64_t d = xv.shape().back();
  const int64_t rows = xv.numel() / d;
  ALISE_CHECK(val(gamma).numel() == d && val(beta).numel() == d, "layer_norm affine size mismatch");

  Tensor xhat(xv.shape());
  Tensor inv_std({rows});
  const double* xp = xv.data();
  double* hp = xhat.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = xp + r * d;
    const double mu = kern::ops().sum(xr, d) / static_cast<double>(d);
    double var = 0.0;
    for (int64_t i = 0; i < d; ++i) {
      const double c = xr[i] - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    double* hr = hp + r * d;
    for (int64_t i = 0; i < d; ++i) hr[i] = (xr[i] - mu) * is;
  }
  Tensor out(xv.shape());
  const double* gm = val(gamma).data();
  const double* bt = val(beta).data();
  for (int64_t r = 0; r < rows; ++r) {
    double* orow = out.data() + r * d;
    const double* hr = hp + r * d;
    for (int64_t i = 0; i < d; ++i) orow[i] = gm[i] * hr[i] + bt[i];
  }
  return emplace(std::move(out), any_needs_grad({x, gamma, beta}),
                 [x, gamma, beta, xhat, inv_std, rows, d](Graph& g, const Tensor& go) {
    const double* gm = g.val(gamma).data();
    if (g.nodes_[x].needs_grad) {
      Tensor gx(g.val(x).shape());
      for (int64_t r = 0; r < rows; ++r) {
        const double* grow = go.data() + r * d;
        const double* hr = xhat.data() + r * d;
        double* gxr = gx.data() + r * d;
        double s1 = 0.0, s2 = 0.0;
        for (int64_t i = 0; i < d; ++i) {
          const double gh = grow[i] * gm[i];
          s1 += gh;
          s2 += gh * hr[i];
        }
        s1 /= static_cast<double>(d);
        s2 /= static_cast<double>(d);
        const double is = inv_std[r];
        for (int64_t i = 0; i < d; ++i)
          gxr[i] = is * (grow[i] * gm[i] - s1 - hr[i] * s2);
      }
      g.accum(x, gx);
    }
    if (g.nodes_[gamma].needs_grad) {
      Tensor gg = Tensor::zeros({d});
      for (int64_t r = 0; r < rows; ++r) {
        const double* grow = go.data() + r * d;
        const double* hr = xhat.data() + r * d;
        for (int64_t i = 0; i < d; ++i) gg[i] += grow[i] * hr[i];
      }
      g.accum(gamma, gg);
    }
    if (g.nodes_[beta].needs_grad) {
      Tensor gb = Tensor::zeros({d});
      for (int64_t r = 0; r < rows; ++r)
        kern::ops().add(gb.data(), go.data() + r * d, gb.data(), d);
      g.accum(beta, gb);
    }
  });
}

Graph::Id Graph::batch_std_cols(Id x, double eps) {
  const Tensor& xv = val(x);
  ALISE_CHECK(xv.ndim() == 2, "batch_std_cols input must be [N][F]");
  const int64_t n = xv.dim(0), f = xv.dim(1);
  ALISE_CHECK(n >= 1, "batch_std_cols needs samples");

  Tensor xhat({n, f});
  Tensor inv_std({f});
  const double* xp = xv.data();
  for (int64_t j = 0; j < f; ++j) {
    double mu = 0.0;
    for (int64_t r = 0; r < n; ++r) mu += xp[r * f + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t r = 0; r < n; ++r) {
      const double c = xp[r * f + j] - mu;
      var += c * c;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[j] = is;
    for (int64_t r = 0; r < n; ++r) xhat[r * f + j] = (xp[r * f + j] - mu) * is;
  }
  Tensor out = xhat.clone();
  return emplace(std::move(out), any_needs_grad({x}),
                 [x, xhat, inv_std, n, f](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    Tensor gx({n, f});
    for (int64_t j = 0; j < f; ++j) {
      double s1 = 0.0, s2 = 0.0;
      for (int64_t r = 0; r < n; ++r) {
        s1 += go[r * f + j];
        s2 += go[r * f + j] * xhat[r * f + j];
      }
      s1 /= static_cast<double>(n);
      s2 /= static_cast<double>(n);
      const double is = inv_std[j];
      for (int64_t r = 0; r < n; ++r)
        gx[r * f + j] = is * (go[r * f + j] - s1 - xhat[r * f + j] * s2);
    }
    g.accum(x, gx);
  });
}

Graph::Id Graph::softmax_lastdim(Id x) {
  const Tensor& xv = val(x);
  const int64_t d = xv.shape().back();
  const int64_t rows = xv.numel() / d;
  Tensor out(xv.shape());
  const double* xp = xv.data();
  double* op = out.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = xp + r * d;
    double* orow = op + r * d;
    const double m = kern::ops().vmax(xr, d);
    double denom = 0.0;
    for (int64_t i = 0; i < d; ++i) {
      orow[i] = std::exp(xr[i] - m);
      denom += orow[i];
    }
    kern::ops().scale(orow, 1.0 / denom, orow, d);
    const double dev = std::abs(kern::ops().sum(orow, d) - 1.0);
    if (dev > softmax_dev_) softmax_dev_ = dev;
  }
  Tensor y = out;  // shares the buffer; captured for backward
  return emplace(std::move(out), any_needs_grad({x}),
                 [x, y, rows, d](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    Tensor gx(y.shape());
    for (int64_t r = 0; r < rows; ++r) {
      const double* grow = go.data() + r * d;
      const double* yr = y.data() + r * d;
      double* gxr = gx.data() + r * d;
      const double dotgy = kern::ops().dot(grow, yr, d);
      for (int64_t i = 0; i < d; ++i) gxr[i] = yr[i] * (grow[i] - dotgy);
    }
    g.accum(x, gx);
  });
}

Graph::Id Graph::bmm(Id a, Id b, bool trans_b, bool shared_a) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  ALISE_CHECK(bv.ndim() == 3, "bmm rhs must be 3-d");
  ALISE_CHECK(shared_a ? av.ndim() == 2 : av.ndim() == 3, "bmm lhs rank mismatch");
  const int64_t p = bv.dim(0);
  if (!shared_a) ALISE_CHECK(av.dim(0) == p, "bmm batch mismatch");
  const int64_t m = shared_a ? av.dim(0) : av.dim(1);
  const int64_t k = shared_a ? av.dim(1) : av.dim(2);
  const int64_t n = trans_b ? bv.dim(1) : bv.dim(2);
  const int64_t bk = trans_b ? bv.dim(2) : bv.dim(1);
  ALISE_CHECK(bk == k, "bmm inner dim mismatch");

  Tensor out({p, m, n});
  const double* ap = av.data();
  const double* bp = bv.data();
  double* op = out.data();
  const auto& K = kern::ops();
  for (int64_t i = 0; i < p; ++i) {
    const double* ai = shared_a ? ap : ap + i * m * k;
    const double* bi = bp + i * k * n;
    double* oi = op + i * m * n;
    if (trans_b)
      K.gemm_nt(ai, bi, oi, m, k, n);
    else
      K.gemm_nn(ai, bi, oi, m, k, n);
  }
  return emplace(std::move(out), any_needs_grad({a, b}),
                 [a, b, trans_b, shared_a, p, m, k, n](Graph& g, const Tensor& go) {
    const auto& K = kern::ops();
    if (g.nodes_[a].needs_grad) {
      Tensor ga = Tensor::zeros(g.val(a).shape());
      for (int64_t i = 0; i < p; ++i) {
        const double* gi = go.data() + i * m * n;
        const double* bi = g.val(b).data() + i * k * n;
        double* gai = shared_a ? ga.data() : ga.data() + i * m * k;
        if (trans_b)
          K.gemm_nn(gi, bi, gai, m, n, k);  // G[m][n] . B[n][k]
        else
          K.gemm_nt(gi, bi, gai, m, n, k);  // G[m][n] . (B[k][n])^T
      }
      g.accum(a, ga);
    }
    if (g.nodes_[b].needs_grad) {
      Tensor gb = Tensor::zeros(g.val(b).shape());
      for (int64_t i = 0; i < p; ++i) {
        const double* gi = go.data() + i * m * n;
        const double* ai = shared_a ? g.val(a).data() : g.val(a).data() + i * m * k;
        double* gbi = gb.data() + i * k * n;
        if (trans_b)
          K.gemm_tn(gi, ai, gbi, n, m, k);  // (G)^T[n][m] . A[m][k]
        else
          K.gemm_tn(ai, gi, gbi, k, m, n);  // (A)^T[k][m] . G[m][n]
      }
      g.accum(b, gb);
    }
  });
}

Graph::Id Graph::sum_all(Id x) {
  Tensor out = Tensor::scalar(kern::ops().sum(val(x).data(), val(x).numel()));
  return emplace(std::move(out), any_needs_grad({x}), [x](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    const double g0 = go[0];
    Tensor& gx = g.grad_ref(x);
    for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g0;
  });
}

Graph::Id Graph::mean_all(Id x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(val(x).numel()));
}

Graph::Id Graph::center_cols(Id x) {
  const Tensor& xv = val(x);
  ALISE_CHECK(xv.ndim() == 2, "center_cols input must be [N][F]");
  const int64_t n = xv.dim(0), f = xv.dim(1);
  Tensor mu = Tensor::zeros({f});
  for (int64_t r = 0; r < n; ++r)
    kern::ops().add(mu.data(), xv.data() + r * f, mu.data(), f);
  kern::ops().scale(mu.data(), 1.0 / static_cast<double>(n), mu.data(), f);
  Tensor out({n, f});
  for (int64_t r = 0; r < n; ++r)
    kern::ops().sub(xv.data() + r * f, mu.data(), out.data() + r * f, f);
  return emplace(std::move(out), any_needs_grad({x}), [x, n, f](Graph& g, const Tensor& go) {
    if (!g.nodes_[x].needs_grad) return;
    Tensor gmu = Tensor::zeros({f});
    for (int64_t r = 0; r < n; ++r)
      kern::ops().add(gmu.data(), go.data() + r * f, gmu.data(), f);
    kern::ops().scale(gmu.data(), 1.0 / static_cast<double>(n), gmu.data(), f);
    Tensor gx({n, f});
    for (int64_t r = 0; r < n; ++r)
      kern::ops().sub(go.data() + r * f, gmu.data(), gx.data() + r * f, f);
    g.accum(x, gx);
  });
}

Graph::Id Graph::masked_mse(Id xhat, const Tensor& x, const Tensor& validity) {
  Tensor xh = val(xhat);
  ALISE_CHECK(xh.ndim() == 4 || xh.ndim() == 5, "masked_mse expects [B][T][c][h][w] or [T][c][h][w]");
  if (xh.ndim() == 4) {
    std::vector<int64_t> s = xh.shape();
    s.insert(s.begin(), 1);
    xh = xh.reshaped(s);
  }
  ALISE_CHECK(x.numel() == xh.numel(), "masked_mse target size mismatch");
  Tensor xs = x.reshaped(xh.shape());
  const int64_t bsz = xh.dim(0), t = xh.dim(1), c = xh.dim(2), hw = xh.dim(3) * xh.dim(4);
  ALISE_CHECK(validity.numel() == bsz * t * hw, "masked_mse validity shape mismatch");

  // weight[b*t+ti] = 1/(B * T_eff_b * n_valid_t); 0 when the date has no clear pixel
  std::vector<double> weight(static_cast<size_t>(bsz * t), 0.0);
  double loss = 0.0;
  for (int64_t b = 0; b < bsz; ++b) {
    std::vector<double> date_err(static_cast<size_t>(t), 0.0);
    std::vector<int64_t> nvalid(static_cast<size_t>(t), 0);
    for (int64_t ti = 0; ti < t; ++ti) {
      const double* vmask = validity.data() + (b * t + ti) * hw;
      int64_t nv = 0;
      for (int64_t p = 0; p < hw; ++p)
        if (vmask[p] != 0.0) ++nv;
      nvalid[ti] = nv;
      if (nv == 0) continue;
      double err = 0.0;
      for (int64_t ch = 0; ch < c; ++ch) {
        const double* xr = xs.data() + ((b * t + ti) * c + ch) * hw;
        const double* hr = xh.data() + ((b * t + ti) * c + ch) * hw;
        for (int64_t p = 0; p < hw; ++p) {
          if (vmask[p] == 0.0) continue;
          const double d = xr[p] - hr[p];
          err += d * d;
        }
      }
      date_err[ti] = err;
    }
    int64_t t_eff = 0;
    for (int64_t ti = 0; ti < t; ++ti)
      if (nvalid[ti] > 0) ++t_eff;
    if (t_eff == 0) {
      std::fprintf(stderr, "[alise] warning: masked_mse saw a series with no clear pixel on any date\n");
      continue;
    }
    for (int64_t ti = 0; ti < t; ++ti) {
      if (nvalid[ti] == 0) continue;
      const double w = 1.0 / (static_cast<double>(bsz) * static_cast<double>(t_eff) *
                              static_cast<double>(nvalid[ti]));
      weight[static_cast<size_t>(b * t + ti)] = w;
      loss += date_err[ti] * w;
    }
  }

  Tensor vmask_copy = validity;
  Tensor xs_copy = xs;
  Tensor out = Tensor::scalar(loss);
  return emplace(std::move(out), any_needs_grad({xhat}),
                 [xhat, xs_copy, vmask_copy, weight, bsz, t, c, hw](Graph& g, const Tensor& go) {
    if (!g.nodes_[xhat].needs_grad) return;
    const double g0 = go[0];
    Tensor gx = Tensor::zeros(g.val(xhat).shape());
    const Tensor xh5 = g.val(xhat).reshaped(xs_copy.shape());
    Tensor gx5 = gx.reshaped(xs_copy.shape());
    for (int64_t b = 0; b < bsz; ++b) {
      for (int64_t ti = 0; ti < t; ++ti) {
        const double w = weight[static_cast<size_t>(b * t + ti)];
        if (w == 0.0) continue;
        const double* vmask = vmask_copy.data() + (b * t + ti) * hw;
        for (int64_t ch = 0; ch < c; ++ch) {
          const int64_t base = ((b * t + ti) * c + ch) * hw;
          for (int64_t p = 0; p < hw; ++p) {
            if (vmask[p] == 0.0) continue;
            gx5[base + p] += g0 * 2.0 * w * (xh5[base + p] - xs_copy[base + p]);
          }
        }
      }
    }
    g.accum(xhat, gx);
  });
}

Graph::Id Graph::cross_entropy(Id logits, const std::vector<int32_t>& labels, int32_t ignore_id) {
  const Tensor& lv = val(logits);
  ALISE_CHECK(lv.ndim() == 2, "cross_entropy logits must be [P][k]");
  const int64_t p = lv.dim(0), k = lv.dim(1);
  ALISE_CHECK(static_cast<int64_t>(labels.size()) == p, "cross_entropy label count mismatch");

  int64_t m = 0;
  double loss = 0.0;
  for (int64_t r = 0; r < p; ++r) {
    const int32_t y = labels[static_cast<size_t>(r)];
    if (y == ignore_id) continue;
    ALISE_CHECK(y >= 0 && y < k, "label " << y << " out of range for " << k << " classes");
    ++m;
    const double* row = lv.data() + r * k;
    const double mx = kern::ops().vmax(row, k);
    double denom = 0.0;
    for (int64_t i = 0; i < k; ++i) denom += std::exp(row[i] - mx);
    loss += std::log(denom) + mx - row[y];
  }
  ALISE_CHECK(m > 0, "cross_entropy: every pixel is ignored");
  loss /= static_cast<double>(m);

  std::vector<int32_t> labels_copy = labels;
  Tensor out = Tensor::scalar(loss);
  return emplace(std::move(out), any_needs_grad({logits}),
                 [logits, labels_copy, ignore_id, p, k, m](Graph& g, const Tensor& go) {
    if (!g.nodes_[logits].needs_grad) return;
    const double g0 = go[0];
    const Tensor& lv = g.val(logits);
    Tensor gx = Tensor::zeros({p, k});
    for (int64_t r = 0; r < p; ++r) {
      const int32_t y = labels_copy[static_cast<size_t>(r)];
      if (y == ignore_id) continue;
      const double* row = lv.data() + r * k;
      double* grow = gx.data() + r * k;
      const double mx = kern::ops().vmax(row, k);
      double denom = 0.0;
      for (int64_t i = 0; i < k; ++i) {
        grow[i] = std::exp(row[i] - mx);
        denom += grow[i];
      }
      const double inv = g0 / (denom * static_cast<double>(m));
      for (int64_t i = 0; i < k; ++i) grow[i] *= inv;
      grow[y] -= g0 / static_cast<double>(m);
    }
    g.accum(logits, gx);
  });
}

}  // namespace alise
