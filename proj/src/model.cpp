#include "alise/model.hpp"

#include <cmath>

namespace alise::model {

namespace {

constexpr double kInitStd = 0.02;

Tensor trunc_normal(std::vector<int64_t> shape, Rng& rng, double std_dev = kInitStd) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.trunc_normal(std_dev);
  return t;
}

Tensor conv_init(int64_t cout, int64_t cin, Rng& rng) {
  Tensor t({cout, cin, 3, 3});
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin * 9));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

void linear_params(ParamStore& ps, const std::string& name, int64_t out, int64_t in, Rng& rng,
                   bool bias = true) {
  Rng r = rng.fork(name);
  ps.create(name + ".w", trunc_normal({out, in}, r));
  if (bias) ps.create(name + ".b", Tensor::zeros({out}));
}

void conv_params(ParamStore& ps, const std::string& name, int64_t cout, int64_t cin, Rng& rng) {
  Rng r = rng.fork(name);
  ps.create(name + ".w", conv_init(cout, cin, r));
  ps.create(name + ".b", Tensor::zeros({cout}));
}

void layer_norm_params(ParamStore& ps, const std::string& name, int64_t d) {
  ps.create(name + ".g", Tensor::full({d}, 1.0));
  ps.create(name + ".b", Tensor::zeros({d}));
}

// channels per U-Net level: d_model everywhere, doubled at the bottleneck
int64_t level_channels(const EncoderConfig& cfg, int level) {
  return level == cfg.n_down ? 2 * cfg.d_model : cfg.d_model;
}

Graph::Id conv_block(Graph& g, ParamStore& ps, const std::string& name, Graph::Id x, int stride) {
  return g.relu(g.conv2d(x, g.param(ps, name + ".w"), g.param(ps, name + ".b"), stride));
}

Graph::Id residual_block(Graph& g, ParamStore& ps, const std::string& name, Graph::Id x) {
  Graph::Id h = conv_block(g, ps, name + ".c1", x, 1);
  h = g.conv2d(h, g.param(ps, name + ".c2.w"), g.param(ps, name + ".c2.b"), 1);
  return g.relu(g.add(x, h));
}

}  // namespace

Tensor positional_encoding(const std::vector<int64_t>& dt, int64_t d_model) {
  ALISE_CHECK(d_model % 2 == 0, "positional encoding needs an even d_model, got " << d_model);
  const int64_t t = static_cast<int64_t>(dt.size());
  Tensor pe({t, d_model});
  for (int64_t i = 0; i < t; ++i) {
    const double pos = static_cast<double>(dt[i]);
    for (int64_t j = 0; j < d_model / 2; ++j) {
      const double freq =
          std::pow(10000.0, 2.0 * static_cast<double>(j) / static_cast<double>(d_model));
      pe[i * d_model + 2 * j] = std::sin(pos / freq);
      pe[i * d_model + 2 * j + 1] = std::cos(pos / freq);
    }
  }
  return pe;
}

void init_encoder(ParamStore& ps, const EncoderConfig& cfg, Rng rng) {
  ALISE_CHECK(cfg.d_model % 2 == 0, "d_model must be even");
  ALISE_CHECK(cfg.d_model % cfg.n_tr_heads == 0, "d_model must divide into transformer heads");
  ALISE_CHECK(cfg.d_model % cfg.proj_heads == 0, "d_model must divide into projector heads");
  ALISE_CHECK(cfg.n_down >= 0 && cfg.n_tr_layers >= 1, "bad encoder depth");

  conv_params(ps, "enc.in_conv", cfg.d_model, cfg.c_in, rng);
  for (int i = 0; i < cfg.n_down; ++i) {
    const std::string lvl = "enc.down" + std::to_string(i);
    conv_params(ps, lvl + ".pool", level_channels(cfg, i + 1), level_channels(cfg, i), rng);
    conv_params(ps, lvl + ".res.c1", level_channels(cfg, i + 1), level_channels(cfg, i + 1), rng);
    conv_params(ps, lvl + ".res.c2", level_channels(cfg, i + 1), level_channels(cfg, i + 1), rng);
  }
  for (int i = cfg.n_down - 1; i >= 0; --i) {
    const std::string lvl = "enc.up" + std::to_string(i);
    conv_params(ps, lvl + ".conv", level_channels(cfg, i), level_channels(cfg, i + 1), rng);
    conv_params(ps, lvl + ".fuse", level_channels(cfg, i), 2 * level_channels(cfg, i), rng);
  }
  for (int l = 0; l < cfg.n_tr_layers; ++l) {
    const std::string lyr = "enc.tr" + std::to_string(l);
    layer_norm_params(ps, lyr + ".ln1", cfg.d_model);
    linear_params(ps, lyr + ".q", cfg.d_model, cfg.d_model, rng);
    linear_params(ps, lyr + ".k", cfg.d_model, cfg.d_model, rng);
    linear_params(ps, lyr + ".v", cfg.d_model, cfg.d_model, rng);
    linear_params(ps, lyr + ".o", cfg.d_model, cfg.d_model, rng);
    layer_norm_params(ps, lyr + ".ln2", cfg.d_model);
    linear_params(ps, lyr + ".ff1", cfg.d_hidden, cfg.d_model, rng);
    linear_params(ps, lyr + ".ff2", cfg.d_model, cfg.d_hidden, rng);
  }
  {
    Rng r = rng.fork("enc.queries");
    ps.create("enc.queries", trunc_normal({cfg.n_q, cfg.d_model}, r));
  }
  linear_params(ps, "enc.q_proj", cfg.d_model, cfg.d_model, rng, /*bias=*/false);
}

void init_projector(ParamStore& ps, const EncoderConfig& cfg, int64_t d_emb, Rng rng) {
  linear_params(ps, "proj.fc1", d_emb, cfg.d_model, rng);
  linear_params(ps, "proj.fc2", d_emb, d_emb, rng);
}

void init_decoder(ParamStore& ps, const EncoderConfig& cfg, Rng rng) {
  {
    Rng r = rng.fork("dec.mask_token");
    ps.create("dec.mask_token", trunc_normal({cfg.d_model}, r));
  }
  linear_params(ps, "dec.q_proj", cfg.d_model, cfg.d_model, rng, /*bias=*/false);
  linear_params(ps, "dec.k_proj", cfg.d_model, cfg.d_model, rng, /*bias=*/false);
  linear_params(ps, "dec.out", cfg.c_in, cfg.d_model, rng);
}

void init_probe(ParamStore& ps, const EncoderConfig& cfg, int64_t k, Rng rng) {
  ALISE_CHECK(k >= 2, "probe needs at least two classes");
  linear_params(ps, "probe", k, cfg.n_q * cfg.d_model, rng);
}

Tensor stack_values(const std::vector<const Sits*>& batch) {
  ALISE_CHECK(!batch.empty(), "empty batch");
  const Sits& first = *batch[0];
  Tensor out({static_cast<int64_t>(batch.size()), first.t(), first.c(), first.h(), first.w()});
  const int64_t per = first.values.numel();
  for (size_t b = 0; b < batch.size(); ++b) {
    ALISE_CHECK(batch[b]->values.numel() == per && batch[b]->t() == first.t(),
                "batch series must share shape");
    for (int64_t i = 0; i < per; ++i) out[static_cast<int64_t>(b) * per + i] = batch[b]->values[i];
  }
  return out;
}

Tensor stack_validity(const std::vector<const Sits*>& batch) {
  const Sits& first = *batch[0];
  Tensor out({static_cast<int64_t>(batch.size()), first.t(), first.h(), first.w()});
  const int64_t per = first.validity.numel();
  for (size_t b = 0; b < batch.size(); ++b)
    for (int64_t i = 0; i < per; ++i) out[static_cast<int64_t>(b) * per + i] = batch[b]->validity[i];
  return out;
}

namespace {

// Multi-head attention over [P][T][D] rows; queries may be shared across the
// batch dim ([m][D]). scale divides the logits before softmax.
Graph::Id multihead_attention(Graph& g, Graph::Id q, Graph::Id k, Graph::Id v, int heads,
                              double scale, bool shared_q) {
  const int64_t d = g.val(k).dim(2);
  const int64_t dh = d / heads;
  std::vector<Graph::Id> outs;
  const int q_axis = shared_q ? 1 : 2;
  for (int hh = 0; hh < heads; ++hh) {
    Graph::Id qh = g.slice(q, q_axis, hh * dh, dh);
    Graph::Id kh = g.slice(k, 2, hh * dh, dh);
    Graph::Id vh = g.slice(v, 2, hh * dh, dh);
    Graph::Id scores = g.scale(g.bmm(qh, kh, /*trans_b=*/true, /*shared_a=*/shared_q), scale);
    Graph::Id attn = g.softmax_lastdim(scores);
    outs.push_back(g.bmm(attn, vh, /*trans_b=*/false, /*shared_a=*/false));
  }
  return outs.size() == 1 ? outs[0] : g.concat(outs, 2);
}

}  // namespace

Graph::Id sste_forward(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id x,
                       const std::vector<std::vector<int64_t>>& dt_batch) {
  const Tensor& xv = g.val(x);
  ALISE_CHECK(xv.ndim() == 5, "sste input must be [B][T][c][h][w]");
  const int64_t b = xv.dim(0), t = xv.dim(1), c = xv.dim(2), h = xv.dim(3), w = xv.dim(4);
  ALISE_CHECK(c == cfg.c_in, "input has " << c << " channels, encoder expects " << cfg.c_in);
  ALISE_CHECK(static_cast<int64_t>(dt_batch.size()) == b, "dt batch size mismatch");
  for (const auto& dt : dt_batch)
    ALISE_CHECK(static_cast<int64_t>(dt.size()) == t, "dt length mismatch");
  const int64_t min_side = std::min(h, w);
  ALISE_CHECK(min_side >= (1 << cfg.n_down), "spatial size too small for " << cfg.n_down
                                                                           << " downsamplings");

  // per-image U-shaped conv stack, shared over dates
  Graph::Id cur = g.reshape(x, {b * t, c, h, w});
  cur = conv_block(g, ps, "enc.in_conv", cur, 1);
  std::vector<Graph::Id> skips;
  for (int i = 0; i < cfg.n_down; ++i) {
    const std::string lvl = "enc.down" + std::to_string(i);
    skips.push_back(cur);
    cur = conv_block(g, ps, lvl + ".pool", cur, 2);
    cur = residual_block(g, ps, lvl + ".res", cur);
  }
  for (int i = cfg.n_down - 1; i >= 0; --i) {
    const std::string lvl = "enc.up" + std::to_string(i);
    cur = conv_block(g, ps, lvl + ".conv", g.upsample2x(cur), 1);
    cur = g.concat({cur, skips[static_cast<size_t>(i)]}, 1);
    cur = conv_block(g, ps, lvl + ".fuse", cur, 1);
  }

  // per-pixel temporal transformer with sinusoidal day-offset codes
  Graph::Id tokens = g.reshape(cur, {b, t, cfg.d_model, h, w});
  tokens = g.permute(tokens, {0, 3, 4, 1, 2});               // [B][h][w][T][D]
  tokens = g.reshape(tokens, {b * h * w, t, cfg.d_model});   // [P][T][D]

  Tensor pe_full({b * h * w, t, cfg.d_model});
  for (int64_t bi = 0; bi < b; ++bi) {
    const Tensor pe = positional_encoding(dt_batch[static_cast<size_t>(bi)], cfg.d_model);
    for (int64_t px = 0; px < h * w; ++px)
      for (int64_t i = 0; i < t * cfg.d_model; ++i)
        pe_full[(bi * h * w + px) * t * cfg.d_model + i] = pe[i];
  }
  tokens = g.add(tokens, g.input(std::move(pe_full)));

  const double self_scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model / cfg.n_tr_heads));
  for (int l = 0; l < cfg.n_tr_layers; ++l) {
    const std::string lyr = "enc.tr" + std::to_string(l);
    Graph::Id a = g.layer_norm(tokens, g.param(ps, lyr + ".ln1.g"), g.param(ps, lyr + ".ln1.b"));
    Graph::Id q = g.linear(a, g.param(ps, lyr + ".q.w"), g.param(ps, lyr + ".q.b"));
    Graph::Id k = g.linear(a, g.param(ps, lyr + ".k.w"), g.param(ps, lyr + ".k.b"));
    Graph::Id v = g.linear(a, g.param(ps, lyr + ".v.w"), g.param(ps, lyr + ".v.b"));
    Graph::Id o = multihead_attention(g, q, k, v, cfg.n_tr_heads, self_scale, /*shared_q=*/false);
    o = g.linear(o, g.param(ps, lyr + ".o.w"), g.param(ps, lyr + ".o.b"));
    tokens = g.add(tokens, o);
    Graph::Id f = g.layer_norm(tokens, g.param(ps, lyr + ".ln2.g"), g.param(ps, lyr + ".ln2.b"));
    f = g.relu(g.linear(f, g.param(ps, lyr + ".ff1.w"), g.param(ps, lyr + ".ff1.b")));
    f = g.linear(f, g.param(ps, lyr + ".ff2.w"), g.param(ps, lyr + ".ff2.b"));
    tokens = g.add(tokens, f);
  }

  tokens = g.reshape(tokens, {b, h, w, t, cfg.d_model});
  return g.permute(tokens, {0, 3, 4, 1, 2});  // [B][T][D][h][w]
}

Graph::Id temporal_project(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id psi) {
  const Tensor& pv = g.val(psi);
  ALISE_CHECK(pv.ndim() == 5 && pv.dim(2) == cfg.d_model, "psi must be [B][T][d_model][h][w]");
  const int64_t b = pv.dim(0), t = pv.dim(1), h = pv.dim(3), w = pv.dim(4);

  Graph::Id keys = g.permute(psi, {0, 3, 4, 1, 2});             // [B][h][w][T][D]
  keys = g.reshape(keys, {b * h * w, t, cfg.d_model});          // [P][T][D]

  // Y = softmax(Q W1^T Psi^T / sqrt(d_model)) Psi, two heads over split channels
  Graph::Id q = g.linear(g.param(ps, "enc.queries"), g.param(ps, "enc.q_proj.w"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  Graph::Id y = multihead_attention(g, q, keys, keys, cfg.proj_heads, scale, /*shared_q=*/true);

  y = g.reshape(y, {b, h, w, cfg.n_q, cfg.d_model});
  return g.permute(y, {0, 3, 4, 1, 2});  // [B][n_q][D][h][w]
}

Graph::Id encode(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id x,
                 const std::vector<std::vector<int64_t>>& dt_batch) {
  return temporal_project(g, ps, cfg, sste_forward(g, ps, cfg, x, dt_batch));
}

Graph::Id encode_batch(Graph& g, ParamStore& ps, const EncoderConfig& cfg,
                       const std::vector<const Sits*>& batch) {
  Graph::Id x = g.input(stack_values(batch));
  std::vector<std::vector<int64_t>> dt_batch;
  for (const Sits* s : batch) dt_batch.push_back(delta_t(s->dates));
  return encode(g, ps, cfg, x, dt_batch);
}

Graph::Id embed(Graph& g, ParamStore& ps, int64_t d_emb, Graph::Id y, bool train_mode) {
  const Tensor& yv = g.val(y);
  ALISE_CHECK(yv.ndim() == 5, "embed input must be [B][n_q][d_model][h][w]");
  const int64_t b = yv.dim(0), nq = yv.dim(1), d = yv.dim(2), h = yv.dim(3), w = yv.dim(4);
  Graph::Id rows = g.permute(y, {0, 1, 3, 4, 2});  // [B][n_q][h][w][D]
  rows = g.reshape(rows, {b * nq * h * w, d});
  Graph::Id z = g.linear(rows, g.param(ps, "proj.fc1.w"), g.param(ps, "proj.fc1.b"));
  if (train_mode) z = g.batch_std_cols(z);
  z = g.relu(z);
  z = g.linear(z, g.param(ps, "proj.fc2.w"), g.param(ps, "proj.fc2.b"));
  (void)d_emb;
  return z;  // [N][d_emb]
}

Graph::Id invariance_loss(Graph& g, Graph::Id za, Graph::Id zb) {
  ALISE_CHECK(g.val(za).same_shape(g.val(zb)), "invariance loss shape mismatch");
  const int64_t n = g.val(za).dim(0);
  Graph::Id d = g.sub(za, zb);
  return g.scale(g.sum_all(g.mul(d, d)), 1.0 / static_cast<double>(n));
}

Graph::Id covariance_penalty(Graph& g, Graph::Id z) {
  const Tensor& zv = g.val(z);
  ALISE_CHECK(zv.ndim() == 2, "covariance penalty input must be [N][F]");
  const int64_t n = zv.dim(0), f = zv.dim(1);
  ALISE_CHECK(n >= 2, "covariance needs at least 2 samples, got " << n);
  Graph::Id zc = g.center_cols(z);
  Graph::Id zt = g.reshape(g.permute(zc, {1, 0}), {1, f, n});
  Graph::Id c = g.bmm(zt, g.reshape(zc, {1, n, f}), /*trans_b=*/false, /*shared_a=*/false);
  c = g.scale(c, 1.0 / static_cast<double>(n - 1));
  Tensor offdiag = Tensor::full({1, f, f}, 1.0);
  for (int64_t i = 0; i < f; ++i) offdiag[i * f + i] = 0.0;
  Graph::Id masked = g.mul(g.mul(c, c), g.input(std::move(offdiag)));
  return g.scale(g.sum_all(masked), 1.0 / static_cast<double>(f));
}

Graph::Id covariance_loss(Graph& g, Graph::Id za, Graph::Id zb) {
  return g.add(covariance_penalty(g, za), covariance_penalty(g, zb));
}

Graph::Id build_queries(Graph& g, ParamStore& ps, const std::vector<int64_t>& dt_target,
                        int64_t d_model) {
  Graph::Id pe = g.input(positional_encoding(dt_target, d_model));
  return g.add_bcast(pe, g.param(ps, "dec.mask_token"));  // [T_target][D]
}

Graph::Id decode_series(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id y_series,
                        const std::vector<int64_t>& dt_target) {
  const Tensor& yv = g.val(y_series);
  ALISE_CHECK(yv.ndim() == 4 && yv.dim(0) == cfg.n_q && yv.dim(1) == cfg.d_model,
              "decode input must be [n_q][d_model][h][w]");
  const int64_t h = yv.dim(2), w = yv.dim(3);
  const int64_t tt = static_cast<int64_t>(dt_target.size());

  Graph::Id vals = g.permute(y_series, {2, 3, 0, 1});          // [h][w][n_q][D]
  vals = g.reshape(vals, {h * w, cfg.n_q, cfg.d_model});       // values: raw Y
  Graph::Id keys = g.linear(vals, g.param(ps, "dec.k_proj.w"));

  Graph::Id queries = build_queries(g, ps, dt_target, cfg.d_model);
  queries = g.linear(queries, g.param(ps, "dec.q_proj.w"));    // [T_t][D]

  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  Graph::Id scores = g.scale(g.bmm(queries, keys, /*trans_b=*/true, /*shared_a=*/true), scale);
  Graph::Id attn = g.softmax_lastdim(scores);                  // [hw][T_t][n_q]
  Graph::Id out = g.bmm(attn, vals, /*trans_b=*/false, /*shared_a=*/false);  // [hw][T_t][D]

  out = g.linear(out, g.param(ps, "dec.out.w"), g.param(ps, "dec.out.b"));   // [hw][T_t][c]
  out = g.reshape(out, {h, w, tt, cfg.c_in});
  return g.permute(out, {2, 3, 0, 1});  // [T_t][c][h][w]
}

Graph::Id cross_recon_loss(Graph& g, ParamStore& ps, const EncoderConfig& cfg,
                           const std::vector<const ViewPair*>& pairs, Graph::Id ya, Graph::Id yb) {
  const int64_t b = g.val(ya).dim(0);
  ALISE_CHECK(static_cast<int64_t>(pairs.size()) == b, "pair batch size mismatch");
  Graph::Id total = -1;
  for (int64_t bi = 0; bi < b; ++bi) {
    const ViewPair& vp = *pairs[static_cast<size_t>(bi)];
    auto series_latent = [&](Graph::Id y) {
      Graph::Id one = g.slice(y, 0, bi, 1);
      return g.reshape(one, {cfg.n_q, cfg.d_model, g.val(y).dim(3), g.val(y).dim(4)});
    };
    Graph::Id rec_a = decode_series(g, ps, cfg, series_latent(yb), delta_t(vp.view_a.dates));
    Graph::Id rec_b = decode_series(g, ps, cfg, series_latent(ya), delta_t(vp.view_b.dates));
    Graph::Id la = g.masked_mse(rec_a, vp.view_a.values, vp.view_a.validity);
    Graph::Id lb = g.masked_mse(rec_b, vp.view_b.values, vp.view_b.validity);
    Graph::Id pair_loss = g.scale(g.add(la, lb), 0.5);
    total = (total < 0) ? pair_loss : g.add(total, pair_loss);
  }
  return g.scale(total, 1.0 / static_cast<double>(b));
}

Graph::Id probe_logits(Graph& g, ParamStore& ps, const EncoderConfig& cfg, int64_t k, Graph::Id y) {
  const Tensor& yv = g.val(y);
  ALISE_CHECK(yv.ndim() == 5 && yv.dim(1) == cfg.n_q && yv.dim(2) == cfg.d_model,
              "probe input must be [B][n_q][d_model][h][w]");
  ALISE_CHECK(ps.value("probe.w").dim(0) == k, "probe head class count mismatch");
  const int64_t b = yv.dim(0), h = yv.dim(3), w = yv.dim(4);
  Graph::Id feats = g.permute(y, {0, 3, 4, 1, 2});  // [B][h][w][n_q][D]
  feats = g.reshape(feats, {b * h * w, cfg.n_q * cfg.d_model});
  return g.linear(feats, g.param(ps, "probe.w"), g.param(ps, "probe.b"));
}

}  // namespace alise::model
