#include "alise/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alise/checkpoint.hpp"
#include "alise/downstream.hpp"
#include "alise/optim.hpp"
#include "alise/plot.hpp"
#include "alise/schedule.hpp"

namespace fs = std::filesystem;

namespace alise {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void shuffle_indices(std::vector<int64_t>& idx, Rng& rng) {
  for (int64_t i = static_cast<int64_t>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
}

Sits probe_input(const Sits& s, int64_t spatial) {
  const Sits year1 = filter_year(s, s.dates.front().year);
  return center_crop(year1, spatial);
}

}  // namespace

EncoderConfig encoder_config(const TrainConfig& cfg) {
  EncoderConfig e;
  e.c_in = cfg.c_in;
  e.d_model = cfg.d_model;
  e.n_q = cfg.n_q;
  e.n_down = static_cast<int>(cfg.n_down);
  e.n_tr_layers = static_cast<int>(cfg.n_tr_layers);
  e.n_tr_heads = static_cast<int>(cfg.n_tr_heads);
  e.d_hidden = cfg.d_hidden;
  e.proj_heads = static_cast<int>(cfg.proj_heads);
  return e;
}

Dataset normalize_dataset(std::vector<LabeledSits> raw, const NormStats* reuse_stats) {
  Dataset ds;
  NormStats stats;
  if (reuse_stats != nullptr) {
    stats = *reuse_stats;
  } else {
    std::vector<const Sits*> split;
    for (const LabeledSits& s : raw) split.push_back(&s.sits);
    stats = compute_norm_stats(split);
  }
  for (LabeledSits& s : raw) {
    LabeledSits n;
    n.sits = robust_normalize(s.sits, stats);
    n.labels = std::move(s.labels);
    n.change = std::move(s.change);
    ds.series.push_back(std::move(n));
  }
  ds.stats = stats;
  return ds;
}

Dataset load_dataset_dir(const std::string& dir, const NormStats* reuse_stats) {
  std::vector<LabeledSits> raw;
  for (const std::string& s : list_series_dirs(dir)) raw.push_back(load_series(s));
  return normalize_dataset(std::move(raw), reuse_stats);
}

void init_pretrain_params(ParamStore& ps, const TrainConfig& cfg) {
  const EncoderConfig enc = encoder_config(cfg);
  Rng rng = Rng(cfg.seed).fork("init");
  model::init_encoder(ps, enc, rng.fork("encoder"));
  model::init_projector(ps, enc, cfg.d_emb, rng.fork("projector"));
  model::init_decoder(ps, enc, rng.fork("decoder"));
}

std::vector<Tensor> snapshot_params(const ParamStore& ps) {
  std::vector<Tensor> snap;
  for (const std::string& name : ps.names()) snap.push_back(ps.value(name).clone());
  return snap;
}

void restore_params(ParamStore& ps, const std::vector<Tensor>& snap) {
  const auto& names = ps.names();
  ALISE_CHECK(names.size() == snap.size(), "snapshot size mismatch");
  for (size_t i = 0; i < names.size(); ++i) {
    Tensor& dst = ps.value(names[i]);
    ALISE_CHECK(dst.same_shape(snap[i]), "snapshot shape mismatch");
    std::copy(snap[i].data(), snap[i].data() + snap[i].numel(), dst.data());
  }
}

SslLossIds build_ssl_loss(Graph& g, ParamStore& ps, const TrainConfig& cfg,
                          const std::vector<const Sits*>& batch, Rng& sample_rng) {
  const EncoderConfig enc = encoder_config(cfg);
  std::vector<Sits> selected;
  std::vector<ViewPair> pairs;
  selected.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const Sits* s = batch[i];
    Rng per = sample_rng.fork(static_cast<uint64_t>(i));
    Rng crop_rng = per.fork("crop");
    Sits cropped = random_crop(*s, std::min({cfg.spatial_size, s->h(), s->w()}), crop_rng);
    Rng sel_rng = per.fork("dates");
    selected.push_back(select_consecutive(cropped, std::min(cfg.n_consecutive, cropped.t()),
                                          sel_rng));
  }
  for (const Sits& s : selected) pairs.push_back(make_views(s, cfg.t_w));

  std::vector<const Sits*> va, vb;
  std::vector<const ViewPair*> pr;
  for (const ViewPair& p : pairs) {
    va.push_back(&p.view_a);
    vb.push_back(&p.view_b);
    pr.push_back(&p);
  }
  Graph::Id ya = model::encode_batch(g, ps, enc, va);
  Graph::Id yb = model::encode_batch(g, ps, enc, vb);
  Graph::Id za = model::embed(g, ps, cfg.d_emb, ya, /*train_mode=*/true);
  Graph::Id zb = model::embed(g, ps, cfg.d_emb, yb, /*train_mode=*/true);

  SslLossIds ids;
  ids.l_inv = model::invariance_loss(g, za, zb);
  ids.l_cov = model::covariance_loss(g, za, zb);
  ids.l_rec = model::cross_recon_loss(g, ps, enc, pr, ya, yb);
  ids.total = g.add(g.add(g.scale(ids.l_inv, cfg.w_inv), g.scale(ids.l_cov, cfg.w_cov)),
                    g.scale(ids.l_rec, cfg.w_rec));
  return ids;
}

namespace {

double dataset_ssl_loss(const TrainConfig& cfg, ParamStore& ps, const Dataset& ds, Rng rng) {
  double total = 0.0;
  int64_t batches = 0;
  const int64_t n = static_cast<int64_t>(ds.series.size());
  for (int64_t start = 0; start < n; start += cfg.batch_size) {
    std::vector<const Sits*> batch;
    for (int64_t i = start; i < std::min(n, start + cfg.batch_size); ++i)
      batch.push_back(&ds.series[static_cast<size_t>(i)].sits);
    Graph g(/*grad_enabled=*/false);
    Rng sample_rng = rng.fork(static_cast<uint64_t>(start));
    SslLossIds ids = build_ssl_loss(g, ps, cfg, batch, sample_rng);
    total += g.val(ids.total)[0];
    ++batches;
  }
  return total / static_cast<double>(batches);
}

}  // namespace

PretrainResult pretrain(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                        const std::string& ckpt_path, const std::string& metrics_path,
                        const std::string& plot_dir) {
  ALISE_CHECK(!train.series.empty() && !val.series.empty(), "pretrain needs train and val series");
  ParamStore ps;
  init_pretrain_params(ps, cfg);
  Adam opt(ps, cfg.lr_max);
  CosineWarmRestarts sched(cfg.t0, cfg.lr_max);
  Rng root(cfg.seed);

  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path);
    ALISE_CHECK(metrics.good(), "cannot write metrics " << metrics_path);
    metrics << "step,l_rec,l_inv,l_cov,total\n";
  }

  PretrainResult res;
  std::vector<Tensor> best_snap;
  int64_t step = 0;
  const int64_t n = static_cast<int64_t>(train.series.size());
  std::vector<int64_t> order(n);
  for (int64_t i = 0; i < n; ++i) order[i] = i;

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.set_lr(sched.lr_at(epoch));
    Rng erng = root.fork("epoch").fork(static_cast<uint64_t>(epoch));
    Rng orng = erng.fork("order");
    shuffle_indices(order, orng);

    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      std::vector<const Sits*> batch;
      for (int64_t i = start; i < std::min(n, start + cfg.batch_size); ++i)
        batch.push_back(&train.series[static_cast<size_t>(order[i])].sits);

      ps.zero_grad();
      Graph g;
      Rng sample_rng = erng.fork("batch").fork(static_cast<uint64_t>(start));
      SslLossIds ids = build_ssl_loss(g, ps, cfg, batch, sample_rng);
      const double total = g.val(ids.total)[0];
      ALISE_CHECK(std::isfinite(total),
                  "divergent loss (NaN/Inf) at step " << step << ", epoch " << epoch);
      g.backward(ids.total);
      opt.step();

      if (metrics.is_open())
        metrics << step << "," << fmt(g.val(ids.l_rec)[0]) << "," << fmt(g.val(ids.l_inv)[0])
                << "," << fmt(g.val(ids.l_cov)[0]) << "," << fmt(total) << "\n";
      epoch_loss += total;
      ++epoch_batches;
      ++step;
    }
    res.train_curve.push_back(epoch_loss / static_cast<double>(epoch_batches));

    const double val_loss =
        dataset_ssl_loss(cfg, ps, val, root.fork("val").fork(static_cast<uint64_t>(epoch)));
    res.val_curve.push_back(val_loss);
    if (res.best_epoch < 0 || val_loss < res.best_val_loss) {
      res.best_val_loss = val_loss;
      res.best_epoch = epoch;
      best_snap = snapshot_params(ps);
    }
  }

  restore_params(ps, best_snap);
  if (!ckpt_path.empty()) save_checkpoint(ckpt_path, ps, cfg.to_kv().to_text());
  if (!plot_dir.empty()) {
    fs::create_directories(plot_dir);
    write_line_plot(plot_dir + "/pretrain_loss.ppm", "ssl loss",
                    {{"train", res.train_curve}, {"val", res.val_curve}});
  }
  return res;
}

Tensor encode_series_nograd(ParamStore& ps, const EncoderConfig& enc, const Sits& s) {
  Graph g(/*grad_enabled=*/false);
  Graph::Id y = model::encode_batch(g, ps, enc, {&s});
  const Tensor& yv = g.val(y);
  return yv.reshaped({yv.dim(1), yv.dim(2), yv.dim(3), yv.dim(4)}).clone();
}

namespace {

struct ProbeEval {
  double ce = 0.0;
  double macro_f1 = 0.0;
};

// Pools logits over a set of cached latents and scores them.
ProbeEval evaluate_probe(ParamStore& ps, const EncoderConfig& enc, int64_t k,
                         const std::vector<Tensor>& feats,
                         const std::vector<std::vector<int32_t>>& labels) {
  std::vector<int32_t> pooled_pred, pooled_truth;
  double ce_sum = 0.0;
  int64_t ce_count = 0;
  for (size_t i = 0; i < feats.size(); ++i) {
    Graph g(/*grad_enabled=*/false);
    const Tensor& f = feats[i];
    Graph::Id y = g.input(f.reshaped({1, f.dim(0), f.dim(1), f.dim(2), f.dim(3)}));
    Graph::Id logits = model::probe_logits(g, ps, enc, k, y);
    bool any = false;
    for (int32_t l : labels[i])
      if (l != kIgnoreId) any = true;
    if (any) {
      Graph::Id ce = g.cross_entropy(logits, labels[i], kIgnoreId);
      ce_sum += g.val(ce)[0];
      ++ce_count;
    }
    const std::vector<int32_t> pred = argmax_rows(g.val(logits));
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_truth.insert(pooled_truth.end(), labels[i].begin(), labels[i].end());
  }
  ProbeEval ev;
  ev.ce = ce_sum / static_cast<double>(std::max<int64_t>(ce_count, 1));
  ev.macro_f1 = f1_scores(pooled_pred, pooled_truth, static_cast<int32_t>(k)).macro;
  return ev;
}

}  // namespace

ProbeResult train_probe(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                        const std::string& init_ckpt, bool frozen, const std::string& out_ckpt,
                        const std::string& metrics_path, const std::string& plot_dir) {
  ALISE_CHECK(!train.series.empty() && !val.series.empty(), "probe needs train and val series");
  const EncoderConfig enc = encoder_config(cfg);
  ParamStore ps;
  init_pretrain_params(ps, cfg);
  if (!init_ckpt.empty()) load_checkpoint(init_ckpt, ps);
  model::init_probe(ps, enc, cfg.k, Rng(cfg.seed).fork("probe_init"));

  Rng root = Rng(cfg.seed).fork("probe");

  // label-scarcity subsets pick a random selection of training series
  std::vector<int64_t> train_ids(train.series.size());
  for (size_t i = 0; i < train_ids.size(); ++i) train_ids[i] = static_cast<int64_t>(i);
  if (cfg.subset > 0 && cfg.subset < static_cast<int64_t>(train_ids.size())) {
    Rng srng = root.fork("subset");
    shuffle_indices(train_ids, srng);
    train_ids.resize(static_cast<size_t>(cfg.subset));
    std::sort(train_ids.begin(), train_ids.end());
  }

  auto series_labels = [&](const LabeledSits& ls) {
    ALISE_CHECK(!ls.labels.empty(), "probe needs labeled series");
    const ClassMap& m = ls.labels[0];
    ALISE_CHECK(m.h == cfg.spatial_size && m.w == cfg.spatial_size,
                "label map size differs from the configured spatial size");
    return m.ids;
  };

  // cached frozen-encoder latents (probe path); fine-tuning re-encodes live
  std::vector<Tensor> train_feats, val_feats;
  std::vector<std::vector<int32_t>> train_labels, val_labels;
  for (int64_t id : train_ids) {
    const LabeledSits& ls = train.series[static_cast<size_t>(id)];
    if (frozen) train_feats.push_back(encode_series_nograd(ps, enc, probe_input(ls.sits, cfg.spatial_size)));
    train_labels.push_back(series_labels(ls));
  }
  for (const LabeledSits& ls : val.series) {
    val_feats.push_back(encode_series_nograd(ps, enc, probe_input(ls.sits, cfg.spatial_size)));
    val_labels.push_back(series_labels(ls));
  }

  Adam opt(ps, cfg.probe_lr);
  opt.set_trainable_prefixes(frozen ? std::vector<std::string>{"probe."}
                                    : std::vector<std::string>{"enc.", "probe."});
  PlateauScheduler sched(cfg.probe_lr, cfg.plateau_patience, cfg.plateau_decay);

  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path);
    ALISE_CHECK(metrics.good(), "cannot write metrics " << metrics_path);
    metrics << "epoch,lr,train_ce,val_ce\n";
  }

  ProbeResult res;
  const int64_t n_train = static_cast<int64_t>(train_labels.size());
  std::vector<int64_t> order(n_train);
  for (int64_t i = 0; i < n_train; ++i) order[i] = i;
  // year-1 date counts differ per series, so live encoding runs one at a time
  const int64_t probe_batch = frozen ? 16 : 1;

  for (int64_t epoch = 0; epoch < cfg.probe_epochs; ++epoch) {
    Rng erng = root.fork("epoch").fork(static_cast<uint64_t>(epoch));
    Rng orng = erng.fork("order");
    shuffle_indices(order, orng);

    double train_ce = 0.0;
    int64_t n_steps = 0;
    for (int64_t start = 0; start < n_train; start += probe_batch) {
      const int64_t end = std::min(n_train, start + probe_batch);
      std::vector<int32_t> batch_labels;
      ps.zero_grad();
      Graph g;
      Graph::Id y;
      if (frozen) {
        std::vector<const Tensor*> parts;
        for (int64_t i = start; i < end; ++i) {
          const Tensor& f = train_feats[static_cast<size_t>(order[i])];
          parts.push_back(&f);
          const auto& lab = train_labels[static_cast<size_t>(order[i])];
          batch_labels.insert(batch_labels.end(), lab.begin(), lab.end());
        }
        Tensor stacked({static_cast<int64_t>(parts.size()), parts[0]->dim(0), parts[0]->dim(1),
                        parts[0]->dim(2), parts[0]->dim(3)});
        const int64_t per = parts[0]->numel();
        for (size_t b = 0; b < parts.size(); ++b)
          std::copy(parts[b]->data(), parts[b]->data() + per,
                    stacked.data() + static_cast<int64_t>(b) * per);
        y = model::probe_logits(g, ps, enc, cfg.k, g.input(std::move(stacked)));
      } else {
        std::vector<Sits> inputs;
        std::vector<const Sits*> batch;
        for (int64_t i = start; i < end; ++i) {
          const LabeledSits& ls = train.series[static_cast<size_t>(train_ids[order[i]])];
          inputs.push_back(probe_input(ls.sits, cfg.spatial_size));
          const auto& lab = train_labels[static_cast<size_t>(order[i])];
          batch_labels.insert(batch_labels.end(), lab.begin(), lab.end());
        }
        for (const Sits& s : inputs) batch.push_back(&s);
        y = model::probe_logits(g, ps, enc, cfg.k,
                                model::encode_batch(g, ps, enc, batch));
      }
      bool any = false;
      for (int32_t l : batch_labels)
        if (l != kIgnoreId) any = true;
      if (!any) continue;
      Graph::Id ce = g.cross_entropy(y, batch_labels, kIgnoreId);
      const double ce_val = g.val(ce)[0];
      ALISE_CHECK(std::isfinite(ce_val), "divergent probe loss at epoch " << epoch);
      g.backward(ce);
      opt.step();
      train_ce += ce_val;
      ++n_steps;
    }
    train_ce /= static_cast<double>(std::max<int64_t>(n_steps, 1));

    // validation round drives the plateau scheduler
    std::vector<Tensor> vfeats;
    const std::vector<Tensor>* vf = &val_feats;
    if (!frozen) {
      for (const LabeledSits& ls : val.series)
        vfeats.push_back(encode_series_nograd(ps, enc, probe_input(ls.sits, cfg.spatial_size)));
      vf = &vfeats;
    }
    const ProbeEval ev = evaluate_probe(ps, enc, cfg.k, *vf, val_labels);
    res.val_curve.push_back(ev.ce);
    opt.set_lr(sched.observe(ev.ce));
    if (metrics.is_open())
      metrics << epoch << "," << fmt(opt.lr()) << "," << fmt(train_ce) << "," << fmt(ev.ce)
              << "\n";
  }

  std::vector<Tensor> ffeats;
  const std::vector<Tensor>* vf = &val_feats;
  if (!frozen) {
    for (const LabeledSits& ls : val.series)
      ffeats.push_back(encode_series_nograd(ps, enc, probe_input(ls.sits, cfg.spatial_size)));
    vf = &ffeats;
  }
  const ProbeEval final_ev = evaluate_probe(ps, enc, cfg.k, *vf, val_labels);
  res.val_macro_f1 = final_ev.macro_f1;
  res.final_val_ce = final_ev.ce;

  if (!out_ckpt.empty()) save_checkpoint(out_ckpt, ps, cfg.to_kv().to_text());
  if (!plot_dir.empty()) {
    fs::create_directories(plot_dir);
    write_line_plot(plot_dir + "/probe_val_ce.ppm", "probe val ce", {{"val_ce", res.val_curve}});
  }
  return res;
}

ChangeDetResult change_detect(const TrainConfig& cfg, const Dataset& eval_set,
                              const std::string& ckpt, const std::string& out_dir) {
  ALISE_CHECK(!eval_set.series.empty(), "change detection needs series");
  const EncoderConfig enc = encoder_config(cfg);
  ParamStore ps;
  init_pretrain_params(ps, cfg);
  if (!ckpt.empty()) load_checkpoint(ckpt, ps);

  if (!out_dir.empty()) fs::create_directories(out_dir);

  std::vector<double> scores_alise, scores_gf;
  std::vector<uint8_t> labels;
  ChangeDetResult res;
  for (size_t si = 0; si < eval_set.series.size(); ++si) {
    const LabeledSits& ls = eval_set.series[si];
    ALISE_CHECK(ls.labels.size() >= 2 && !ls.change.empty(),
                "change detection needs two label years and a change map");
    const int y0 = ls.sits.dates.front().year;
    bool has_y1 = false;
    for (const Date& d : ls.sits.dates) has_y1 = has_y1 || d.year == y0 + 1;
    if (!has_y1) continue;  // series never reaches the second year

    const Sits s1 = center_crop(filter_year(ls.sits, y0), cfg.spatial_size);
    const Sits s2 = center_crop(filter_year(ls.sits, y0 + 1), cfg.spatial_size);
    const Tensor y1 = encode_series_nograd(ps, enc, s1);
    const Tensor y2 = encode_series_nograd(ps, enc, s2);
    const Tensor d_alise = change_map(y1, y2);
    const Tensor d_gf = gf_change_map(s1, s2);

    const int64_t hw = d_alise.numel();
    ALISE_CHECK(static_cast<int64_t>(ls.change.size()) == hw, "change map size mismatch");
    for (int64_t p = 0; p < hw; ++p) {
      if (ls.labels[0].ids[p] == kIgnoreId || ls.labels[1].ids[p] == kIgnoreId) continue;
      scores_alise.push_back(d_alise[p]);
      scores_gf.push_back(d_gf[p]);
      labels.push_back(ls.change[p]);
    }
    ++res.n_series;

    if (!out_dir.empty()) {
      const std::string base = out_dir + "/series_" + std::to_string(si);
      fs::create_directories(base);
      std::ofstream meta(base + "/meta.txt");
      meta << "schema=1\nh=" << d_alise.dim(0) << "\nw=" << d_alise.dim(1)
           << "\narrays=change_alise.f32,change_gf.f32\n";
      auto dump = [&](const std::string& p, const Tensor& t) {
        std::ofstream f(p, std::ios::binary);
        std::vector<float> buf(static_cast<size_t>(t.numel()));
        for (int64_t i = 0; i < t.numel(); ++i) buf[static_cast<size_t>(i)] = static_cast<float>(t[i]);
        f.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<int64_t>(buf.size() * sizeof(float)));
      };
      dump(base + "/change_alise.f32", d_alise);
      dump(base + "/change_gf.f32", d_gf);
    }
  }
  ALISE_CHECK(!labels.empty(), "no labeled non-background pixels for change detection");
  res.n_pixels = static_cast<int64_t>(labels.size());
  res.auc_alise = auc_roc(scores_alise, labels);
  res.auc_gf = auc_roc(scores_gf, labels);
  return res;
}

std::vector<SweepCell> sweep(const TrainConfig& base, const Dataset& train, const Dataset& val,
                             const std::vector<int64_t>& tw_grid,
                             const std::vector<int64_t>& nq_grid,
                             const std::vector<double>& winv_grid,
                             const std::vector<double>& wcov_grid, const std::string& work_dir,
                             const std::string& report_csv) {
  fs::create_directories(work_dir);
  std::vector<SweepCell> rows;
  const std::vector<int64_t> tws = tw_grid.empty() ? std::vector<int64_t>{base.t_w} : tw_grid;
  const std::vector<int64_t> nqs = nq_grid.empty() ? std::vector<int64_t>{base.n_q} : nq_grid;
  const std::vector<double> winvs = winv_grid.empty() ? std::vector<double>{base.w_inv} : winv_grid;
  const std::vector<double> wcovs = wcov_grid.empty() ? std::vector<double>{base.w_cov} : wcov_grid;

  for (int64_t tw : tws)
    for (int64_t nq : nqs)
      for (double winv : winvs)
        for (double wcov : wcovs) {
          SweepCell cell;
          cell.t_w = tw;
          cell.n_q = nq;
          cell.w_inv = winv;
          cell.w_cov = wcov;
          cell.w_rec = base.w_rec;
          cell.seed = base.seed;
          TrainConfig cfg = base;
          cfg.t_w = tw;
          cfg.n_q = nq;
          cfg.w_inv = winv;
          cfg.w_cov = wcov;
          const std::string tag = "tw" + std::to_string(tw) + "_nq" + std::to_string(nq) +
                                  "_wi" + fmt(winv) + "_wc" + fmt(wcov);
          try {
            const std::string ckpt = work_dir + "/" + tag + ".ckpt";
            pretrain(cfg, train, val, ckpt, "");
            const ProbeResult probe = train_probe(cfg, train, val, ckpt, /*frozen=*/true, "", "");
            const ChangeDetResult cd = change_detect(cfg, val, ckpt, "");
            cell.macro_f1 = probe.val_macro_f1;
            cell.auc = cd.auc_alise;
            cell.ok = true;
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
          }
          rows.push_back(cell);
        }

  if (!report_csv.empty()) {
    std::ofstream f(report_csv);
    ALISE_CHECK(f.good(), "cannot write sweep report " << report_csv);
    f << "t_w,n_q,w_inv,w_cov,w_rec,seed,macro_f1,auc,status\n";
    for (const SweepCell& c : rows)
      f << c.t_w << "," << c.n_q << "," << fmt(c.w_inv) << "," << fmt(c.w_cov) << ","
        << fmt(c.w_rec) << "," << c.seed << "," << fmt(c.macro_f1) << "," << fmt(c.auc) << ","
        << (c.ok ? "ok" : c.error) << "\n";
  }
  return rows;
}

}  // namespace alise
