#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alise/config.hpp"
#include "alise/graph.hpp"
#include "alise/model.hpp"
#include "alise/sits.hpp"

namespace alise {

EncoderConfig encoder_config(const TrainConfig& cfg);

/// Series normalized with one set of robust statistics (always the training
/// split's, reused verbatim for validation/test sets).
struct Dataset {
  std::vector<LabeledSits> series;
  NormStats stats;
};

Dataset normalize_dataset(std::vector<LabeledSits> raw, const NormStats* reuse_stats);
Dataset load_dataset_dir(const std::string& dir, const NormStats* reuse_stats);

/// Encoder + SSL projector + reconstruction decoder parameters.
void init_pretrain_params(ParamStore& ps, const TrainConfig& cfg);

std::vector<Tensor> snapshot_params(const ParamStore& ps);
void restore_params(ParamStore& ps, const std::vector<Tensor>& snap);

struct SslLossIds {
  Graph::Id l_rec, l_inv, l_cov, total;
};

/// Builds the full multi-view objective for one batch of series.
SslLossIds build_ssl_loss(Graph& g, ParamStore& ps, const TrainConfig& cfg,
                          const std::vector<const Sits*>& batch, Rng& sample_rng);

struct PretrainResult {
  double best_val_loss = 0.0;
  int64_t best_epoch = -1;
  std::vector<double> train_curve, val_curve;
};

/// Pre-trains on `train`, tracks the validation total loss once per epoch and
/// stores the best-validation parameters at ckpt_path. metrics_path gets one
/// comma-separated line per step: step,l_rec,l_inv,l_cov,total.
PretrainResult pretrain(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                        const std::string& ckpt_path, const std::string& metrics_path,
                        const std::string& plot_dir = "");

/// Frozen-encoder latent of one series: [n_q][d_model][h][w].
Tensor encode_series_nograd(ParamStore& ps, const EncoderConfig& enc, const Sits& s);

struct ProbeResult {
  double val_macro_f1 = 0.0;
  double final_val_ce = 0.0;
  std::vector<double> val_curve;
};

/// Pixel classification on year-1 sub-series. frozen=true trains only the
/// linear head on cached latents; frozen=false updates the encoder too
/// (fine-tuning, or the fully supervised baseline when init_ckpt is empty).
/// cfg.subset > 0 restricts training to that many series.
ProbeResult train_probe(const TrainConfig& cfg, const Dataset& train, const Dataset& val,
                        const std::string& init_ckpt, bool frozen, const std::string& out_ckpt,
                        const std::string& metrics_path, const std::string& plot_dir = "");

struct ChangeDetResult {
  double auc_alise = 0.0;
  double auc_gf = 0.0;
  int64_t n_pixels = 0;
  int64_t n_series = 0;
};

/// Training-free change detection between the two years of each series,
/// against the linear gap-filling baseline on the same pixels. When out_dir
/// is set, per-series distance maps are written as raw arrays with sidecars.
ChangeDetResult change_detect(const TrainConfig& cfg, const Dataset& eval_set,
                              const std::string& ckpt, const std::string& out_dir = "");

struct SweepCell {
  int64_t t_w = 0, n_q = 0;
  double w_inv = 0.0, w_cov = 0.0, w_rec = 1.0;
  uint64_t seed = 0;
  double macro_f1 = 0.0, auc = 0.0;
  bool ok = false;
  std::string error;
};

/// Pretrain + frozen probe + change detection per grid cell; failures are
/// isolated per cell. Writes a CSV report and returns the rows.
std::vector<SweepCell> sweep(const TrainConfig& base, const Dataset& train, const Dataset& val,
                             const std::vector<int64_t>& tw_grid,
                             const std::vector<int64_t>& nq_grid,
                             const std::vector<double>& winv_grid,
                             const std::vector<double>& wcov_grid, const std::string& work_dir,
                             const std::string& report_csv);

}  // namespace alise
