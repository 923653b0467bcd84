#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "alise/sits.hpp"

namespace alise {

/// UTF-8 key=value config file. '#' starts a comment; blank lines ignored.
class KvConfig {
 public:
  KvConfig() = default;
  static KvConfig from_file(const std::string& path);
  static KvConfig from_text(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& dflt) const;
  int64_t get_int(const std::string& key, int64_t dflt) const;
  double get_double(const std::string& key, double dflt) const;
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  /// Deterministic (sorted) rendering, suitable for checkpoint snapshots.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> kv_;
};

/// Everything one pre-training or downstream run needs. Defaults follow the
/// published pre-training table (t_w=2, n_q=10, b_s=2, d_model=64, d_emb=128,
/// w_rec=1, w_inv=1, w_cov=0); sizes are overridable down to desk scale.
struct TrainConfig {
  // data
  std::string train_dir, val_dir;
  int64_t spatial_size = 16;
  int64_t n_consecutive = 20;  // dates drawn per series per epoch

  // architecture
  int64_t c_in = 10;
  int64_t d_model = 64;
  int64_t n_q = 10;
  int64_t d_emb = 128;
  int64_t n_down = 3;
  int64_t n_tr_layers = 3;
  int64_t n_tr_heads = 4;
  int64_t d_hidden = 128;
  int64_t proj_heads = 2;

  // objective
  int64_t t_w = 2;
  double w_rec = 1.0;
  double w_inv = 1.0;
  double w_cov = 0.0;

  // optimization
  int64_t batch_size = 2;
  int64_t epochs = 30;
  double lr_max = 1e-3;     // pre-training, cosine warm restarts
  int64_t t0 = 2;
  double probe_lr = 1e-4;   // downstream, plateau scheduler
  int64_t probe_epochs = 60;
  int64_t plateau_patience = 10;
  double plateau_decay = 0.05;
  int64_t subset = 0;       // label-scarcity subset size; 0 = all series
  int64_t k = 5;            // classes for downstream heads
  uint64_t seed = 0;

  static TrainConfig from_kv(const KvConfig& kv);
  KvConfig to_kv() const;
};

SynthConfig synth_config_from_kv(const KvConfig& kv);

}  // namespace alise
