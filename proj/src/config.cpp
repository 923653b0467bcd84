#include "alise/config.hpp"

#include <fstream>
#include <sstream>

namespace alise {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  ALISE_CHECK(f.good(), "cannot read config " << path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

KvConfig KvConfig::from_text(const std::string& text) {
  KvConfig cfg;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    ALISE_CHECK(eq != std::string::npos, "config line without '=': " << line);
    cfg.kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

std::string KvConfig::get(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stoll(it->second);
  } catch (...) {
    ALISE_CHECK(false, "config key '" << key << "' is not an integer: " << it->second);
  }
  return dflt;
}

double KvConfig::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stod(it->second);
  } catch (...) {
    ALISE_CHECK(false, "config key '" << key << "' is not a number: " << it->second);
  }
  return dflt;
}

std::string KvConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv) {
  TrainConfig c;
  c.train_dir = kv.get("train_dir", c.train_dir);
  c.val_dir = kv.get("val_dir", c.val_dir);
  c.spatial_size = kv.get_int("spatial_size", c.spatial_size);
  c.n_consecutive = kv.get_int("n_consecutive", c.n_consecutive);
  c.c_in = kv.get_int("c_in", c.c_in);
  c.d_model = kv.get_int("d_model", c.d_model);
  c.n_q = kv.get_int("n_q", c.n_q);
  c.d_emb = kv.get_int("d_emb", c.d_emb);
  c.n_down = kv.get_int("n_down", c.n_down);
  c.n_tr_layers = kv.get_int("n_tr_layers", c.n_tr_layers);
  c.n_tr_heads = kv.get_int("n_tr_heads", c.n_tr_heads);
  c.d_hidden = kv.get_int("d_hidden", c.d_hidden);
  c.proj_heads = kv.get_int("proj_heads", c.proj_heads);
  c.t_w = kv.get_int("t_w", c.t_w);
  c.w_rec = kv.get_double("w_rec", c.w_rec);
  c.w_inv = kv.get_double("w_inv", c.w_inv);
  c.w_cov = kv.get_double("w_cov", c.w_cov);
  c.batch_size = kv.get_int("batch_size", c.batch_size);
  c.epochs = kv.get_int("epochs", c.epochs);
  c.lr_max = kv.get_double("lr_max", c.lr_max);
  c.t0 = kv.get_int("t0", c.t0);
  c.probe_lr = kv.get_double("probe_lr", c.probe_lr);
  c.probe_epochs = kv.get_int("probe_epochs", c.probe_epochs);
  c.plateau_patience = kv.get_int("plateau_patience", c.plateau_patience);
  c.plateau_decay = kv.get_double("plateau_decay", c.plateau_decay);
  c.subset = kv.get_int("subset", c.subset);
  c.k = kv.get_int("k", c.k);
  c.seed = static_cast<uint64_t>(kv.get_int("seed", static_cast<int64_t>(c.seed)));
  ALISE_CHECK(c.w_rec >= 0 && c.w_inv >= 0 && c.w_cov >= 0, "loss weights must be non-negative");
  ALISE_CHECK(c.w_rec + c.w_inv + c.w_cov > 0, "at least one loss weight must be positive");
  ALISE_CHECK(c.t_w >= 1 && c.batch_size >= 1 && c.epochs >= 1, "bad training config");
  return c;
}

KvConfig TrainConfig::to_kv() const {
  KvConfig kv;
  auto set_i = [&](const char* k, int64_t v) { kv.set(k, std::to_string(v)); };
  auto set_d = [&](const char* k, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    kv.set(k, os.str());
  };
  kv.set("train_dir", train_dir);
  kv.set("val_dir", val_dir);
  set_i("spatial_size", spatial_size);
  set_i("n_consecutive", n_consecutive);
  set_i("c_in", c_in);
  set_i("d_model", d_model);
  set_i("n_q", n_q);
  set_i("d_emb", d_emb);
  set_i("n_down", n_down);
  set_i("n_tr_layers", n_tr_layers);
  set_i("n_tr_heads", n_tr_heads);
  set_i("d_hidden", d_hidden);
  set_i("proj_heads", proj_heads);
  set_i("t_w", t_w);
  set_d("w_rec", w_rec);
  set_d("w_inv", w_inv);
  set_d("w_cov", w_cov);
  set_i("batch_size", batch_size);
  set_i("epochs", epochs);
  set_d("lr_max", lr_max);
  set_i("t0", t0);
  set_d("probe_lr", probe_lr);
  set_i("probe_epochs", probe_epochs);
  set_i("plateau_patience", plateau_patience);
  set_d("plateau_decay", plateau_decay);
  set_i("subset", subset);
  set_i("k", k);
  set_i("seed", static_cast<int64_t>(seed));
  return kv;
}

SynthConfig synth_config_from_kv(const KvConfig& kv) {
  SynthConfig c;
  c.n_series = kv.get_int("n_series", c.n_series);
  c.size = kv.get_int("size", c.size);
  c.channels = kv.get_int("channels", c.channels);
  c.k = static_cast<int32_t>(kv.get_int("k", c.k));
  c.t_min = kv.get_int("t_min", c.t_min);
  c.t_max = kv.get_int("t_max", c.t_max);
  c.years = static_cast<int>(kv.get_int("years", c.years));
  c.start_year = static_cast<int>(kv.get_int("start_year", c.start_year));
  c.change_rate = kv.get_double("change_rate", c.change_rate);
  c.cloud_rate = kv.get_double("cloud_rate", c.cloud_rate);
  c.noise_sigma = kv.get_double("noise_sigma", c.noise_sigma);
  c.background_rate = kv.get_double("background_rate", c.background_rate);
  return c;
}

}  // namespace alise
