// alise: synthetic SITS generation, self-supervised pre-training of the
// aligned encoder, downstream probing / fine-tuning, training-free change
// detection and hyper-parameter sweeps.

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "alise/checkpoint.hpp"
#include "alise/config.hpp"
#include "alise/train.hpp"

namespace fs = std::filesystem;
using namespace alise;

namespace {

TrainConfig load_train_config(const std::string& path, int64_t seed_override) {
  KvConfig kv = KvConfig::from_file(path);
  if (seed_override >= 0) kv.set("seed", std::to_string(seed_override));
  return TrainConfig::from_kv(kv);
}

std::pair<Dataset, Dataset> load_splits(const TrainConfig& cfg) {
  ALISE_CHECK(!cfg.train_dir.empty() && !cfg.val_dir.empty(),
              "config must set train_dir and val_dir");
  Dataset train = load_dataset_dir(cfg.train_dir, nullptr);
  Dataset val = load_dataset_dir(cfg.val_dir, &train.stats);
  return {std::move(train), std::move(val)};
}

std::vector<int64_t> parse_int_list(const std::string& s) {
  std::vector<int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoll(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ALISE: aligned SITS encoder pre-training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_path, ckpt_path, plot_dir;
  int64_t seed_override = -1;

  auto* synth = app.add_subcommand("synth", "generate a synthetic SITS dataset");
  synth->add_option("--config", config_path, "key=value config file")->required();
  synth->add_option("--out", out_path, "output dataset directory")->required();
  synth->add_option("--seed", seed_override, "generation seed")->required();

  auto* pre = app.add_subcommand("pretrain", "multi-view self-supervised pre-training");
  pre->add_option("--config", config_path)->required();
  pre->add_option("--out", out_path, "run directory (checkpoint + metrics)");
  pre->add_option("--plot", plot_dir, "write loss curves as image files");
  pre->add_option("--seed", seed_override);

  auto* probe = app.add_subcommand("probe", "linear probing on a frozen encoder");
  probe->add_option("--config", config_path)->required();
  probe->add_option("--checkpoint", ckpt_path, "pre-trained checkpoint")->required();
  probe->add_option("--out", out_path);
  probe->add_option("--plot", plot_dir);
  probe->add_option("--seed", seed_override);

  auto* ft = app.add_subcommand("finetune", "fine-tune encoder and head");
  ft->add_option("--config", config_path)->required();
  ft->add_option("--checkpoint", ckpt_path, "pre-trained checkpoint; omit to train from scratch");
  ft->add_option("--out", out_path);
  ft->add_option("--plot", plot_dir);
  ft->add_option("--seed", seed_override);

  auto* cd = app.add_subcommand("changedetect", "training-free change detection vs gap filling");
  cd->add_option("--config", config_path)->required();
  cd->add_option("--checkpoint", ckpt_path)->required();
  cd->add_option("--out", out_path, "write per-series distance maps here");
  cd->add_option("--seed", seed_override);

  auto* sw = app.add_subcommand("sweep", "grid of pre-trainings + evaluations");
  sw->add_option("--config", config_path)->required();
  sw->add_option("--out", out_path, "work directory for checkpoints and the report");
  sw->add_option("--seed", seed_override);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const KvConfig kv = KvConfig::from_file(config_path);
      const SynthConfig scfg = synth_config_from_kv(kv);
      const auto series = synth_generate(scfg, static_cast<uint64_t>(seed_override));
      for (size_t i = 0; i < series.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "series_%05zu", i);
        save_series((fs::path(out_path) / name).string(), series[i],
                    static_cast<uint64_t>(seed_override));
      }
      std::printf("wrote %zu series to %s\n", series.size(), out_path.c_str());
      return 0;
    }

    const TrainConfig cfg = load_train_config(config_path, seed_override);
    if (out_path.empty()) out_path = "runs";
    fs::create_directories(out_path);

    if (pre->parsed()) {
      auto [train, val] = load_splits(cfg);
      const std::string ckpt = (fs::path(out_path) / "alise.ckpt").string();
      const std::string metrics = (fs::path(out_path) / "pretrain_metrics.csv").string();
      const PretrainResult r = pretrain(cfg, train, val, ckpt, metrics, plot_dir);
      std::printf("best val loss %.6f at epoch %lld; checkpoint %s\n", r.best_val_loss,
                  static_cast<long long>(r.best_epoch), ckpt.c_str());
    } else if (probe->parsed() || ft->parsed()) {
      auto [train, val] = load_splits(cfg);
      const bool frozen = probe->parsed();
      const std::string out_ckpt =
          (fs::path(out_path) / (frozen ? "probe.ckpt" : "finetune.ckpt")).string();
      const std::string metrics =
          (fs::path(out_path) / (frozen ? "probe_metrics.csv" : "finetune_metrics.csv")).string();
      const ProbeResult r =
          train_probe(cfg, train, val, ckpt_path, frozen, out_ckpt, metrics, plot_dir);
      std::printf("val macro F1 %.4f (val ce %.4f); head checkpoint %s\n", r.val_macro_f1,
                  r.final_val_ce, out_ckpt.c_str());
    } else if (cd->parsed()) {
      auto [train, val] = load_splits(cfg);
      (void)train;
      const ChangeDetResult r = change_detect(cfg, val, ckpt_path, out_path);
      std::printf("AUC alise %.4f, AUC gap-filling %.4f over %lld pixels in %lld series\n",
                  r.auc_alise, r.auc_gf, static_cast<long long>(r.n_pixels),
                  static_cast<long long>(r.n_series));
    } else if (sw->parsed()) {
      auto [train, val] = load_splits(cfg);
      const KvConfig kv = KvConfig::from_file(config_path);
      const auto tw = parse_int_list(kv.get("sweep_t_w", ""));
      const auto nq = parse_int_list(kv.get("sweep_n_q", ""));
      const auto wi = parse_double_list(kv.get("sweep_w_inv", ""));
      const auto wc = parse_double_list(kv.get("sweep_w_cov", ""));
      const std::string report = (fs::path(out_path) / "sweep_report.csv").string();
      const auto rows = sweep(cfg, train, val, tw, nq, wi, wc, out_path, report);
      int64_t failed = 0;
      for (const auto& r : rows)
        if (!r.ok) ++failed;
      std::printf("%zu sweep cells (%lld failed); report %s\n", rows.size(),
                  static_cast<long long>(failed), report.c_str());
      if (failed > 0) return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
