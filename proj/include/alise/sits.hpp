#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alise/dates.hpp"
#include "alise/rng.hpp"
#include "alise/tensor.hpp"

namespace alise {

/// Background / ignore label.
inline constexpr int32_t kIgnoreId = 255;

/// One irregular satellite image time series.
struct Sits {
  Tensor values;            // [t][c][h][w], normalized reflectance
  std::vector<Date> dates;  // strictly increasing, length t
  Tensor validity;          // [t][h][w], 1 = clear pixel

  int64_t t() const { return values.defined() ? values.dim(0) : 0; }
  int64_t c() const { return values.dim(1); }
  int64_t h() const { return values.dim(2); }
  int64_t w() const { return values.dim(3); }
};

/// Per-pixel class map.
struct ClassMap {
  int64_t h = 0, w = 0;
  std::vector<int32_t> ids;  // [h][w], kIgnoreId = background
};

struct LabeledSits {
  Sits sits;
  std::vector<ClassMap> labels;  // one map per calendar year covered
  std::vector<uint8_t> change;   // [h][w], 1 where the class differs between years
};

struct SynthConfig {
  int64_t n_series = 1;
  int64_t size = 16;        // h == w
  int64_t channels = 10;    // the four 10 m plus six 20 m bands
  int32_t k = 5;            // crop classes
  int64_t t_min = 40;       // total acquisitions over the whole span
  int64_t t_max = 60;
  int years = 2;
  int start_year = 2018;
  double change_rate = 0.3;     // parcels swapping class between year 1 and 2
  double cloud_rate = 0.3;      // per-date probability of cloud patches
  double noise_sigma = 0.05;    // i.i.d. reflectance noise
  double background_rate = 0.1; // parcels labeled as background
};

/// Smallest acceptable acquisition count: both reconstruction windows must
/// fit at the largest swept window length (t_w up to 10).
inline constexpr int64_t kMinSynthDates = 20;

void validate_sits(const Sits& s);

/// Deterministic synthetic dataset with class-specific double-logistic
/// seasonal profiles, cloud masks and planted year-over-year class swaps.
std::vector<LabeledSits> synth_generate(const SynthConfig& cfg, uint64_t seed);

struct NormStats {
  std::vector<double> median;  // per channel
  std::vector<double> iqr;
};

/// Median / interquartile range per channel over clear pixels only.
NormStats compute_norm_stats(const std::vector<const Sits*>& split);
Sits robust_normalize(const Sits& raw, const NormStats& stats);

/// Contiguous run of n acquisitions starting at a uniformly random offset.
Sits select_consecutive(const Sits& s, int64_t n, Rng& rng);

/// New series holding the given acquisition indices (ascending).
Sits slice_dates(const Sits& s, const std::vector<int64_t>& idx);

/// Acquisitions falling in one calendar year.
Sits filter_year(const Sits& s, int year);

Sits random_crop(const Sits& s, int64_t size, Rng& rng);
Sits center_crop(const Sits& s, int64_t size);

// -- on-disk format: one directory per series, raw little-endian arrays plus
//    a key=value sidecar (meta.txt) --
void save_series(const std::string& dir, const LabeledSits& s, uint64_t seed);
LabeledSits load_series(const std::string& dir);
std::vector<std::string> list_series_dirs(const std::string& dataset_dir);

}  // namespace alise
