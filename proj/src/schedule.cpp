#include "alise/schedule.hpp"

#include <cmath>

#include "alise/check.hpp"

namespace alise {

CosineWarmRestarts::CosineWarmRestarts(int64_t t0, double lr_max, double lr_min)
    : t0_(t0), lr_max_(lr_max), lr_min_(lr_min) {
  ALISE_CHECK(t0 >= 1, "T0 must be at least 1");
}

double CosineWarmRestarts::lr_at(int64_t epoch) const {
  ALISE_CHECK(epoch >= 0, "negative epoch");
  int64_t cycle_len = t0_;
  int64_t start = 0;
  while (epoch >= start + cycle_len) {
    start += cycle_len;
    cycle_len *= 2;
  }
  const double s = static_cast<double>(epoch - start) / static_cast<double>(cycle_len);
  return lr_min_ + 0.5 * (lr_max_ - lr_min_) * (1.0 + std::cos(3.14159265358979323846 * s));
}

PlateauScheduler::PlateauScheduler(double lr0, int64_t patience, double decay)
    : lr_(lr0), patience_(patience), decay_(decay), best_(0.0) {
  ALISE_CHECK(patience >= 1, "patience must be at least 1");
}

double PlateauScheduler::observe(double metric) {
  if (!has_best_ || metric < best_) {
    best_ = metric;
    has_best_ = true;
    stale_ = 0;
  } else {
    ++stale_;
    if (stale_ > patience_) {
      lr_ *= decay_;
      stale_ = 0;
    }
  }
  return lr_;
}

}  // namespace alise
