#pragma once

#include <cstdint>

namespace alise {

/// Cosine annealing with warm restarts: cycle i spans T0 * 2^i epochs;
/// within a cycle lr = lr_min + (lr_max - lr_min)/2 * (1 + cos(pi * s/len)).
class CosineWarmRestarts {
 public:
  CosineWarmRestarts(int64_t t0, double lr_max, double lr_min = 0.0);
  double lr_at(int64_t epoch) const;

 private:
  int64_t t0_;
  double lr_max_, lr_min_;
};

/// Multiplies the learning rate by `decay` after `patience` validation
/// rounds without improvement (min mode).
class PlateauScheduler {
 public:
  PlateauScheduler(double lr0, int64_t patience = 10, double decay = 0.05);

  /// Feed one validation metric; returns the learning rate to use next.
  double observe(double metric);
  double lr() const { return lr_; }

 private:
  double lr_;
  int64_t patience_;
  double decay_;
  double best_;
  int64_t stale_ = 0;
  bool has_best_ = false;
};

}  // namespace alise
