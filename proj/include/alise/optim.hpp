#pragma once

#include <cstdint>
#include <vector>

#include "alise/graph.hpp"

namespace alise {

/// Adaptive moment estimation, beta = (0.9, 0.999), eps = 1e-8, no weight
/// decay. Updates parameters in store creation order.
class Adam {
 public:
  explicit Adam(ParamStore& ps, double lr = 1e-3);

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  /// One update from the gradients currently held in the store.
  void step();

  /// Restrict updates to parameters whose name starts with one of the
  /// prefixes; everything else stays frozen.
  void set_trainable_prefixes(std::vector<std::string> prefixes);

 private:
  bool trainable(const std::string& name) const;

  ParamStore& ps_;
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
  std::vector<std::string> prefixes_;
};

}  // namespace alise
