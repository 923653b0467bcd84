#pragma once

#include <cstdint>
#include <vector>

#include "alise/sits.hpp"
#include "alise/tensor.hpp"

namespace alise {

/// Pixel change scores: squared latent difference averaged over the query
/// and channel dimensions. y1, y2: [n_q][d_model][h][w].
Tensor change_map(const Tensor& y1, const Tensor& y2);

/// Linear interpolation of each pixel-channel's clear samples onto a regular
/// annual grid (doy 1, 1+period, ...). Before the first / after the last
/// clear sample the nearest value is held; pixel-channels with no clear
/// sample are filled with 0. Returns [G][c][h][w].
Tensor gapfill(const Sits& s, int64_t period_days);

/// Mean squared difference of the two gap-filled series over grid dates and
/// channels. Learning-free change-detection baseline.
Tensor gf_change_map(const Sits& s1, const Sits& s2, int64_t period_days = 5);

/// Rank-statistic AUC: probability that a random positive outscores a random
/// negative, ties counting one half. Requires both classes present.
double auc_roc(const std::vector<double>& scores, const std::vector<uint8_t>& labels);

struct F1Result {
  std::vector<int32_t> classes;    // classes present in the truth, ascending
  std::vector<double> per_class;   // F1 aligned with `classes`
  double macro = 0.0;              // unweighted mean over present classes
};

/// Per-class and macro F1 over pixels whose truth is not the ignore id.
F1Result f1_scores(const std::vector<int32_t>& pred, const std::vector<int32_t>& truth, int32_t k);

/// Row-wise argmax of logits [P][k].
std::vector<int32_t> argmax_rows(const Tensor& logits);

}  // namespace alise
