#include "alise/downstream.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "alise/kernels.hpp"

namespace alise {

Tensor change_map(const Tensor& y1, const Tensor& y2) {
  ALISE_CHECK(y1.same_shape(y2), "change_map latent shape mismatch");
  ALISE_CHECK(y1.ndim() == 4, "change_map expects [n_q][d_model][h][w]");
  const int64_t nq = y1.dim(0), d = y1.dim(1), h = y1.dim(2), w = y1.dim(3);
  Tensor out = Tensor::zeros({h, w});
  const int64_t hw = h * w;
  for (int64_t nd = 0; nd < nq * d; ++nd) {
    const double* a = y1.data() + nd * hw;
    const double* b = y2.data() + nd * hw;
    for (int64_t p = 0; p < hw; ++p) {
      const double diff = a[p] - b[p];
      out[p] += diff * diff;
    }
  }
  kern::ops().scale(out.data(), 1.0 / static_cast<double>(nq * d), out.data(), hw);
  return out;
}

Tensor gapfill(const Sits& s, int64_t period_days) {
  ALISE_CHECK(period_days >= 1, "gap-fill period must be positive");
  validate_sits(s);
  const int64_t t = s.t(), c = s.c(), h = s.h(), w = s.w(), hw = h * w;

  // positions in days since Jan 1 of the series' first year
  const int64_t year_start = days_from_civil({s.dates[0].year, 1, 1});
  std::vector<double> pos(static_cast<size_t>(t));
  for (int64_t i = 0; i < t; ++i)
    pos[static_cast<size_t>(i)] =
        static_cast<double>(days_from_civil(s.dates[i]) - year_start) + 1.0;

  std::vector<double> grid;
  for (int64_t d = 1; d <= 365; d += period_days) grid.push_back(static_cast<double>(d));
  const int64_t gn = static_cast<int64_t>(grid.size());

  Tensor out({gn, c, h, w});
  int64_t empty_count = 0;
  std::vector<double> xs, ys;
  for (int64_t p = 0; p < hw; ++p) {
    // clear dates for this pixel are shared by all channels
    std::vector<int64_t> clear;
    for (int64_t ti = 0; ti < t; ++ti)
      if (s.validity[ti * hw + p] != 0.0) clear.push_back(ti);
    if (clear.empty()) ++empty_count;
    for (int64_t ch = 0; ch < c; ++ch) {
      if (clear.empty()) {
        for (int64_t gi = 0; gi < gn; ++gi) out[(gi * c + ch) * hw + p] = 0.0;
        continue;
      }
      xs.clear();
      ys.clear();
      for (int64_t ti : clear) {
        xs.push_back(pos[static_cast<size_t>(ti)]);
        ys.push_back(s.values[(ti * c + ch) * hw + p]);
      }
      size_t seg = 0;
      for (int64_t gi = 0; gi < gn; ++gi) {
        const double gx = grid[static_cast<size_t>(gi)];
        double v;
        if (gx <= xs.front()) {
          v = ys.front();
        } else if (gx >= xs.back()) {
          v = ys.back();
        } else {
          while (seg + 1 < xs.size() && xs[seg + 1] < gx) ++seg;
          const double x0 = xs[seg], x1 = xs[seg + 1];
          v = ys[seg] + (ys[seg + 1] - ys[seg]) * (gx - x0) / (x1 - x0);
        }
        out[(gi * c + ch) * hw + p] = v;
      }
    }
  }
  if (empty_count > 0)
    std::fprintf(stderr, "[alise] warning: gap-fill saw %lld pixels with no clear sample\n",
                 static_cast<long long>(empty_count));
  return out;
}

Tensor gf_change_map(const Sits& s1, const Sits& s2, int64_t period_days) {
  ALISE_CHECK(s1.c() == s2.c() && s1.h() == s2.h() && s1.w() == s2.w(),
              "gap-fill change map needs matching series shapes");
  const Tensor g1 = gapfill(s1, period_days);
  const Tensor g2 = gapfill(s2, period_days);
  const int64_t gn = g1.dim(0), c = g1.dim(1), hw = g1.dim(2) * g1.dim(3);
  Tensor out = Tensor::zeros({g1.dim(2), g1.dim(3)});
  for (int64_t gc = 0; gc < gn * c; ++gc) {
    const double* a = g1.data() + gc * hw;
    const double* b = g2.data() + gc * hw;
    for (int64_t p = 0; p < hw; ++p) {
      const double d = a[p] - b[p];
      out[p] += d * d;
    }
  }
  kern::ops().scale(out.data(), 1.0 / static_cast<double>(gn * c), out.data(), hw);
  return out;
}

double auc_roc(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
  ALISE_CHECK(scores.size() == labels.size() && !scores.empty(), "auc input size mismatch");
  int64_t n_pos = 0, n_neg = 0;
  for (uint8_t l : labels) (l ? n_pos : n_neg)++;
  ALISE_CHECK(n_pos > 0 && n_neg > 0, "auc needs both classes present");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // average ranks over tie groups, then the Mann-Whitney statistic
  double rank_pos_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t q = i; q <= j; ++q)
      if (labels[order[q]]) rank_pos_sum += avg_rank;
    i = j + 1;
  }
  const double u = rank_pos_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

F1Result f1_scores(const std::vector<int32_t>& pred, const std::vector<int32_t>& truth, int32_t k) {
  ALISE_CHECK(pred.size() == truth.size(), "f1 input size mismatch");
  std::vector<int64_t> tp(static_cast<size_t>(k), 0), fp(static_cast<size_t>(k), 0),
      fn(static_cast<size_t>(k), 0);
  int64_t effective = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const int32_t t = truth[i];
    if (t == kIgnoreId) continue;
    ALISE_CHECK(t >= 0 && t < k, "truth label " << t << " out of range");
    ++effective;
    const int32_t p = pred[i];
    if (p == t) {
      ++tp[static_cast<size_t>(t)];
    } else {
      ++fn[static_cast<size_t>(t)];
      if (p >= 0 && p < k) ++fp[static_cast<size_t>(p)];
    }
  }
  ALISE_CHECK(effective > 0, "f1: every pixel is background");

  F1Result r;
  double sum = 0.0;
  for (int32_t c = 0; c < k; ++c) {
    if (tp[c] + fn[c] == 0) continue;  // class absent from truth: excluded from the macro mean
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    r.classes.push_back(c);
    r.per_class.push_back(f1);
    sum += f1;
  }
  r.macro = sum / static_cast<double>(r.per_class.size());
  return r;
}

std::vector<int32_t> argmax_rows(const Tensor& logits) {
  ALISE_CHECK(logits.ndim() == 2, "argmax expects [P][k]");
  const int64_t p = logits.dim(0), k = logits.dim(1);
  std::vector<int32_t> out(static_cast<size_t>(p));
  for (int64_t r = 0; r < p; ++r) {
    const double* row = logits.data() + r * k;
    int32_t best = 0;
    for (int64_t c = 1; c < k; ++c)
      if (row[c] > row[best]) best = static_cast<int32_t>(c);
    out[static_cast<size_t>(r)] = best;
  }
  return out;
}

}  // namespace alise
