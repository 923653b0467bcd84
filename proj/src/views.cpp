#include "alise/views.hpp"

namespace alise {

WindowSplit split_windows(int64_t t, int64_t t_w) {
  ALISE_CHECK(t_w >= 1, "window length must be positive");
  ALISE_CHECK(t >= 2 * t_w, "need at least two windows: t=" << t << ", t_w=" << t_w);
  int64_t n_w = t / t_w;
  if (n_w % 2 != 0) --n_w;
  return {n_w, n_w * t_w};
}

void interleave(int64_t n_w, int64_t t_w, std::vector<int64_t>& idx_a,
                std::vector<int64_t>& idx_b) {
  ALISE_CHECK(n_w >= 2 && n_w % 2 == 0, "window count must be even, got " << n_w);
  idx_a.clear();
  idx_b.clear();
  for (int64_t i = 0; i < n_w / 2; ++i) {
    for (int64_t j = 2 * i * t_w; j < (2 * i + 1) * t_w; ++j) idx_a.push_back(j);
    for (int64_t j = (2 * i + 1) * t_w; j < (2 * i + 2) * t_w; ++j) idx_b.push_back(j);
  }
}

ViewPair make_views(const Sits& s, int64_t t_w) {
  const WindowSplit ws = split_windows(s.t(), t_w);
  ViewPair vp;
  vp.t_w = t_w;
  vp.n_w = ws.n_w;
  interleave(ws.n_w, t_w, vp.idx_a, vp.idx_b);
  vp.view_a = slice_dates(s, vp.idx_a);
  vp.view_b = slice_dates(s, vp.idx_b);
  return vp;
}

}  // namespace alise
