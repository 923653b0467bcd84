#pragma once

#include <cstdint>
#include <vector>

#include "alise/sits.hpp"

namespace alise {

/// Two temporally intertwined, disjoint sub-series of one parent series.
/// Window i of length t_w goes to view A when i is even, to view B when odd.
struct ViewPair {
  Sits view_a;
  Sits view_b;
  std::vector<int64_t> idx_a;  // indices into the parent series, ascending
  std::vector<int64_t> idx_b;
  int64_t t_w = 0;
  int64_t n_w = 0;
};

struct WindowSplit {
  int64_t n_w;       // largest even window count fitting in t
  int64_t usable_t;  // n_w * t_w; trailing dates are dropped
};

WindowSplit split_windows(int64_t t, int64_t t_w);

/// Alternating window assignment; n_w must be even.
void interleave(int64_t n_w, int64_t t_w, std::vector<int64_t>& idx_a, std::vector<int64_t>& idx_b);

ViewPair make_views(const Sits& s, int64_t t_w);

}  // namespace alise
