#include "alise/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "alise/check.hpp"

namespace alise {

namespace {
struct Canvas {
  int w, h;
  std::vector<uint8_t> px;  // rgb
  Canvas(int w_, int h_) : w(w_), h(h_), px(static_cast<size_t>(w_ * h_ * 3), 255) {}
  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    const size_t i = (static_cast<size_t>(y) * w + x) * 3;
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  void line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
};

const uint8_t kPalette[][3] = {{200, 40, 40}, {40, 90, 200}, {30, 150, 60}, {180, 120, 20}};
}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<PlotSeries>& series, int width, int height) {
  (void)title;
  Canvas cv(width, height);
  const int ml = 50, mr = 15, mt = 15, mb = 30;
  const int inner_w = width - ml - mr, inner_h = height - mt - mb;

  double ymin = 0.0, ymax = 1.0;
  size_t n = 0;
  bool seen = false;
  for (const PlotSeries& s : series) {
    n = std::max(n, s.y.size());
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (!seen) {
        ymin = ymax = v;
        seen = true;
      } else {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!seen || ymax == ymin) ymax = ymin + 1.0;

  // axes
  cv.line(ml, mt, ml, mt + inner_h, 0, 0, 0);
  cv.line(ml, mt + inner_h, ml + inner_w, mt + inner_h, 0, 0, 0);

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& y = series[si].y;
    if (y.size() < 2) continue;
    const uint8_t* col = kPalette[si % 4];
    for (size_t i = 0; i + 1 < y.size(); ++i) {
      auto px = [&](size_t idx, double v) {
        const int x = ml + static_cast<int>(static_cast<double>(idx) /
                                            static_cast<double>(n - 1) * inner_w);
        const int yy = mt + inner_h -
                       static_cast<int>((v - ymin) / (ymax - ymin) * inner_h);
        return std::pair<int, int>{x, yy};
      };
      if (!std::isfinite(y[i]) || !std::isfinite(y[i + 1])) continue;
      auto [x0, y0] = px(i, y[i]);
      auto [x1, y1] = px(i + 1, y[i + 1]);
      cv.line(x0, y0, x1, y1, col[0], col[1], col[2]);
    }
  }

  std::ofstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot write plot " << path);
  f << "P6\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(cv.px.data()), static_cast<int64_t>(cv.px.size()));
}

}  // namespace alise
