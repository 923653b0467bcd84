#include "alise/sits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace alise {

void validate_sits(const Sits& s) {
  ALISE_CHECK(s.values.defined() && s.values.ndim() == 4, "sits values must be [t][c][h][w]");
  const int64_t t = s.t();
  ALISE_CHECK(t >= 1, "sits needs at least one acquisition");
  ALISE_CHECK(static_cast<int64_t>(s.dates.size()) == t, "date count != t");
  ALISE_CHECK(s.validity.ndim() == 3 && s.validity.dim(0) == t && s.validity.dim(1) == s.h() &&
                  s.validity.dim(2) == s.w(),
              "validity must be [t][h][w]");
  for (int64_t i = 1; i < t; ++i)
    ALISE_CHECK(s.dates[i - 1] < s.dates[i], "dates must be strictly increasing");
  ALISE_CHECK(tensor_all_finite(s.values), "sits values contain NaN/Inf");
}

// ------------------------------------------------------------------- synth

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Season shape shared by all channels of one class.
struct ClassProfile {
  double t_on, t_off, r_on, r_off;
  std::vector<double> base, amp;  // per channel
};

ClassProfile make_profile(uint64_t seed, int32_t class_id, int64_t channels) {
  Rng rng = Rng(seed).fork("profile").fork(static_cast<uint64_t>(class_id));
  ClassProfile p;
  if (class_id == kIgnoreId) {
    // bare soil: flat, weak seasonality
    p.t_on = 120.0;
    p.t_off = 240.0;
    p.r_on = 0.02;
    p.r_off = 0.02;
    for (int64_t c = 0; c < channels; ++c) {
      p.base.push_back(rng.uniform(0.12, 0.32));
      p.amp.push_back(rng.uniform(0.0, 0.05));
    }
    return p;
  }
  p.t_on = rng.uniform(60.0, 180.0);
  p.t_off = p.t_on + rng.uniform(60.0, 160.0);
  p.r_on = rng.uniform(0.04, 0.12);
  p.r_off = rng.uniform(0.04, 0.12);
  for (int64_t c = 0; c < channels; ++c) {
    p.base.push_back(rng.uniform(0.05, 0.30));
    p.amp.push_back(rng.uniform(0.20, 0.80));
  }
  return p;
}

double profile_value(const ClassProfile& p, int64_t channel, int doy) {
  const double d = static_cast<double>(doy);
  const double season = sigmoid(p.r_on * (d - p.t_on)) - sigmoid(p.r_off * (d - p.t_off));
  return p.base[channel] + p.amp[channel] * season;
}

// Irregular parcel grid: random row/column cuts.
struct ParcelGrid {
  std::vector<int64_t> row_cuts, col_cuts;  // interior boundaries
  int64_t rows() const { return static_cast<int64_t>(row_cuts.size()) + 1; }
  int64_t cols() const { return static_cast<int64_t>(col_cuts.size()) + 1; }
  int64_t parcel_of(int64_t i, int64_t j) const {
    int64_t r = 0, c = 0;
    while (r < static_cast<int64_t>(row_cuts.size()) && i >= row_cuts[r]) ++r;
    while (c < static_cast<int64_t>(col_cuts.size()) && j >= col_cuts[c]) ++c;
    return r * cols() + c;
  }
};

ParcelGrid make_grid(int64_t size, Rng& rng) {
  ParcelGrid g;
  const int64_t n_row = 1 + rng.uniform_int(3);  // 2..4 bands per axis
  const int64_t n_col = 1 + rng.uniform_int(3);
  auto cuts = [&](int64_t n) {
    std::vector<int64_t> c;
    while (static_cast<int64_t>(c.size()) < n) {
      int64_t pos = 2 + rng.uniform_int(size - 3);  // keep parcels at least 2 px
      if (std::find(c.begin(), c.end(), pos) == c.end()) c.push_back(pos);
    }
    std::sort(c.begin(), c.end());
    return c;
  };
  g.row_cuts = cuts(n_row);
  g.col_cuts = cuts(n_col);
  return g;
}

float quantize(double v) { return static_cast<float>(v); }

}  // namespace

std::vector<LabeledSits> synth_generate(const SynthConfig& cfg, uint64_t seed) {
  ALISE_CHECK(cfg.k >= 2, "synth needs at least 2 classes, got " << cfg.k);
  ALISE_CHECK(cfg.size >= 4, "synth spatial size must be at least 4, got " << cfg.size);
  ALISE_CHECK(cfg.t_min >= kMinSynthDates,
              "synth needs at least " << kMinSynthDates << " dates, got " << cfg.t_min);
  ALISE_CHECK(cfg.t_max >= cfg.t_min, "t_max < t_min");
  ALISE_CHECK(cfg.years >= 1 && cfg.n_series >= 1 && cfg.channels >= 1, "bad synth config");

  std::vector<ClassProfile> profiles;
  for (int32_t c = 0; c < cfg.k; ++c) profiles.push_back(make_profile(seed, c, cfg.channels));
  const ClassProfile bg_profile = make_profile(seed, kIgnoreId, cfg.channels);

  const int64_t span_days =
      days_from_civil({cfg.start_year + cfg.years, 1, 1}) - days_from_civil({cfg.start_year, 1, 1});
  const int64_t start_day = days_from_civil({cfg.start_year, 1, 1});

  std::vector<LabeledSits> out;
  out.reserve(cfg.n_series);
  for (int64_t si = 0; si < cfg.n_series; ++si) {
    Rng rng = Rng(seed).fork("series").fork(static_cast<uint64_t>(si));
    const int64_t hw = cfg.size * cfg.size;

    // parcels and their classes per year
    ParcelGrid grid = make_grid(cfg.size, rng);
    const int64_t n_parcels = grid.rows() * grid.cols();
    std::vector<int32_t> class_y1(n_parcels), class_y2(n_parcels);
    std::vector<double> parcel_gain(n_parcels);
    for (int64_t p = 0; p < n_parcels; ++p) {
      parcel_gain[p] = rng.uniform(0.9, 1.1);
      if (rng.bernoulli(cfg.background_rate)) {
        class_y1[p] = kIgnoreId;
        class_y2[p] = kIgnoreId;
        continue;
      }
      class_y1[p] = static_cast<int32_t>(rng.uniform_int(cfg.k));
      if (rng.bernoulli(cfg.change_rate)) {
        int32_t c2 = static_cast<int32_t>(rng.uniform_int(cfg.k - 1));
        if (c2 >= class_y1[p]) ++c2;
        class_y2[p] = c2;
      } else {
        class_y2[p] = class_y1[p];
      }
    }

    // acquisition dates: t distinct days over the span
    const int64_t t = cfg.t_min + rng.uniform_int(cfg.t_max - cfg.t_min + 1);
    std::vector<int64_t> days;
    while (static_cast<int64_t>(days.size()) < t) {
      int64_t d = rng.uniform_int(span_days);
      if (std::find(days.begin(), days.end(), d) == days.end()) days.push_back(d);
    }
    std::sort(days.begin(), days.end());

    LabeledSits ls;
    ls.sits.values = Tensor({t, cfg.channels, cfg.size, cfg.size});
    ls.sits.validity = Tensor::full({t, cfg.size, cfg.size}, 1.0);
    for (int64_t di = 0; di < t; ++di)
      ls.sits.dates.push_back(civil_from_days(start_day + days[di]));

    // labels: year 1 map, then the rotated map for every later year
    for (int y = 0; y < cfg.years; ++y) {
      ClassMap m;
      m.h = cfg.size;
      m.w = cfg.size;
      m.ids.resize(hw);
      for (int64_t i = 0; i < cfg.size; ++i)
        for (int64_t j = 0; j < cfg.size; ++j) {
          const int64_t p = grid.parcel_of(i, j);
          m.ids[i * cfg.size + j] = (y == 0) ? class_y1[p] : class_y2[p];
        }
      ls.labels.push_back(std::move(m));
    }
    ls.change.resize(hw, 0);
    if (cfg.years >= 2) {
      for (int64_t px = 0; px < hw; ++px) {
        const int32_t a = ls.labels[0].ids[px];
        const int32_t b = ls.labels[1].ids[px];
        ls.change[px] = (a != b && a != kIgnoreId && b != kIgnoreId) ? 1 : 0;
      }
    }

    // reflectances
    double* vp = ls.sits.values.data();
    for (int64_t di = 0; di < t; ++di) {
      const Date date = ls.sits.dates[di];
      const int doy = day_of_year(date);
      const bool second_year = date.year > cfg.start_year;  // crops rotate at new year
      for (int64_t ch = 0; ch < cfg.channels; ++ch) {
        for (int64_t i = 0; i < cfg.size; ++i) {
          for (int64_t j = 0; j < cfg.size; ++j) {
            const int64_t p = grid.parcel_of(i, j);
            const int32_t cid = second_year ? class_y2[p] : class_y1[p];
            const ClassProfile& prof = (cid == kIgnoreId) ? bg_profile : profiles[cid];
            double v = parcel_gain[p] * profile_value(prof, ch, doy);
            v += cfg.noise_sigma * rng.normal();
            vp[((di * cfg.channels + ch) * cfg.size + i) * cfg.size + j] = quantize(v);
          }
        }
      }
    }

    // clouds: opaque bright rectangles, validity dropped underneath
    double* mask = ls.sits.validity.data();
    for (int64_t di = 0; di < t; ++di) {
      if (!rng.bernoulli(cfg.cloud_rate)) continue;
      const int64_t n_rect = 1 + rng.uniform_int(2);
      for (int64_t r = 0; r < n_rect; ++r) {
        const int64_t rh = cfg.size / 4 + rng.uniform_int(cfg.size / 2);
        const int64_t rw = cfg.size / 4 + rng.uniform_int(cfg.size / 2);
        const int64_t oy = rng.uniform_int(cfg.size - rh + 1);
        const int64_t ox = rng.uniform_int(cfg.size - rw + 1);
        for (int64_t i = oy; i < oy + rh; ++i) {
          for (int64_t j = ox; j < ox + rw; ++j) {
            mask[(di * cfg.size + i) * cfg.size + j] = 0.0;
            for (int64_t ch = 0; ch < cfg.channels; ++ch) {
              const double cloud = 0.85 + 0.1 * rng.uniform() + cfg.noise_sigma * rng.normal();
              vp[((di * cfg.channels + ch) * cfg.size + i) * cfg.size + j] = quantize(cloud);
            }
          }
        }
      }
    }

    validate_sits(ls.sits);
    out.push_back(std::move(ls));
  }
  return out;
}

// --------------------------------------------------------------- normalize

NormStats compute_norm_stats(const std::vector<const Sits*>& split) {
  ALISE_CHECK(!split.empty(), "empty split for normalization stats");
  const int64_t c = split[0]->c();
  NormStats st;
  st.median.resize(c);
  st.iqr.resize(c);

  auto quantile = [](std::vector<double>& v, double q) {
    // linear interpolation between order statistics
    const double h = q * static_cast<double>(v.size() - 1);
    const int64_t lo = static_cast<int64_t>(h);
    const int64_t hi = std::min<int64_t>(lo + 1, static_cast<int64_t>(v.size()) - 1);
    std::nth_element(v.begin(), v.begin() + lo, v.end());
    const double vlo = v[lo];
    std::nth_element(v.begin(), v.begin() + hi, v.end());
    const double vhi = v[hi];
    return vlo + (h - static_cast<double>(lo)) * (vhi - vlo);
  };

  for (int64_t ch = 0; ch < c; ++ch) {
    std::vector<double> vals;
    for (const Sits* s : split) {
      ALISE_CHECK(s->c() == c, "channel count differs across split");
      const int64_t hw = s->h() * s->w();
      const double* vp = s->values.data();
      const double* mp = s->validity.data();
      for (int64_t ti = 0; ti < s->t(); ++ti)
        for (int64_t p = 0; p < hw; ++p)
          if (mp[ti * hw + p] != 0.0) vals.push_back(vp[(ti * c + ch) * hw + p]);
    }
    ALISE_CHECK(!vals.empty(), "channel " << ch << " has no valid pixels in the split");
    st.median[ch] = quantile(vals, 0.5);
    const double q25 = quantile(vals, 0.25);
    const double q75 = quantile(vals, 0.75);
    st.iqr[ch] = q75 - q25;
  }
  return st;
}

Sits robust_normalize(const Sits& raw, const NormStats& stats) {
  const int64_t c = raw.c();
  ALISE_CHECK(static_cast<int64_t>(stats.median.size()) == c &&
                  static_cast<int64_t>(stats.iqr.size()) == c,
              "normalization stats have wrong channel count");
  for (int64_t ch = 0; ch < c; ++ch)
    ALISE_CHECK(stats.iqr[ch] > 0.0, "channel " << ch << " has zero interquartile range");
  Sits out;
  out.dates = raw.dates;
  out.validity = raw.validity;
  out.values = Tensor(raw.values.shape());
  const int64_t hw = raw.h() * raw.w();
  const double* src = raw.values.data();
  double* dst = out.values.data();
  for (int64_t ti = 0; ti < raw.t(); ++ti)
    for (int64_t ch = 0; ch < c; ++ch) {
      const double med = stats.median[ch], iqr = stats.iqr[ch];
      const double* sp = src + (ti * c + ch) * hw;
      double* dp = dst + (ti * c + ch) * hw;
      for (int64_t p = 0; p < hw; ++p) dp[p] = (sp[p] - med) / iqr;
    }
  return out;
}

// ------------------------------------------------------------------ slicing

Sits slice_dates(const Sits& s, const std::vector<int64_t>& idx) {
  const int64_t t = static_cast<int64_t>(idx.size());
  ALISE_CHECK(t >= 1, "empty date selection");
  Sits out;
  out.values = Tensor({t, s.c(), s.h(), s.w()});
  out.validity = Tensor({t, s.h(), s.w()});
  const int64_t chw = s.c() * s.h() * s.w();
  const int64_t hw = s.h() * s.w();
  for (int64_t i = 0; i < t; ++i) {
    const int64_t src = idx[i];
    ALISE_CHECK(src >= 0 && src < s.t(), "date index out of range");
    out.dates.push_back(s.dates[src]);
    std::memcpy(out.values.data() + i * chw, s.values.data() + src * chw, chw * sizeof(double));
    std::memcpy(out.validity.data() + i * hw, s.validity.data() + src * hw, hw * sizeof(double));
  }
  return out;
}

Sits select_consecutive(const Sits& s, int64_t n, Rng& rng) {
  ALISE_CHECK(s.t() >= n, "series has " << s.t() << " dates, need " << n);
  const int64_t start = rng.uniform_int(s.t() - n + 1);
  std::vector<int64_t> idx(n);
  for (int64_t i = 0; i < n; ++i) idx[i] = start + i;
  return slice_dates(s, idx);
}

Sits filter_year(const Sits& s, int year) {
  std::vector<int64_t> idx;
  for (int64_t i = 0; i < s.t(); ++i)
    if (s.dates[i].year == year) idx.push_back(i);
  ALISE_CHECK(!idx.empty(), "series has no acquisitions in year " << year);
  return slice_dates(s, idx);
}

namespace {
Sits crop(const Sits& s, int64_t oy, int64_t ox, int64_t size) {
  Sits out;
  out.dates = s.dates;
  out.values = Tensor({s.t(), s.c(), size, size});
  out.validity = Tensor({s.t(), size, size});
  for (int64_t ti = 0; ti < s.t(); ++ti) {
    for (int64_t ch = 0; ch < s.c(); ++ch)
      for (int64_t i = 0; i < size; ++i)
        std::memcpy(out.values.data() + ((ti * s.c() + ch) * size + i) * size,
                    s.values.data() + ((ti * s.c() + ch) * s.h() + oy + i) * s.w() + ox,
                    size * sizeof(double));
    for (int64_t i = 0; i < size; ++i)
      std::memcpy(out.validity.data() + (ti * size + i) * size,
                  s.validity.data() + (ti * s.h() + oy + i) * s.w() + ox, size * sizeof(double));
  }
  return out;
}
}  // namespace

Sits random_crop(const Sits& s, int64_t size, Rng& rng) {
  ALISE_CHECK(s.h() >= size && s.w() >= size, "crop larger than image");
  if (s.h() == size && s.w() == size) return s;
  const int64_t oy = rng.uniform_int(s.h() - size + 1);
  const int64_t ox = rng.uniform_int(s.w() - size + 1);
  return crop(s, oy, ox, size);
}

Sits center_crop(const Sits& s, int64_t size) {
  ALISE_CHECK(s.h() >= size && s.w() >= size, "crop larger than image");
  if (s.h() == size && s.w() == size) return s;
  return crop(s, (s.h() - size) / 2, (s.w() - size) / 2, size);
}

// ---------------------------------------------------------------------- io

namespace {

void write_f32(const std::string& path, const double* src, int64_t n) {
  std::ofstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot write " << path);
  std::vector<float> buf(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] = static_cast<float>(src[i]);
  f.write(reinterpret_cast<const char*>(buf.data()), n * static_cast<int64_t>(sizeof(float)));
}

void read_f32(const std::string& path, double* dst, int64_t n) {
  std::ifstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot read " << path);
  std::vector<float> buf(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(buf.data()), n * static_cast<int64_t>(sizeof(float)));
  ALISE_CHECK(f.gcount() == n * static_cast<int64_t>(sizeof(float)), "short read on " << path);
  for (int64_t i = 0; i < n; ++i) dst[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
}

void write_u8(const std::string& path, const std::vector<uint8_t>& v) {
  std::ofstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot write " << path);
  f.write(reinterpret_cast<const char*>(v.data()), static_cast<int64_t>(v.size()));
}

std::vector<uint8_t> read_u8(const std::string& path, int64_t n) {
  std::ifstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot read " << path);
  std::vector<uint8_t> v(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(v.data()), n);
  ALISE_CHECK(f.gcount() == n, "short read on " << path);
  return v;
}

void write_i32(const std::string& path, const int32_t* src, int64_t n) {
  std::ofstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot write " << path);
  f.write(reinterpret_cast<const char*>(src), n * static_cast<int64_t>(sizeof(int32_t)));
}

void read_i32(const std::string& path, int32_t* dst, int64_t n) {
  std::ifstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot read " << path);
  f.read(reinterpret_cast<char*>(dst), n * static_cast<int64_t>(sizeof(int32_t)));
  ALISE_CHECK(f.gcount() == n * static_cast<int64_t>(sizeof(int32_t)), "short read on " << path);
}

const char* kChannelNames = "B02,B03,B04,B08,B05,B06,B07,B8A,B11,B12";

}  // namespace

void save_series(const std::string& dir, const LabeledSits& s, uint64_t seed) {
  fs::create_directories(dir);
  const Sits& x = s.sits;
  {
    std::ofstream meta(dir + "/meta.txt");
    ALISE_CHECK(meta.good(), "cannot write " << dir << "/meta.txt");
    meta << "schema=1\n";
    meta << "t=" << x.t() << "\n";
    meta << "c=" << x.c() << "\n";
    meta << "h=" << x.h() << "\n";
    meta << "w=" << x.w() << "\n";
    meta << "years=" << s.labels.size() << "\n";
    meta << "seed=" << seed << "\n";
    meta << "channels=" << kChannelNames << "\n";
    meta << "dates=";
    for (size_t i = 0; i < x.dates.size(); ++i)
      meta << (i ? "," : "") << format_iso_date(x.dates[i]);
    meta << "\n";
  }
  write_f32(dir + "/values.f32", x.values.data(), x.values.numel());
  std::vector<uint8_t> vmask(static_cast<size_t>(x.validity.numel()));
  for (int64_t i = 0; i < x.validity.numel(); ++i) vmask[i] = x.validity[i] != 0.0 ? 1 : 0;
  write_u8(dir + "/validity.u8", vmask);
  if (!s.labels.empty()) {
    std::vector<int32_t> all;
    for (const ClassMap& m : s.labels) all.insert(all.end(), m.ids.begin(), m.ids.end());
    write_i32(dir + "/labels.i32", all.data(), static_cast<int64_t>(all.size()));
  }
  if (!s.change.empty()) write_u8(dir + "/change.u8", s.change);
}

LabeledSits load_series(const std::string& dir) {
  std::ifstream meta(dir + "/meta.txt");
  ALISE_CHECK(meta.good(), "cannot read " << dir << "/meta.txt");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ALISE_CHECK(kv.count("t") && kv.count("c") && kv.count("h") && kv.count("w") && kv.count("dates"),
              "incomplete sidecar in " << dir);
  const int64_t t = std::stoll(kv["t"]), c = std::stoll(kv["c"]);
  const int64_t h = std::stoll(kv["h"]), w = std::stoll(kv["w"]);
  const int years = kv.count("years") ? std::stoi(kv["years"]) : 0;

  LabeledSits out;
  out.sits.values = Tensor({t, c, h, w});
  read_f32(dir + "/values.f32", out.sits.values.data(), out.sits.values.numel());
  std::stringstream ds(kv["dates"]);
  std::string tok;
  while (std::getline(ds, tok, ',')) out.sits.dates.push_back(parse_iso_date(tok));
  ALISE_CHECK(static_cast<int64_t>(out.sits.dates.size()) == t, "sidecar date count != t");
  out.sits.validity = Tensor({t, h, w});
  const std::vector<uint8_t> vmask = read_u8(dir + "/validity.u8", t * h * w);
  for (int64_t i = 0; i < t * h * w; ++i) out.sits.validity[i] = vmask[i] ? 1.0 : 0.0;

  if (years > 0 && fs::exists(dir + "/labels.i32")) {
    std::vector<int32_t> all(static_cast<size_t>(years * h * w));
    read_i32(dir + "/labels.i32", all.data(), static_cast<int64_t>(all.size()));
    for (int y = 0; y < years; ++y) {
      ClassMap m;
      m.h = h;
      m.w = w;
      m.ids.assign(all.begin() + static_cast<int64_t>(y) * h * w,
                   all.begin() + static_cast<int64_t>(y + 1) * h * w);
      out.labels.push_back(std::move(m));
    }
  }
  if (fs::exists(dir + "/change.u8")) out.change = read_u8(dir + "/change.u8", h * w);
  validate_sits(out.sits);
  return out;
}

std::vector<std::string> list_series_dirs(const std::string& dataset_dir) {
  std::vector<std::string> dirs;
  ALISE_CHECK(fs::exists(dataset_dir), "dataset directory " << dataset_dir << " does not exist");
  for (const auto& e : fs::directory_iterator(dataset_dir))
    if (e.is_directory() && fs::exists(e.path() / "meta.txt")) dirs.push_back(e.path().string());
  std::sort(dirs.begin(), dirs.end());
  ALISE_CHECK(!dirs.empty(), "no series found under " << dataset_dir);
  return dirs;
}

}  // namespace alise
