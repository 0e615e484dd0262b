#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "moodisp/core.hpp"

namespace moodisp {

inline constexpr int kClaheBins = 256;

/// Bin index and in-bin position of a [0, 1] sample on the 256-bin grid.
/// Bin b covers [b/256, (b+1)/256); 1.0 falls into the top bin at position 1.
template <typename Scalar>
inline void clahe_quantize(Scalar v, int& bin, double& frac) {
  const double s = std::clamp(static_cast<double>(v), 0.0, 1.0) * kClaheBins;
  bin = std::min(kClaheBins - 1, static_cast<int>(s));
  frac = s - bin;
}

/// One tile's equalization curve: the CDF of its clipped histogram with each
/// bin's mass spread uniformly over the bin, so the mapping is continuous and
/// piecewise linear in the input.
struct ClaheTileMap {
  std::array<double, kClaheBins + 1> cdf{};  // cdf[b] = mass strictly below bin b
  std::array<double, kClaheBins> density{};  // normalized mass of bin b

  double operator()(int bin, double frac) const { return cdf[bin] + density[bin] * frac; }
  double operator()(double v) const {
    int bin;
    double frac;
    clahe_quantize(v, bin, frac);
    return (*this)(bin, frac);
  }
};

/// Clips `hist` at `limit` and hands the excess back to the bins below the
/// limit by water-filling: every bin ends at min(limit, h + c) for the single
/// level c that conserves the total.  A limit equal to the uniform bin height
/// therefore yields an exactly flat histogram.
inline std::array<double, kClaheBins> clip_histogram(const std::array<double, kClaheBins>& hist,
                                                     double limit) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  std::array<double, kClaheBins> out{};
  std::vector<double> below;  // headroom of bins under the limit
  double clipped_total = 0.0;
  for (int i = 0; i < kClaheBins; ++i) {
    out[i] = std::min(hist[i], limit);
    clipped_total += out[i];
    if (hist[i] < limit) below.push_back(limit - hist[i]);
  }
  if (clipped_total >= total) return out;  // nothing was clipped

  std::sort(below.begin(), below.end());
  const double saturated = static_cast<double>(kClaheBins - below.size()) * limit;
  // Sum of the still-unfilled bins' counts, for headroom index j onward.
  double open_sum = 0.0;
  for (double d : below) open_sum += limit - d;
  double level = below.empty() ? 0.0 : below.back();
  double filled = 0.0;
  for (std::size_t j = 0; j < below.size(); ++j) {
    const double open = static_cast<double>(below.size() - j);
    const double c = (total - saturated - filled - open_sum) / open;
    if (c <= below[j]) {
      level = c;
      break;
    }
    filled += limit;
    open_sum -= limit - below[j];
  }
  for (int i = 0; i < kClaheBins; ++i) out[i] = hist[i] >= limit ? limit : std::min(limit, hist[i] + level);
  return out;
}

/// Builds a tile map from raw bin counts with clip limit `clip` times the
/// uniform bin height.  Empty tiles and tiles occupying a single bin get the
/// identity map.
inline ClaheTileMap make_clahe_tile_map(const std::array<double, kClaheBins>& hist, double clip) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  const auto occupied = std::count_if(hist.begin(), hist.end(), [](double c) { return c > 0; });
  ClaheTileMap map;
  if (total <= 0 || occupied == 1) {
    for (int b = 0; b <= kClaheBins; ++b) map.cdf[b] = static_cast<double>(b) / kClaheBins;
    map.density.fill(1.0 / kClaheBins);
    return map;
  }
  const auto h = clip_histogram(hist, clip * total / kClaheBins);
  const double norm = std::accumulate(h.begin(), h.end(), 0.0);
  double acc = 0.0;
  for (int b = 0; b < kClaheBins; ++b) {
    map.cdf[b] = acc / norm;
    map.density[b] = h[b] / norm;
    acc += h[b];
  }
  map.cdf[kClaheBins] = 1.0;
  return map;
}

/// Tile layout: tile i spans [i*W/n, (i+1)*W/n) along each axis.
struct ClaheTiling {
  int tiles_x = 1, tiles_y = 1;
  Eigen::Index width = 0, height = 0;

  Eigen::Index x_begin(int i) const { return i * width / tiles_x; }
  Eigen::Index y_begin(int j) const { return j * height / tiles_y; }
  double x_center(int i) const { return 0.5 * double(x_begin(i) + x_begin(i + 1)) - 0.5; }
  double y_center(int j) const { return 0.5 * double(y_begin(j) + y_begin(j + 1)) - 0.5; }
};

inline ClaheTiling make_clahe_tiling(Eigen::Index width, Eigen::Index height, int tiles_x,
                                     int tiles_y) {
  return {static_cast<int>(std::min<Eigen::Index>(tiles_x, width)),
          static_cast<int>(std::min<Eigen::Index>(tiles_y, height)), width, height};
}

/// Per-tile equalization curves in row-major tile order.
template <typename Scalar>
std::vector<ClaheTileMap> clahe_tile_maps(const Plane<Scalar>& Y, const ClaheTiling& t,
                                          double clip) {
  std::vector<ClaheTileMap> maps;
  maps.reserve(static_cast<std::size_t>(t.tiles_x) * t.tiles_y);
  for (int j = 0; j < t.tiles_y; ++j)
    for (int i = 0; i < t.tiles_x; ++i) {
      std::array<double, kClaheBins> hist{};
      for (Eigen::Index y = t.y_begin(j); y < t.y_begin(j + 1); ++y)
        for (Eigen::Index x = t.x_begin(i); x < t.x_begin(i + 1); ++x) {
          int bin;
          double frac;
          clahe_quantize(Y(y, x), bin, frac);
          hist[bin] += 1.0;
        }
      maps.push_back(make_clahe_tile_map(hist, clip));
    }
  return maps;
}

namespace detail {
// Neighbouring tile indices and the weight of the upper one for a pixel
// coordinate; clamps to the outermost tile centers.
inline void clahe_axis(double pos, int n, const auto& center, int& lo, int& hi, double& w) {
  if (n == 1 || pos <= center(0)) {
    lo = hi = 0;
    w = 0.0;
    return;
  }
  if (pos >= center(n - 1)) {
    lo = hi = n - 1;
    w = 0.0;
    return;
  }
  lo = 0;
  while (lo + 1 < n - 1 && center(lo + 1) <= pos) ++lo;
  hi = lo + 1;
  w = (pos - center(lo)) / (center(hi) - center(lo));
}
}  // namespace detail

/// Contrast-limited adaptive histogram equalization on a 256-bin grid with
/// bilinear blending between neighbouring tile curves.  `clip` is in units
/// of the uniform bin height; clip = 1 reduces every curve to the identity.
template <typename Scalar>
Plane<Scalar> clahe(const Plane<Scalar>& Y, int tiles_x, int tiles_y, double clip) {
  if (tiles_x < 1 || tiles_y < 1) throw DomainError("clahe: tile grid must be >= 1x1");
  if (!(clip >= 1)) throw DomainError("clahe: clip limit must be >= 1");
  const Eigen::Index h = Y.rows(), w = Y.cols();
  if (Y.size() == 0) return Y;
  const auto t = make_clahe_tiling(w, h, tiles_x, tiles_y);
  const auto maps = clahe_tile_maps(Y, t, clip);

  std::vector<int> x_lo(w), x_hi(w);
  std::vector<double> x_w(w);
  for (Eigen::Index x = 0; x < w; ++x)
    detail::clahe_axis(double(x), t.tiles_x, [&](int i) { return t.x_center(i); }, x_lo[x], x_hi[x],
                       x_w[x]);

  Plane<Scalar> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    int ylo, yhi;
    double wy;
    detail::clahe_axis(double(y), t.tiles_y, [&](int j) { return t.y_center(j); }, ylo, yhi, wy);
    for (Eigen::Index x = 0; x < w; ++x) {
      int bin;
      double frac;
      clahe_quantize(Y(y, x), bin, frac);
      const auto& m00 = maps[ylo * t.tiles_x + x_lo[x]];
      const auto& m01 = maps[ylo * t.tiles_x + x_hi[x]];
      const auto& m10 = maps[yhi * t.tiles_x + x_lo[x]];
      const auto& m11 = maps[yhi * t.tiles_x + x_hi[x]];
      const double wx = x_w[x];
      const double top = (1 - wx) * m00(bin, frac) + wx * m01(bin, frac);
      const double bot = (1 - wx) * m10(bin, frac) + wx * m11(bin, frac);
      out(y, x) = static_cast<Scalar>(std::clamp((1 - wy) * top + wy * bot, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace moodisp
