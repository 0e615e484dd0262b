#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "moodisp/core.hpp"
#include "moodisp/image_codes.hpp"

namespace moodisp::testing {

inline Plane<double> random_plane(Eigen::Index h, Eigen::Index w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane<double> p(h, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  return p;
}

inline Image random_image(Eigen::Index w, Eigen::Index h, std::uint64_t seed) {
  return {random_plane(h, w, seed), random_plane(h, w, seed + 1), random_plane(h, w, seed + 2)};
}

/// Image whose samples sit exactly on 16-bit codes.
inline Image random_image16(Eigen::Index w, Eigen::Index h, std::uint64_t seed) {
  return dequantize_linear16(quantize_linear16(random_image(w, h, seed)));
}

/// Colour patches over a horizontal exposure ramp plus a textured band:
/// saturated and pastel hues, grays, and fine detail.
inline Image test_chart(Eigen::Index w = 192, Eigen::Index h = 128) {
  static const double patches[12][3] = {
      {0.60, 0.10, 0.08}, {0.12, 0.45, 0.10}, {0.08, 0.12, 0.55}, {0.65, 0.55, 0.10},
      {0.10, 0.50, 0.55}, {0.50, 0.12, 0.48}, {0.40, 0.30, 0.22}, {0.20, 0.25, 0.35},
      {0.30, 0.30, 0.30}, {0.08, 0.08, 0.08}, {0.55, 0.40, 0.35}, {0.25, 0.40, 0.15}};
  Image img(w, h);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-0.03, 0.03);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const double ramp = 0.2 + 0.8 * static_cast<double>(x) / static_cast<double>(w - 1);
      double rgb[3];
      if (y < h / 2) {
        const auto& p = patches[(y * 3 / (h / 2)) * 4 + x * 4 / w];
        for (int c = 0; c < 3; ++c) rgb[c] = p[c];
      } else if (y < 3 * h / 4) {
        const double v = 0.5 * ramp;
        rgb[0] = v * 0.9;
        rgb[1] = v;
        rgb[2] = v * 1.1;
      } else {
        const double t = 0.3 + 0.15 * std::sin(static_cast<double>(x) * 0.7) *
                                   std::cos(static_cast<double>(y) * 0.5);
        rgb[0] = t * 1.2;
        rgb[1] = t * 0.9;
        rgb[2] = t * 0.7;
      }
      for (int c = 0; c < 3; ++c)
        img.channel(c)(y, x) = std::clamp(rgb[c] + noise(rng), 0.0, 1.0);
    }
  return dequantize_linear16(quantize_linear16(img));
}

inline double mean_luminance(const Image& img) {
  return rgb_to_lumachroma(img).y.mean();
}

inline double mean_chroma(const Image& img) {
  return rgb_to_lumachroma(img).chroma_magnitude().mean();
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("moodisp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace moodisp::testing
