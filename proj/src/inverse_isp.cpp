#include "moodisp/inverse_isp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace moodisp {

double srgb_eotf(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_oetf(double l) {
  l = std::clamp(l, 0.0, 1.0);
  return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

MonotoneSpline::MonotoneSpline(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) throw DomainError("tone curve needs >= 2 matching control points");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(xs_[i + 1] > xs_[i]) || !(ys_[i + 1] > ys_[i]))
      throw DomainError("tone curve control points must be strictly increasing");

  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    secant[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
  slopes_.assign(n, 0.0);
  slopes_[0] = secant[0];
  slopes_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) slopes_[i] = 0.5 * (secant[i - 1] + secant[i]);
  // Fritsch-Carlson limiter; all secants are positive here.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = slopes_[i] / secant[i];
    const double b = slopes_[i + 1] / secant[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double t = 3.0 / std::sqrt(r);
      slopes_[i] = t * a * secant[i];
      slopes_[i + 1] = t * b * secant[i];
    }
  }
}

double MonotoneSpline::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front() + slopes_.front() * (x - xs_.front());
  if (x >= xs_.back()) return ys_.back() + slopes_.back() * (x - xs_.back());
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[i + 1] - xs_[i];
  const double t = (x - xs_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * ys_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] +
         (-2 * t3 + 3 * t2) * ys_[i + 1] + (t3 - t2) * h * slopes_[i + 1];
}

double MonotoneSpline::inverse(double y) const {
  if (y <= ys_.front()) {
    return slopes_.front() > 0 ? xs_.front() + (y - ys_.front()) / slopes_.front() : xs_.front();
  }
  if (y >= ys_.back()) {
    return slopes_.back() > 0 ? xs_.back() + (y - ys_.back()) / slopes_.back() : xs_.back();
  }
  double lo = xs_.front(), hi = xs_.back();
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon(); ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void InverseConfig::validate() const {
  if (transfer == Transfer::PureGamma && !(gamma > 0 && std::isfinite(gamma)))
    throw DomainError("inverse config: gamma must be > 0");
  if (!color_matrix.allFinite() || std::abs(color_matrix.determinant()) < 1e-12)
    throw DomainError("inverse config: color matrix must be finite and invertible");
}

namespace {

double decode_transfer(double code01, const InverseConfig& cfg) {
  return cfg.transfer == InverseConfig::Transfer::SrgbEotf ? srgb_eotf(code01)
                                                           : std::pow(code01, cfg.gamma);
}

double encode_transfer(double linear, const InverseConfig& cfg) {
  linear = std::clamp(linear, 0.0, 1.0);
  return cfg.transfer == InverseConfig::Transfer::SrgbEotf ? srgb_oetf(linear)
                                                           : std::pow(linear, 1.0 / cfg.gamma);
}

}  // namespace

std::vector<double> linearize_table(const InverseConfig& cfg) {
  cfg.validate();
  std::vector<double> lut(256);
  for (int code = 0; code < 256; ++code) {
    double v = decode_transfer(code / 255.0, cfg);
    if (cfg.tone_curve) v = std::clamp((*cfg.tone_curve)(v), 0.0, 1.0);
    lut[code] = v;
  }
  return lut;
}

double encode_sample(double linear, const InverseConfig& cfg) {
  double v = std::clamp(linear, 0.0, 1.0);
  if (cfg.tone_curve) v = std::clamp(cfg.tone_curve->inverse(v), 0.0, 1.0);
  return encode_transfer(v, cfg);
}

Image linearize(const Srgb8Image& img, const InverseConfig& cfg) {
  if (img.empty()) throw DomainError("linearize: image has zero size");
  if (img.g.rows() != img.r.rows() || img.b.rows() != img.r.rows() ||
      img.g.cols() != img.r.cols() || img.b.cols() != img.r.cols())
    throw DomainError("linearize: channel planes differ in shape");
  const auto lut = linearize_table(cfg);
  Image out(img.width(), img.height());
  for (int c = 0; c < 3; ++c)
    out.channel(c) = img.channel(c).unaryExpr([&](std::uint8_t v) { return lut[v]; });
  if (!cfg.color_matrix.isIdentity(0.0)) {
    const Eigen::Matrix3d& m = cfg.color_matrix;
    for (Eigen::Index i = 0; i < out.pixel_count(); ++i) {
      const Eigen::Vector3d px = m * Eigen::Vector3d(out.r(i), out.g(i), out.b(i));
      out.r(i) = std::clamp(px[0], 0.0, 1.0);
      out.g(i) = std::clamp(px[1], 0.0, 1.0);
      out.b(i) = std::clamp(px[2], 0.0, 1.0);
    }
  }
  return out;
}

Srgb8Image delinearize(const Image& img, const InverseConfig& cfg) {
  img.validate();
  cfg.validate();
  Image src = img;
  if (!cfg.color_matrix.isIdentity(0.0)) {
    const Eigen::Matrix3d inv = cfg.color_matrix.inverse();
    for (Eigen::Index i = 0; i < src.pixel_count(); ++i) {
      const Eigen::Vector3d px = inv * Eigen::Vector3d(img.r(i), img.g(i), img.b(i));
      src.r(i) = px[0];
      src.g(i) = px[1];
      src.b(i) = px[2];
    }
  }
  Srgb8Image out(img.width(), img.height());
  for (int c = 0; c < 3; ++c)
    out.channel(c) = src.channel(c).unaryExpr([&](double v) {
      return static_cast<std::uint8_t>(std::floor(encode_sample(v, cfg) * 255.0 + 0.5));
    });
  return out;
}

double psnr(const Srgb8Image& a, const Srgb8Image& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.empty())
    throw DomainError("psnr: images must be non-empty and equally sized");
  double se = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto d = a.channel(c).cast<double>() - b.channel(c).cast<double>();
    se += d.square().sum();
  }
  const double mse = se / (3.0 * static_cast<double>(a.r.size()));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace moodisp
