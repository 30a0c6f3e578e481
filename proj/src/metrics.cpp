#include "deblur/metrics.hpp"

#include <cmath>
#include <limits>

#include "deblur/fft.hpp"

namespace deblur {
namespace {

constexpr int kWin = 8;
constexpr double kC1 = 0.01 * 0.01;  // (k1*L)^2, L=1
constexpr double kC2 = 0.03 * 0.03;

// Summed-area table with a zero top row/left column.
std::vector<double> integral(const std::vector<double>& v, int h, int w) {
  std::vector<double> s(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      s[static_cast<std::size_t>(i + 1) * (w + 1) + j + 1] =
          v[static_cast<std::size_t>(i) * w + j] +
          s[static_cast<std::size_t>(i) * (w + 1) + j + 1] +
          s[static_cast<std::size_t>(i + 1) * (w + 1) + j] -
          s[static_cast<std::size_t>(i) * (w + 1) + j];
  return s;
}

double window_sum(const std::vector<double>& s, int w, int i, int j, int n) {
  return s[static_cast<std::size_t>(i + n) * (w + 1) + j + n] -
         s[static_cast<std::size_t>(i) * (w + 1) + j + n] -
         s[static_cast<std::size_t>(i + n) * (w + 1) + j] +
         s[static_cast<std::size_t>(i) * (w + 1) + j];
}

int centered(int u, int n) { return u <= n / 2 ? u : u - n; }

SpectrumProfile profile_from_power(const std::vector<double>& power, int h, int w) {
  SpectrumProfile p;
  int rmax = static_cast<int>(std::floor(std::sqrt(double(h / 2) * (h / 2) + double(w / 2) * (w / 2))));
  p.bins.assign(static_cast<std::size_t>(rmax) + 1, {});
  std::vector<double> radius_sum(static_cast<std::size_t>(rmax) + 1, 0.0);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double uc = centered(u, h), vc = centered(v, w);
      double r = std::sqrt(uc * uc + vc * vc);
      int bin = static_cast<int>(std::floor(r));
      p.bins[static_cast<std::size_t>(bin)].count++;
      p.bins[static_cast<std::size_t>(bin)].mean_power += power[static_cast<std::size_t>(u) * w + v];
      radius_sum[static_cast<std::size_t>(bin)] += r;
    }
  for (std::size_t b = 0; b < p.bins.size(); ++b)
    if (p.bins[b].count > 0) {
      p.bins[b].mean_power /= p.bins[b].count;
      p.bins[b].mean_radius = radius_sum[b] / p.bins[b].count;
    }
  p.fit_rmin = 2;
  p.fit_rmax = h / 4;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (int r = p.fit_rmin; r <= p.fit_rmax && r < static_cast<int>(p.bins.size()); ++r) {
    const auto& bin = p.bins[static_cast<std::size_t>(r)];
    if (bin.count == 0 || bin.mean_power <= 0.0) continue;
    double lx = std::log(bin.mean_radius), ly = std::log(bin.mean_power);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m >= 2) {
    double denom = m * sxx - sx * sx;
    p.alpha = -(m * sxy - sx * sy) / denom;
  } else {
    p.alpha = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

std::vector<double> power_of(const double* x, int h, int w) {
  ComplexGrid X = fft2(x, h, w);
  std::vector<double> power(X.size());
  for (std::size_t i = 0; i < X.size(); ++i)
    power[i] = X.re[i] * X.re[i] + X.im[i] * X.im[i];
  return power;
}

}  // namespace

double psnr(const double* a, const double* b, std::size_t n, double max_val) {
  require(max_val > 0.0, "psnr: max_val must be positive");
  require(n > 0, "psnr: empty image");
  double mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / mse);
}

double ssim(const double* a, const double* b, int h, int w) {
  if (h < kWin || w < kWin) throw ValueError("ssim: image smaller than the 8x8 window");
  std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (a[i] + 1.0) * 0.5;
    y[i] = (b[i] + 1.0) * 0.5;
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  auto sx = integral(x, h, w), sy = integral(y, h, w);
  auto sxx = integral(xx, h, w), syy = integral(yy, h, w), sxy = integral(xy, h, w);
  double inv = 1.0 / (kWin * kWin);
  double acc = 0.0;
  long count = 0;
  for (int i = 0; i + kWin <= h; ++i)
    for (int j = 0; j + kWin <= w; ++j) {
      double mx = window_sum(sx, w, i, j, kWin) * inv;
      double my = window_sum(sy, w, i, j, kWin) * inv;
      double vx = window_sum(sxx, w, i, j, kWin) * inv - mx * mx;
      double vy = window_sum(syy, w, i, j, kWin) * inv - my * my;
      double cxy = window_sum(sxy, w, i, j, kWin) * inv - mx * my;
      double num = (2.0 * mx * my + kC1) * (2.0 * cxy + kC2);
      double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
      acc += num / den;
      ++count;
    }
  return acc / count;
}

SpectrumProfile radial_power_spectrum(const double* x, int h, int w) {
  require(is_power_of_two(h) && is_power_of_two(w),
          "radial_power_spectrum: dims must be powers of two");
  return profile_from_power(power_of(x, h, w), h, w);
}

SpectrumProfile radial_power_spectrum_mean(const std::vector<const double*>& xs, int h, int w) {
  require(!xs.empty(), "radial_power_spectrum_mean: empty set");
  std::vector<double> acc(static_cast<std::size_t>(h) * w, 0.0);
  for (const double* x : xs) {
    std::vector<double> p = power_of(x, h, w);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  for (double& v : acc) v /= static_cast<double>(xs.size());
  return profile_from_power(acc, h, w);
}

std::vector<double> mean_log_spectrum(const std::vector<const double*>& xs, int h, int w) {
  require(!xs.empty(), "mean_log_spectrum: empty set");
  std::vector<double> acc(static_cast<std::size_t>(h) * w, 0.0);
  for (const double* x : xs) {
    ComplexGrid X = fft2(x, h, w);
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += std::log1p(std::hypot(X.re[i], X.im[i]));
  }
  for (double& v : acc) v /= static_cast<double>(xs.size());
  return acc;
}

double spectrum_gap(const std::vector<const double*>& a,
                    const std::vector<const double*>& ref, int h, int w, double min_radius) {
  std::vector<double> la = mean_log_spectrum(a, h, w);
  std::vector<double> lr = mean_log_spectrum(ref, h, w);
  double acc = 0.0;
  long count = 0;
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double uc = centered(u, h), vc = centered(v, w);
      if (min_radius >= 0.0 && std::sqrt(uc * uc + vc * vc) <= min_radius) continue;
      acc += std::fabs(la[static_cast<std::size_t>(u) * w + v] -
                       lr[static_cast<std::size_t>(u) * w + v]);
      ++count;
    }
  if (count == 0) throw ValueError("spectrum_gap: no frequencies beyond min_radius");
  return acc / count;
}

}  // namespace deblur
