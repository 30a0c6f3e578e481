#pragma once

#include <cstddef>
#include <vector>

#include "deblur/common.hpp"

namespace deblur {

// 10*log10(max_val^2 / MSE); +infinity when MSE is exactly 0.
double psnr(const double* a, const double* b, std::size_t n, double max_val);

// Mean local SSIM over all fully-contained 8x8 windows, uniform weighting,
// k1=0.01, k2=0.03; inputs in [-1,1] are viewed on [0,1].
double ssim(const double* a, const double* b, int h, int w);

struct SpectrumProfile {
  struct Bin {
    double mean_radius = 0.0;
    double mean_power = 0.0;
    long count = 0;
  };
  std::vector<Bin> bins;   // indexed by integer radius
  double alpha = 0.0;      // log-log decay exponent; NaN when unfittable
  int fit_rmin = 0, fit_rmax = 0;
};

// |F(x)|^2 binned by integer centered-frequency radius; alpha fitted over
// integer radii [2, H/4] with log(mean power) vs log(mean radius).
SpectrumProfile radial_power_spectrum(const double* x, int h, int w);

// Profile of the average power spectrum of a set.
SpectrumProfile radial_power_spectrum_mean(const std::vector<const double*>& xs, int h, int w);

// Per-frequency mean of log(1 + |F|) over a set.
std::vector<double> mean_log_spectrum(const std::vector<const double*>& xs, int h, int w);

// Mean over frequencies of |mean_a log(1+|F|) - mean_ref log(1+|F|)|;
// min_radius >= 0 restricts to centered radii strictly greater than it.
double spectrum_gap(const std::vector<const double*>& a,
                    const std::vector<const double*>& ref, int h, int w,
                    double min_radius = -1.0);

}  // namespace deblur
