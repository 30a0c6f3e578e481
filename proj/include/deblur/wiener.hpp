#pragma once

#include <vector>

#include "deblur/circulant.hpp"
#include "deblur/fft.hpp"
#include "deblur/kernel.hpp"
#include "deblur/tensor.hpp"

namespace deblur {

// Frequency-domain reconstruction weight conj(L)/(|L|^2 + C) for L = the
// convolution eigenvalues of a kernel. The identity flag marks the exact-one
// weight whose loss is evaluated spatially, making the warm-up phase
// bit-compatible with the plain L2 baseline.
struct WienerWeight {
  ComplexGrid grid;
  double c = 0.0;
  BlurKernel source_kernel;
  bool identity = false;

  static WienerWeight build(const BlurKernel& k, double c, int h, int w);
  static WienerWeight identity_weight(int h, int w);
  double max_gain() const;
};

// Applies a weight grid to an observed image: Re(ifft2(grid . fft2(y))).
std::vector<double> wiener_deconvolve(const std::vector<double>& y, int h, int w,
                                      const WienerWeight& wt);

// mean over batch of (1/(HW)) sum_freq |w (F(x) - F(xhat))|^2, summed over
// channels. Equals the spatial sum of squared errors for identity weights and
// is computed spatially in that case. Gradient flows to xhat only; weights
// are constants. Pass one weight to share it, or one per sample.
Tensor weighted_recon_loss(const Tensor& x, const Tensor& xhat,
                           const std::vector<WienerWeight>& weights);
Tensor weighted_recon_loss(const Tensor& x, const Tensor& xhat, const WienerWeight& w);

// Negative Gaussian log-density of one image under mean xhat and the blur
// covariance implied by (w, op): (D/2) log 2pi + log|K(eps)| + recon/2.
// Returned as a minimized loss.
Tensor gaussian_log_likelihood(const Tensor& x, const Tensor& xhat, const WienerWeight& w,
                               const BccbOperator& op);

// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1) over latent dims, mean over batch.
Tensor kl_standard_normal(const Tensor& mu, const Tensor& logvar);

enum class BaselineKind { L2, L1, CE };

// Pixel-summed, batch-averaged reconstruction losses. CE views [-1,1] data
// through the (x+1)/2 adapter and requires values in [0,1] after mapping.
Tensor baseline_loss(BaselineKind kind, const Tensor& x, const Tensor& xhat);

struct ElboBreakdown {
  double recon_term = 0.0, logdet_term = 0.0, kl_term = 0.0, beta = 1.0, total = 0.0;
};

// total = recon + logdet + beta*kl, all terms minimized.
ElboBreakdown assemble_elbo(double recon, double logdet, double kl, double beta);

}  // namespace deblur
