#pragma once

#include <vector>

#include "deblur/fft.hpp"
#include "deblur/tensor.hpp"

namespace deblur {

// K(eps) = K + eps*I where K is the BCCB matrix of circular convolution with
// an odd-sized kernel on an h*w grid. Eigenvalues are the 2D DFT of the
// centered padded kernel; immutable after construction.
class BccbOperator {
 public:
  BccbOperator(std::vector<double> kernel, int ksize, int h, int w, double eps);

  int h() const { return h_; }
  int w() const { return w_; }
  int ksize() const { return ksize_; }
  double eps() const { return eps_; }
  const ComplexGrid& eigenvalues() const { return eig_; }

  // sum over frequencies of log|lambda + eps| = log|K(eps)|. Throws when some
  // |lambda + eps| vanishes, naming the frequency.
  double log_abs_det() const;

  // (K + eps I) x via the frequency domain.
  std::vector<double> apply(const std::vector<double>& x) const;

  // Dense (HW)x(HW) row-major materialization; oracle only, HW <= 4096.
  std::vector<double> materialize_dense() const;

 private:
  std::vector<double> kernel_;
  int ksize_, h_, w_;
  double eps_;
  std::vector<double> kpad_;
  ComplexGrid eig_;
};

// Differentiable mean over the batch of log|K_b(eps)| for kernels shaped
// [B, s, s] or [B, s*s]; the gradient flows back to the kernel entries
// through the eigenvalue map.
Tensor bccb_log_abs_det_mean(const Tensor& kernels, int h, int w, double eps);

}  // namespace deblur
