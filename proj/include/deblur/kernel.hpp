#pragma once

#include <vector>

#include "deblur/nn.hpp"
#include "deblur/tensor.hpp"

namespace deblur {

enum class KernelNorm { softmax_simplex, raw };

// Small odd-sized blur kernel. In softmax_simplex mode the weights are a
// distribution over the support (nonneg, unit sum).
struct BlurKernel {
  int size = 11;
  std::vector<double> weights;
  KernelNorm normalization = KernelNorm::softmax_simplex;

  static BlurKernel delta(int size);
  static BlurKernel gaussian(int size, double sigma);  // truncated, unit-sum

  // Clamps negatives to zero and renormalizes to unit sum; the result is
  // simplex-normalized. Zero total mass throws.
  BlurKernel projected_to_simplex() const;
};

// Circular convolution of x with a centered odd-sized kernel; matches the
// BccbOperator eigenvalue convention.
std::vector<double> circular_convolve(const double* x, int h, int w, const double* k, int s);

// Mass-weighted squared radius around the center; softmax_simplex mode only.
double kernel_second_moment(const BlurKernel& k);

// Solves min_k ||x (*) k - xhat||^2 over a size x size support via normal
// equations with ridge*I; circular convolution convention. Singular system at
// ridge=0 throws, suggesting a ridge.
BlurKernel fit_kernel_least_squares(const std::vector<double>& x,
                                    const std::vector<double>& xhat, int h, int w,
                                    int size, double ridge);

// z -> kernel logits through two linear layers; softmax_simplex mode applies
// a row softmax so each sample's kernel is a distribution.
struct KernelGenerator {
  int latent = 16, hidden = 1000, ksize = 11;
  KernelNorm mode = KernelNorm::softmax_simplex;
  LinearLayer fc1, fc2;

  static KernelGenerator make(ParamStore& store, const std::string& prefix, int latent,
                              int hidden, int ksize, KernelNorm mode, NormalSampler& rng);
  // z [B,latent] -> [B, ksize*ksize]
  Tensor forward(Ctx& ctx, const Tensor& z) const;
};

std::vector<BlurKernel> to_kernels(const Tensor& batch, int ksize, KernelNorm mode);

// mean over batch of ||x_b (*) k_b - xhat_b||^2 / (H*W); x and xhat must be
// constants (gradient reaches the kernels only).
Tensor kernel_fit_loss(const Tensor& x, const Tensor& xhat, const Tensor& kernels);

}  // namespace deblur
