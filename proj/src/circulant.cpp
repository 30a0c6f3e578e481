#include "deblur/circulant.hpp"

#include <cmath>

namespace deblur {
namespace {

constexpr double kSingularFloor = 1e-300;

double logdet_from_eigs(const ComplexGrid& eig, double eps, int* bad_u, int* bad_v) {
  double acc = 0.0;
  for (int u = 0; u < eig.h; ++u)
    for (int v = 0; v < eig.w; ++v) {
      double re = eig.re[eig.idx(u, v)] + eps;
      double im = eig.im[eig.idx(u, v)];
      double mag = std::hypot(re, im);
      if (mag <= kSingularFloor) {
        *bad_u = u;
        *bad_v = v;
        return 0.0;
      }
      acc += std::log(mag);
    }
  *bad_u = -1;
  return acc;
}

}  // namespace

BccbOperator::BccbOperator(std::vector<double> kernel, int ksize, int h, int w, double eps)
    : kernel_(std::move(kernel)), ksize_(ksize), h_(h), w_(w), eps_(eps) {
  if (kernel_.size() != static_cast<std::size_t>(ksize) * ksize)
    throw ValueError("BccbOperator: kernel buffer does not match size");
  if (eps < 0.0) throw ValueError("BccbOperator: negative epsilon");
  kpad_ = pad_and_center_kernel(kernel_.data(), ksize_, h_, w_);
  eig_ = fft2(kpad_, h_, w_);
}

double BccbOperator::log_abs_det() const {
  int bu, bv;
  double v = logdet_from_eigs(eig_, eps_, &bu, &bv);
  if (bu >= 0)
    throw NumericError("log_abs_det: singular operator, |lambda + eps| = 0 at frequency (" +
                       std::to_string(bu) + "," + std::to_string(bv) + ")");
  return v;
}

std::vector<double> BccbOperator::apply(const std::vector<double>& x) const {
  if (x.size() != static_cast<std::size_t>(h_) * w_)
    throw ValueError("BccbOperator::apply: input size mismatch");
  ComplexGrid X = fft2(x, h_, w_);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double lr = eig_.re[i] + eps_, li = eig_.im[i];
    double xr = X.re[i], xi = X.im[i];
    X.re[i] = lr * xr - li * xi;
    X.im[i] = lr * xi + li * xr;
  }
  return ifft2_real(X);
}

std::vector<double> BccbOperator::materialize_dense() const {
  std::size_t n = static_cast<std::size_t>(h_) * w_;
  if (n > 4096) throw ValueError("materialize_dense: grid exceeds 4096 pixels");
  std::vector<double> m(n * n, 0.0);
  for (int i = 0; i < h_; ++i)
    for (int j = 0; j < w_; ++j) {
      std::size_t row = (static_cast<std::size_t>(i) * w_ + j) * n;
      for (int p = 0; p < h_; ++p)
        for (int q = 0; q < w_; ++q) {
          int di = ((i - p) % h_ + h_) % h_;
          int dj = ((j - q) % w_ + w_) % w_;
          m[row + static_cast<std::size_t>(p) * w_ + q] =
              kpad_[static_cast<std::size_t>(di) * w_ + dj];
        }
      m[row + static_cast<std::size_t>(i) * w_ + j] += eps_;
    }
  return m;
}

Tensor bccb_log_abs_det_mean(const Tensor& kernels, int h, int w, double eps) {
  if (kernels.ndim() < 2) throw ValueError("bccb_log_abs_det_mean: expected a batch of kernels");
  int B = kernels.dim(0);
  std::size_t per = kernels.size() / static_cast<std::size_t>(B);
  int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(per))));
  if (static_cast<std::size_t>(s) * s != per)
    throw ValueError("bccb_log_abs_det_mean: kernels are not square");

  double acc = 0.0;
  for (int b = 0; b < B; ++b) {
    std::vector<double> kpad =
        pad_and_center_kernel(kernels.data() + static_cast<std::size_t>(b) * per, s, h, w);
    ComplexGrid eig = fft2(kpad, h, w);
    int bu, bv;
    acc += logdet_from_eigs(eig, eps, &bu, &bv);
    if (bu >= 0)
      throw NumericError("bccb_log_abs_det_mean: singular kernel in batch element " +
                         std::to_string(b));
  }
  Tensor out({1}, {acc / B});
  if (!kernels.on_tape()) return out;
  return kernels.tape()->record(std::move(out), [kernels, B, per, s, h, w, eps](
                                                    Tape& t, const std::vector<double>& g) {
    std::vector<double> gk(kernels.size(), 0.0);
    int c = s / 2;
    double scale = g[0] / B;
    for (int b = 0; b < B; ++b) {
      std::vector<double> kpad =
          pad_and_center_kernel(kernels.data() + static_cast<std::size_t>(b) * per, s, h, w);
      ComplexGrid eig = fft2(kpad, h, w);
      // d(sum log|lambda+eps|)/d(kpad[m,n]) = Re(fft2(1/(lambda+eps)))[m,n]
      ComplexGrid inv(h, w);
      for (std::size_t i = 0; i < inv.size(); ++i) {
        double lr = eig.re[i] + eps, li = eig.im[i];
        double mag2 = lr * lr + li * li;
        inv.re[i] = lr / mag2;
        inv.im[i] = -li / mag2;
      }
      ComplexGrid gpad = fft2(inv);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
          int ii = ((i - c) % h + h) % h;
          int jj = ((j - c) % w + w) % w;
          gk[static_cast<std::size_t>(b) * per + i * s + j] +=
              scale * gpad.re[gpad.idx(ii, jj)];
        }
    }
    t.add_grad(kernels.node(), gk.data(), gk.size());
  });
}

}  // namespace deblur
