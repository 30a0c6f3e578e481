#include "deblur/kernel.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "deblur/fft.hpp"

namespace deblur {
namespace {

void check_odd(int size) {
  if (size < 1 || size % 2 == 0)
    throw ValueError("kernel size must be odd and positive, got " + std::to_string(size));
}

}  // namespace

BlurKernel BlurKernel::delta(int size) {
  check_odd(size);
  BlurKernel k;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
  int c = size / 2;
  k.weights[static_cast<std::size_t>(c) * size + c] = 1.0;
  return k;
}

BlurKernel BlurKernel::gaussian(int size, double sigma) {
  check_odd(size);
  if (sigma <= 0.0) throw ValueError("gaussian kernel needs sigma > 0");
  BlurKernel k;
  k.size = size;
  k.weights.resize(static_cast<std::size_t>(size) * size);
  int c = size / 2;
  double total = 0.0;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      double r2 = double(i - c) * (i - c) + double(j - c) * (j - c);
      total += (k.weights[static_cast<std::size_t>(i) * size + j] =
                    std::exp(-r2 / (2.0 * sigma * sigma)));
    }
  for (auto& v : k.weights) v /= total;
  return k;
}

BlurKernel BlurKernel::projected_to_simplex() const {
  BlurKernel out = *this;
  double total = 0.0;
  for (auto& v : out.weights) total += (v = std::max(v, 0.0));
  if (total <= 0.0) throw NumericError("projected_to_simplex: kernel has no positive mass");
  for (auto& v : out.weights) v /= total;
  out.normalization = KernelNorm::softmax_simplex;
  return out;
}

std::vector<double> circular_convolve(const double* x, int h, int w, const double* k, int s) {
  check_odd(s);
  int c = s / 2;
  std::vector<double> y(static_cast<std::size_t>(h) * w, 0.0);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) {
      double kv = k[a * s + b];
      if (kv == 0.0) continue;
      int oi = a - c, oj = b - c;
      for (int i = 0; i < h; ++i) {
        int si = ((i - oi) % h + h) % h;
        const double* src = x + static_cast<std::size_t>(si) * w;
        double* dst = y.data() + static_cast<std::size_t>(i) * w;
        for (int j = 0; j < w; ++j) {
          int sj = ((j - oj) % w + w) % w;
          dst[j] += kv * src[sj];
        }
      }
    }
  return y;
}

double kernel_second_moment(const BlurKernel& k) {
  if (k.normalization != KernelNorm::softmax_simplex)
    throw ValueError("kernel_second_moment: raw-mode kernel is not a distribution");
  int c = k.size / 2;
  double m2 = 0.0;
  for (int i = 0; i < k.size; ++i)
    for (int j = 0; j < k.size; ++j)
      m2 += k.weights[static_cast<std::size_t>(i) * k.size + j] *
            (double(i - c) * (i - c) + double(j - c) * (j - c));
  return m2;
}

BlurKernel fit_kernel_least_squares(const std::vector<double>& x,
                                    const std::vector<double>& xhat, int h, int w,
                                    int size, double ridge) {
  check_odd(size);
  if (x.size() != static_cast<std::size_t>(h) * w || xhat.size() != x.size())
    throw ValueError("fit_kernel_least_squares: image size mismatch");
  if (static_cast<std::size_t>(size) * size > x.size())
    throw ValueError("fit_kernel_least_squares: kernel support exceeds image");
  if (ridge < 0.0) throw ValueError("fit_kernel_least_squares: negative ridge");

  // A[p][q] = <S_p x, S_q x> = R_xx(off_q - off_p); b[p] = <S_p x, xhat>,
  // both read off FFT-based circular correlations.
  ComplexGrid X = fft2(x, h, w);
  ComplexGrid Xh = fft2(xhat, h, w);
  ComplexGrid auto_spec(h, w), cross_spec(h, w);
  for (std::size_t i = 0; i < X.size(); ++i) {
    auto_spec.re[i] = X.re[i] * X.re[i] + X.im[i] * X.im[i];
    auto_spec.im[i] = 0.0;
    cross_spec.re[i] = X.re[i] * Xh.re[i] + X.im[i] * Xh.im[i];
    cross_spec.im[i] = X.re[i] * Xh.im[i] - X.im[i] * Xh.re[i];
  }
  std::vector<double> r_auto = ifft2_real(auto_spec);
  std::vector<double> r_cross = ifft2_real(cross_spec);
  auto wrap = [&](int di, int dj) {
    int ii = (di % h + h) % h;
    int jj = (dj % w + w) % w;
    return r_auto[static_cast<std::size_t>(ii) * w + jj];
  };

  int n = size * size, c = size / 2;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  for (int p = 0; p < n; ++p) {
    int pi = p / size - c, pj = p % size - c;
    for (int q = 0; q < n; ++q) {
      int qi = q / size - c, qj = q % size - c;
      A(p, q) = wrap(pi - qi, pj - qj);
    }
    int ii = (pi % h + h) % h, jj = (pj % w + w) % w;
    rhs(p) = r_cross[static_cast<std::size_t>(ii) * w + jj];
  }
  for (int p = 0; p < n; ++p) A(p, p) += ridge;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw NumericError(
        "fit_kernel_least_squares: singular normal matrix; use ridge > 0 or a richer image");
  Eigen::VectorXd sol = lu.solve(rhs);

  BlurKernel k;
  k.size = size;
  k.normalization = KernelNorm::raw;
  k.weights.assign(sol.data(), sol.data() + n);
  return k;
}

KernelGenerator KernelGenerator::make(ParamStore& store, const std::string& prefix,
                                      int latent, int hidden, int ksize, KernelNorm mode,
                                      NormalSampler& rng) {
  check_odd(ksize);
  KernelGenerator g;
  g.latent = latent;
  g.hidden = hidden;
  g.ksize = ksize;
  g.mode = mode;
  g.fc1 = LinearLayer::make(store, prefix + ".fc1", latent, hidden, rng);
  g.fc2 = LinearLayer::make(store, prefix + ".fc2", hidden, ksize * ksize, rng);
  return g;
}

Tensor KernelGenerator::forward(Ctx& ctx, const Tensor& z) const {
  if (z.ndim() != 2 || z.dim(1) != latent)
    throw ValueError("KernelGenerator: z shape " + shape_str(z.shape()) + ", expected [B," +
                     std::to_string(latent) + "]");
  Tensor h = leaky_relu(fc1.forward(ctx, z), 0.01);
  Tensor logits = fc2.forward(ctx, h);
  return mode == KernelNorm::softmax_simplex ? softmax_rows(logits) : logits;
}

std::vector<BlurKernel> to_kernels(const Tensor& batch, int ksize, KernelNorm mode) {
  std::size_t per = static_cast<std::size_t>(ksize) * ksize;
  if (batch.ndim() != 2 || batch.size() % per != 0 ||
      batch.dim(1) != static_cast<int>(per))
    throw ValueError("to_kernels: batch shape " + shape_str(batch.shape()));
  std::vector<BlurKernel> out;
  int B = batch.dim(0);
  out.reserve(B);
  for (int b = 0; b < B; ++b) {
    BlurKernel k;
    k.size = ksize;
    k.normalization = mode;
    const double* p = batch.data() + static_cast<std::size_t>(b) * per;
    k.weights.assign(p, p + per);
    out.push_back(std::move(k));
  }
  return out;
}

Tensor kernel_fit_loss(const Tensor& x, const Tensor& xhat, const Tensor& kernels) {
  if (x.on_tape() || xhat.on_tape())
    throw ValueError("kernel_fit_loss: images must be detached constants");
  if (x.ndim() != 4 || x.shape() != xhat.shape())
    throw ValueError("kernel_fit_loss: expected matching [B,C,H,W] images");
  int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (C != 1) throw ValueError("kernel_fit_loss: grayscale only");
  if (kernels.ndim() != 2 || kernels.dim(0) != B)
    throw ValueError("kernel_fit_loss: kernel batch shape " + shape_str(kernels.shape()));
  int per = kernels.dim(1);
  int s = static_cast<int>(std::lround(std::sqrt(double(per))));
  if (s * s != per) throw ValueError("kernel_fit_loss: kernels are not square");
  std::size_t hw = static_cast<std::size_t>(H) * W;

  auto residuals = std::make_shared<std::vector<double>>(static_cast<std::size_t>(B) * hw);
  double acc = 0.0;
  for (int b = 0; b < B; ++b) {
    std::vector<double> y = circular_convolve(x.data() + b * hw, H, W,
                                              kernels.data() + static_cast<std::size_t>(b) * per, s);
    double sb = 0.0;
    double* res = residuals->data() + b * hw;
    const double* t = xhat.data() + b * hw;
    for (std::size_t i = 0; i < hw; ++i) {
      res[i] = y[i] - t[i];
      sb += res[i] * res[i];
    }
    acc += sb / static_cast<double>(hw);
  }
  Tensor out({1}, {acc / B});
  if (!kernels.on_tape()) return out;
  return kernels.tape()->record(std::move(out), [x, kernels, residuals, B, H, W, s, per,
                                                 hw](Tape& t, const std::vector<double>& g) {
    std::vector<double> gk(kernels.size(), 0.0);
    int c = s / 2;
    double scale = 2.0 * g[0] / (static_cast<double>(B) * static_cast<double>(hw));
    for (int b = 0; b < B; ++b) {
      const double* res = residuals->data() + b * hw;
      const double* img = x.data() + b * hw;
      for (int a = 0; a < s; ++a)
        for (int bb = 0; bb < s; ++bb) {
          int oi = a - c, oj = bb - c;
          double dot = 0.0;
          for (int i = 0; i < H; ++i) {
            int si = ((i - oi) % H + H) % H;
            const double* src = img + static_cast<std::size_t>(si) * W;
            const double* rr = res + static_cast<std::size_t>(i) * W;
            for (int j = 0; j < W; ++j) {
              int sj = ((j - oj) % W + W) % W;
              dot += rr[j] * src[sj];
            }
          }
          gk[static_cast<std::size_t>(b) * per + a * s + bb] = scale * dot;
        }
    }
    t.add_grad(kernels.node(), gk.data(), gk.size());
  });
}

}  // namespace deblur
