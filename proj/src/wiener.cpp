#include "deblur/wiener.hpp"

#include <cmath>

#include "deblur/ops.hpp"

namespace deblur {
namespace {

// Shared by the L2 baseline and the identity-weight reconstruction path; both
// must execute the exact same float operations for warm-up bit-equality.
Tensor spatial_sse_mean(const Tensor& x, const Tensor& xhat) {
  int B = x.dim(0);
  std::size_t per = x.size() / static_cast<std::size_t>(B);
  double total = 0.0;
  for (int b = 0; b < B; ++b) {
    const double* px = x.data() + b * per;
    const double* ph = xhat.data() + b * per;
    double sb = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      double e = ph[i] - px[i];
      sb += e * e;
    }
    total += sb;
  }
  Tensor out({1}, {total / B});
  if (!xhat.on_tape()) return out;
  return xhat.tape()->record(std::move(out), [x, xhat, B](Tape& t, const std::vector<double>& g) {
    std::vector<double> gh(xhat.size());
    double s = 2.0 * g[0] / B;
    for (std::size_t i = 0; i < gh.size(); ++i) gh[i] = s * (xhat[i] - x[i]);
    t.add_grad(xhat.node(), gh.data(), gh.size());
  });
}

void check_pair(const Tensor& x, const Tensor& xhat, const char* name) {
  if (x.ndim() != 4 || x.shape() != xhat.shape())
    throw ValueError(std::string(name) + ": expected matching [B,C,H,W], got " +
                     shape_str(x.shape()) + " vs " + shape_str(xhat.shape()));
  if (x.on_tape()) throw ValueError(std::string(name) + ": target x must be a constant");
}

}  // namespace

WienerWeight WienerWeight::build(const BlurKernel& k, double c, int h, int w) {
  if (c <= 0.0) throw ValueError("WienerWeight: C must be positive");
  std::vector<double> kpad = pad_and_center_kernel(k.weights.data(), k.size, h, w);
  ComplexGrid lam = fft2(kpad, h, w);
  WienerWeight wt;
  wt.grid = ComplexGrid(h, w);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    double denom = lam.re[i] * lam.re[i] + lam.im[i] * lam.im[i] + c;
    wt.grid.re[i] = lam.re[i] / denom;
    wt.grid.im[i] = -lam.im[i] / denom;
  }
  wt.c = c;
  wt.source_kernel = k;
  return wt;
}

WienerWeight WienerWeight::identity_weight(int h, int w) {
  WienerWeight wt;
  wt.grid = ComplexGrid(h, w);
  for (auto& v : wt.grid.re) v = 1.0;
  wt.identity = true;
  wt.source_kernel = BlurKernel::delta(1);
  return wt;
}

double WienerWeight::max_gain() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    m = std::max(m, std::hypot(grid.re[i], grid.im[i]));
  return m;
}

std::vector<double> wiener_deconvolve(const std::vector<double>& y, int h, int w,
                                      const WienerWeight& wt) {
  if (wt.grid.h != h || wt.grid.w != w) throw ValueError("wiener_deconvolve: dim mismatch");
  ComplexGrid Y = fft2(y, h, w);
  for (std::size_t i = 0; i < Y.size(); ++i) {
    double yr = Y.re[i], yi = Y.im[i];
    Y.re[i] = wt.grid.re[i] * yr - wt.grid.im[i] * yi;
    Y.im[i] = wt.grid.re[i] * yi + wt.grid.im[i] * yr;
  }
  return ifft2(Y).re;
}

Tensor weighted_recon_loss(const Tensor& x, const Tensor& xhat,
                           const std::vector<WienerWeight>& weights) {
  check_pair(x, xhat, "weighted_recon_loss");
  int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (weights.empty()) throw ValueError("weighted_recon_loss: no weights");
  if (weights.size() != 1 && weights.size() != static_cast<std::size_t>(B))
    throw ValueError("weighted_recon_loss: need 1 or B weights");
  for (const auto& wt : weights)
    if (wt.grid.h != H || wt.grid.w != W)
      throw ValueError("weighted_recon_loss: weight grid dims mismatch image");

  if (weights.size() == 1 && weights[0].identity) return spatial_sse_mean(x, xhat);

  std::size_t hw = static_cast<std::size_t>(H) * W;
  auto spectra = std::make_shared<std::vector<ComplexGrid>>();
  spectra->reserve(static_cast<std::size_t>(B) * C);
  double total = 0.0;
  for (int b = 0; b < B; ++b) {
    const WienerWeight& wt = weights[weights.size() == 1 ? 0 : b];
    for (int ch = 0; ch < C; ++ch) {
      std::size_t off = (static_cast<std::size_t>(b) * C + ch) * hw;
      ComplexGrid X = fft2(x.data() + off, H, W);
      ComplexGrid Xh = fft2(xhat.data() + off, H, W);
      // Keep |w|^2 * E for the backward pass; accumulate |w E|^2 now.
      ComplexGrid m(H, W);
      double sb = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        double er = X.re[i] - Xh.re[i];
        double ei = X.im[i] - Xh.im[i];
        double w2 = wt.grid.re[i] * wt.grid.re[i] + wt.grid.im[i] * wt.grid.im[i];
        sb += w2 * (er * er + ei * ei);
        m.re[i] = w2 * er;
        m.im[i] = w2 * ei;
      }
      total += sb / static_cast<double>(hw);
      spectra->push_back(std::move(m));
    }
  }
  Tensor out({1}, {total / B});
  if (!xhat.on_tape()) return out;
  return xhat.tape()->record(std::move(out), [xhat, spectra, B, C, hw](
                                                 Tape& t, const std::vector<double>& g) {
    std::vector<double> gh(xhat.size());
    double scale = -2.0 * g[0] / B;
    for (std::size_t s = 0; s < spectra->size(); ++s) {
      ComplexGrid grad_spec = ifft2((*spectra)[s]);
      double* dst = gh.data() + s * hw;
      for (std::size_t i = 0; i < hw; ++i) dst[i] = scale * grad_spec.re[i];
    }
    t.add_grad(xhat.node(), gh.data(), gh.size());
  });
}

Tensor weighted_recon_loss(const Tensor& x, const Tensor& xhat, const WienerWeight& w) {
  return weighted_recon_loss(x, xhat, std::vector<WienerWeight>{w});
}

Tensor gaussian_log_likelihood(const Tensor& x, const Tensor& xhat, const WienerWeight& w,
                               const BccbOperator& op) {
  int H = w.grid.h, W = w.grid.w;
  if (op.h() != H || op.w() != W)
    throw ValueError("gaussian_log_likelihood: operator dims mismatch weight");
  std::size_t hw = static_cast<std::size_t>(H) * W;
  if (x.size() == 0 || x.size() % hw != 0)
    throw ValueError("gaussian_log_likelihood: image size incompatible with weight grid");
  int C = static_cast<int>(x.size() / hw);
  if (x.on_tape()) throw ValueError("gaussian_log_likelihood: target x must be a constant");
  Tensor x4 = x.view({1, C, H, W});
  Tensor xh4 = xhat.on_tape() ? reshape(xhat, {1, C, H, W}) : xhat.view({1, C, H, W});
  double d = static_cast<double>(x.size());
  Tensor recon = weighted_recon_loss(x4, xh4, w);
  return add(mul(recon, 0.5), 0.5 * d * std::log(2.0 * M_PI) + op.log_abs_det());
}

Tensor kl_standard_normal(const Tensor& mu, const Tensor& logvar) {
  if (mu.ndim() != 2 || mu.shape() != logvar.shape())
    throw ValueError("kl_standard_normal: expected matching [B,L]");
  int B = mu.dim(0);
  Tensor inner = add(sub(add(square(mu), exp_t(logvar)), logvar), -1.0);
  return mul(sum(inner), 0.5 / B);
}

Tensor baseline_loss(BaselineKind kind, const Tensor& x, const Tensor& xhat) {
  check_pair(x, xhat, "baseline_loss");
  int B = x.dim(0);
  switch (kind) {
    case BaselineKind::L2:
      return spatial_sse_mean(x, xhat);
    case BaselineKind::L1:
      return mul(sum(abs_t(sub(xhat, x))), 1.0 / B);
    case BaselineKind::CE: {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < -1.0 || x[i] > 1.0)
          throw ValueError("baseline_loss: CE target outside [0,1] after mapping");
      for (std::size_t i = 0; i < xhat.size(); ++i)
        if (xhat[i] < -1.0 || xhat[i] > 1.0)
          throw ValueError("baseline_loss: CE prediction outside [0,1] after mapping");
      Tensor p = mul(add(x, 1.0), 0.5);
      Tensor q = mul(add(xhat, 1.0), 0.5);
      Tensor pm = sub(Tensor::scalar_tensor(1.0), p);
      Tensor qm = sub(Tensor::scalar_tensor(1.0), q);
      Tensor ll = add(mul(p, log_t(q)), mul(pm, log_t(qm)));
      return mul(sum(neg(ll)), 1.0 / B);
    }
  }
  throw ValueError("baseline_loss: unknown kind");
}

ElboBreakdown assemble_elbo(double recon, double logdet, double kl, double beta) {
  ElboBreakdown e;
  e.recon_term = recon;
  e.logdet_term = logdet;
  e.kl_term = kl;
  e.beta = beta;
  e.total = recon + logdet + beta * kl;
  return e;
}

}  // namespace deblur
