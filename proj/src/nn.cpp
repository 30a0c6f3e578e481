#include "deblur/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

namespace deblur {
namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapMc = Eigen::Map<const MatRM>;

// Unrolls one image [C,H,W] into [C*kh*kw, Ho*Wo] patch columns.
void im2col(const double* x, int C, int H, int W, int kh, int kw, int stride, int pad,
            int Ho, int Wo, double* col) {
  for (int c = 0; c < C; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        double* row = col + (static_cast<std::size_t>(c) * kh * kw + ki * kw + kj) *
                                (static_cast<std::size_t>(Ho) * Wo);
        for (int oi = 0; oi < Ho; ++oi) {
          int ii = oi * stride - pad + ki;
          const double* src = x + (static_cast<std::size_t>(c) * H + ii) * W;
          for (int oj = 0; oj < Wo; ++oj) {
            int jj = oj * stride - pad + kj;
            row[oi * Wo + oj] =
                (ii >= 0 && ii < H && jj >= 0 && jj < W) ? src[jj] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates patch columns back into the image.
void col2im(const double* col, int C, int H, int W, int kh, int kw, int stride, int pad,
            int Ho, int Wo, double* x) {
  for (int c = 0; c < C; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const double* row = col + (static_cast<std::size_t>(c) * kh * kw + ki * kw + kj) *
                                      (static_cast<std::size_t>(Ho) * Wo);
        for (int oi = 0; oi < Ho; ++oi) {
          int ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= H) continue;
          double* dst = x + (static_cast<std::size_t>(c) * H + ii) * W;
          for (int oj = 0; oj < Wo; ++oj) {
            int jj = oj * stride - pad + kj;
            if (jj >= 0 && jj < W) dst[jj] += row[oi * Wo + oj];
          }
        }
      }
    }
  }
}

int conv_out_dim(int in, int k, int stride, int pad, const char* name) {
  int span = in + 2 * pad - k;
  if (span < 0 || span % stride != 0)
    throw ValueError(std::string(name) + ": size " + std::to_string(in) +
                     " incompatible with kernel " + std::to_string(k) + " stride " +
                     std::to_string(stride) + " pad " + std::to_string(pad));
  return span / stride + 1;
}

}  // namespace

Parameter& ParamStore::add(std::string name, Tensor init, bool trainable) {
  if (find(name)) throw ValueError("duplicate parameter name: " + name);
  params_.emplace_back(std::move(name), std::move(init));
  params_.back().trainable = trainable;
  return params_.back();
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<Parameter*> ParamStore::trainable_params() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (p.trainable) out.push_back(&p);
  return out;
}

Parameter* ParamStore::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Tensor uniform_init(Shape shape, double bound, NormalSampler& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (rng.uniform() * 2.0 - 1.0) * bound;
  return t;
}

Tensor add_rowwise(const Tensor& x, const Tensor& b) {
  if (x.ndim() != 2 || b.ndim() != 1 || x.dim(1) != b.dim(0))
    throw ValueError("add_rowwise: shapes " + shape_str(x.shape()) + " and " +
                     shape_str(b.shape()));
  int rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(r) * cols + c] = x[static_cast<std::size_t>(r) * cols + c] + b[c];
  Tape* tape = x.on_tape() ? x.tape() : b.tape();
  if (x.on_tape() && b.on_tape() && x.tape() != b.tape())
    throw ValueError("add_rowwise: operands on different tapes");
  if (!tape) return out;
  return tape->record(std::move(out), [x, b, rows, cols](Tape& t, const std::vector<double>& g) {
    if (x.on_tape()) t.add_grad(x.node(), g.data(), g.size());
    if (b.on_tape()) {
      std::vector<double> gb(static_cast<std::size_t>(cols), 0.0);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) gb[c] += g[static_cast<std::size_t>(r) * cols + c];
      t.add_grad(b.node(), gb.data(), gb.size());
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = matmul(x, w);
  if (b.defined()) y = add_rowwise(y, b);
  return y;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  if (x.ndim() != 4 || w.ndim() != 4 || x.dim(1) != w.dim(1))
    throw ValueError("conv2d: shapes " + shape_str(x.shape()) + " and " + shape_str(w.shape()));
  int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  int F = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (b.defined() && (b.ndim() != 1 || b.dim(0) != F))
    throw ValueError("conv2d: bias shape " + shape_str(b.shape()));
  int Ho = conv_out_dim(H, kh, stride, pad, "conv2d");
  int Wo = conv_out_dim(W, kw, stride, pad, "conv2d");
  std::size_t ckk = static_cast<std::size_t>(C) * kh * kw;
  std::size_t owo = static_cast<std::size_t>(Ho) * Wo;

  Tensor out({B, F, Ho, Wo});
  auto cols = std::make_shared<std::vector<double>>(static_cast<std::size_t>(B) * ckk * owo);
  for (int bi = 0; bi < B; ++bi) {
    double* col = cols->data() + bi * ckk * owo;
    im2col(x.data() + static_cast<std::size_t>(bi) * C * H * W, C, H, W, kh, kw, stride, pad,
           Ho, Wo, col);
    MapM(out.data() + static_cast<std::size_t>(bi) * F * owo, F, owo).noalias() =
        MapMc(w.data(), F, ckk) * MapMc(col, ckk, owo);
    if (b.defined()) {
      double* o = out.data() + static_cast<std::size_t>(bi) * F * owo;
      for (int f = 0; f < F; ++f)
        for (std::size_t i = 0; i < owo; ++i) o[f * owo + i] += b[f];
    }
  }

  Tape* tape = x.on_tape() ? x.tape() : (w.on_tape() ? w.tape() : b.tape());
  if (!tape) return out;
  return tape->record(std::move(out), [x, w, b, cols, B, C, H, W, F, kh, kw, Ho, Wo, stride,
                                       pad, ckk, owo](Tape& t, const std::vector<double>& g) {
    std::vector<double> gw;
    if (w.on_tape()) gw.assign(w.size(), 0.0);
    std::vector<double> gx;
    if (x.on_tape()) gx.assign(x.size(), 0.0);
    std::vector<double> gcol(ckk * owo);
    for (int bi = 0; bi < B; ++bi) {
      const double* gb = g.data() + static_cast<std::size_t>(bi) * F * owo;
      const double* col = cols->data() + bi * ckk * owo;
      if (w.on_tape())
        MapM(gw.data(), F, ckk).noalias() += MapMc(gb, F, owo) * MapMc(col, ckk, owo).transpose();
      if (x.on_tape()) {
        MapM(gcol.data(), ckk, owo).noalias() = MapMc(w.data(), F, ckk).transpose() * MapMc(gb, F, owo);
        col2im(gcol.data(), C, H, W, kh, kw, stride, pad, Ho, Wo,
               gx.data() + static_cast<std::size_t>(bi) * C * H * W);
      }
    }
    if (w.on_tape()) t.add_grad(w.node(), gw.data(), gw.size());
    if (x.on_tape()) t.add_grad(x.node(), gx.data(), gx.size());
    if (b.defined() && b.on_tape()) {
      std::vector<double> gbias(static_cast<std::size_t>(F), 0.0);
      for (int bi = 0; bi < B; ++bi) {
        const double* gb = g.data() + static_cast<std::size_t>(bi) * F * owo;
        for (int f = 0; f < F; ++f)
          for (std::size_t i = 0; i < owo; ++i) gbias[f] += gb[f * owo + i];
      }
      t.add_grad(b.node(), gbias.data(), gbias.size());
    }
  });
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  if (x.ndim() != 4 || w.ndim() != 4 || x.dim(1) != w.dim(0))
    throw ValueError("conv_transpose2d: shapes " + shape_str(x.shape()) + " and " +
                     shape_str(w.shape()));
  int B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  int Cout = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  int Ho = (H - 1) * stride - 2 * pad + kh;
  int Wo = (W - 1) * stride - 2 * pad + kw;
  if (Ho <= 0 || Wo <= 0) throw ValueError("conv_transpose2d: non-positive output size");
  if (b.defined() && (b.ndim() != 1 || b.dim(0) != Cout))
    throw ValueError("conv_transpose2d: bias shape " + shape_str(b.shape()));
  std::size_t ckk = static_cast<std::size_t>(Cout) * kh * kw;
  std::size_t hw = static_cast<std::size_t>(H) * W;

  // Forward is the input-adjoint of the conv that maps [Cout,Ho,Wo] to
  // [Cin,H,W] with this same weight.
  Tensor out({B, Cout, Ho, Wo});
  std::vector<double> colg(ckk * hw);
  for (int bi = 0; bi < B; ++bi) {
    MapM(colg.data(), ckk, hw).noalias() =
        MapMc(w.data(), Cin, ckk).transpose() *
        MapMc(x.data() + static_cast<std::size_t>(bi) * Cin * hw, Cin, hw);
    double* o = out.data() + static_cast<std::size_t>(bi) * Cout * Ho * Wo;
    col2im(colg.data(), Cout, Ho, Wo, kh, kw, stride, pad, H, W, o);
    if (b.defined())
      for (int f = 0; f < Cout; ++f)
        for (std::size_t i = 0; i < static_cast<std::size_t>(Ho) * Wo; ++i)
          o[f * static_cast<std::size_t>(Ho) * Wo + i] += b[f];
  }

  Tape* tape = x.on_tape() ? x.tape() : (w.on_tape() ? w.tape() : b.tape());
  if (!tape) return out;
  return tape->record(std::move(out), [x, w, b, B, Cin, H, W, Cout, kh, kw, Ho, Wo, stride,
                                       pad, ckk, hw](Tape& t, const std::vector<double>& g) {
    std::vector<double> gw;
    if (w.on_tape()) gw.assign(w.size(), 0.0);
    std::vector<double> gx;
    if (x.on_tape()) gx.assign(x.size(), 0.0);
    std::vector<double> col(ckk * hw);
    for (int bi = 0; bi < B; ++bi) {
      const double* go = g.data() + static_cast<std::size_t>(bi) * Cout * Ho * Wo;
      im2col(go, Cout, Ho, Wo, kh, kw, stride, pad, H, W, col.data());
      if (x.on_tape())
        MapM(gx.data() + static_cast<std::size_t>(bi) * Cin * hw, Cin, hw).noalias() =
            MapMc(w.data(), Cin, ckk) * MapMc(col.data(), ckk, hw);
      if (w.on_tape())
        MapM(gw.data(), Cin, ckk).noalias() +=
            MapMc(x.data() + static_cast<std::size_t>(bi) * Cin * hw, Cin, hw) *
            MapMc(col.data(), ckk, hw).transpose();
    }
    if (x.on_tape()) t.add_grad(x.node(), gx.data(), gx.size());
    if (w.on_tape()) t.add_grad(w.node(), gw.data(), gw.size());
    if (b.defined() && b.on_tape()) {
      std::vector<double> gbias(static_cast<std::size_t>(Cout), 0.0);
      std::size_t area = static_cast<std::size_t>(Ho) * Wo;
      for (int bi = 0; bi < B; ++bi) {
        const double* go = g.data() + static_cast<std::size_t>(bi) * Cout * area;
        for (int f = 0; f < Cout; ++f)
          for (std::size_t i = 0; i < area; ++i) gbias[f] += go[f * area + i];
      }
      t.add_grad(b.node(), gbias.data(), gbias.size());
    }
  });
}

Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   double* running_mean, double* running_var, bool training,
                   double momentum, double eps) {
  if (x.ndim() != 4) throw ValueError("batchnorm2d expects [B,C,H,W]");
  int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (gamma.size() != static_cast<std::size_t>(C) || beta.size() != static_cast<std::size_t>(C))
    throw ValueError("batchnorm2d: affine parameter size mismatch");
  std::size_t area = static_cast<std::size_t>(H) * W;
  std::size_t n = static_cast<std::size_t>(B) * area;
  auto at = [&](int bi, int c) {
    return x.data() + (static_cast<std::size_t>(bi) * C + c) * area;
  };

  std::vector<double> mean(C), invstd(C);
  if (training) {
    if (n < 2) throw ValueError("batchnorm2d: training mode needs at least 2 values per channel");
    for (int c = 0; c < C; ++c) {
      double m = 0.0;
      for (int bi = 0; bi < B; ++bi) {
        const double* p = at(bi, c);
        for (std::size_t i = 0; i < area; ++i) m += p[i];
      }
      m /= static_cast<double>(n);
      double v = 0.0;
      for (int bi = 0; bi < B; ++bi) {
        const double* p = at(bi, c);
        for (std::size_t i = 0; i < area; ++i) v += (p[i] - m) * (p[i] - m);
      }
      double biased = v / static_cast<double>(n);
      mean[c] = m;
      invstd[c] = 1.0 / std::sqrt(biased + eps);
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * m;
      running_var[c] = (1.0 - momentum) * running_var[c] +
                       momentum * v / static_cast<double>(n - 1);
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = running_mean[c];
      invstd[c] = 1.0 / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor xhat(x.shape());
  Tensor out(x.shape());
  for (int bi = 0; bi < B; ++bi)
    for (int c = 0; c < C; ++c) {
      const double* p = at(bi, c);
      double* ph = xhat.data() + (static_cast<std::size_t>(bi) * C + c) * area;
      double* po = out.data() + (static_cast<std::size_t>(bi) * C + c) * area;
      for (std::size_t i = 0; i < area; ++i) {
        ph[i] = (p[i] - mean[c]) * invstd[c];
        po[i] = gamma[c] * ph[i] + beta[c];
      }
    }

  Tape* tape = x.on_tape() ? x.tape() : (gamma.on_tape() ? gamma.tape() : beta.tape());
  if (!tape) return out;
  return tape->record(std::move(out), [x, gamma, beta, xhat, mean, invstd, training, B, C,
                                       area, n](Tape& t, const std::vector<double>& g) {
    std::vector<double> ggamma(C, 0.0), gbeta(C, 0.0);
    for (int c = 0; c < C; ++c)
      for (int bi = 0; bi < B; ++bi) {
        const double* gg = g.data() + (static_cast<std::size_t>(bi) * C + c) * area;
        const double* ph = xhat.data() + (static_cast<std::size_t>(bi) * C + c) * area;
        for (std::size_t i = 0; i < area; ++i) {
          ggamma[c] += gg[i] * ph[i];
          gbeta[c] += gg[i];
        }
      }
    if (x.on_tape()) {
      std::vector<double> gx(x.size());
      for (int c = 0; c < C; ++c) {
        double gc = gamma[c];
        if (training) {
          double sum_gxhat = gbeta[c] * gc;
          double sum_gxhat_xhat = ggamma[c] * gc;
          double inv_n = 1.0 / static_cast<double>(n);
          for (int bi = 0; bi < B; ++bi) {
            const double* gg = g.data() + (static_cast<std::size_t>(bi) * C + c) * area;
            const double* ph = xhat.data() + (static_cast<std::size_t>(bi) * C + c) * area;
            double* po = gx.data() + (static_cast<std::size_t>(bi) * C + c) * area;
            for (std::size_t i = 0; i < area; ++i)
              po[i] = invstd[c] * (gg[i] * gc - inv_n * (sum_gxhat + ph[i] * sum_gxhat_xhat));
          }
        } else {
          for (int bi = 0; bi < B; ++bi) {
            const double* gg = g.data() + (static_cast<std::size_t>(bi) * C + c) * area;
            double* po = gx.data() + (static_cast<std::size_t>(bi) * C + c) * area;
            for (std::size_t i = 0; i < area; ++i) po[i] = gg[i] * gc * invstd[c];
          }
        }
      }
      t.add_grad(x.node(), gx.data(), gx.size());
    }
    if (gamma.on_tape()) t.add_grad(gamma.node(), ggamma.data(), ggamma.size());
    if (beta.on_tape()) t.add_grad(beta.node(), gbeta.data(), gbeta.size());
  });
}

LinearLayer LinearLayer::make(ParamStore& store, const std::string& name, int in, int out,
                              NormalSampler& rng, bool bias) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  LinearLayer l;
  l.w = &store.add(name + ".w", uniform_init({in, out}, bound, rng));
  if (bias) l.b = &store.add(name + ".b", uniform_init({out}, bound, rng));
  return l;
}

Tensor LinearLayer::forward(Ctx& ctx, const Tensor& x) const {
  return linear(x, ctx.use(*w), b ? ctx.use(*b) : Tensor());
}

Conv2dLayer Conv2dLayer::make(ParamStore& store, const std::string& name, int in_ch,
                              int out_ch, int k, int stride, int pad, NormalSampler& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * k * k);
  Conv2dLayer l;
  l.w = &store.add(name + ".w", uniform_init({out_ch, in_ch, k, k}, bound, rng));
  l.b = &store.add(name + ".b", uniform_init({out_ch}, bound, rng));
  l.stride = stride;
  l.pad = pad;
  return l;
}

Tensor Conv2dLayer::forward(Ctx& ctx, const Tensor& x) const {
  return conv2d(x, ctx.use(*w), ctx.use(*b), stride, pad);
}

ConvT2dLayer ConvT2dLayer::make(ParamStore& store, const std::string& name, int in_ch,
                                int out_ch, int k, int stride, int pad, NormalSampler& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * k * k);
  ConvT2dLayer l;
  l.w = &store.add(name + ".w", uniform_init({in_ch, out_ch, k, k}, bound, rng));
  l.b = &store.add(name + ".b", uniform_init({out_ch}, bound, rng));
  l.stride = stride;
  l.pad = pad;
  return l;
}

Tensor ConvT2dLayer::forward(Ctx& ctx, const Tensor& x) const {
  return conv_transpose2d(x, ctx.use(*w), ctx.use(*b), stride, pad);
}

BatchNorm2dLayer BatchNorm2dLayer::make(ParamStore& store, const std::string& name,
                                        int channels) {
  BatchNorm2dLayer l;
  l.gamma = &store.add(name + ".gamma", Tensor::full({channels}, 1.0));
  l.beta = &store.add(name + ".beta", Tensor::zeros({channels}));
  l.running_mean = &store.add(name + ".running_mean", Tensor::zeros({channels}), false);
  l.running_var = &store.add(name + ".running_var", Tensor::full({channels}, 1.0), false);
  return l;
}

Tensor BatchNorm2dLayer::forward(Ctx& ctx, const Tensor& x) const {
  return batchnorm2d(x, ctx.use(*gamma), ctx.use(*beta), running_mean->value.data(),
                     running_var->value.data(), ctx.training, momentum, eps);
}

}  // namespace deblur
