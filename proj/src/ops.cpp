#include "deblur/ops.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace deblur {
namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapMc = Eigen::Map<const MatRM>;

Tape* common_tape(const Tensor& a, const Tensor& b) {
  if (a.on_tape() && b.on_tape() && a.tape() != b.tape())
    throw ValueError("operands recorded on different tapes");
  return a.on_tape() ? a.tape() : b.tape();
}

// Elementwise binary op. Fwd and the two partials are evaluated per element;
// a one-element operand broadcasts against the other side.
template <class F, class DA, class DB>
Tensor ew_binary(const Tensor& a, const Tensor& b, const char* name, F f, DA da, DB db) {
  bool a1 = a.size() == 1, b1 = b.size() == 1;
  if (!a1 && !b1 && a.shape() != b.shape())
    throw ValueError(std::string(name) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  const Tensor& big = a1 ? b : a;
  std::size_t n = big.size();
  Tensor out(big.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < n; ++i) po[i] = f(pa[a1 ? 0 : i], pb[b1 ? 0 : i]);

  Tape* tape = common_tape(a, b);
  if (!tape) return out;
  return tape->record(std::move(out), [a, b, a1, b1, n, da, db](Tape& t, const std::vector<double>& g) {
    const double* pa = a.data();
    const double* pb = b.data();
    if (a.on_tape()) {
      std::vector<double> ga(a.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        ga[a1 ? 0 : i] += g[i] * da(pa[a1 ? 0 : i], pb[b1 ? 0 : i]);
      t.add_grad(a.node(), ga.data(), ga.size());
    }
    if (b.on_tape()) {
      std::vector<double> gb(b.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        gb[b1 ? 0 : i] += g[i] * db(pa[a1 ? 0 : i], pb[b1 ? 0 : i]);
      t.add_grad(b.node(), gb.data(), gb.size());
    }
  });
}

template <class F, class DF>
Tensor ew_unary(const Tensor& a, F f, DF df) {
  std::size_t n = a.size();
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::size_t i = 0; i < n; ++i) po[i] = f(pa[i]);
  if (!a.on_tape()) return out;
  return a.tape()->record(std::move(out), [a, n, df](Tape& t, const std::vector<double>& g) {
    const double* pa = a.data();
    std::vector<double> ga(n);
    for (std::size_t i = 0; i < n; ++i) ga[i] = g[i] * df(pa[i]);
    t.add_grad(a.node(), ga.data(), n);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, "add", [](double x, double y) { return x + y; },
                   [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, "sub", [](double x, double y) { return x - y; },
                   [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, "mul", [](double x, double y) { return x * y; },
                   [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] == 0.0) throw NumericError("div: zero divisor");
  return ew_binary(a, b, "div", [](double x, double y) { return x / y; },
                   [](double, double y) { return 1.0 / y; },
                   [](double x, double y) { return -x / (y * y); });
}

Tensor add(const Tensor& a, double s) { return add(a, Tensor::scalar_tensor(s)); }
Tensor mul(const Tensor& a, double s) { return mul(a, Tensor::scalar_tensor(s)); }
Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor exp_t(const Tensor& a) {
  return ew_unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Tensor log_t(const Tensor& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] <= 0.0) throw NumericError("log: non-positive input");
  return ew_unary(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor abs_t(const Tensor& a) {
  return ew_unary(a, [](double x) { return std::fabs(x); },
                  [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
  return ew_unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
  Tensor out({1}, {s});
  if (!a.on_tape()) return out;
  std::size_t n = a.size();
  return a.tape()->record(std::move(out), [a, n](Tape& t, const std::vector<double>& g) {
    std::vector<double> ga(n, g[0]);
    t.add_grad(a.node(), ga.data(), n);
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ValueError("mean of empty tensor");
  return mul(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor reshape(const Tensor& a, Shape shape) {
  Tensor out = a.view(std::move(shape));
  if (!a.on_tape()) return out;
  std::size_t n = a.size();
  return a.tape()->record(std::move(out), [a, n](Tape& t, const std::vector<double>& g) {
    t.add_grad(a.node(), g.data(), n);
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    throw ValueError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  MapM(out.data(), m, n).noalias() = MapMc(a.data(), m, k) * MapMc(b.data(), k, n);
  Tape* tape = common_tape(a, b);
  if (!tape) return out;
  return tape->record(std::move(out), [a, b, m, k, n](Tape& t, const std::vector<double>& g) {
    MapMc mg(g.data(), m, n);
    if (a.on_tape()) {
      std::vector<double> ga(static_cast<std::size_t>(m) * k);
      MapM(ga.data(), m, k).noalias() = mg * MapMc(b.data(), k, n).transpose();
      t.add_grad(a.node(), ga.data(), ga.size());
    }
    if (b.on_tape()) {
      std::vector<double> gb(static_cast<std::size_t>(k) * n);
      MapM(gb.data(), k, n).noalias() = MapMc(a.data(), m, k).transpose() * mg;
      t.add_grad(b.node(), gb.data(), gb.size());
    }
  });
}

Tensor leaky_relu(const Tensor& a, double negative_slope) {
  double s = negative_slope;
  // Derivative at exactly 0 is the negative-side slope.
  return ew_unary(a, [s](double x) { return x > 0 ? x : s * x; },
                  [s](double x) { return x > 0 ? 1.0 : s; });
}

Tensor tanh_t(const Tensor& a) {
  return ew_unary(a, [](double x) { return std::tanh(x); },
                  [](double x) {
                    double y = std::tanh(x);
                    return 1.0 - y * y;
                  });
}

Tensor softmax_rows(const Tensor& a) {
  if (a.ndim() != 2) throw ValueError("softmax_rows expects a 2-D tensor");
  int rows = a.dim(0), cols = a.dim(1);
  Tensor out(a.shape());
  for (int r = 0; r < rows; ++r) {
    const double* x = a.data() + static_cast<std::size_t>(r) * cols;
    double* y = out.data() + static_cast<std::size_t>(r) * cols;
    double mx = x[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += (y[c] = std::exp(x[c] - mx));
    for (int c = 0; c < cols; ++c) y[c] /= z;
  }
  if (!a.on_tape()) return out;
  Tensor saved = out.detached();
  return a.tape()->record(std::move(out), [a, saved, rows, cols](Tape& t, const std::vector<double>& g) {
    std::vector<double> ga(a.size());
    for (int r = 0; r < rows; ++r) {
      const double* y = saved.data() + static_cast<std::size_t>(r) * cols;
      const double* gr = g.data() + static_cast<std::size_t>(r) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += gr[c] * y[c];
      double* go = ga.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) go[c] = y[c] * (gr[c] - dot);
    }
    t.add_grad(a.node(), ga.data(), ga.size());
  });
}

}  // namespace deblur
