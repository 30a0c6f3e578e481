#include "deblur/gradcheck.hpp"

#include <cmath>

namespace deblur {

GradCheckResult grad_check(const std::function<Tensor(Ctx&)>& fn,
                           const std::vector<Parameter*>& params, double eps, double tol) {
  for (auto* p : params) p->zero_grad();
  Tape tape;
  Ctx ctx(&tape, true);
  Tensor loss = fn(ctx);
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheckResult res;
  auto eval = [&]() {
    Ctx c(nullptr, true);
    return fn(c).item();
  };
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double saved = p.value[i];
      p.value[i] = saved + eps;
      double up = eval();
      p.value[i] = saved - eps;
      double dn = eval();
      p.value[i] = saved;
      double numeric = (up - dn) / (2.0 * eps);
      double a = analytic[pi][i];
      double abs_err = std::fabs(a - numeric);
      double scale = 1.0 + std::max(std::fabs(a), std::fabs(numeric));
      res.max_abs_err = std::max(res.max_abs_err, abs_err);
      res.max_rel_err = std::max(res.max_rel_err, abs_err / scale);
      if (abs_err > tol * scale) res.ok = false;
    }
  }
  return res;
}

}  // namespace deblur
