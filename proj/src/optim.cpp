#include "deblur/optim.hpp"

#include <cmath>

namespace deblur {

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  for (Parameter* p : params)
    slots_.push_back({p, std::vector<double>(p->value.size(), 0.0),
                      std::vector<double>(p->value.size(), 0.0)});
}

void Adam::step() {
  ++t_;
  double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& s : slots_) {
    double* w = s.p->value.data();
    const double* g = s.p->grad.data();
    for (std::size_t i = 0; i < s.m.size(); ++i) {
      s.m[i] = b1_ * s.m[i] + (1.0 - b1_) * g[i];
      s.v[i] = b2_ * s.v[i] + (1.0 - b2_) * g[i] * g[i];
      w[i] -= lr_ * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& s : slots_) s.p->zero_grad();
}

}  // namespace deblur
