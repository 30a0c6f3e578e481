#pragma once

#include <vector>

#include "deblur/tensor.hpp"

namespace deblur {

// Standard bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long step_count() const { return t_; }

 private:
  struct Slot {
    Parameter* p;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
};

}  // namespace deblur
