#pragma once

#include <functional>
#include <vector>

#include "deblur/tensor.hpp"

namespace deblur {

struct GradCheckResult {
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  bool ok = true;
};

// Central-difference check of d(fn)/d(params). `fn` must map the context to a
// scalar tensor and be deterministic; feed any randomness in as constants.
// Element passes when |analytic - numeric| <= tol * (1 + max(|a|,|n|)).
GradCheckResult grad_check(const std::function<Tensor(Ctx&)>& fn,
                           const std::vector<Parameter*>& params, double eps = 1e-6,
                           double tol = 1e-4);

}  // namespace deblur
