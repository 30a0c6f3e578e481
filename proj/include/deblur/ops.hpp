#pragma once

#include "deblur/tensor.hpp"

namespace deblur {

// Elementwise ops accept equal shapes or a one-element tensor on either side;
// any operand recorded on a tape makes the result differentiable.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double s);
Tensor mul(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor exp_t(const Tensor& a);
Tensor log_t(const Tensor& a);   // requires strictly positive input
Tensor abs_t(const Tensor& a);   // derivative at 0 taken as 0
Tensor square(const Tensor& a);

Tensor sum(const Tensor& a);   // -> shape [1]
Tensor mean(const Tensor& a);  // -> shape [1]

// Same data viewed under a new shape of equal element count.
Tensor reshape(const Tensor& a, Shape shape);

// [M,K] x [K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor leaky_relu(const Tensor& a, double negative_slope);
Tensor tanh_t(const Tensor& a);
// Row-wise stable softmax over the last axis of a 2-D tensor.
Tensor softmax_rows(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace deblur
