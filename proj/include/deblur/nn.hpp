#pragma once

#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "deblur/ops.hpp"
#include "deblur/rng.hpp"
#include "deblur/tensor.hpp"

namespace deblur {

// Owns parameters with stable addresses; layers keep raw pointers into it.
class ParamStore {
 public:
  Parameter& add(std::string name, Tensor init, bool trainable = true);
  std::vector<Parameter*> all();
  std::vector<Parameter*> trainable_params();
  Parameter* find(std::string_view name);
  void zero_grad();

 private:
  std::deque<Parameter> params_;
};

Tensor uniform_init(Shape shape, double bound, NormalSampler& rng);

// x [B,I], w [I,O], optional b [O].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// x [B,N] plus row vector b [N].
Tensor add_rowwise(const Tensor& x, const Tensor& b);

// x [B,C,H,W], w [F,C,kh,kw], optional b [F]. Cross-correlation, zero padding;
// (H + 2*pad - kh) must divide stride.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

// Adjoint of conv2d in its input: x [B,Cin,H,W], w [Cin,Cout,kh,kw],
// optional b [Cout]; output [B,Cout,(H-1)*stride-2*pad+kh, ...].
Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

// Per-channel batch norm over [B,C,H,W]. Training mode needs B*H*W >= 2,
// normalizes with biased batch variance and folds unbiased stats into the
// running buffers; eval mode normalizes with the running buffers.
Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   double* running_mean, double* running_var, bool training,
                   double momentum, double eps);

struct LinearLayer {
  Parameter* w = nullptr;
  Parameter* b = nullptr;
  static LinearLayer make(ParamStore& store, const std::string& name, int in, int out,
                          NormalSampler& rng, bool bias = true);
  Tensor forward(Ctx& ctx, const Tensor& x) const;
};

struct Conv2dLayer {
  Parameter* w = nullptr;
  Parameter* b = nullptr;
  int stride = 1, pad = 0;
  static Conv2dLayer make(ParamStore& store, const std::string& name, int in_ch, int out_ch,
                          int k, int stride, int pad, NormalSampler& rng);
  Tensor forward(Ctx& ctx, const Tensor& x) const;
};

struct ConvT2dLayer {
  Parameter* w = nullptr;
  Parameter* b = nullptr;
  int stride = 1, pad = 0;
  static ConvT2dLayer make(ParamStore& store, const std::string& name, int in_ch, int out_ch,
                           int k, int stride, int pad, NormalSampler& rng);
  Tensor forward(Ctx& ctx, const Tensor& x) const;
};

struct BatchNorm2dLayer {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  double momentum = 0.1, eps = 1e-5;
  static BatchNorm2dLayer make(ParamStore& store, const std::string& name, int channels);
  Tensor forward(Ctx& ctx, const Tensor& x) const;
};

}  // namespace deblur
