#pragma once

#include <cstdint>
#include <vector>

#include "deblur/nn.hpp"
#include "deblur/tensor.hpp"

namespace deblur {

struct VaeConfig {
  int image_size = 32;
  int in_channels = 1;
  std::vector<int> channels = {32, 64, 128};
  int latent = 16;
  int head_hidden = 256;
  bool norm = false;
  double leak = 0.01;
};

struct LatentSample {
  Tensor mu, logvar, eps, z;  // z = mu + exp(logvar/2) * eps
};

// Convolutional VAE: stride-2 k3 conv blocks down to a small grid, linear
// heads for (mu, logvar), mirrored k4 stride-2 transposed-conv decoder with a
// final k3 conv + tanh.
class VaeModel {
 public:
  VaeModel(VaeConfig cfg, NormalSampler& init_rng);

  const VaeConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  std::vector<Parameter*> all_params() { return store_.all(); }
  std::vector<Parameter*> trainable_params() { return store_.trainable_params(); }

  // Posterior moments plus a reparameterized sample with noise from `noise`.
  LatentSample encode(Ctx& ctx, const Tensor& x, NormalSampler& noise);
  // Deterministic variant: eps = 0, z = mu.
  LatentSample encode_mean(Ctx& ctx, const Tensor& x);

  Tensor decode(Ctx& ctx, const Tensor& z);

  // decode(z) for n prior draws z ~ N(0,I); eval mode, no tape.
  Tensor generate(int n, std::uint64_t seed);

 private:
  LatentSample encode_with_eps(Ctx& ctx, const Tensor& x, Tensor eps);

  VaeConfig cfg_;
  ParamStore store_;
  std::vector<Conv2dLayer> enc_convs_;
  std::vector<BatchNorm2dLayer> enc_norms_;
  LinearLayer head_, mu_head_, logvar_head_;
  LinearLayer dec_fc1_, dec_fc2_;
  std::vector<ConvT2dLayer> dec_convs_;
  std::vector<BatchNorm2dLayer> dec_norms_;
  Conv2dLayer out_conv_;
  int grid_ = 0;
};

}  // namespace deblur
