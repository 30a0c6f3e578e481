#include "deblur/vae.hpp"

#include <cmath>

namespace deblur {

VaeModel::VaeModel(VaeConfig cfg, NormalSampler& init_rng) : cfg_(std::move(cfg)) {
  if (!is_power_of_two(cfg_.image_size)) throw ValueError("VaeModel: image_size must be a power of two");
  if (cfg_.channels.empty()) throw ValueError("VaeModel: need at least one channel stage");
  int blocks = static_cast<int>(cfg_.channels.size());
  grid_ = cfg_.image_size >> blocks;
  if (grid_ < 1) throw ValueError("VaeModel: too many blocks for image size");

  int in_ch = cfg_.in_channels;
  for (int i = 0; i < blocks; ++i) {
    enc_convs_.push_back(Conv2dLayer::make(store_, "enc" + std::to_string(i), in_ch,
                                           cfg_.channels[i], 3, 2, 1, init_rng));
    if (cfg_.norm)
      enc_norms_.push_back(
          BatchNorm2dLayer::make(store_, "enc" + std::to_string(i) + ".bn", cfg_.channels[i]));
    in_ch = cfg_.channels[i];
  }
  int flat = cfg_.channels.back() * grid_ * grid_;
  head_ = LinearLayer::make(store_, "head", flat, cfg_.head_hidden, init_rng);
  mu_head_ = LinearLayer::make(store_, "mu", cfg_.head_hidden, cfg_.latent, init_rng);
  logvar_head_ = LinearLayer::make(store_, "logvar", cfg_.head_hidden, cfg_.latent, init_rng);
  // Zero logvar at init: unit posterior variance, sane early KL.
  for (std::size_t i = 0; i < logvar_head_.w->value.size(); ++i) logvar_head_.w->value[i] = 0.0;
  for (std::size_t i = 0; i < logvar_head_.b->value.size(); ++i) logvar_head_.b->value[i] = 0.0;

  dec_fc1_ = LinearLayer::make(store_, "dec_fc1", cfg_.latent, cfg_.head_hidden, init_rng);
  dec_fc2_ = LinearLayer::make(store_, "dec_fc2", cfg_.head_hidden, flat, init_rng);
  for (int i = 0; i < blocks; ++i) {
    int from = cfg_.channels[blocks - 1 - i];
    int to = (i + 1 < blocks) ? cfg_.channels[blocks - 2 - i] : cfg_.channels[0];
    dec_convs_.push_back(
        ConvT2dLayer::make(store_, "dec" + std::to_string(i), from, to, 4, 2, 1, init_rng));
    if (cfg_.norm)
      dec_norms_.push_back(BatchNorm2dLayer::make(store_, "dec" + std::to_string(i) + ".bn", to));
  }
  out_conv_ = Conv2dLayer::make(store_, "out", cfg_.channels[0], cfg_.in_channels, 3, 1, 1, init_rng);
}

LatentSample VaeModel::encode_with_eps(Ctx& ctx, const Tensor& x, Tensor eps) {
  if (x.ndim() != 4 || x.dim(1) != cfg_.in_channels || x.dim(2) != cfg_.image_size ||
      x.dim(3) != cfg_.image_size)
    throw ValueError("encode: input shape " + shape_str(x.shape()));
  Tensor h = x;
  for (std::size_t i = 0; i < enc_convs_.size(); ++i) {
    h = enc_convs_[i].forward(ctx, h);
    if (cfg_.norm) h = enc_norms_[i].forward(ctx, h);
    h = leaky_relu(h, cfg_.leak);
  }
  h = reshape(h, {x.dim(0), cfg_.channels.back() * grid_ * grid_});
  h = leaky_relu(head_.forward(ctx, h), cfg_.leak);
  LatentSample s;
  s.mu = mu_head_.forward(ctx, h);
  s.logvar = logvar_head_.forward(ctx, h);
  if (!s.mu.all_finite() || !s.logvar.all_finite())
    throw NumericError("encode: non-finite posterior moments (training divergence)");
  s.eps = std::move(eps);
  s.z = add(s.mu, mul(exp_t(mul(s.logvar, 0.5)), s.eps));
  return s;
}

LatentSample VaeModel::encode(Ctx& ctx, const Tensor& x, NormalSampler& noise) {
  Tensor eps({x.dim(0), cfg_.latent});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = noise();
  return encode_with_eps(ctx, x, std::move(eps));
}

LatentSample VaeModel::encode_mean(Ctx& ctx, const Tensor& x) {
  return encode_with_eps(ctx, x, Tensor::zeros({x.dim(0), cfg_.latent}));
}

Tensor VaeModel::decode(Ctx& ctx, const Tensor& z) {
  if (z.ndim() != 2 || z.dim(1) != cfg_.latent)
    throw ValueError("decode: z shape " + shape_str(z.shape()));
  int B = z.dim(0);
  Tensor h = leaky_relu(dec_fc1_.forward(ctx, z), cfg_.leak);
  h = leaky_relu(dec_fc2_.forward(ctx, h), cfg_.leak);
  h = reshape(h, {B, cfg_.channels.back(), grid_, grid_});
  for (std::size_t i = 0; i < dec_convs_.size(); ++i) {
    h = dec_convs_[i].forward(ctx, h);
    if (cfg_.norm) h = dec_norms_[i].forward(ctx, h);
    h = leaky_relu(h, cfg_.leak);
  }
  Tensor out = tanh_t(out_conv_.forward(ctx, h));
  if (!out.all_finite()) throw NumericError("decode: non-finite output (training divergence)");
  return out;
}

Tensor VaeModel::generate(int n, std::uint64_t seed) {
  if (n < 0) throw ValueError("generate: negative count");
  if (n == 0) return Tensor({0, cfg_.in_channels, cfg_.image_size, cfg_.image_size});
  NormalSampler prior(seed, "prior");
  Tensor z({n, cfg_.latent});
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = prior();
  Ctx ctx;
  return decode(ctx, z);
}

}  // namespace deblur
