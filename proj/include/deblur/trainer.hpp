#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deblur/data.hpp"
#include "deblur/kernel.hpp"
#include "deblur/vae.hpp"

namespace deblur {

enum class LossKind { proposed, l2, l1, ce };
enum class LogdetMode { omit, exact };
enum class GInput { posterior, prior };
enum class NormMode { auto_mode, on, off };

constexpr double kEpsSmall = 1e-3;
constexpr double kEpsLarge = 0.5;

struct TrainConfig {
  LossKind loss = LossKind::proposed;
  double c = 0.025;
  double epsilon = kEpsLarge;
  double beta = 1.0;
  double lr = 1e-4;
  double grad_clip = 0.0;
  int warmup_epochs = 10;
  int kernel_size = 11;
  int epochs = 25;
  int batch_size = 16;
  std::uint64_t seed = 1;
  LogdetMode logdet = LogdetMode::omit;
  GInput g_input = GInput::posterior;
  NormMode norm = NormMode::auto_mode;
  int g_hidden = 1000;
  int image_size = 32;
  int latent = 16;
  int head_hidden = 256;
  std::vector<int> channels = {32, 64, 128};
  std::string data = "shapes-edges";  // shapes-edges | shapes-texture | idx
  int n_images = 512;
  std::string idx_images, idx_labels;
  int ckpt_every = 10;

  void validate() const;
  bool norm_enabled() const;  // auto: on above batch 8
  VaeConfig vae_config() const;
};

// VAE plus kernel generator with disjoint parameter stores, both built from
// seed-derived init streams so one side's construction never perturbs the
// other's draws.
struct ModelBundle {
  VaeModel vae;
  ParamStore g_store;
  KernelGenerator g;

  explicit ModelBundle(const TrainConfig& cfg);
  std::vector<Parameter*> all_params();
};

struct EpochRow {
  int epoch = 0;
  std::string phase;  // warmup | wiener
  double recon = 0, logdet = 0, kl = 0, total = 0, g_loss = 0, mean_kernel_m2 = 0;
  double psnr = 0, ssim = 0;
};

struct TrainResult {
  std::vector<EpochRow> rows;
  std::string final_checkpoint;
};

struct EvalSummary {
  int n = 0;
  double psnr = 0, ssim = 0;
  double kernel_m2_ls = 0;   // least-squares kernels on (x, xhat), simplex-projected
  double kernel_m2_gen = 0;  // generator kernels at z = mu
  double spectrum_gap_all = 0, spectrum_gap_hf = 0;
};

// Alternating training: each batch takes one (theta, phi) step on the ELBO
// with the configured weight, then one gamma step on the kernel-fit loss; the
// generator trains from the first epoch. Writes metrics.csv, checkpoints, and
// per-epoch sample grids under out_dir.
TrainResult train(const TrainConfig& cfg, const Dataset& ds, const std::string& out_dir);

// Test-split metrics for a trained bundle; writes a per-image CSV plus a mean
// row when csv_path is nonempty.
EvalSummary evaluate(ModelBundle& models, const TrainConfig& cfg, const Dataset& ds,
                     const std::string& csv_path);

// Reconstructions at z = mu, eval mode, batched; returns [N,C,H,W].
Tensor reconstruct_images(ModelBundle& models, const TrainConfig& cfg, const Dataset& ds,
                          const std::vector<int>& indices);

std::string loss_kind_str(LossKind k);
double mean_psnr_vs(const Tensor& x, const Tensor& xhat);
double mean_ssim_vs(const Tensor& x, const Tensor& xhat);

}  // namespace deblur
