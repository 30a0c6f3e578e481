#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deblur/tensor.hpp"

namespace deblur {

enum class ShapesPreset { edges, texture };

// N x C x H x W images in [-1,1] with a disjoint train/test split.
struct Dataset {
  int n = 0, channels = 1, height = 0, width = 0;
  std::vector<double> pixels;
  std::vector<int> train_idx, test_idx;
  std::string provenance;

  const double* image(int i) const {
    return pixels.data() + static_cast<std::size_t>(i) * channels * height * width;
  }
  std::size_t image_numel() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  Tensor make_batch(const std::vector<int>& ids) const;
};

// Random rectangles, discs, and 1-px lines with crisp edges on graded
// backgrounds; `texture` additionally mixes in a low-amplitude noise field
// with a 1/w^2 power spectrum. Deterministic per seed; 80/20 split included.
Dataset gen_shapes(int n, int h, int w, std::uint64_t seed, ShapesPreset preset);

// IDX u8 3-d tensor (magic 0x00000803, big-endian dims); pixels mapped
// [0,255] -> [-1,1] and centered onto a 32x32 canvas with -1 background.
Dataset read_idx(const std::string& images_path, const std::string& labels_path = "");

// Binary P5, maxval 255, [-1,1] affine-mapped.
void pgm_write(const std::string& path, const double* img, int h, int w);
std::vector<double> pgm_read(const std::string& path, int* h, int* w);

// Tiles images left-to-right, top-to-bottom with 1-px separators.
void write_image_grid(const std::string& path, const std::vector<const double*>& imgs,
                      int h, int w, int cols);

// Deterministic shuffle split; first train_frac of the permutation trains.
void split_dataset(Dataset& ds, double train_frac, std::uint64_t seed);

}  // namespace deblur
