#pragma once

#include <vector>

#include "deblur/common.hpp"

namespace deblur {

// Row-major complex grid with split real/imaginary storage.
struct ComplexGrid {
  int h = 0, w = 0;
  std::vector<double> re, im;

  ComplexGrid() = default;
  ComplexGrid(int height, int width)
      : h(height), w(width),
        re(static_cast<std::size_t>(height) * width, 0.0),
        im(static_cast<std::size_t>(height) * width, 0.0) {}

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * w + j; }
  std::size_t size() const { return re.size(); }
};

// Unnormalized forward DFT: X[u,v] = sum x[m,n] exp(-2*pi*i*(um/H + vn/W)).
// Power-of-two dims only.
ComplexGrid fft2(const ComplexGrid& x);
ComplexGrid fft2(const double* x, int h, int w);
ComplexGrid fft2(const std::vector<double>& x, int h, int w);

// Inverse with 1/(H*W) normalization.
ComplexGrid ifft2(const ComplexGrid& x);

// Inverse for Hermitian-symmetric spectra; the imaginary residue must vanish
// (checked against 1e-9, scaled by the output magnitude) and is discarded.
std::vector<double> ifft2_real(const ComplexGrid& x);

// Embeds an odd-sized kernel with its center at (0,0) under circular wrap, so
// fft2 of the result gives the circular-convolution eigenvalues.
std::vector<double> pad_and_center_kernel(const double* k, int ksize, int h, int w);

// |sum x^2 - (1/(HW)) sum |X|^2| / sum x^2; zero image gives 0.
double parseval_gap(const double* x, int h, int w);

}  // namespace deblur
