#include "deblur/fft.hpp"

#include <cmath>

namespace deblur {
namespace {

void check_pow2(int n, const char* dim) {
  if (!is_power_of_two(n))
    throw ValueError(std::string("fft2: ") + dim + " = " + std::to_string(n) +
                     " is not a power of two");
}

// In-place iterative radix-2 transform of one contiguous length-n line.
void fft1d(double* re, double* im, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
    double wr = std::cos(ang), wi = std::sin(ang);
    for (int i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (int k = 0; k < len / 2; ++k) {
        int a = i + k, b = i + k + len / 2;
        double tr = re[b] * cr - im[b] * ci;
        double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
  if (inverse) {
    double s = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      re[i] *= s;
      im[i] *= s;
    }
  }
}

ComplexGrid fft2_impl(const ComplexGrid& x, bool inverse) {
  check_pow2(x.h, "height");
  check_pow2(x.w, "width");
  ComplexGrid out = x;
  for (int i = 0; i < out.h; ++i)
    fft1d(out.re.data() + out.idx(i, 0), out.im.data() + out.idx(i, 0), out.w, inverse);
  std::vector<double> cr(out.h), ci(out.h);
  for (int j = 0; j < out.w; ++j) {
    for (int i = 0; i < out.h; ++i) {
      cr[i] = out.re[out.idx(i, j)];
      ci[i] = out.im[out.idx(i, j)];
    }
    fft1d(cr.data(), ci.data(), out.h, inverse);
    for (int i = 0; i < out.h; ++i) {
      out.re[out.idx(i, j)] = cr[i];
      out.im[out.idx(i, j)] = ci[i];
    }
  }
  return out;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& x) { return fft2_impl(x, false); }

ComplexGrid fft2(const double* x, int h, int w) {
  ComplexGrid g(h, w);
  for (std::size_t i = 0; i < g.size(); ++i) g.re[i] = x[i];
  return fft2_impl(g, false);
}

ComplexGrid fft2(const std::vector<double>& x, int h, int w) {
  if (x.size() != static_cast<std::size_t>(h) * w)
    throw ValueError("fft2: buffer size does not match dims");
  return fft2(x.data(), h, w);
}

ComplexGrid ifft2(const ComplexGrid& x) { return fft2_impl(x, true); }

std::vector<double> ifft2_real(const ComplexGrid& x) {
  ComplexGrid y = fft2_impl(x, true);
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    max_re = std::max(max_re, std::fabs(y.re[i]));
    max_im = std::max(max_im, std::fabs(y.im[i]));
  }
  if (max_im > 1e-9 * std::max(1.0, max_re))
    throw NumericError("ifft2_real: input is not Hermitian-symmetric (imaginary residue " +
                       std::to_string(max_im) + ")");
  return std::move(y.re);
}

std::vector<double> pad_and_center_kernel(const double* k, int ksize, int h, int w) {
  if (ksize % 2 == 0) throw ValueError("pad_and_center_kernel: kernel size must be odd");
  if (ksize > h || ksize > w)
    throw ValueError("pad_and_center_kernel: kernel " + std::to_string(ksize) +
                     " exceeds grid " + std::to_string(h) + "x" + std::to_string(w));
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  int c = ksize / 2;
  for (int i = 0; i < ksize; ++i)
    for (int j = 0; j < ksize; ++j) {
      int ii = ((i - c) % h + h) % h;
      int jj = ((j - c) % w + w) % w;
      out[static_cast<std::size_t>(ii) * w + jj] += k[i * ksize + j];
    }
  return out;
}

double parseval_gap(const double* x, int h, int w) {
  double space = 0.0;
  std::size_t n = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < n; ++i) space += x[i] * x[i];
  if (space == 0.0) return 0.0;
  ComplexGrid X = fft2(x, h, w);
  double freq = 0.0;
  for (std::size_t i = 0; i < n; ++i) freq += X.re[i] * X.re[i] + X.im[i] * X.im[i];
  freq /= static_cast<double>(n);
  return std::fabs(space - freq) / space;
}

}  // namespace deblur
