#include "deblur/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "deblur/fft.hpp"
#include "deblur/rng.hpp"

namespace deblur {
namespace {

std::uint32_t read_u32_be(std::istream& is, const std::string& path, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw IoError("idx read: truncated while reading " + std::string(what) + ": " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

// Hermitian-symmetric random field with |F| ~ 1/r, back-transformed to space.
std::vector<double> power_law_noise(int h, int w, NormalSampler& rng, double amplitude) {
  ComplexGrid f(h, w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      int uc = u <= h / 2 ? u : u - h;
      int vc = v <= w / 2 ? v : v - w;
      double r = std::sqrt(double(uc) * uc + double(vc) * vc);
      if (r == 0.0) continue;
      double mag = 1.0 / r;
      f.re[f.idx(u, v)] = rng() * mag;
      f.im[f.idx(u, v)] = rng() * mag;
    }
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      int nu = (h - u) % h, nv = (w - v) % w;
      if (u > nu || (u == nu && v > nv)) {
        f.re[f.idx(u, v)] = f.re[f.idx(nu, nv)];
        f.im[f.idx(u, v)] = -f.im[f.idx(nu, nv)];
      } else if (u == nu && v == nv) {
        f.im[f.idx(u, v)] = 0.0;
      }
    }
  std::vector<double> x = ifft2_real(f);
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / x.size());
  double s = rms > 0 ? amplitude / rms : 0.0;
  for (double& v : x) v *= s;
  return x;
}

}  // namespace

Tensor Dataset::make_batch(const std::vector<int>& ids) const {
  Tensor t({static_cast<int>(ids.size()), channels, height, width});
  std::size_t per = image_numel();
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] < 0 || ids[b] >= n) throw ValueError("make_batch: index out of range");
    std::copy_n(image(ids[b]), per, t.data() + b * per);
  }
  return t;
}

Dataset gen_shapes(int n, int h, int w, std::uint64_t seed, ShapesPreset preset) {
  require(is_power_of_two(h) && is_power_of_two(w), "gen_shapes: dims must be powers of two");
  require(n >= 0, "gen_shapes: negative count");
  Dataset ds;
  ds.n = n;
  ds.height = h;
  ds.width = w;
  ds.pixels.assign(static_cast<std::size_t>(n) * h * w, 0.0);
  ds.provenance = "synthetic(seed=" + std::to_string(seed) +
                  (preset == ShapesPreset::edges ? ",edges)" : ",texture)");
  NormalSampler rng(seed, "shapes");

  for (int im = 0; im < n; ++im) {
    double* img = ds.pixels.data() + static_cast<std::size_t>(im) * h * w;
    double base = -0.8 + 1.0 * rng.uniform();
    double gi = (rng.uniform() - 0.5), gj = (rng.uniform() - 0.5);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        img[i * w + j] = base + gi * (double(i) / (h - 1)) + gj * (double(j) / (w - 1));

    int count = 3 + static_cast<int>(rng.below(6));
    for (int s = 0; s < count; ++s) {
      double v = rng.uniform() * 2.0 - 1.0;
      switch (rng.below(3)) {
        case 0: {  // rectangle
          int rw = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w / 2)));
          int rh = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h / 2)));
          int i0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - 2)));
          int j0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - 2)));
          for (int i = i0; i < std::min(h, i0 + rh); ++i)
            for (int j = j0; j < std::min(w, j0 + rw); ++j) img[i * w + j] = v;
          break;
        }
        case 1: {  // disc
          int r = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w / 4)));
          int ci = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
          int cj = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
          for (int i = std::max(0, ci - r); i <= std::min(h - 1, ci + r); ++i)
            for (int j = std::max(0, cj - r); j <= std::min(w - 1, cj + r); ++j)
              if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= r * r) img[i * w + j] = v;
          break;
        }
        default: {  // 1-px line
          int kind = static_cast<int>(rng.below(3));
          int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
          int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
          if (kind == 0) {
            for (int j = 0; j < w; ++j) img[a * w + j] = v;
          } else if (kind == 1) {
            for (int i = 0; i < h; ++i) img[i * w + b] = v;
          } else {
            for (int t = 0; t < std::min(h, w); ++t)
              img[((a + t) % h) * w + ((b + t) % w)] = v;
          }
          break;
        }
      }
    }

    if (preset == ShapesPreset::texture) {
      std::vector<double> noise = power_law_noise(h, w, rng, 0.08);
      for (int i = 0; i < h * w; ++i) img[i] += noise[i];
    }
    for (int i = 0; i < h * w; ++i) img[i] = std::clamp(img[i], -1.0, 1.0);
  }
  split_dataset(ds, 0.8, seed);
  return ds;
}

Dataset read_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream is(images_path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + images_path);
  std::uint32_t magic = read_u32_be(is, images_path, "magic");
  if (magic != 0x00000803)
    throw IoError("idx read: bad magic at offset 0 (expected 0x00000803): " + images_path);
  int n = static_cast<int>(read_u32_be(is, images_path, "count"));
  int rows = static_cast<int>(read_u32_be(is, images_path, "rows"));
  int cols = static_cast<int>(read_u32_be(is, images_path, "cols"));
  constexpr int kSize = 32;
  Dataset ds;
  ds.n = n;
  ds.height = kSize;
  ds.width = kSize;
  ds.pixels.assign(static_cast<std::size_t>(n) * kSize * kSize, -1.0);
  ds.provenance = "idx(" + images_path + ")";
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  for (int im = 0; im < n; ++im) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw IoError("idx read: truncated at image " + std::to_string(im) + " (offset " +
                    std::to_string(16 + static_cast<long long>(im) * rows * cols) +
                    "): " + images_path);
    double* img = ds.pixels.data() + static_cast<std::size_t>(im) * kSize * kSize;
    // Center the source onto the canvas; crop when larger.
    int di = (kSize - rows) / 2, dj = (kSize - cols) / 2;
    for (int i = 0; i < rows; ++i) {
      int ti = i + di;
      if (ti < 0 || ti >= kSize) continue;
      for (int j = 0; j < cols; ++j) {
        int tj = j + dj;
        if (tj < 0 || tj >= kSize) continue;
        img[ti * kSize + tj] = buf[static_cast<std::size_t>(i) * cols + j] / 255.0 * 2.0 - 1.0;
      }
    }
  }
  if (!labels_path.empty()) {
    std::ifstream ls(labels_path, std::ios::binary);
    if (!ls) throw IoError("cannot open: " + labels_path);
    std::uint32_t lmagic = read_u32_be(ls, labels_path, "magic");
    if (lmagic != 0x00000801)
      throw IoError("idx read: bad label magic (expected 0x00000801): " + labels_path);
    int ln = static_cast<int>(read_u32_be(ls, labels_path, "count"));
    if (ln != n) throw IoError("idx read: label count mismatch: " + labels_path);
  }
  split_dataset(ds, 0.8, 1);
  return ds;
}

void pgm_write(const std::string& path, const double* img, int h, int w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os << "P5\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double v = (std::clamp(img[i * w + j], -1.0, 1.0) + 1.0) * 0.5 * 255.0;
      row[static_cast<std::size_t>(j)] = static_cast<unsigned char>(std::lround(v));
    }
    os.write(reinterpret_cast<const char*>(row.data()), w);
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<double> pgm_read(const std::string& path, int* h, int* w) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw IoError("pgm read: not a binary PGM: " + path);
  int ww, hh, maxval;
  if (!(is >> ww >> hh >> maxval) || ww <= 0 || hh <= 0)
    throw IoError("pgm read: malformed header: " + path);
  if (maxval != 255) throw IoError("pgm read: unsupported maxval: " + path);
  is.get();
  std::vector<unsigned char> buf(static_cast<std::size_t>(ww) * hh);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw IoError("pgm read: truncated pixel data: " + path);
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i] / 255.0 * 2.0 - 1.0;
  *h = hh;
  *w = ww;
  return out;
}

void write_image_grid(const std::string& path, const std::vector<const double*>& imgs,
                      int h, int w, int cols) {
  require(!imgs.empty() && cols > 0, "write_image_grid: empty input");
  int rows = (static_cast<int>(imgs.size()) + cols - 1) / cols;
  int gh = rows * h + (rows - 1), gw = cols * w + (cols - 1);
  std::vector<double> canvas(static_cast<std::size_t>(gh) * gw, -1.0);
  for (std::size_t t = 0; t < imgs.size(); ++t) {
    int r = static_cast<int>(t) / cols, c = static_cast<int>(t) % cols;
    int oi = r * (h + 1), oj = c * (w + 1);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        canvas[static_cast<std::size_t>(oi + i) * gw + oj + j] = imgs[t][i * w + j];
  }
  pgm_write(path, canvas.data(), gh, gw);
}

void split_dataset(Dataset& ds, double train_frac, std::uint64_t seed) {
  require(train_frac > 0.0 && train_frac < 1.0, "split_dataset: bad fraction");
  std::vector<int> perm(static_cast<std::size_t>(ds.n));
  for (int i = 0; i < ds.n; ++i) perm[static_cast<std::size_t>(i)] = i;
  NormalSampler rng(seed, "split");
  for (int i = ds.n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  int train_n = static_cast<int>(std::lround(train_frac * ds.n));
  train_n = std::clamp(train_n, ds.n > 1 ? 1 : 0, ds.n > 1 ? ds.n - 1 : ds.n);
  ds.train_idx.assign(perm.begin(), perm.begin() + train_n);
  ds.test_idx.assign(perm.begin() + train_n, perm.end());
}

}  // namespace deblur
