#include "deblur/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace deblur {
namespace {

constexpr char kMagic[4] = {'D', 'B', 'V', 'E'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated checkpoint: " + path);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated checkpoint: " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u32(os, static_cast<std::uint32_t>(p->value.ndim()));
    for (int d = 0; d < p->value.ndim(); ++d)
      put_u64(os, static_cast<std::uint64_t>(p->value.dim(d)));
    for (std::size_t i = 0; i < p->value.size(); ++i)
      put_u64(os, std::bit_cast<std::uint64_t>(p->value[i]));
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad checkpoint magic: " + path);
  std::uint32_t version = get_u32(is, path);
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  std::uint32_t count = get_u32(is, path);
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    std::uint32_t name_len = get_u32(is, path);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("truncated checkpoint: " + path);
    std::uint32_t ndim = get_u32(is, path);
    Shape shape(ndim);
    for (auto& d : shape) d = static_cast<int>(get_u64(is, path));
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = std::bit_cast<double>(get_u64(is, path));
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void load_into_params(const std::string& path, const std::vector<Parameter*>& params) {
  auto records = load_checkpoint(path);
  for (Parameter* p : params) {
    bool found = false;
    for (auto& [name, t] : records) {
      if (name != p->name) continue;
      if (t.shape() != p->value.shape())
        throw IoError("checkpoint shape mismatch for '" + name + "': stored " +
                      shape_str(t.shape()) + ", expected " + shape_str(p->value.shape()));
      std::memcpy(p->value.data(), t.data(), t.size() * sizeof(double));
      found = true;
      break;
    }
    if (!found) throw IoError("checkpoint missing parameter '" + p->name + "': " + path);
  }
}

}  // namespace deblur
