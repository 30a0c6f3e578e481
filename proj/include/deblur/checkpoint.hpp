#pragma once

#include <string>
#include <utility>
#include <vector>

#include "deblur/tensor.hpp"

namespace deblur {

// Binary tensor archive. Layout, all little-endian:
//   "DBVE" | version u32 | count u32 | records
//   record: name_len u32 | name bytes | ndim u32 | dims u64 each | f64 payload
// Doubles round-trip bit-exactly.
void save_checkpoint(const std::string& path,
                     const std::vector<const Parameter*>& params);

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path);

// Fills each parameter from its record by name; missing names or shape
// mismatches throw.
void load_into_params(const std::string& path, const std::vector<Parameter*>& params);

}  // namespace deblur
