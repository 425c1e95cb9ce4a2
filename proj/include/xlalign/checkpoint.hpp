#pragma once

#include <string>

#include "xlalign/param_vector.hpp"

namespace xlalign {

// Binary container shared by encoder checkpoints, mapping matrices and
// similarity heads. Layout, all integers and floats little-endian:
//
//   magic   "XALN"            4 bytes
//   version u32               currently 1
//   count   u32               number of sections
//   section (count times):
//     name_len u32, name bytes (UTF-8)
//     rows u64, cols u64
//     rows*cols f64 values, row-major
//
// Sections are written in ParamVector order (lexicographic by name).

void save_checkpoint(const std::string& path, const ParamVector& sections);

/// Throws DataError on unreadable files, bad magic, truncation, or
/// non-finite values.
ParamVector load_checkpoint(const std::string& path);

} // namespace xlalign
