#pragma once

#include <vector>

#include "xlalign/matrix.hpp"

namespace xlalign {

struct SvdResult {
    Matrix u;                            // rows(m) x min(rows, cols), column-orthonormal
    std::vector<double> singular_values; // min(rows, cols), non-negative, descending
    Matrix v;                            // cols(m) x min(rows, cols), column-orthonormal
};

/// Largest dimension svd_small accepts.
inline constexpr std::size_t kSvdMaxDim = 512;

/// Thin SVD of a small dense matrix via one-sided Jacobi rotations
/// (tolerance 1e-12, at most 100 sweeps). Reconstruction U diag(s) V^T
/// matches the input to ~1e-12 Frobenius for well-scaled inputs; columns of
/// U and V are orthonormal even when the input is rank deficient. Throws
/// std::invalid_argument when either dimension exceeds kSvdMaxDim.
SvdResult svd_small(const Matrix& m);

} // namespace xlalign
