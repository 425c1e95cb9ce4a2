#include "xlalign/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xlalign {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 100;

double column_dot(const Matrix& m, std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        s += m(i, p) * m(i, q);
    }
    return s;
}

void rotate_columns(Matrix& m, std::size_t p, std::size_t q, double c, double s) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double x = m(i, p);
        const double y = m(i, q);
        m(i, p) = c * x - s * y;
        m(i, q) = s * x + c * y;
    }
}

// Orthonormal completion for columns whose singular value vanished: pick the
// unit basis vector least explained by the existing columns and orthogonalize.
void complete_column(Matrix& u, std::size_t col, const std::vector<bool>& valid) {
    for (std::size_t candidate = 0; candidate < u.rows(); ++candidate) {
        std::vector<double> v(u.rows(), 0.0);
        v[candidate] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < u.cols(); ++j) {
                if (!valid[j]) {
                    continue;
                }
                double proj = 0.0;
                for (std::size_t i = 0; i < u.rows(); ++i) {
                    proj += v[i] * u(i, j);
                }
                for (std::size_t i = 0; i < u.rows(); ++i) {
                    v[i] -= proj * u(i, j);
                }
            }
        }
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm > 0.1) {
            for (std::size_t i = 0; i < u.rows(); ++i) {
                u(i, col) = v[i] / norm;
            }
            return;
        }
    }
    throw std::runtime_error("svd_small: orthonormal completion failed");
}

SvdResult svd_tall(const Matrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    Matrix b = m;
    Matrix v = Matrix::identity(cols);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                const double alpha = column_dot(b, p, p);
                const double beta = column_dot(b, q, q);
                const double gamma = column_dot(b, p, q);
                if (gamma == 0.0 || std::fabs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) {
                    continue;
                }
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate_columns(b, p, q, c, s);
                rotate_columns(v, p, q, c, s);
            }
        }
        if (converged) {
            break;
        }
    }

    std::vector<double> sv(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        sv[j] = std::sqrt(column_dot(b, j, j));
    }

    // Descending order with a stable permutation applied to B and V columns.
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&sv](std::size_t a, std::size_t bb) { return sv[a] > sv[bb]; });

    SvdResult out;
    out.u = Matrix(rows, cols);
    out.v = Matrix(cols, cols);
    out.singular_values.resize(cols);

    double smax = 0.0;
    for (double s : sv) {
        smax = std::max(smax, s);
    }
    const double rank_tol = smax * static_cast<double>(std::max(rows, cols)) * 1e-15;

    std::vector<bool> valid(cols, false);
    for (std::size_t k = 0; k < cols; ++k) {
        const std::size_t j = order[k];
        out.singular_values[k] = sv[j];
        for (std::size_t i = 0; i < cols; ++i) {
            out.v(i, k) = v(i, j);
        }
        if (sv[j] > rank_tol && sv[j] > 0.0) {
            for (std::size_t i = 0; i < rows; ++i) {
                out.u(i, k) = b(i, j) / sv[j];
            }
            valid[k] = true;
        }
    }
    for (std::size_t k = 0; k < cols; ++k) {
        if (!valid[k]) {
            complete_column(out.u, k, valid);
            valid[k] = true;
        }
    }
    return out;
}

} // namespace

SvdResult svd_small(const Matrix& m) {
    if (m.rows() > kSvdMaxDim || m.cols() > kSvdMaxDim) {
        throw std::invalid_argument("svd_small: dimension exceeds " + std::to_string(kSvdMaxDim));
    }
    if (m.rows() >= m.cols()) {
        return svd_tall(m);
    }
    SvdResult t = svd_tall(transpose(m));
    SvdResult out;
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.singular_values = std::move(t.singular_values);
    return out;
}

} // namespace xlalign
