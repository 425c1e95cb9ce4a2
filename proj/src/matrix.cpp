#include "xlalign/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "xlalign/errors.hpp"
#include "xlalign/rng.hpp"

namespace xlalign {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw std::invalid_argument("Matrix::from_rows: ragged rows");
        }
        std::size_t j = 0;
        for (double x : row) {
            m(i, j++) = x;
        }
        ++i;
    }
    return m;
}

Matrix Matrix::gaussian(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data_) {
        x = sigma * rng.normal();
    }
    return m;
}

bool Matrix::is_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) {
        s += x * x;
    }
    return std::sqrt(s);
}

void Matrix::set_row(std::size_t i, const Matrix& src, std::size_t src_row) {
    if (cols_ != src.cols_) {
        throw std::invalid_argument("set_row: width mismatch");
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        (*this)(i, j) = src(src_row, j);
    }
}

void Matrix::add_to_row(std::size_t i, const Matrix& src, std::size_t src_row) {
    if (cols_ != src.cols_) {
        throw std::invalid_argument("add_to_row: width mismatch");
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        (*this)(i, j) += src(src_row, j);
    }
}

Matrix Matrix::row(std::size_t i) const {
    Matrix r(1, cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
        r(0, j) = (*this)(i, j);
    }
    return r;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) {
        throw std::invalid_argument("Matrix +=: shape mismatch");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) {
        throw std::invalid_argument("Matrix -=: shape mismatch");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) {
        x *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) {
    a += b;
    return a;
}

Matrix operator-(Matrix a, const Matrix& b) {
    a -= b;
    return a;
}

Matrix operator*(double s, Matrix a) {
    a *= s;
    return a;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ (" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

double dot(const Matrix& a, std::size_t row_a, const Matrix& b, std::size_t row_b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("dot: width mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        s += a(row_a, j) * b(row_b, j);
    }
    return s;
}

double row_norm(const Matrix& a, std::size_t row) {
    return std::sqrt(dot(a, row, a, row));
}

void ensure_finite(const Matrix& m, const std::string& what) {
    if (!m.is_finite()) {
        throw NumericError("non-finite values in " + what);
    }
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
    Matrix q = Matrix::gaussian(n, n, 1.0, rng);
    // Modified Gram-Schmidt on columns, two passes.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    proj += q(i, j) * q(i, k);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    q(i, j) -= proj * q(i, k);
                }
            }
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                norm += q(i, j) * q(i, j);
            }
            norm = std::sqrt(norm);
            if (norm < 1e-12) {
                // Degenerate draw; replace with a unit basis vector and redo.
                for (std::size_t i = 0; i < n; ++i) {
                    q(i, j) = (i == j) ? 1.0 : 0.0;
                }
                --j;
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                q(i, j) /= norm;
            }
        }
    }
    return q;
}

} // namespace xlalign
