#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace xlalign {

class Rng;

/// Dense row-major matrix of 64-bit floats. The workhorse value type for
/// hidden states, mapping matrices and parameter blocks. Row vectors are
/// represented as 1xN matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix gaussian(std::size_t rows, std::size_t cols, double sigma, Rng& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool is_finite() const;
    double frobenius_norm() const;

    /// Copies row i of src into row i of this matrix. Widths must match.
    void set_row(std::size_t i, const Matrix& src, std::size_t src_row);
    void add_to_row(std::size_t i, const Matrix& src, std::size_t src_row);

    Matrix row(std::size_t i) const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double dot(const Matrix& a, std::size_t row_a, const Matrix& b, std::size_t row_b);
double row_norm(const Matrix& a, std::size_t row);

/// Throws NumericError when any entry of m is NaN or infinite.
void ensure_finite(const Matrix& m, const std::string& what);

/// Square matrix with orthonormal columns, built by modified Gram-Schmidt on
/// a Gaussian draw (re-orthogonalized once; residual ~1e-14).
Matrix random_orthogonal(std::size_t n, Rng& rng);

} // namespace xlalign
