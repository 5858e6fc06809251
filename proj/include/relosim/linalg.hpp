#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace relosim {

using Vector = std::vector<double>;

// Small dense row-major matrix. Sized for design matrices of a few hundred
// rows and parameter blocks under ~20 columns; no view machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct LeastSquares {
    Vector coefficients;
    Matrix xtx_inverse;   // (X'X)^-1 reconstructed from the R factor
    Vector fitted;
    Vector residuals;
    double rss = 0.0;
};

// Householder-QR least squares. Throws NumericError naming the offending
// column(s) when |R_jj| falls below rel_tol * max_j |R_jj| (rank deficiency).
LeastSquares qr_least_squares(const Matrix& x, const Vector& y,
                              const std::vector<std::string>& column_names,
                              double rel_tol = 1e-10);

// Inverse of a symmetric positive-definite matrix via Cholesky.
// Throws NumericError if the matrix is not positive definite.
Matrix invert_spd(const Matrix& a);

Vector matvec(const Matrix& a, const Vector& v);
double dot(const Vector& a, const Vector& b);
double max_abs(const Vector& v);

} // namespace relosim
