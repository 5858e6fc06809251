#include "relosim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relosim/error.hpp"

namespace relosim {

Vector matvec(const Matrix& a, const Vector& v) {
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += r[j] * v[j];
        out[i] = s;
    }
    return out;
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

LeastSquares qr_least_squares(const Matrix& x, const Vector& y,
                              const std::vector<std::string>& column_names,
                              double rel_tol) {
    const std::size_t n = x.rows();
    const std::size_t k = x.cols();
    if (n < k)
        throw NumericError("least squares: fewer rows than columns");
    if (y.size() != n)
        throw ContractError("least squares: y length does not match X rows");

    // Householder QR, accumulating Q^T y alongside.
    Matrix a = x;
    Vector qty = y;
    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i)
            norm += a(i, j) * a(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0)
            continue; // zero column; caught by the rank check below
        if (a(j, j) > 0.0)
            norm = -norm;
        Vector v(n - j);
        for (std::size_t i = j; i < n; ++i)
            v[i - j] = a(i, j);
        v[0] -= norm;
        double vnorm2 = 0.0;
        for (double t : v)
            vnorm2 += t * t;
        if (vnorm2 == 0.0)
            continue;
        for (std::size_t c = j; c < k; ++c) {
            double proj = 0.0;
            for (std::size_t i = j; i < n; ++i)
                proj += v[i - j] * a(i, c);
            proj *= 2.0 / vnorm2;
            for (std::size_t i = j; i < n; ++i)
                a(i, c) -= proj * v[i - j];
        }
        double proj = 0.0;
        for (std::size_t i = j; i < n; ++i)
            proj += v[i - j] * qty[i];
        proj *= 2.0 / vnorm2;
        for (std::size_t i = j; i < n; ++i)
            qty[i] -= proj * v[i - j];
    }

    double max_diag = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        max_diag = std::max(max_diag, std::abs(a(j, j)));
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < k; ++j)
        if (std::abs(a(j, j)) <= rel_tol * max_diag)
            bad.push_back(j);
    if (max_diag == 0.0 || !bad.empty()) {
        std::ostringstream msg;
        msg << "singular design matrix; collinear column(s):";
        if (bad.empty())
            msg << " all";
        for (std::size_t j : bad)
            msg << ' ' << (j < column_names.size() ? column_names[j] : std::to_string(j));
        throw NumericError(msg.str());
    }

    LeastSquares out;
    out.coefficients.assign(k, 0.0);
    for (std::size_t j = k; j-- > 0;) {
        double s = qty[j];
        for (std::size_t c = j + 1; c < k; ++c)
            s -= a(j, c) * out.coefficients[c];
        out.coefficients[j] = s / a(j, j);
    }

    // (X'X)^-1 = R^-1 R^-T from the upper-triangular factor.
    Matrix rinv(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        rinv(j, j) = 1.0 / a(j, j);
        for (std::size_t i = j; i-- > 0;) {
            double s = 0.0;
            for (std::size_t c = i + 1; c <= j; ++c)
                s += a(i, c) * rinv(c, j);
            rinv(i, j) = -s / a(i, i);
        }
    }
    out.xtx_inverse = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t c = std::max(i, j); c < k; ++c)
                s += rinv(i, c) * rinv(j, c);
            out.xtx_inverse(i, j) = s;
        }

    out.fitted = matvec(x, out.coefficients);
    out.residuals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.residuals[i] = y[i] - out.fitted[i];
        out.rss += out.residuals[i] * out.residuals[i];
    }
    return out;
}

Matrix invert_spd(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n)
        throw ContractError("invert_spd: matrix must be square");
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t c = 0; c < j; ++c)
                s -= l(i, c) * l(j, c);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s))
                    throw NumericError("invert_spd: matrix is not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    // Invert L, then compose A^-1 = L^-T L^-1.
    Matrix linv(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        linv(i, i) = 1.0 / l(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t c = j; c < i; ++c)
                s += l(i, c) * linv(c, j);
            linv(i, j) = -s / l(i, i);
        }
    }
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t c = i; c < n; ++c)
                s += linv(c, i) * linv(c, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    return inv;
}

} // namespace relosim
