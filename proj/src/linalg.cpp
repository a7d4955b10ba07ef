#include "coalgene/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace coalgene {

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("Matrix: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

double Matrix::max_norm() const {
    double best = 0.0;
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int c = 0; c < cols_; ++c) s += std::fabs((*this)(r, c));
        best = std::max(best, s);
    }
    return best;
}

double Matrix::row_sum(int r) const {
    double s = 0.0;
    for (int c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Matrix: shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix matrix_power(Matrix base, long long k) {
    if (base.rows() != base.cols())
        throw std::invalid_argument("matrix_power: matrix must be square");
    if (k < 0) throw std::invalid_argument("matrix_power: negative power");
    Matrix result = Matrix::identity(base.rows());
    while (k > 0) {
        if (k & 1) result = result * base;
        base = base * base;
        k >>= 1;
    }
    return result;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double best = 0.0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            best = std::max(best, std::fabs(a(r, c) - b(r, c)));
    return best;
}

Matrix matrix_exponential(const Matrix& a, double t) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("matrix_exponential: matrix must be square");
    if (t < 0.0) throw std::invalid_argument("matrix_exponential: t must be >= 0");
    const int n = a.rows();
    Matrix at = a;
    at *= t;
    int squarings = 0;
    double norm = at.max_norm();
    while (norm > 0.5 && squarings < 64) {
        at *= 0.5;
        norm *= 0.5;
        ++squarings;
    }
    // Taylor series, terms added until they vanish at double precision.
    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 80; ++k) {
        term = term * at;
        term *= 1.0 / double(k);
        result += term;
        if (term.max_norm() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace coalgene
