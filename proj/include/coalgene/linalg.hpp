#ifndef COALGENE_LINALG_HPP
#define COALGENE_LINALG_HPP

#include <cstddef>
#include <vector>

namespace coalgene {

// Minimal dense row-major matrix; the state spaces here are tiny
// (at most Bell(6) = 203 states).
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(size_t(rows) * size_t(cols), fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int r, int c) { return a_[size_t(r) * size_t(cols_) + size_t(c)]; }
    double operator()(int r, int c) const {
        return a_[size_t(r) * size_t(cols_) + size_t(c)];
    }

    Matrix& operator+=(const Matrix& o);
    Matrix& operator*=(double s);
    double max_norm() const;     // max_i sum_j |a_ij| (operator infinity norm)
    double row_sum(int r) const;

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix matrix_power(Matrix base, long long k);
double max_abs_diff(const Matrix& a, const Matrix& b);

// e^{tA} by truncated Taylor series with scaling and squaring; the matrix is
// scaled until |At|/2^s <= 0.5 before the series is summed.
Matrix matrix_exponential(const Matrix& a, double t);

} // namespace coalgene

#endif
