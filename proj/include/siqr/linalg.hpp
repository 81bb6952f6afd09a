#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace siqr::linalg {

// Dense real matrix in row-major order. Sized for the 4x4 Jacobians, the 4x8
// controllability matrix, and the 4x4 Riccati states used throughout; nothing
// here assumes more than a few dozen entries.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled
    Matrix(int rows, int cols, std::vector<double> entries);

    static Matrix identity(int n);
    static Matrix diagonal(std::initializer_list<double> values);
    static Matrix diagonal(std::span<const double> values);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_ && rows_ > 0; }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<double> entries() noexcept { return data_; }

    std::string shape_string() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix horzcat(const std::vector<Matrix>& blocks);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool is_symmetric(const Matrix& a, double tol);
Matrix symmetrize(const Matrix& a);  // (A + A^T) / 2

// Real polynomial, coefficients highest degree first, leading coefficient
// nonzero.
struct Polynomial {
    std::vector<double> coeffs;
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

std::complex<double> eval(const Polynomial& p, std::complex<double> x);

// Monic characteristic polynomial det(lambda*I - A) via the Faddeev-LeVerrier
// recurrence. Exact rational arithmetic is not needed at n <= 4.
Polynomial char_poly(const Matrix& a);

// Multiplicity-counted eigenvalues sorted by (re, im). Complex values occur in
// exact conjugate pairs.
struct EigenSet {
    std::vector<std::complex<double>> values;
    double max_real_part() const;
};

// All roots of char_poly(a) by Durand-Kerner iteration. Accepts when the
// maximum correction drops below 1e-12 or, at the iteration cap, when every
// residual satisfies |p(root)| <= tol * (1 + max|coeff|); throws NumericError
// otherwise.
EigenSet eigenvalues(const Matrix& a, double tol = 1e-9);

// Number of pivots in the row echelon form under partial pivoting. A pivot
// counts when |pivot| > tol * max(rows, cols) * max|entry of a|.
int rank(const Matrix& a, double tol = 1e-10);

// True iff every root of p has strictly negative real part. Degrees 1..4;
// degree <= 2 reduces to all-coefficients-positive, degrees 3-4 run the full
// Routh array first-column test.
bool routh_hurwitz_stable(const Polynomial& p);

} // namespace siqr::linalg
