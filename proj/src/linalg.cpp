#include "siqr/linalg.hpp"

#include "siqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace siqr::linalg {

namespace {

void require_finite(const std::vector<double>& entries) {
    for (double e : entries) {
        if (!std::isfinite(e)) {
            throw ValidationError("entries", "matrix entry is not finite");
        }
    }
}

} // namespace

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows <= 0 || cols <= 0) {
        throw ShapeError("matrix dimensions must be positive, got " + shape_string());
    }
}

Matrix::Matrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows <= 0 || cols <= 0) {
        throw ShapeError("matrix dimensions must be positive, got " + shape_string());
    }
    if (data_.size() != static_cast<size_t>(rows) * cols) {
        throw ShapeError("entry count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
    require_finite(data_);
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(static_cast<int>(values.size()), static_cast<int>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) {
        m(static_cast<int>(i), static_cast<int>(i)) = values[i];
    }
    return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("shape mismatch: " + a.shape_string() + " + " + b.shape_string());
    }
    Matrix out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(r, c) = a(r, c) + b(r, c);
        }
    }
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("shape mismatch: " + a.shape_string() + " - " + b.shape_string());
    }
    Matrix out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(r, c) = a(r, c) - b(r, c);
        }
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    return matmul(a, b);
}

Matrix operator*(double s, const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(r, c) = s * a(r, c);
        }
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("shape mismatch: " + a.shape_string() + " * " + b.shape_string());
    }
    Matrix out(a.rows(), b.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            for (int c = 0; c < b.cols(); ++c) {
                out(r, c) += ark * b(k, c);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(c, r) = a(r, c);
        }
    }
    return out;
}

Matrix horzcat(const std::vector<Matrix>& blocks) {
    if (blocks.empty()) {
        throw ShapeError("horzcat of zero blocks");
    }
    const int rows = blocks.front().rows();
    int cols = 0;
    for (const Matrix& b : blocks) {
        if (b.rows() != rows) {
            throw ShapeError("shape mismatch in horzcat: " + blocks.front().shape_string() +
                             " vs " + b.shape_string());
        }
        cols += b.cols();
    }
    Matrix out(rows, cols);
    int offset = 0;
    for (const Matrix& b : blocks) {
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < b.cols(); ++c) {
                out(r, offset + c) = b(r, c);
            }
        }
        offset += b.cols();
    }
    return out;
}

double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (double e : a.entries()) {
        sum += e * e;
    }
    return std::sqrt(sum);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double e : a.entries()) {
        m = std::max(m, std::abs(e));
    }
    return m;
}

bool is_symmetric(const Matrix& a, double tol) {
    if (!a.square()) {
        return false;
    }
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = r + 1; c < a.cols(); ++c) {
            if (std::abs(a(r, c) - a(c, r)) > tol) {
                return false;
            }
        }
    }
    return true;
}

Matrix symmetrize(const Matrix& a) {
    if (!a.square()) {
        throw ShapeError("symmetrize requires a square matrix, got " + a.shape_string());
    }
    Matrix out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(r, c) = 0.5 * (a(r, c) + a(c, r));
        }
    }
    return out;
}

std::complex<double> eval(const Polynomial& p, std::complex<double> x) {
    std::complex<double> acc = 0.0;
    for (double c : p.coeffs) {
        acc = acc * x + c;
    }
    return acc;
}

Polynomial char_poly(const Matrix& a) {
    if (!a.square()) {
        throw ShapeError("characteristic polynomial requires a square matrix, got " +
                         a.shape_string());
    }
    const int n = a.rows();
    // M_1 = A, c_1 = -tr(M_1); M_k = A (M_{k-1} + c_{k-1} I), c_k = -tr(M_k)/k.
    Polynomial p;
    p.coeffs.assign(static_cast<size_t>(n) + 1, 0.0);
    p.coeffs[0] = 1.0;
    Matrix m = a;
    for (int k = 1; k <= n; ++k) {
        if (k > 1) {
            Matrix shifted = m;
            for (int i = 0; i < n; ++i) {
                shifted(i, i) += p.coeffs[static_cast<size_t>(k) - 1];
            }
            m = matmul(a, shifted);
        }
        double trace = 0.0;
        for (int i = 0; i < n; ++i) {
            trace += m(i, i);
        }
        p.coeffs[static_cast<size_t>(k)] = -trace / k;
    }
    return p;
}

double EigenSet::max_real_part() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& z : values) {
        m = std::max(m, z.real());
    }
    return m;
}

namespace {

// Pair near-conjugate iterates into exact conjugate pairs and snap stray tiny
// imaginary parts to zero. Durand-Kerner starts are intentionally asymmetric,
// so converged clusters around multiple real roots carry O(residual^(1/m))
// imaginary noise that this removes.
void enforce_conjugate_pairs(std::vector<std::complex<double>>& roots) {
    for (auto& z : roots) {
        if (std::abs(z.imag()) <= 1e-12 * (1.0 + std::abs(z.real()))) {
            z = {z.real(), 0.0};
        }
    }
    std::vector<size_t> pos;
    std::vector<size_t> neg;
    for (size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].imag() > 0) {
            pos.push_back(i);
        } else if (roots[i].imag() < 0) {
            neg.push_back(i);
        }
    }
    std::vector<bool> used(roots.size(), false);
    for (size_t i : pos) {
        size_t best = roots.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (size_t j : neg) {
            if (used[j]) {
                continue;
            }
            const double d = std::abs(roots[i] - std::conj(roots[j]));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best < roots.size()) {
            used[best] = true;
            const std::complex<double> mean =
                0.5 * (roots[i] + std::conj(roots[best]));
            roots[i] = mean;
            roots[best] = std::conj(mean);
        } else {
            roots[i] = {roots[i].real(), 0.0};
        }
    }
    for (size_t j : neg) {
        if (!used[j]) {
            roots[j] = {roots[j].real(), 0.0};
        }
    }
}

} // namespace

EigenSet eigenvalues(const Matrix& a, double tol) {
    const Polynomial p = char_poly(a);
    const int n = p.degree();
    EigenSet out;
    if (n == 0) {
        return out;
    }

    double max_coeff = 0.0;
    for (double c : p.coeffs) {
        max_coeff = std::max(max_coeff, std::abs(c));
    }
    const double radius = 1.0 + max_coeff;
    const double residual_bound = tol * (1.0 + max_coeff);

    std::vector<std::complex<double>> roots(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
        roots[static_cast<size_t>(k)] = std::polar(radius, angle);
    }

    constexpr int kMaxIterations = 1000;
    bool step_converged = false;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        double max_step = 0.0;
        for (int k = 0; k < n; ++k) {
            std::complex<double> denom = 1.0;
            for (int j = 0; j < n; ++j) {
                if (j != k) {
                    denom *= roots[static_cast<size_t>(k)] - roots[static_cast<size_t>(j)];
                }
            }
            if (std::abs(denom) < 1e-300) {
                roots[static_cast<size_t>(k)] += std::complex<double>(1e-8, 1e-8);
                continue;
            }
            const std::complex<double> delta = eval(p, roots[static_cast<size_t>(k)]) / denom;
            roots[static_cast<size_t>(k)] -= delta;
            max_step = std::max(max_step, std::abs(delta));
        }
        if (max_step < 1e-12) {
            step_converged = true;
            break;
        }
    }

    double max_residual = 0.0;
    for (const auto& z : roots) {
        max_residual = std::max(max_residual, std::abs(eval(p, z)));
    }
    if (!step_converged && max_residual > residual_bound) {
        throw NumericError("eigenvalue iteration did not converge after " +
                           std::to_string(kMaxIterations) +
                           " iterations (residual " + std::to_string(max_residual) + ")");
    }

    enforce_conjugate_pairs(roots);
    std::sort(roots.begin(), roots.end(), [](const auto& a_, const auto& b_) {
        if (a_.real() != b_.real()) {
            return a_.real() < b_.real();
        }
        return a_.imag() < b_.imag();
    });
    out.values = std::move(roots);
    return out;
}

int rank(const Matrix& a, double tol) {
    if (tol < 0) {
        throw ValidationError("tol", "rank tolerance must be nonnegative");
    }
    Matrix work = a;
    const double threshold = tol * std::max(a.rows(), a.cols()) * max_abs(a);
    int r = 0;
    for (int col = 0; col < work.cols() && r < work.rows(); ++col) {
        int pivot_row = r;
        double pivot_mag = std::abs(work(r, col));
        for (int i = r + 1; i < work.rows(); ++i) {
            if (std::abs(work(i, col)) > pivot_mag) {
                pivot_mag = std::abs(work(i, col));
                pivot_row = i;
            }
        }
        if (pivot_mag <= threshold) {
            continue;
        }
        if (pivot_row != r) {
            for (int c = 0; c < work.cols(); ++c) {
                std::swap(work(r, c), work(pivot_row, c));
            }
        }
        for (int i = r + 1; i < work.rows(); ++i) {
            const double factor = work(i, col) / work(r, col);
            for (int c = col; c < work.cols(); ++c) {
                work(i, c) -= factor * work(r, c);
            }
        }
        ++r;
    }
    return r;
}

bool routh_hurwitz_stable(const Polynomial& p) {
    const int n = p.degree();
    if (n < 1 || n > 4) {
        throw NumericError("routh_hurwitz_stable supports degrees 1..4, got degree " +
                           std::to_string(n));
    }
    if (p.coeffs[0] == 0.0) {
        throw ValidationError("coeffs", "leading polynomial coefficient must be nonzero");
    }
    std::vector<double> a = p.coeffs;
    if (a[0] < 0) {
        for (double& c : a) {
            c = -c;
        }
    }
    for (double c : a) {
        if (c <= 0) {
            return false;
        }
    }
    if (n <= 2) {
        return true;
    }
    if (n == 3) {
        const double b1 = (a[1] * a[2] - a[0] * a[3]) / a[1];
        return b1 > 0;
    }
    // n == 4
    const double b1 = (a[1] * a[2] - a[0] * a[3]) / a[1];
    if (b1 <= 0) {
        return false;
    }
    const double b2 = a[4];
    const double c1 = (b1 * a[3] - a[1] * b2) / b1;
    return c1 > 0;
}

} // namespace siqr::linalg
