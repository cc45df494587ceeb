#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace taskrec {

// Row-major dense matrix of doubles.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

double dot(std::span<const double> a, std::span<const double> b);
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);

// Raised when a pivot of the Cholesky factorization is not positive; carries
// the index of the failing pivot.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    NotPositiveDefiniteError(const std::string& message, std::size_t pivot)
        : std::runtime_error(message), pivot_(pivot) {}

    std::size_t pivot() const { return pivot_; }

private:
    std::size_t pivot_;
};

// Cholesky factorization of a symmetric positive definite matrix. The input
// must be symmetric to 1e-9 relative tolerance; it is averaged with its
// transpose before factoring so accumulated rounding asymmetry cancels.
class CholeskyFactorization {
public:
    explicit CholeskyFactorization(const DenseMatrix& a);

    std::vector<double> solve(std::span<const double> b) const;
    std::size_t order() const { return l_.rows; }

private:
    DenseMatrix l_;
};

// Solves a x = b for symmetric positive definite a without forming an
// explicit inverse. Deterministic: identical inputs give bitwise-identical
// outputs.
std::vector<double> spd_solve(const DenseMatrix& a, std::span<const double> b);

struct NnlsResult {
    std::vector<double> x;
    double residual_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t active_set_size = 0;
};

// Raised when the active-set iteration exceeds its budget; carries the best
// iterate reached so far.
class NnlsConvergenceError : public std::runtime_error {
public:
    NnlsConvergenceError(const std::string& message, NnlsResult best)
        : std::runtime_error(message), best_(std::move(best)) {}

    const NnlsResult& best() const { return best_; }

private:
    NnlsResult best_;
};

double default_nnls_tolerance(std::span<const double> b);
std::size_t default_nnls_max_iter(std::size_t n);

// Minimizes ||a x - b||^2 subject to x >= 0 with the Lawson-Hanson active-set
// method. The returned x satisfies the KKT conditions: x >= 0, every gradient
// component g = a^t(a x - b) has g_j >= -tol, and |x_j g_j| <= tol * (1 + ||b||).
NnlsResult nnls(const DenseMatrix& a, std::span<const double> b, double tol,
                std::size_t max_iter);
NnlsResult nnls(const DenseMatrix& a, std::span<const double> b);

} // namespace taskrec
