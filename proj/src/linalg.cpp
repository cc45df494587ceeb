#include "taskrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taskrec/errors.hpp"

namespace taskrec {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols) throw ValidationError("matvec: dimension mismatch");
    std::vector<double> out(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) out[r] = dot(a.row(r), x);
    return out;
}

namespace {

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

CholeskyFactorization::CholeskyFactorization(const DenseMatrix& a) {
    if (a.rows != a.cols || a.rows == 0)
        throw ValidationError("cholesky: matrix must be square and non-empty");
    const std::size_t n = a.rows;
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-9 * scale)
                throw ValidationError("cholesky: matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");

    // Average with the transpose so assembly rounding asymmetry cancels.
    l_ = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            l_(i, j) = 0.5 * (a(i, j) + a(j, i));

    for (std::size_t k = 0; k < n; ++k) {
        double d = l_(k, k);
        for (std::size_t j = 0; j < k; ++j) d -= l_(k, j) * l_(k, j);
        if (!(d > 0.0))
            throw NotPositiveDefiniteError(
                "matrix is not positive definite: pivot " + std::to_string(k) +
                    " is non-positive",
                k);
        const double lkk = std::sqrt(d);
        l_(k, k) = lkk;
        for (std::size_t i = k + 1; i < n; ++i) {
            double s = l_(i, k);
            for (std::size_t j = 0; j < k; ++j) s -= l_(i, j) * l_(k, j);
            l_(i, k) = s / lkk;
        }
    }
}

std::vector<double> CholeskyFactorization::solve(std::span<const double> b) const {
    const std::size_t n = l_.rows;
    if (b.size() != n) throw ValidationError("cholesky solve: dimension mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= l_(i, j) * y[j];
        y[i] = s / l_(i, i);
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= l_(j, ii) * x[j];
        x[ii] = s / l_(ii, ii);
    }
    return x;
}

std::vector<double> spd_solve(const DenseMatrix& a, std::span<const double> b) {
    return CholeskyFactorization(a).solve(b);
}

double default_nnls_tolerance(std::span<const double> b) {
    double binf = 0.0;
    for (double v : b) binf = std::max(binf, std::abs(v));
    return 1e-10 * (1.0 + binf);
}

std::size_t default_nnls_max_iter(std::size_t n) { return 3 * n; }

namespace {

// Normal-equation solve restricted to the passive set, with one step of
// iterative refinement to tighten the stationarity residual.
std::vector<double> solve_passive(const DenseMatrix& gram, const std::vector<double>& rhs,
                                  const std::vector<std::size_t>& passive) {
    const std::size_t k = passive.size();
    DenseMatrix sub(k, k);
    std::vector<double> subrhs(k);
    for (std::size_t r = 0; r < k; ++r) {
        subrhs[r] = rhs[passive[r]];
        for (std::size_t c = 0; c < k; ++c) sub(r, c) = gram(passive[r], passive[c]);
    }
    CholeskyFactorization chol(sub);
    std::vector<double> z = chol.solve(subrhs);
    std::vector<double> residual(k);
    for (std::size_t r = 0; r < k; ++r) {
        double s = subrhs[r];
        for (std::size_t c = 0; c < k; ++c) s -= sub(r, c) * z[c];
        residual[r] = s;
    }
    std::vector<double> correction = chol.solve(residual);
    for (std::size_t r = 0; r < k; ++r) z[r] += correction[r];
    return z;
}

double residual_norm_at(const DenseMatrix& a, std::span<const double> b,
                        const std::vector<double>& x) {
    double sq = 0.0;
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double d = dot(a.row(r), x) - b[r];
        sq += d * d;
    }
    return std::sqrt(sq);
}

} // namespace

NnlsResult nnls(const DenseMatrix& a, std::span<const double> b, double tol,
                std::size_t max_iter) {
    if (a.rows == 0 || a.cols == 0) throw ValidationError("nnls: empty matrix");
    if (b.size() != a.rows) throw ValidationError("nnls: dimension mismatch");
    if (!(tol > 0.0)) throw ValidationError("nnls: tolerance must be positive");

    const std::size_t n = a.cols;

    // gram = a^t a (exactly symmetric), rhs = a^t b; the gradient at x is
    // gram x - rhs.
    DenseMatrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows; ++r) s += a(r, i) * a(r, j);
            gram(i, j) = s;
            gram(j, i) = s;
        }
    }
    std::vector<double> rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) s += a(r, j) * b[r];
        rhs[j] = s;
    }

    std::vector<double> x(n, 0.0);
    std::vector<bool> in_passive(n, false);
    std::vector<std::size_t> passive;
    std::size_t iterations = 0;

    auto negative_gradient = [&](const std::vector<double>& at) {
        std::vector<double> w(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = at[i];
            if (xi == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) w[j] -= gram(j, i) * xi;
        }
        return w;
    };

    auto make_result = [&](const std::vector<double>& sol) {
        NnlsResult res;
        res.x = sol;
        res.residual_norm = residual_norm_at(a, b, sol);
        res.iterations = iterations;
        res.active_set_size = n - passive.size();
        return res;
    };

    std::vector<double> w = negative_gradient(x);
    while (true) {
        // Most-violating zero coordinate; ties resolve to the lowest index.
        std::size_t best = n;
        double best_w = tol;
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_passive[j] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best == n) break; // KKT satisfied
        in_passive[best] = true;
        passive.push_back(best);

        while (true) {
            if (++iterations > max_iter)
                throw NnlsConvergenceError("nnls: exceeded " + std::to_string(max_iter) +
                                               " iterations",
                                           make_result(x));
            std::vector<double> z_passive = solve_passive(gram, rhs, passive);

            bool all_positive = true;
            for (double zi : z_passive)
                if (!(zi > 0.0)) all_positive = false;

            if (all_positive) {
                std::fill(x.begin(), x.end(), 0.0);
                for (std::size_t r = 0; r < passive.size(); ++r) x[passive[r]] = z_passive[r];
                break;
            }

            // Step toward z until the first passive coordinate hits zero.
            double step = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < passive.size(); ++r) {
                const double zi = z_passive[r];
                if (zi > 0.0) continue;
                const double xi = x[passive[r]];
                step = std::min(step, xi / (xi - zi));
            }
            // Coordinates whose ratio equals the step land exactly on the
            // boundary; drop them from the passive set.
            std::vector<std::size_t> kept;
            for (std::size_t r = 0; r < passive.size(); ++r) {
                const std::size_t j = passive[r];
                const double zi = z_passive[r];
                const double ratio =
                    zi > 0.0 ? std::numeric_limits<double>::infinity() : x[j] / (x[j] - zi);
                const double moved = x[j] + step * (zi - x[j]);
                if (ratio <= step || moved <= 0.0) {
                    x[j] = 0.0;
                    in_passive[j] = false;
                } else {
                    x[j] = moved;
                    kept.push_back(j);
                }
            }
            passive = std::move(kept);
            if (passive.empty()) break;
        }

        w = negative_gradient(x);
    }

    return make_result(x);
}

NnlsResult nnls(const DenseMatrix& a, std::span<const double> b) {
    return nnls(a, b, default_nnls_tolerance(b), default_nnls_max_iter(a.cols));
}

} // namespace taskrec
