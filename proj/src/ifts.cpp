#include "taskrec/ifts.hpp"

#include <cmath>
#include <iostream>

#include "taskrec/rng.hpp"

namespace taskrec {

DenseMatrix init_factors(std::size_t n_rows, std::size_t n_factors, std::uint64_t seed) {
    if (n_factors == 0) throw ValidationError("init_factors: n_factors must be >= 1");
    DenseMatrix m(n_rows, n_factors);
    SplitMix64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_factors));
    for (double& v : m.values) v = rng.next_double() * scale;
    return m;
}

DenseMatrix factor_gram(const DenseMatrix& m) {
    const std::size_t k = m.cols;
    DenseMatrix gram(k, k);
    for (std::size_t f1 = 0; f1 < k; ++f1) {
        for (std::size_t f2 = f1; f2 < k; ++f2) {
            double s = 0.0;
            for (std::size_t r = 0; r < m.rows; ++r) s += m(r, f1) * m(r, f2);
            gram(f1, f2) = s;
            gram(f2, f1) = s;
        }
    }
    return gram;
}

DenseMatrix weighted_factor_gram(const DenseMatrix& factors, const DenseMatrix& gram,
                                 std::span<const std::pair<std::uint32_t, Count>> positives,
                                 double alpha, double lambda) {
    const std::size_t k = factors.cols;
    DenseMatrix a = gram;
    for (std::size_t d = 0; d < k; ++d) a(d, d) += lambda;
    for (const auto& [row, count] : positives) {
        const double delta = alpha * static_cast<double>(count); // q - 1
        const auto f = factors.row(row);
        for (std::size_t f1 = 0; f1 < k; ++f1) {
            const double scaled = delta * f[f1];
            for (std::size_t f2 = 0; f2 < k; ++f2) a(f1, f2) += scaled * f[f2];
        }
    }
    return a;
}

namespace {

// b = sum over positives of q * factors[row]  (p = 1 on the support)
std::vector<double> weighted_preference_rhs(const DenseMatrix& factors,
                                            std::span<const std::pair<std::uint32_t, Count>> positives,
                                            double alpha) {
    std::vector<double> b(factors.cols, 0.0);
    for (const auto& [row, count] : positives) {
        const double q = 1.0 + alpha * static_cast<double>(count);
        const auto f = factors.row(row);
        for (std::size_t j = 0; j < factors.cols; ++j) b[j] += q * f[j];
    }
    return b;
}

template <typename Rethrow>
void solve_rows(std::size_t n_rows, int threads, const Rethrow& tag,
                const std::function<void(std::size_t)>& body) {
    parallel_rows(n_rows, threads, [&](std::size_t r) {
        try {
            body(r);
        } catch (const NotPositiveDefiniteError& e) {
            throw NotPositiveDefiniteError(tag(r) + e.what(), e.pivot());
        } catch (const ValidationError& e) {
            throw ValidationError(tag(r) + e.what());
        }
    });
}

} // namespace

DenseMatrix update_user_factors(const DenseMatrix& v, const ConfidenceWeights& q,
                                const PreferenceMatrix& p, double lambda, int threads) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (v.rows != p.n_tasks()) throw ValidationError("update_user_factors: task count mismatch");
    const InteractionMatrix& c = q.base();
    const DenseMatrix vtv = factor_gram(v);
    DenseMatrix u(p.n_workers(), v.cols);

    solve_rows(
        p.n_workers(), threads,
        [](std::size_t w) { return "worker " + std::to_string(w) + ": "; },
        [&](std::size_t w) {
            const auto positives = c.worker_entries(static_cast<WorkerIndex>(w));
            const DenseMatrix a = weighted_factor_gram(v, vtv, positives, q.alpha(), lambda);
            const std::vector<double> b = weighted_preference_rhs(v, positives, q.alpha());
            const std::vector<double> solution = spd_solve(a, b);
            auto row = u.row(w);
            for (std::size_t j = 0; j < u.cols; ++j) row[j] = solution[j];
        });
    return u;
}

DenseMatrix update_task_factors(const DenseMatrix& u, const ConfidenceWeights& q,
                                const PreferenceMatrix& p, const SimilarityMatrix* s,
                                const DenseMatrix& v_prev, double lambda, int threads) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (u.rows != p.n_workers()) throw ValidationError("update_task_factors: worker count mismatch");
    if (v_prev.rows != p.n_tasks() || v_prev.cols != u.cols)
        throw ValidationError("update_task_factors: v_prev shape mismatch");
    if (s != nullptr && s->n_tasks() != p.n_tasks())
        throw ValidationError("update_task_factors: similarity dimension mismatch");
    const InteractionMatrix& c = q.base();
    const DenseMatrix utu = factor_gram(u);
    const std::size_t n_tasks = p.n_tasks();
    DenseMatrix v(n_tasks, u.cols);

    solve_rows(
        n_tasks, threads, [](std::size_t i) { return "task " + std::to_string(i) + ": "; },
        [&](std::size_t i) {
            const auto positives = c.task_entries(static_cast<TaskIndex>(i));
            const DenseMatrix a = weighted_factor_gram(u, utu, positives, q.alpha(), lambda);
            std::vector<double> b = weighted_preference_rhs(u, positives, q.alpha());
            if (s != nullptr) {
                // Similarity pull toward the pre-sweep factors, self excluded.
                const auto sim_row = s->row(static_cast<TaskIndex>(i));
                for (std::size_t other = 0; other < n_tasks; ++other) {
                    if (other == i) continue;
                    const double weight = 0.5 * lambda * sim_row[other];
                    const auto prev = v_prev.row(other);
                    for (std::size_t j = 0; j < u.cols; ++j) b[j] += weight * prev[j];
                }
            }
            const std::vector<double> solution = spd_solve(a, b);
            auto row = v.row(i);
            for (std::size_t j = 0; j < v.cols; ++j) row[j] = solution[j];
        });
    return v;
}

double objective_ifts(const DenseMatrix& u, const DenseMatrix& v, const ConfidenceWeights& q,
                      const PreferenceMatrix& p, const SimilarityMatrix* s, double lambda) {
    if (u.rows != p.n_workers() || v.rows != p.n_tasks() || u.cols != v.cols)
        throw ValidationError("objective_ifts: shape mismatch");
    const InteractionMatrix& c = q.base();

    // sum over all pairs of (u_w . v_i)^2 via the task gram, then correct the
    // positive entries from (0 - uv)^2 to q (1 - uv)^2.
    const DenseMatrix vtv = factor_gram(v);
    double data_term = 0.0;
    for (std::size_t w = 0; w < u.rows; ++w) {
        const auto uw = u.row(w);
        double quad = 0.0;
        for (std::size_t f1 = 0; f1 < u.cols; ++f1) {
            const double scaled = uw[f1];
            quad += scaled * dot(vtv.row(f1), uw);
        }
        data_term += quad;
    }
    for (WorkerIndex w = 0; w < c.n_workers(); ++w) {
        const auto uw = u.row(w);
        for (const auto& [task, count] : c.worker_entries(w)) {
            const double qwi = 1.0 + q.alpha() * static_cast<double>(count);
            const double predicted = dot(uw, v.row(task));
            const double err = 1.0 - predicted;
            data_term += qwi * err * err - predicted * predicted;
        }
    }

    double reg = 0.0;
    for (double value : u.values) reg += value * value;
    for (double value : v.values) reg += value * value;

    double sim_term = 0.0;
    if (s != nullptr) {
        // ordered pairs i != i'
        for (TaskIndex i = 0; i < v.rows; ++i) {
            const auto sim_row = s->row(i);
            const auto vi = v.row(i);
            for (TaskIndex other = 0; other < v.rows; ++other) {
                if (other == i) continue;
                sim_term += sim_row[other] * dot(vi, v.row(other));
            }
        }
    }
    return data_term + lambda * (reg - sim_term);
}

LatentModel fit_ifts(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                     std::size_t n_factors, double alpha, double lambda,
                     std::size_t iterations, std::uint64_t seed, const IftsOptions& options) {
    if (iterations == 0) throw ValidationError("fit_ifts: iterations must be >= 1");
    if (c.n_tasks() != y.n_tasks())
        throw ValidationError("fit_ifts: task count mismatch between interactions and features");
    if (!(alpha >= 0.0)) throw ValidationError("fit_ifts: alpha must be non-negative");
    if (!(lambda > 0.0)) throw ValidationError("fit_ifts: lambda must be positive");

    const PreferenceMatrix p = build_preference(c);
    const ConfidenceWeights q = build_confidence(c, alpha);
    SimilarityMatrix similarity;
    const SimilarityMatrix* s = nullptr;
    if (options.use_similarity) {
        similarity = task_similarity_matrix(y);
        s = &similarity;
    }

    const auto warn = [&](const std::string& message) {
        if (options.warn) {
            options.warn(message);
        } else {
            std::cerr << "warning: " << message << "\n";
        }
    };

    LatentModel model;
    model.kind = ModelKind::ifts;
    model.n_factors = n_factors;
    model.hyperparams = {alpha, lambda, iterations, seed, 0.0};
    model.u = init_factors(c.n_workers(), n_factors, seed);
    model.v = init_factors(c.n_tasks(), n_factors, seed + 1);

    std::size_t consecutive_increases = 0;
    for (std::size_t sweep = 0; sweep < iterations; ++sweep) {
        try {
            model.u = update_user_factors(model.v, q, p, lambda, options.threads);
            model.v = update_task_factors(model.u, q, p, s, model.v, lambda, options.threads);
        } catch (const NotPositiveDefiniteError& e) {
            throw NotPositiveDefiniteError("sweep " + std::to_string(sweep + 1) + ": " + e.what(),
                                           e.pivot());
        }
        const double objective = objective_ifts(model.u, model.v, q, p, s, lambda);
        if (!model.objective_trace.empty() && objective > model.objective_trace.back()) {
            if (++consecutive_increases >= 2)
                warn("objective increased on two consecutive sweeps (sweep " +
                     std::to_string(sweep + 1) + ")");
        } else {
            consecutive_increases = 0;
        }
        const bool converged =
            options.early_stop && !model.objective_trace.empty() &&
            std::abs(objective - model.objective_trace.back()) <
                options.early_stop_rel_tol * std::max(1.0, std::abs(model.objective_trace.back()));
        model.objective_trace.push_back(objective);
        if (converged) break;
    }
    return model;
}

DenseMatrix predict_latent(const LatentModel& model) {
    DenseMatrix scores(model.u.rows, model.v.rows);
    for (std::size_t w = 0; w < model.u.rows; ++w) {
        const auto uw = model.u.row(w);
        auto out = scores.row(w);
        for (std::size_t i = 0; i < model.v.rows; ++i) out[i] = dot(uw, model.v.row(i));
    }
    return scores;
}

} // namespace taskrec
