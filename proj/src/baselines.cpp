#include "taskrec/baselines.hpp"

#include <cmath>
#include <string>

namespace taskrec {

std::vector<double> task_popularity(const InteractionMatrix& c) {
    std::vector<double> pop(c.n_tasks(), 0.0);
    for (TaskIndex i = 0; i < c.n_tasks(); ++i) {
        Count total = 0;
        for (const auto& [worker, count] : c.task_entries(i)) total += count;
        pop[i] = static_cast<double>(total);
    }
    return pop;
}

namespace {

// Assembles one row's system by direct weighted accumulation over every
// column: a = sum_j q_j * outer(factors[j]) + lambda I, b = sum over
// positives of q_j * factors[j]. `weight_of` maps a column to its q.
struct DirectSystem {
    DenseMatrix a;
    std::vector<double> b;
};

template <typename WeightFn>
DirectSystem assemble_direct(const DenseMatrix& factors, const WeightFn& weight_of,
                             std::span<const std::pair<std::uint32_t, Count>> positives,
                             double alpha, double lambda) {
    const std::size_t k = factors.cols;
    DirectSystem sys{DenseMatrix(k, k), std::vector<double>(k, 0.0)};
    for (std::size_t j = 0; j < factors.rows; ++j) {
        const double q = weight_of(j);
        const auto f = factors.row(j);
        for (std::size_t f1 = 0; f1 < k; ++f1) {
            const double scaled = q * f[f1];
            for (std::size_t f2 = f1; f2 < k; ++f2) sys.a(f1, f2) += scaled * f[f2];
        }
    }
    for (std::size_t f1 = 0; f1 < k; ++f1) {
        for (std::size_t f2 = f1 + 1; f2 < k; ++f2) sys.a(f2, f1) = sys.a(f1, f2);
        sys.a(f1, f1) += lambda;
    }
    for (const auto& [row, count] : positives) {
        const double q = 1.0 + alpha * static_cast<double>(count);
        const auto f = factors.row(row);
        for (std::size_t j = 0; j < k; ++j) sys.b[j] += q * f[j];
    }
    return sys;
}

// Objective of the negative-signal ALS: sum_{w,i} q_wi (p_wi - u_w.v_i)^2
// + lambda (||U||^2 + ||V||^2), with q depending on task popularity for the
// zero entries.
double objective_als_neg(const DenseMatrix& u, const DenseMatrix& v, const InteractionMatrix& c,
                         const std::vector<double>& pop, double alpha, double beta_neg,
                         double lambda) {
    double total = 0.0;
    const DenseMatrix utu = factor_gram(u);
    // all-pairs term with the zero-entry weights 1 + beta * pop_i
    for (std::size_t i = 0; i < v.rows; ++i) {
        const auto vi = v.row(i);
        double quad = 0.0;
        for (std::size_t f1 = 0; f1 < v.cols; ++f1) quad += vi[f1] * dot(utu.row(f1), vi);
        total += (1.0 + beta_neg * pop[i]) * quad;
    }
    // correct positives from (1+beta*pop)(0-uv)^2 to (1+alpha*c)(1-uv)^2
    for (WorkerIndex w = 0; w < c.n_workers(); ++w) {
        const auto uw = u.row(w);
        for (const auto& [task, count] : c.worker_entries(w)) {
            const double predicted = dot(uw, v.row(task));
            const double q_pos = 1.0 + alpha * static_cast<double>(count);
            const double q_zero = 1.0 + beta_neg * pop[task];
            const double err = 1.0 - predicted;
            total += q_pos * err * err - q_zero * predicted * predicted;
        }
    }
    double reg = 0.0;
    for (double value : u.values) reg += value * value;
    for (double value : v.values) reg += value * value;
    return total + lambda * reg;
}

} // namespace

LatentModel fit_implicit_als_neg(const InteractionMatrix& c, const BaselineConfig& config,
                                 const FitOptions& options) {
    if (config.kind != ModelKind::als_neg)
        throw ValidationError("fit_implicit_als_neg: config kind must be als-neg");
    if (!(config.lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (config.n_factors == 0) throw ValidationError("n_factors must be >= 1");
    if (config.iterations == 0) throw ValidationError("iterations must be >= 1");
    if (!(config.alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
    if (!(config.beta_neg >= 0.0)) throw ValidationError("beta_neg must be non-negative");

    const std::vector<double> pop = task_popularity(c);

    LatentModel model;
    model.kind = ModelKind::als_neg;
    model.n_factors = config.n_factors;
    model.hyperparams = {config.alpha, config.lambda, config.iterations, config.seed,
                         config.beta_neg};
    model.u = init_factors(c.n_workers(), config.n_factors, config.seed);
    model.v = init_factors(c.n_tasks(), config.n_factors, config.seed + 1);

    for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
        DenseMatrix u_next(c.n_workers(), config.n_factors);
        parallel_rows(c.n_workers(), options.threads, [&](std::size_t w) {
            // q over tasks for this worker: positives use alpha, zeros use
            // the popularity weight.
            const auto weight_of = [&](std::size_t i) {
                const Count count = c.count(static_cast<WorkerIndex>(w),
                                            static_cast<TaskIndex>(i));
                return count > 0 ? 1.0 + config.alpha * static_cast<double>(count)
                                 : 1.0 + config.beta_neg * pop[i];
            };
            const auto positives = c.worker_entries(static_cast<WorkerIndex>(w));
            const DirectSystem sys =
                assemble_direct(model.v, weight_of, positives, config.alpha, config.lambda);
            const std::vector<double> solution = spd_solve(sys.a, sys.b);
            auto row = u_next.row(w);
            for (std::size_t j = 0; j < u_next.cols; ++j) row[j] = solution[j];
        });
        model.u = std::move(u_next);

        DenseMatrix v_next(c.n_tasks(), config.n_factors);
        parallel_rows(c.n_tasks(), options.threads, [&](std::size_t i) {
            const auto weight_of = [&](std::size_t w) {
                const Count count = c.count(static_cast<WorkerIndex>(w),
                                            static_cast<TaskIndex>(i));
                return count > 0 ? 1.0 + config.alpha * static_cast<double>(count)
                                 : 1.0 + config.beta_neg * pop[i];
            };
            const auto positives = c.task_entries(static_cast<TaskIndex>(i));
            const DirectSystem sys =
                assemble_direct(model.u, weight_of, positives, config.alpha, config.lambda);
            const std::vector<double> solution = spd_solve(sys.a, sys.b);
            auto row = v_next.row(i);
            for (std::size_t j = 0; j < v_next.cols; ++j) row[j] = solution[j];
        });
        model.v = std::move(v_next);

        model.objective_trace.push_back(objective_als_neg(
            model.u, model.v, c, pop, config.alpha, config.beta_neg, config.lambda));
    }
    return model;
}

FeatModel fit_feature_reg(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                          double lambda, const FitOptions& options) {
    if (c.n_tasks() != y.n_tasks())
        throw ValidationError("fit_feature_reg: task count mismatch");
    if (!(lambda > 0.0)) throw ValidationError("fit_feature_reg: lambda must be positive");

    const std::size_t n_features = y.n_features();
    DenseMatrix a = feature_gram(y);
    for (std::size_t d = 0; d < n_features; ++d) a(d, d) += lambda;
    const CholeskyFactorization factorization(a);

    FeatModel model;
    model.kind = ModelKind::feat_reg;
    model.alpha = 0.0;
    model.lambda = lambda;
    model.feature_count = n_features;
    model.x = DenseMatrix(c.n_workers(), n_features);

    parallel_rows(c.n_workers(), options.threads, [&](std::size_t w) {
        // b = Y^t C_w: zeros contribute nothing to the raw count target.
        std::vector<double> b(n_features, 0.0);
        for (const auto& [task, count] : c.worker_entries(static_cast<WorkerIndex>(w)))
            for (FeatureIndex l : y.task_features(task)) b[l] += static_cast<double>(count);
        const std::vector<double> solution = factorization.solve(b);
        auto row = model.x.row(w);
        for (std::size_t l = 0; l < n_features; ++l) row[l] = solution[l];
    });
    return model;
}

} // namespace taskrec
