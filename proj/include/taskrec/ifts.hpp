#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "taskrec/core_data.hpp"
#include "taskrec/linalg.hpp"
#include "taskrec/model_kind.hpp"
#include "taskrec/threading.hpp"

namespace taskrec {

struct LatentHyperparams {
    double alpha = 0.0;
    double lambda = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    double beta_neg = 0.0; // only meaningful for als-neg models
};

struct LatentModel {
    ModelKind kind = ModelKind::ifts;
    DenseMatrix u; // n_workers x n_factors
    DenseMatrix v; // n_tasks x n_factors
    std::size_t n_factors = 0;
    LatentHyperparams hyperparams;
    std::vector<double> objective_trace; // one entry per completed sweep
};

// Deterministic factor initialization: entries uniform in [0, 1/sqrt(n_f))
// drawn row-major from a splitmix64 stream. Identical (seed, shape) gives a
// bitwise-identical matrix on every platform.
DenseMatrix init_factors(std::size_t n_rows, std::size_t n_factors, std::uint64_t seed);

// M^t M with exact symmetry (each unordered pair computed once).
DenseMatrix factor_gram(const DenseMatrix& m);

// gram + lambda I + sum over positives of (alpha * count) * outer(factors[row]).
// This is the speedup identity M^t Q M = M^t M + M^t (Q - I) M: only the
// positive entries contribute beyond the shared gram.
DenseMatrix weighted_factor_gram(const DenseMatrix& factors, const DenseMatrix& gram,
                                 std::span<const std::pair<std::uint32_t, Count>> positives,
                                 double alpha, double lambda);

struct IftsOptions {
    int threads = 0;
    bool use_similarity = true; // false forces Sim = 0 (plain weighted ALS)
    bool early_stop = false;    // stop when the relative objective change is small
    double early_stop_rel_tol = 1e-4;
    std::function<void(const std::string&)> warn; // default: stderr
};

// Eq-5-style closed-form row updates: u_w solves (V^t Q^w V + lambda I) u = V^t Q^w P_w.
DenseMatrix update_user_factors(const DenseMatrix& v, const ConfidenceWeights& q,
                                const PreferenceMatrix& p, double lambda, int threads = 0);

// Task update with the similarity pull toward the pre-sweep factors v_prev
// (Jacobi style): (U^t Q^i U + lambda I) v_i = U^t Q^i P_i
//                 + 0.5 * lambda * sum_{i' != i} Sim(i,i') v_prev[i'].
// Pass s = nullptr to drop the similarity term.
DenseMatrix update_task_factors(const DenseMatrix& u, const ConfidenceWeights& q,
                                const PreferenceMatrix& p, const SimilarityMatrix* s,
                                const DenseMatrix& v_prev, double lambda, int threads = 0);

// Full objective: sum_{w,i} q_wi (p_wi - u_w.v_i)^2
//                 + lambda (||U||^2 + ||V||^2 - sum_{i != i'} Sim(i,i') v_i.v_i').
// The similarity sum runs over ordered pairs. Pass s = nullptr for Sim = 0.
double objective_ifts(const DenseMatrix& u, const DenseMatrix& v, const ConfidenceWeights& q,
                      const PreferenceMatrix& p, const SimilarityMatrix* s, double lambda);

// Alternating sweeps of user and task updates from a seeded initialization
// (U from `seed`, V from `seed + 1`). Records the objective after every sweep
// and warns if it increases on two consecutive sweeps.
LatentModel fit_ifts(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                     std::size_t n_factors, double alpha, double lambda,
                     std::size_t iterations, std::uint64_t seed, const IftsOptions& options = {});

// score(w, i) = u_w . v_i
DenseMatrix predict_latent(const LatentModel& model);

} // namespace taskrec
