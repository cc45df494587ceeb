#pragma once

#include "taskrec/core_data.hpp"
#include "taskrec/feat_nnls.hpp"
#include "taskrec/ifts.hpp"

namespace taskrec {

struct BaselineConfig {
    ModelKind kind = ModelKind::als_neg; // als_neg or feat_reg
    double alpha = 50.0;
    double beta_neg = 1.0;
    double lambda = 0.01;
    std::size_t n_factors = 20;
    std::size_t iterations = 15;
    std::uint64_t seed = 42;
};

// pop_i = sum_w c_wi, the weight source for the negative signals.
std::vector<double> task_popularity(const InteractionMatrix& c);

// Alternating least squares on P with q_wi = 1 + alpha * c_wi on positives
// and q_wi = 1 + beta_neg * pop_i on zeros. The task-dependent negative
// weights rule out the sparse gram shortcut, so every per-row system is
// assembled by direct weighted accumulation over all columns.
LatentModel fit_implicit_als_neg(const InteractionMatrix& c, const BaselineConfig& config,
                                 const FitOptions& options = {});

// Unweighted ridge regression on raw counts: x_w solves
// (Y^t Y + lambda I) x = Y^t C_w. Entries of x may be negative.
FeatModel fit_feature_reg(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                          double lambda, const FitOptions& options = {});

} // namespace taskrec
