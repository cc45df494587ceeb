#pragma once

#include "taskrec/core_data.hpp"
#include "taskrec/linalg.hpp"
#include "taskrec/model_kind.hpp"
#include "taskrec/threading.hpp"

namespace taskrec {

// Per-worker non-negative feature preferences learned from implicit
// completions. Every entry of x is >= 0; row w is the KKT-certified NNLS
// solution of worker w's system.
struct FeatModel {
    ModelKind kind = ModelKind::feat_nnls;
    DenseMatrix x; // n_workers x n_features
    double alpha = 0.0;
    double lambda = 0.0;
    std::size_t feature_count = 0;
};

struct WorkerSystem {
    DenseMatrix a;         // Y^t Q^w Y + lambda I
    std::vector<double> b; // Y^t Q^w P_w
};

// Y^t Y, shared across all workers.
DenseMatrix feature_gram(const TaskFeatureMatrix& y);

// Builds worker w's normal system from the shared gram plus the worker's
// positive entries only: Y^t Q^w Y = Y^t Y + Y^t (Q^w - I) Y, and Q^w - I is
// zero outside the worker's completions.
WorkerSystem assemble_worker_system(const DenseMatrix& gram, const TaskFeatureMatrix& y,
                                    const ConfidenceWeights& q, const PreferenceMatrix& p,
                                    WorkerIndex w, double lambda);
WorkerSystem assemble_worker_system(const TaskFeatureMatrix& y, const ConfidenceWeights& q,
                                    const PreferenceMatrix& p, WorkerIndex w, double lambda);

// Fits one NNLS problem per worker. Rows are independent; the result is
// bitwise-identical for any thread count.
FeatModel fit_feat_nnls(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                        double alpha, double lambda, const FitOptions& options = {});

// score(w, i) = x_w . y_i
DenseMatrix predict_feat(const FeatModel& model, const TaskFeatureMatrix& y);

} // namespace taskrec
