#include "taskrec/feat_nnls.hpp"

#include <string>

namespace taskrec {

DenseMatrix feature_gram(const TaskFeatureMatrix& y) {
    const std::size_t n = y.n_features();
    DenseMatrix gram(n, n);
    for (TaskIndex i = 0; i < y.n_tasks(); ++i) {
        const auto feats = y.task_features(i);
        for (FeatureIndex a : feats)
            for (FeatureIndex b : feats) gram(a, b) += 1.0;
    }
    return gram;
}

WorkerSystem assemble_worker_system(const DenseMatrix& gram, const TaskFeatureMatrix& y,
                                    const ConfidenceWeights& q, const PreferenceMatrix& p,
                                    WorkerIndex w, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const std::size_t n = y.n_features();
    if (gram.rows != n || gram.cols != n)
        throw ValidationError("assemble_worker_system: gram dimension mismatch");
    if (p.n_tasks() != y.n_tasks())
        throw ValidationError("assemble_worker_system: task count mismatch");

    WorkerSystem sys;
    sys.a = gram;
    for (std::size_t d = 0; d < n; ++d) sys.a(d, d) += lambda;
    sys.b.assign(n, 0.0);

    const double alpha = q.alpha();
    for (const auto& [task, count] : q.base().worker_entries(w)) {
        const double qwi = 1.0 + alpha * static_cast<double>(count);
        const double delta = qwi - 1.0;
        const auto feats = y.task_features(task);
        for (FeatureIndex a : feats) {
            for (FeatureIndex b : feats) sys.a(a, b) += delta;
            sys.b[a] += qwi; // p_wi = 1 on the support
        }
    }
    return sys;
}

WorkerSystem assemble_worker_system(const TaskFeatureMatrix& y, const ConfidenceWeights& q,
                                    const PreferenceMatrix& p, WorkerIndex w, double lambda) {
    return assemble_worker_system(feature_gram(y), y, q, p, w, lambda);
}

FeatModel fit_feat_nnls(const InteractionMatrix& c, const TaskFeatureMatrix& y,
                        double alpha, double lambda, const FitOptions& options) {
    if (c.n_tasks() != y.n_tasks())
        throw ValidationError("fit_feat_nnls: task count mismatch between interactions and features");
    if (!(alpha >= 0.0)) throw ValidationError("fit_feat_nnls: alpha must be non-negative");
    if (!(lambda > 0.0)) throw ValidationError("fit_feat_nnls: lambda must be positive");

    const std::size_t n_features = y.n_features();
    const DenseMatrix gram = feature_gram(y);
    const PreferenceMatrix p = build_preference(c);
    const ConfidenceWeights q = build_confidence(c, alpha);

    FeatModel model;
    model.kind = ModelKind::feat_nnls;
    model.alpha = alpha;
    model.lambda = lambda;
    model.feature_count = n_features;
    model.x = DenseMatrix(c.n_workers(), n_features);

    parallel_rows(c.n_workers(), options.threads, [&](std::size_t w) {
        const WorkerSystem sys =
            assemble_worker_system(gram, y, q, p, static_cast<WorkerIndex>(w), lambda);
        try {
            const NnlsResult result = nnls(sys.a, sys.b);
            auto row = model.x.row(w);
            for (std::size_t l = 0; l < n_features; ++l) row[l] = result.x[l];
        } catch (const NnlsConvergenceError& e) {
            throw NnlsConvergenceError("worker " + std::to_string(w) + ": " + e.what(),
                                       e.best());
        } catch (const NotPositiveDefiniteError& e) {
            throw NotPositiveDefiniteError("worker " + std::to_string(w) + ": " + e.what(),
                                           e.pivot());
        }
    });
    return model;
}

DenseMatrix predict_feat(const FeatModel& model, const TaskFeatureMatrix& y) {
    if (model.x.cols != y.n_features())
        throw ValidationError("predict_feat: feature count mismatch");
    DenseMatrix scores(model.x.rows, y.n_tasks());
    for (std::size_t w = 0; w < model.x.rows; ++w) {
        const auto xw = model.x.row(w);
        auto out = scores.row(w);
        for (TaskIndex i = 0; i < y.n_tasks(); ++i) {
            double s = 0.0;
            for (FeatureIndex l : y.task_features(i)) s += xw[l];
            out[i] = s;
        }
    }
    return scores;
}

} // namespace taskrec
