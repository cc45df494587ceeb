#include "taskrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "taskrec/baselines.hpp"
#include "taskrec/errors.hpp"
#include "taskrec/num_format.hpp"
#include "taskrec/rng.hpp"

namespace taskrec {

HoldoutSplit split_holdout(const InteractionMatrix& c, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValidationError("split ratio must be strictly between 0 and 1");
    if (c.nnz() < 2) throw ValidationError("split requires a support of at least 2 entries");

    std::vector<InteractionEntry> entries = c.entries(); // sorted by (worker, task)
    SplitMix64 rng(seed);
    for (std::size_t i = entries.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(entries[i], entries[j]);
    }
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(entries.size())));

    std::vector<InteractionEntry> train_entries(entries.begin(), entries.begin() + n_train);
    std::vector<InteractionEntry> test_entries(entries.begin() + n_train, entries.end());

    HoldoutSplit split;
    split.train = InteractionMatrix(c.n_workers(), c.n_tasks(), std::move(train_entries));
    split.test = InteractionMatrix(c.n_workers(), c.n_tasks(), std::move(test_entries));
    split.ratio = ratio;
    split.seed = seed;
    return split;
}

namespace {

// The one ranking order everything uses: descending score, ties broken by
// ascending task index.
void sort_ranked(std::vector<std::pair<double, TaskIndex>>& items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
}

std::vector<TaskIndex> candidate_tasks(const InteractionMatrix& train, WorkerIndex w) {
    const auto positives = train.worker_entries(w);
    std::vector<TaskIndex> candidates;
    candidates.reserve(train.n_tasks() - positives.size());
    std::size_t cursor = 0;
    for (TaskIndex i = 0; i < train.n_tasks(); ++i) {
        if (cursor < positives.size() && positives[cursor].first == i) {
            ++cursor;
            continue;
        }
        candidates.push_back(i);
    }
    return candidates;
}

void check_eval_shapes(const DenseMatrix& scores, const HoldoutSplit& split) {
    if (split.train.n_workers() != split.test.n_workers() ||
        split.train.n_tasks() != split.test.n_tasks())
        throw ValidationError("split train/test dimensions disagree");
    if (scores.rows != split.train.n_workers() || scores.cols != split.train.n_tasks())
        throw ValidationError("score matrix does not cover the split dimensions");
}

} // namespace

std::vector<TaskIndex> rank_candidates(std::span<const double> scores,
                                       std::span<const TaskIndex> candidates) {
    std::vector<std::pair<double, TaskIndex>> items;
    items.reserve(candidates.size());
    for (TaskIndex task : candidates) items.emplace_back(scores[task], task);
    sort_ranked(items);
    std::vector<TaskIndex> order;
    order.reserve(items.size());
    for (const auto& [score, task] : items) order.push_back(task);
    return order;
}

std::unordered_map<TaskIndex, double> percentile_ranks(std::span<const double> scores,
                                                       std::span<const TaskIndex> candidates) {
    if (candidates.empty()) throw ValidationError("percentile_ranks: no candidates");
    if (scores.size() != candidates.size())
        throw ValidationError("percentile_ranks: scores and candidates must align");
    std::vector<std::pair<double, TaskIndex>> items;
    items.reserve(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k)
        items.emplace_back(scores[k], candidates[k]);
    sort_ranked(items);

    std::unordered_map<TaskIndex, double> rho;
    rho.reserve(items.size());
    const std::size_t n = items.size();
    for (std::size_t r = 0; r < n; ++r)
        rho[items[r].second] =
            n == 1 ? 0.0 : 100.0 * static_cast<double>(r) / static_cast<double>(n - 1);
    return rho;
}

double mpr(const DenseMatrix& scores, const HoldoutSplit& split) {
    check_eval_shapes(scores, split);
    if (split.test.nnz() == 0)
        throw ValidationError("mpr is undefined: test support is empty");

    double weighted = 0.0;
    double total = 0.0;
    for (WorkerIndex w = 0; w < split.test.n_workers(); ++w) {
        const auto test_entries = split.test.worker_entries(w);
        if (test_entries.empty()) continue;
        const std::vector<TaskIndex> candidates = candidate_tasks(split.train, w);
        std::vector<double> candidate_scores;
        candidate_scores.reserve(candidates.size());
        const auto row = scores.row(w);
        for (TaskIndex task : candidates) candidate_scores.push_back(row[task]);
        const auto rho = percentile_ranks(candidate_scores, candidates);
        for (const auto& [task, count] : test_entries) {
            weighted += static_cast<double>(count) * rho.at(task);
            total += static_cast<double>(count);
        }
    }
    return weighted / total;
}

std::vector<PrPoint> pr_curve(const DenseMatrix& scores, const HoldoutSplit& split) {
    check_eval_shapes(scores, split);
    if (split.test.nnz() == 0)
        throw ValidationError("pr_curve is undefined: test support is empty");

    const std::size_t total_test_positives = split.test.nnz();
    std::vector<std::size_t> selected_at(101, 0);
    std::vector<std::size_t> hits_at(101, 0);

    for (WorkerIndex w = 0; w < split.train.n_workers(); ++w) {
        const std::vector<TaskIndex> candidates = candidate_tasks(split.train, w);
        if (candidates.empty()) continue;
        const auto row = scores.row(w);
        const std::vector<TaskIndex> order = rank_candidates(row, candidates);

        const auto test_entries = split.test.worker_entries(w);
        std::vector<TaskIndex> test_tasks;
        test_tasks.reserve(test_entries.size());
        for (const auto& [task, count] : test_entries) test_tasks.push_back(task);

        std::vector<std::size_t> cumulative_hits(order.size() + 1, 0);
        for (std::size_t r = 0; r < order.size(); ++r) {
            const bool hit = std::binary_search(test_tasks.begin(), test_tasks.end(), order[r]);
            cumulative_hits[r + 1] = cumulative_hits[r] + (hit ? 1 : 0);
        }
        const std::size_t n_cand = order.size();
        for (int t = 1; t <= 100; ++t) {
            // exact ceil(t% of n_cand)
            const std::size_t k =
                (static_cast<std::size_t>(t) * n_cand + 99) / 100;
            selected_at[t] += k;
            hits_at[t] += cumulative_hits[k];
        }
    }

    std::vector<PrPoint> points;
    points.reserve(100);
    for (int t = 1; t <= 100; ++t) {
        PrPoint point;
        point.t_percent = t;
        point.precision = selected_at[t] == 0
                              ? 0.0
                              : static_cast<double>(hits_at[t]) /
                                    static_cast<double>(selected_at[t]);
        point.recall =
            static_cast<double>(hits_at[t]) / static_cast<double>(total_test_positives);
        points.push_back(point);
    }
    return points;
}

AnyModel train_model(const InteractionMatrix& c, const TaskFeatureMatrix* y,
                     const ModelConfig& config, std::uint64_t seed, int threads) {
    const bool needs_features = config.kind != ModelKind::als_neg;
    if (needs_features && y == nullptr)
        throw ValidationError(to_string(config.kind) + " requires task features");
    switch (config.kind) {
    case ModelKind::feat_nnls:
        return fit_feat_nnls(c, *y, config.alpha, config.lambda, {threads});
    case ModelKind::feat_reg:
        return fit_feature_reg(c, *y, config.lambda, {threads});
    case ModelKind::ifts: {
        IftsOptions options;
        options.threads = threads;
        return fit_ifts(c, *y, config.n_factors, config.alpha, config.lambda,
                        config.iterations, seed, options);
    }
    case ModelKind::als_neg: {
        BaselineConfig baseline;
        baseline.kind = ModelKind::als_neg;
        baseline.alpha = config.alpha;
        baseline.beta_neg = config.beta_neg;
        baseline.lambda = config.lambda;
        baseline.n_factors = config.n_factors;
        baseline.iterations = config.iterations;
        baseline.seed = seed;
        return fit_implicit_als_neg(c, baseline, {threads});
    }
    }
    throw ValidationError("unknown model kind");
}

DenseMatrix predict_scores(const AnyModel& model, const TaskFeatureMatrix* y) {
    if (const auto* feat = std::get_if<FeatModel>(&model)) {
        if (y == nullptr) throw ValidationError("feature models need task features to score");
        return predict_feat(*feat, *y);
    }
    return predict_latent(std::get<LatentModel>(model));
}

EvalReport run_protocol(const InteractionMatrix& c, const TaskFeatureMatrix* y,
                        const ModelConfig& config, double ratio, std::uint64_t base_seed,
                        const ProtocolOptions& options) {
    if (options.n_runs == 0) throw ValidationError("run_protocol: n_runs must be >= 1");

    EvalReport report;
    report.model = to_string(config.kind);
    report.ratio = ratio;
    report.seed = base_seed;
    report.hyperparams["alpha"] = config.alpha;
    report.hyperparams["lambda"] = config.lambda;
    if (config.kind == ModelKind::ifts || config.kind == ModelKind::als_neg) {
        report.hyperparams["factors"] = static_cast<double>(config.n_factors);
        report.hyperparams["iterations"] = static_cast<double>(config.iterations);
    }
    if (config.kind == ModelKind::als_neg) report.hyperparams["beta_neg"] = config.beta_neg;

    const bool want_mpr = options.metric != Metric::pr;
    const bool want_pr = options.metric != Metric::mpr;

    double mpr_sum = 0.0;
    std::vector<double> precision_sum(100, 0.0);
    std::vector<double> recall_sum(100, 0.0);

    for (std::size_t run = 0; run < options.n_runs; ++run) {
        const std::uint64_t run_seed = base_seed + run * options.seed_stride;
        const HoldoutSplit split = split_holdout(c, ratio, run_seed);
        const AnyModel model = train_model(split.train, y, config, run_seed, options.threads);
        const DenseMatrix scores = predict_scores(model, y);

        RunResult result;
        result.seed = run_seed;
        if (want_mpr) {
            result.mpr = mpr(scores, split);
            mpr_sum += *result.mpr;
        }
        if (want_pr) {
            const std::vector<PrPoint> points = pr_curve(scores, split);
            for (std::size_t k = 0; k < 100; ++k) {
                precision_sum[k] += points[k].precision;
                recall_sum[k] += points[k].recall;
            }
        }
        report.runs.push_back(result);
    }

    const auto n = static_cast<double>(options.n_runs);
    if (want_mpr) report.mpr = mpr_sum / n;
    if (want_pr) {
        report.pr_points.reserve(100);
        for (int t = 1; t <= 100; ++t) {
            PrPoint point;
            point.t_percent = t;
            point.precision = precision_sum[t - 1] / n;
            point.recall = recall_sum[t - 1] / n;
            report.pr_points.push_back(point);
        }
    }
    return report;
}

void write_report(std::ostream& out, const EvalReport& report) {
    out << "model=" << report.model << "\n";
    for (const auto& [key, value] : report.hyperparams)
        out << key << "=" << format_double(value) << "\n";
    if (report.ratio) out << "ratio=" << format_double(*report.ratio) << "\n";
    if (report.seed) out << "seed=" << *report.seed << "\n";
    if (!report.runs.empty()) {
        out << "runs=" << report.runs.size() << "\n";
        for (const auto& run : report.runs) {
            out << "run=" << run.seed;
            if (run.mpr) out << "," << format_double(*run.mpr);
            out << "\n";
        }
    }
    if (report.mpr) out << "mpr=" << format_double(*report.mpr) << "\n";
    for (const auto& point : report.pr_points)
        out << "pr_point=" << point.t_percent << "," << format_double(point.precision) << ","
            << format_double(point.recall) << "\n";
}

void write_report_file(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_report(out, report);
    if (!out) throw IoError("failed writing " + path);
}

void write_pr_csv(std::ostream& out, std::span<const PrPoint> points) {
    out << "t_percent,precision,recall\n";
    for (const auto& point : points)
        out << point.t_percent << "," << format_double(point.precision) << ","
            << format_double(point.recall) << "\n";
}

void write_pr_csv_file(const std::string& path, std::span<const PrPoint> points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_pr_csv(out, points);
    if (!out) throw IoError("failed writing " + path);
}

} // namespace taskrec
