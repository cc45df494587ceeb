#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "taskrec/core_data.hpp"
#include "taskrec/feat_nnls.hpp"
#include "taskrec/ifts.hpp"
#include "taskrec/model_kind.hpp"

namespace taskrec {

struct HoldoutSplit {
    InteractionMatrix train;
    InteractionMatrix test;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

// Shuffles the support entries (canonically sorted by worker then task) with
// a splitmix64-seeded Fisher-Yates permutation; the first round(ratio * n)
// entries become the training set. Counts are carried whole.
HoldoutSplit split_holdout(const InteractionMatrix& c, double ratio, std::uint64_t seed);

// Candidate tasks ordered by descending score, ties broken by ascending task
// index. `scores` is indexed by task id. Shared by every ranking consumer so
// MPR, the PR curve, and recommendations agree on per-worker orderings.
std::vector<TaskIndex> rank_candidates(std::span<const double> scores,
                                       std::span<const TaskIndex> candidates);

// Percentile rank of each candidate: the task at zero-based rank r gets
// rho = 100 * r / (n_cand - 1); a single candidate gets rho = 0.
// scores[k] is the score of candidates[k].
std::unordered_map<TaskIndex, double> percentile_ranks(std::span<const double> scores,
                                                       std::span<const TaskIndex> candidates);

// Mean Percentile Ranking: sum of c_wi * rho_wi over test entries divided by
// the sum of c_wi. Each worker's candidate set is every task minus that
// worker's training positives. Lower is better; 50 is random.
double mpr(const DenseMatrix& scores, const HoldoutSplit& split);

struct PrPoint {
    int t_percent = 0;
    double precision = 0.0;
    double recall = 0.0;
};

// Precision and recall of the held-out positives among each worker's top
// ceil(t% of candidates), micro-aggregated over workers, for t = 1..100.
std::vector<PrPoint> pr_curve(const DenseMatrix& scores, const HoldoutSplit& split);

struct ModelConfig {
    ModelKind kind = ModelKind::feat_nnls;
    double alpha = 50.0;
    double lambda = 0.01;
    double beta_neg = 1.0;
    std::size_t n_factors = 20;
    std::size_t iterations = 15;
};

using AnyModel = std::variant<FeatModel, LatentModel>;

// Trains the configured model on c (y required for all kinds except als-neg).
AnyModel train_model(const InteractionMatrix& c, const TaskFeatureMatrix* y,
                     const ModelConfig& config, std::uint64_t seed, int threads = 0);

// Scores through the model's own predict path (y required for feat kinds).
DenseMatrix predict_scores(const AnyModel& model, const TaskFeatureMatrix* y);

enum class Metric { mpr, pr, both };

struct RunResult {
    std::uint64_t seed = 0;
    std::optional<double> mpr;
};

struct EvalReport {
    std::optional<double> mpr;
    std::vector<PrPoint> pr_points;
    // metadata
    std::string model;
    std::map<std::string, double> hyperparams;
    std::optional<double> ratio;
    std::optional<std::uint64_t> seed;
    std::vector<RunResult> runs;
};

struct ProtocolOptions {
    std::size_t n_runs = 3;
    std::uint64_t seed_stride = 1; // run k uses seed base_seed + k * seed_stride
    Metric metric = Metric::both;
    int threads = 0;
};

// Split / train / evaluate with seeds base_seed, base_seed+1, base_seed+2
// (by default); reports the arithmetic mean of MPR and the pointwise mean PR
// curve, with per-run values in the metadata.
EvalReport run_protocol(const InteractionMatrix& c, const TaskFeatureMatrix* y,
                        const ModelConfig& config, double ratio, std::uint64_t base_seed,
                        const ProtocolOptions& options = {});

void write_report(std::ostream& out, const EvalReport& report);
void write_report_file(const std::string& path, const EvalReport& report);
void write_pr_csv(std::ostream& out, std::span<const PrPoint> points);
void write_pr_csv_file(const std::string& path, std::span<const PrPoint> points);

} // namespace taskrec
