#include "taskrec/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace taskrec {

InteractionMatrix::InteractionMatrix(std::size_t n_workers, std::size_t n_tasks,
                                     std::vector<InteractionEntry> entries)
    : n_workers_(n_workers), n_tasks_(n_tasks) {
    std::map<std::pair<WorkerIndex, TaskIndex>, Count> summed;
    for (const auto& e : entries) {
        if (e.worker >= n_workers || e.task >= n_tasks)
            throw ValidationError("interaction entry (" + std::to_string(e.worker) + "," +
                                  std::to_string(e.task) + ") out of range");
        if (e.count <= 0)
            throw ValidationError("interaction count must be positive for (" +
                                  std::to_string(e.worker) + "," + std::to_string(e.task) + ")");
        summed[{e.worker, e.task}] += e.count;
    }
    rows_.resize(n_workers);
    cols_.resize(n_tasks);
    for (const auto& [key, count] : summed) {
        rows_[key.first].emplace_back(key.second, count);
        cols_[key.second].emplace_back(key.first, count);
    }
    nnz_ = summed.size();
}

Count InteractionMatrix::count(WorkerIndex w, TaskIndex i) const {
    const auto& row = rows_[w];
    auto it = std::lower_bound(row.begin(), row.end(), i,
                               [](const auto& entry, TaskIndex task) { return entry.first < task; });
    if (it != row.end() && it->first == i) return it->second;
    return 0;
}

std::vector<InteractionEntry> InteractionMatrix::entries() const {
    std::vector<InteractionEntry> out;
    out.reserve(nnz_);
    for (WorkerIndex w = 0; w < n_workers_; ++w)
        for (const auto& [task, count] : rows_[w]) out.push_back({w, task, count});
    return out;
}

InteractionMatrix InteractionMatrix::resized(std::size_t n_workers, std::size_t n_tasks) const {
    if (n_workers < n_workers_ || n_tasks < n_tasks_)
        throw ValidationError("resized: dimensions may only grow");
    return InteractionMatrix(n_workers, n_tasks, entries());
}

PreferenceMatrix::PreferenceMatrix(std::size_t n_workers, std::size_t n_tasks,
                                   std::vector<std::vector<TaskIndex>> rows)
    : n_workers_(n_workers), n_tasks_(n_tasks), rows_(std::move(rows)) {
    rows_.resize(n_workers);
    for (auto& row : rows_) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        if (!row.empty() && row.back() >= n_tasks)
            throw ValidationError("preference task index out of range");
        nnz_ += row.size();
    }
}

int PreferenceMatrix::value(WorkerIndex w, TaskIndex i) const {
    const auto& row = rows_[w];
    return std::binary_search(row.begin(), row.end(), i) ? 1 : 0;
}

PreferenceMatrix build_preference(const InteractionMatrix& c) {
    std::vector<std::vector<TaskIndex>> rows(c.n_workers());
    for (WorkerIndex w = 0; w < c.n_workers(); ++w) {
        const auto entries = c.worker_entries(w);
        rows[w].reserve(entries.size());
        for (const auto& [task, count] : entries) rows[w].push_back(task);
    }
    return PreferenceMatrix(c.n_workers(), c.n_tasks(), std::move(rows));
}

ConfidenceWeights build_confidence(const InteractionMatrix& c, double alpha) {
    if (!(alpha >= 0.0)) throw ValidationError("confidence alpha must be non-negative");
    return ConfidenceWeights(c, alpha);
}

TaskFeatureMatrix::TaskFeatureMatrix(std::size_t n_tasks, std::size_t n_features,
                                     std::vector<std::vector<FeatureIndex>> rows)
    : n_tasks_(n_tasks), n_features_(n_features), rows_(std::move(rows)) {
    rows_.resize(n_tasks);
    for (auto& row : rows_) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        if (!row.empty() && row.back() >= n_features)
            throw ValidationError("feature index out of range");
    }
}

bool TaskFeatureMatrix::has_feature(TaskIndex i, FeatureIndex l) const {
    const auto& row = rows_[i];
    return std::binary_search(row.begin(), row.end(), l);
}

namespace {

std::size_t sorted_intersection_size(std::span<const FeatureIndex> a,
                                     std::span<const FeatureIndex> b) {
    std::size_t n = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

} // namespace

SimilarityMatrix task_similarity_matrix(const TaskFeatureMatrix& y) {
    const std::size_t n = y.n_tasks();
    std::vector<double> values(n * n, 0.0);
    for (TaskIndex i = 0; i < n; ++i) {
        for (TaskIndex j = i; j < n; ++j) {
            const auto overlap =
                sorted_intersection_size(y.task_features(i), y.task_features(j));
            const double sim = 1.0 / (1.0 + std::exp(-static_cast<double>(overlap)));
            values[i * n + j] = sim;
            values[j * n + i] = sim;
        }
    }
    return SimilarityMatrix(n, std::move(values));
}

} // namespace taskrec
