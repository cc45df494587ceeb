#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "taskrec/errors.hpp"

namespace taskrec {

using WorkerIndex = std::uint32_t;
using TaskIndex = std::uint32_t;
using FeatureIndex = std::uint32_t;
using Count = std::int64_t;

struct InteractionEntry {
    WorkerIndex worker = 0;
    TaskIndex task = 0;
    Count count = 0;
};

// Sparse worker x task completion counts. Duplicate (worker, task) records
// are summed at construction; stored counts are always >= 1 and zeros are
// implicit. Immutable after construction.
class InteractionMatrix {
public:
    InteractionMatrix() = default;
    InteractionMatrix(std::size_t n_workers, std::size_t n_tasks,
                      std::vector<InteractionEntry> entries);

    std::size_t n_workers() const { return n_workers_; }
    std::size_t n_tasks() const { return n_tasks_; }
    std::size_t nnz() const { return nnz_; }

    // Sorted by task index.
    std::span<const std::pair<TaskIndex, Count>> worker_entries(WorkerIndex w) const {
        return rows_[w];
    }
    // Sorted by worker index.
    std::span<const std::pair<WorkerIndex, Count>> task_entries(TaskIndex i) const {
        return cols_[i];
    }

    // 0 when the pair is not stored.
    Count count(WorkerIndex w, TaskIndex i) const;

    // Entries in ascending (worker, task) order.
    std::vector<InteractionEntry> entries() const;

    // Copy with grown dimensions (entries unchanged).
    InteractionMatrix resized(std::size_t n_workers, std::size_t n_tasks) const;

private:
    std::size_t n_workers_ = 0;
    std::size_t n_tasks_ = 0;
    std::size_t nnz_ = 0;
    std::vector<std::vector<std::pair<TaskIndex, Count>>> rows_;
    std::vector<std::vector<std::pair<WorkerIndex, Count>>> cols_;
};

// Boolean view of the interactions: p_wi = 1 iff c_wi >= 1.
class PreferenceMatrix {
public:
    PreferenceMatrix() = default;
    PreferenceMatrix(std::size_t n_workers, std::size_t n_tasks,
                     std::vector<std::vector<TaskIndex>> rows);

    std::size_t n_workers() const { return n_workers_; }
    std::size_t n_tasks() const { return n_tasks_; }
    std::size_t nnz() const { return nnz_; }

    int value(WorkerIndex w, TaskIndex i) const;
    std::span<const TaskIndex> worker_tasks(WorkerIndex w) const { return rows_[w]; }

private:
    std::size_t n_workers_ = 0;
    std::size_t n_tasks_ = 0;
    std::size_t nnz_ = 0;
    std::vector<std::vector<TaskIndex>> rows_;
};

PreferenceMatrix build_preference(const InteractionMatrix& c);

// Confidence weights q_wi = 1 + alpha * c_wi, evaluated lazily against the
// base matrix (only positive counts are stored; q is 1 everywhere else).
// The base matrix must outlive this object.
class ConfidenceWeights {
public:
    ConfidenceWeights(const InteractionMatrix& base, double alpha)
        : base_(&base), alpha_(alpha) {}

    double alpha() const { return alpha_; }
    const InteractionMatrix& base() const { return *base_; }

    double at(WorkerIndex w, TaskIndex i) const {
        return 1.0 + alpha_ * static_cast<double>(base_->count(w, i));
    }

private:
    const InteractionMatrix* base_;
    double alpha_;
};

ConfidenceWeights build_confidence(const InteractionMatrix& c, double alpha);

// Binary task x feature matrix stored as per-task sorted lists of present
// feature indices.
class TaskFeatureMatrix {
public:
    TaskFeatureMatrix() = default;
    // Rows are canonicalized (sorted, deduplicated); indices must be in range.
    TaskFeatureMatrix(std::size_t n_tasks, std::size_t n_features,
                      std::vector<std::vector<FeatureIndex>> rows);

    std::size_t n_tasks() const { return n_tasks_; }
    std::size_t n_features() const { return n_features_; }

    std::span<const FeatureIndex> task_features(TaskIndex i) const { return rows_[i]; }
    bool has_feature(TaskIndex i, FeatureIndex l) const;

private:
    std::size_t n_tasks_ = 0;
    std::size_t n_features_ = 0;
    std::vector<std::vector<FeatureIndex>> rows_;
};

// Dense symmetric task-task similarity, sim(i,j) = 1 / (1 + e^{-Y_i . Y_j}).
// Each unordered pair is computed once, so the matrix is bitwise symmetric.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::size_t n_tasks, std::vector<double> values)
        : n_tasks_(n_tasks), values_(std::move(values)) {}

    std::size_t n_tasks() const { return n_tasks_; }
    double at(TaskIndex i, TaskIndex j) const { return values_[i * n_tasks_ + j]; }
    std::span<const double> row(TaskIndex i) const {
        return {values_.data() + i * n_tasks_, n_tasks_};
    }

private:
    std::size_t n_tasks_ = 0;
    std::vector<double> values_;
};

SimilarityMatrix task_similarity_matrix(const TaskFeatureMatrix& y);

} // namespace taskrec
