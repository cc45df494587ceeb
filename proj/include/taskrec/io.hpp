#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "taskrec/core_data.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/feat_nnls.hpp"
#include "taskrec/ifts.hpp"
#include "taskrec/num_format.hpp"

namespace taskrec {

// External string id <-> dense index, assigned in first-appearance order.
class IdMap {
public:
    std::uint32_t add(std::string_view id);
    std::optional<std::uint32_t> find(std::string_view id) const;
    const std::string& name(std::uint32_t index) const { return names_[index]; }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> indices_;
};

struct IdMaps {
    IdMap workers;
    IdMap tasks;
    IdMap features;
};

struct LoadedObservations {
    InteractionMatrix matrix;
    IdMaps ids;
};

// Reads a `worker_id,task_id,count` file. Duplicate pairs are summed; counts
// must be positive integers. Malformed rows fail with their line number.
LoadedObservations load_observations(const std::filesystem::path& path);
// Same, extending an existing id space; the result spans all ids seen so far.
InteractionMatrix load_observations(const std::filesystem::path& path, IdMaps& ids);

struct LoadedFeatures {
    TaskFeatureMatrix y;
    std::size_t tasks_without_features = 0; // tasks known only from observations
};

// Reads a `task_id,feature_id` file against (and extending) the shared id
// space. Duplicate pairs collapse to a single presence bit; tasks that never
// appear get all-zero rows.
LoadedFeatures load_features(const std::filesystem::path& path, IdMaps& ids);

void write_observations(const std::filesystem::path& path, const InteractionMatrix& c,
                        const IdMaps& ids);

// Text model format: a kind line, dim line(s), hyperparameter lines, then the
// matrix rows as tab-separated round-trip-exact decimals. load_model
// reproduces the saved matrices bitwise.
void save_model(const std::filesystem::path& path, const FeatModel& model);
void save_model(const std::filesystem::path& path, const LatentModel& model);
void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

struct SyntheticParams {
    std::size_t n_workers = 200;
    std::size_t n_tasks = 150;
    std::size_t n_features = 30;
    std::size_t features_per_task = 3;
    std::size_t active_features_per_worker = 5;
    double intensity = 2.0;
    std::uint64_t seed = 42;
};

struct SyntheticTruth {
    DenseMatrix x_true; // n_workers x n_features planted preferences
    SyntheticParams params;
};

// Plants sparse worker preferences and task features, draws completion
// counts Poisson(intensity * x_true_w . y_i) by inversion from a single
// splitmix64 stream, and writes observation/feature/truth files in the load
// formats above. Byte-identical output for a given seed.
SyntheticTruth generate_synthetic(const SyntheticParams& params,
                                  const std::filesystem::path& observations_out,
                                  const std::filesystem::path& features_out,
                                  const std::filesystem::path& truth_out);

} // namespace taskrec
