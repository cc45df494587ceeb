#include "taskrec/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "taskrec/rng.hpp"

namespace taskrec {

std::uint32_t IdMap::add(std::string_view id) {
    auto it = indices_.find(std::string(id));
    if (it != indices_.end()) return it->second;
    const auto index = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(id);
    indices_.emplace(names_.back(), index);
    return index;
}

std::optional<std::uint32_t> IdMap::find(std::string_view id) const {
    auto it = indices_.find(std::string(id));
    if (it == indices_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(text.substr(start));
            return fields;
        }
        fields.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

void check_header(const std::vector<std::string>& lines, std::string_view expected) {
    if (lines.empty() || lines[0] != expected)
        throw ParseError("expected header '" + std::string(expected) + "'", 1);
}

} // namespace

InteractionMatrix load_observations(const std::filesystem::path& path, IdMaps& ids) {
    const std::vector<std::string> lines = read_lines(path);
    check_header(lines, "worker_id,task_id,count");

    std::map<std::pair<std::uint32_t, std::uint32_t>, Count> counts;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (line.empty() && n == lines.size() - 1) continue; // trailing newline
        const auto fields = split(line, ',');
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
            throw ParseError("expected 'worker_id,task_id,count'", n + 1);
        const auto count = parse_int(fields[2]);
        if (!count || *count <= 0)
            throw ParseError("count must be a positive integer, got '" +
                                 std::string(fields[2]) + "'",
                             n + 1);
        const std::uint32_t w = ids.workers.add(fields[0]);
        const std::uint32_t t = ids.tasks.add(fields[1]);
        counts[{w, t}] += *count;
    }

    std::vector<InteractionEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [key, count] : counts) entries.push_back({key.first, key.second, count});
    return InteractionMatrix(ids.workers.size(), ids.tasks.size(), std::move(entries));
}

LoadedObservations load_observations(const std::filesystem::path& path) {
    LoadedObservations loaded;
    loaded.matrix = load_observations(path, loaded.ids);
    return loaded;
}

LoadedFeatures load_features(const std::filesystem::path& path, IdMaps& ids) {
    const std::vector<std::string> lines = read_lines(path);
    check_header(lines, "task_id,feature_id");

    std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (line.empty() && n == lines.size() - 1) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw ParseError("expected 'task_id,feature_id'", n + 1);
        const std::uint32_t t = ids.tasks.add(fields[0]);
        const std::uint32_t l = ids.features.add(fields[1]);
        pairs.emplace(t, l);
    }

    std::vector<std::vector<FeatureIndex>> rows(ids.tasks.size());
    for (const auto& [t, l] : pairs) rows[t].push_back(l);

    LoadedFeatures loaded;
    for (const auto& row : rows)
        if (row.empty()) ++loaded.tasks_without_features;
    loaded.y = TaskFeatureMatrix(ids.tasks.size(), ids.features.size(), std::move(rows));
    return loaded;
}

void write_observations(const std::filesystem::path& path, const InteractionMatrix& c,
                        const IdMaps& ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "worker_id,task_id,count\n";
    for (const auto& entry : c.entries())
        out << ids.workers.name(entry.worker) << "," << ids.tasks.name(entry.task) << ","
            << entry.count << "\n";
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {

void write_matrix_rows(std::ostream& out, const DenseMatrix& m) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c > 0) out << '\t';
            out << format_double(row[c]);
        }
        out << '\n';
    }
}

std::pair<std::size_t, std::size_t> parse_dims(std::string_view text, std::size_t line) {
    const auto fields = split(text, 'x');
    if (fields.size() != 2)
        throw ParseError("expected '<rows>x<cols>', got '" + std::string(text) + "'", line);
    const auto rows = parse_uint(fields[0]);
    const auto cols = parse_uint(fields[1]);
    if (!rows || !cols) throw ParseError("bad dimensions '" + std::string(text) + "'", line);
    return {static_cast<std::size_t>(*rows), static_cast<std::size_t>(*cols)};
}

std::string expect_keyed_line(const std::vector<std::string>& lines, std::size_t index,
                              std::string_view key) {
    if (index >= lines.size())
        throw ParseError("missing '" + std::string(key) + "=' line", index + 1);
    const std::string& line = lines[index];
    const std::string prefix = std::string(key) + "=";
    if (line.rfind(prefix, 0) != 0)
        throw ParseError("expected '" + std::string(key) + "=...' line", index + 1);
    return line.substr(prefix.size());
}

// key=value hyperparameter lines end where the matrix data begins.
std::map<std::string, std::string> read_keyed_block(const std::vector<std::string>& lines,
                                                    std::size_t& index) {
    std::map<std::string, std::string> kv;
    while (index < lines.size()) {
        const std::string& line = lines[index];
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) break;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
        ++index;
    }
    return kv;
}

double keyed_double(const std::map<std::string, std::string>& kv, const std::string& key,
                    std::size_t base_line) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing hyperparameter '" + key + "'", base_line);
    const auto value = parse_double(it->second);
    if (!value) throw ParseError("bad value for '" + key + "'", base_line);
    return *value;
}

std::uint64_t keyed_uint(const std::map<std::string, std::string>& kv, const std::string& key,
                         std::size_t base_line) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing hyperparameter '" + key + "'", base_line);
    const auto value = parse_uint(it->second);
    if (!value) throw ParseError("bad value for '" + key + "'", base_line);
    return *value;
}

DenseMatrix read_matrix_rows(const std::vector<std::string>& lines, std::size_t& index,
                             std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r, ++index) {
        if (index >= lines.size())
            throw ParseError("dimension error: expected " + std::to_string(rows) +
                                 " matrix rows",
                             index + 1);
        const auto fields = split(lines[index], '\t');
        if (fields.size() != cols)
            throw ParseError("dimension error: expected " + std::to_string(cols) +
                                 " columns, found " + std::to_string(fields.size()),
                             index + 1);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto value = parse_double(fields[c]);
            if (!value)
                throw ParseError("bad matrix value '" + std::string(fields[c]) + "'", index + 1);
            m(r, c) = *value;
        }
    }
    return m;
}

void expect_end(const std::vector<std::string>& lines, std::size_t index) {
    for (; index < lines.size(); ++index)
        if (!lines[index].empty())
            throw ParseError("unexpected trailing content", index + 1);
}

} // namespace

void save_model(const std::filesystem::path& path, const FeatModel& model) {
    if (model.kind != ModelKind::feat_nnls && model.kind != ModelKind::feat_reg)
        throw ValidationError("save_model: feature model kind must be feat-nnls or feat-reg");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "kind=" << to_string(model.kind) << "\n";
    out << "dims=" << model.x.rows << "x" << model.x.cols << "\n";
    if (model.kind == ModelKind::feat_nnls) out << "alpha=" << format_double(model.alpha) << "\n";
    out << "lambda=" << format_double(model.lambda) << "\n";
    write_matrix_rows(out, model.x);
    if (!out) throw IoError("failed writing " + path.string());
}

void save_model(const std::filesystem::path& path, const LatentModel& model) {
    if (model.kind != ModelKind::ifts && model.kind != ModelKind::als_neg)
        throw ValidationError("save_model: latent model kind must be ifts or als-neg");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "kind=" << to_string(model.kind) << "\n";
    out << "u_dims=" << model.u.rows << "x" << model.u.cols << "\n";
    out << "v_dims=" << model.v.rows << "x" << model.v.cols << "\n";
    out << "alpha=" << format_double(model.hyperparams.alpha) << "\n";
    out << "lambda=" << format_double(model.hyperparams.lambda) << "\n";
    out << "iterations=" << model.hyperparams.iterations << "\n";
    out << "seed=" << model.hyperparams.seed << "\n";
    if (model.kind == ModelKind::als_neg)
        out << "beta_neg=" << format_double(model.hyperparams.beta_neg) << "\n";
    write_matrix_rows(out, model.u);
    write_matrix_rows(out, model.v);
    if (!out) throw IoError("failed writing " + path.string());
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
    std::visit([&](const auto& m) { save_model(path, m); }, model);
}

AnyModel load_model(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty model file", 1);
    const ModelKind kind = parse_model_kind(expect_keyed_line(lines, 0, "kind"));

    if (kind == ModelKind::feat_nnls || kind == ModelKind::feat_reg) {
        const auto [rows, cols] = parse_dims(expect_keyed_line(lines, 1, "dims"), 2);
        std::size_t index = 2;
        const auto kv = read_keyed_block(lines, index);
        FeatModel model;
        model.kind = kind;
        model.alpha = kind == ModelKind::feat_nnls ? keyed_double(kv, "alpha", index) : 0.0;
        model.lambda = keyed_double(kv, "lambda", index);
        model.feature_count = cols;
        model.x = read_matrix_rows(lines, index, rows, cols);
        expect_end(lines, index);
        return model;
    }

    const auto [u_rows, u_cols] = parse_dims(expect_keyed_line(lines, 1, "u_dims"), 2);
    const auto [v_rows, v_cols] = parse_dims(expect_keyed_line(lines, 2, "v_dims"), 3);
    if (u_cols != v_cols) throw ParseError("u_dims and v_dims disagree on factor count", 3);
    std::size_t index = 3;
    const auto kv = read_keyed_block(lines, index);
    LatentModel model;
    model.kind = kind;
    model.n_factors = u_cols;
    model.hyperparams.alpha = keyed_double(kv, "alpha", index);
    model.hyperparams.lambda = keyed_double(kv, "lambda", index);
    model.hyperparams.iterations = static_cast<std::size_t>(keyed_uint(kv, "iterations", index));
    model.hyperparams.seed = keyed_uint(kv, "seed", index);
    model.hyperparams.beta_neg =
        kind == ModelKind::als_neg ? keyed_double(kv, "beta_neg", index) : 0.0;
    model.u = read_matrix_rows(lines, index, u_rows, u_cols);
    model.v = read_matrix_rows(lines, index, v_rows, v_cols);
    expect_end(lines, index);
    return model;
}

namespace {

// Distinct indices drawn uniformly via a partial Fisher-Yates pass, returned
// sorted ascending.
std::vector<std::uint32_t> sample_distinct(SplitMix64& rng, std::size_t population,
                                           std::size_t k) {
    std::vector<std::uint32_t> scratch(population);
    for (std::size_t i = 0; i < population; ++i) scratch[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(population - i));
        std::swap(scratch[i], scratch[j]);
    }
    std::vector<std::uint32_t> chosen(scratch.begin(), scratch.begin() + k);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

// Poisson by inversion: smallest k with u < P(X <= k). Exact determinism
// from the integer stream, one uniform per draw.
Count poisson_inverse(SplitMix64& rng, double rate) {
    const double u = rng.next_double();
    double p = std::exp(-rate);
    double cumulative = p;
    Count k = 0;
    while (u >= cumulative) {
        ++k;
        p *= rate / static_cast<double>(k);
        cumulative += p;
    }
    return k;
}

} // namespace

SyntheticTruth generate_synthetic(const SyntheticParams& params,
                                  const std::filesystem::path& observations_out,
                                  const std::filesystem::path& features_out,
                                  const std::filesystem::path& truth_out) {
    if (params.n_workers == 0 || params.n_tasks == 0 || params.n_features == 0)
        throw ValidationError("synthetic dimensions must be positive");
    if (params.features_per_task > params.n_features)
        throw ValidationError("features_per_task cannot exceed n_features");
    if (params.active_features_per_worker > params.n_features)
        throw ValidationError("active_features_per_worker cannot exceed n_features");
    if (!(params.intensity >= 0.0)) throw ValidationError("intensity must be non-negative");
    // rate = intensity * (x_true . y) <= intensity * 1.5 * features_per_task
    if (params.intensity * 1.5 * static_cast<double>(params.features_per_task) > 700.0)
        throw ValidationError("intensity too large for exact Poisson inversion");

    SplitMix64 rng(params.seed);

    std::vector<std::vector<FeatureIndex>> task_rows(params.n_tasks);
    for (std::size_t t = 0; t < params.n_tasks; ++t)
        task_rows[t] = sample_distinct(rng, params.n_features, params.features_per_task);

    SyntheticTruth truth;
    truth.params = params;
    truth.x_true = DenseMatrix(params.n_workers, params.n_features);
    for (std::size_t w = 0; w < params.n_workers; ++w) {
        const auto active =
            sample_distinct(rng, params.n_features, params.active_features_per_worker);
        for (const FeatureIndex l : active)
            truth.x_true(w, l) = 0.5 + rng.next_double(); // uniform in [0.5, 1.5)
    }

    std::ofstream obs(observations_out, std::ios::binary);
    if (!obs) throw IoError("cannot open " + observations_out.string() + " for writing");
    obs << "worker_id,task_id,count\n";
    for (std::size_t w = 0; w < params.n_workers; ++w) {
        for (std::size_t t = 0; t < params.n_tasks; ++t) {
            double signal = 0.0;
            for (const FeatureIndex l : task_rows[t]) signal += truth.x_true(w, l);
            const Count count = poisson_inverse(rng, params.intensity * signal);
            if (count > 0) obs << "w" << w << ",t" << t << "," << count << "\n";
        }
    }
    if (!obs) throw IoError("failed writing " + observations_out.string());

    std::ofstream feat(features_out, std::ios::binary);
    if (!feat) throw IoError("cannot open " + features_out.string() + " for writing");
    feat << "task_id,feature_id\n";
    for (std::size_t t = 0; t < params.n_tasks; ++t)
        for (const FeatureIndex l : task_rows[t]) feat << "t" << t << ",f" << l << "\n";
    if (!feat) throw IoError("failed writing " + features_out.string());

    std::ofstream tr(truth_out, std::ios::binary);
    if (!tr) throw IoError("cannot open " + truth_out.string() + " for writing");
    tr << "worker_id,feature_id,weight\n";
    for (std::size_t w = 0; w < params.n_workers; ++w)
        for (std::size_t l = 0; l < params.n_features; ++l)
            if (truth.x_true(w, l) != 0.0)
                tr << "w" << w << ",f" << l << "," << format_double(truth.x_true(w, l)) << "\n";
    if (!tr) throw IoError("failed writing " + truth_out.string());

    return truth;
}

} // namespace taskrec
