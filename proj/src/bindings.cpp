#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "taskrec/baselines.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/io.hpp"

namespace py = pybind11;
using namespace taskrec;

namespace {

py::array_t<double> to_numpy(const DenseMatrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.values.begin(), m.values.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

DenseMatrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ValidationError("expected a 2-d array");
    DenseMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.values.begin());
    return m;
}

std::vector<double> vector_from_numpy(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw ValidationError("expected a 1-d array");
    return std::vector<double>(a.data(), a.data() + a.size());
}

} // namespace

PYBIND11_MODULE(_taskrec, m) {
    m.doc() = "Task recommendation from implicit completion counts";

    py::class_<InteractionMatrix>(m, "InteractionMatrix")
        .def(py::init([](std::size_t n_workers, std::size_t n_tasks,
                         const std::vector<std::tuple<WorkerIndex, TaskIndex, Count>>& entries) {
                 std::vector<InteractionEntry> converted;
                 converted.reserve(entries.size());
                 for (const auto& [w, t, c] : entries) converted.push_back({w, t, c});
                 return InteractionMatrix(n_workers, n_tasks, std::move(converted));
             }),
             py::arg("n_workers"), py::arg("n_tasks"), py::arg("entries"))
        .def_property_readonly("n_workers", &InteractionMatrix::n_workers)
        .def_property_readonly("n_tasks", &InteractionMatrix::n_tasks)
        .def_property_readonly("nnz", &InteractionMatrix::nnz)
        .def("count", &InteractionMatrix::count, py::arg("worker"), py::arg("task"))
        .def("entries", [](const InteractionMatrix& c) {
            std::vector<std::tuple<WorkerIndex, TaskIndex, Count>> out;
            for (const auto& e : c.entries()) out.emplace_back(e.worker, e.task, e.count);
            return out;
        });

    py::class_<PreferenceMatrix>(m, "PreferenceMatrix")
        .def_property_readonly("n_workers", &PreferenceMatrix::n_workers)
        .def_property_readonly("n_tasks", &PreferenceMatrix::n_tasks)
        .def_property_readonly("nnz", &PreferenceMatrix::nnz)
        .def("value", &PreferenceMatrix::value, py::arg("worker"), py::arg("task"));

    py::class_<ConfidenceWeights>(m, "ConfidenceWeights")
        .def_property_readonly("alpha", &ConfidenceWeights::alpha)
        .def("at", &ConfidenceWeights::at, py::arg("worker"), py::arg("task"));

    py::class_<TaskFeatureMatrix>(m, "TaskFeatureMatrix")
        .def(py::init<std::size_t, std::size_t, std::vector<std::vector<FeatureIndex>>>(),
             py::arg("n_tasks"), py::arg("n_features"), py::arg("rows"))
        .def_property_readonly("n_tasks", &TaskFeatureMatrix::n_tasks)
        .def_property_readonly("n_features", &TaskFeatureMatrix::n_features)
        .def("task_features", [](const TaskFeatureMatrix& y, TaskIndex i) {
            const auto feats = y.task_features(i);
            return std::vector<FeatureIndex>(feats.begin(), feats.end());
        });

    py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
        .def_property_readonly("n_tasks", &SimilarityMatrix::n_tasks)
        .def("at", &SimilarityMatrix::at, py::arg("i"), py::arg("j"))
        .def("to_numpy", [](const SimilarityMatrix& s) {
            py::array_t<double> out({s.n_tasks(), s.n_tasks()});
            auto* data = out.mutable_data();
            for (TaskIndex i = 0; i < s.n_tasks(); ++i) {
                const auto row = s.row(i);
                std::copy(row.begin(), row.end(), data + i * s.n_tasks());
            }
            return out;
        });

    m.def("build_preference", &build_preference, py::arg("c"));
    m.def("build_confidence", &build_confidence, py::arg("c"), py::arg("alpha"),
          py::keep_alive<0, 1>());
    m.def("task_similarity_matrix", &task_similarity_matrix, py::arg("y"));

    py::class_<NnlsResult>(m, "NnlsResult")
        .def_property_readonly("x",
                               [](const NnlsResult& r) {
                                   return to_numpy(r.x);
                               })
        .def_readonly("residual_norm", &NnlsResult::residual_norm)
        .def_readonly("iterations", &NnlsResult::iterations)
        .def_readonly("active_set_size", &NnlsResult::active_set_size);

    m.def(
        "spd_solve",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            const auto x = spd_solve(from_numpy(a), vector_from_numpy(b));
            return to_numpy(x);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "nnls",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           std::optional<double> tol, std::optional<std::size_t> max_iter) {
            const DenseMatrix am = from_numpy(a);
            const std::vector<double> bv = vector_from_numpy(b);
            return nnls(am, bv, tol.value_or(default_nnls_tolerance(bv)),
                        max_iter.value_or(default_nnls_max_iter(am.cols)));
        },
        py::arg("a"), py::arg("b"), py::arg("tol") = std::nullopt,
        py::arg("max_iter") = std::nullopt);

    py::class_<FeatModel>(m, "FeatModel")
        .def_property_readonly("kind", [](const FeatModel& f) { return to_string(f.kind); })
        .def_property_readonly("x", [](const FeatModel& f) { return to_numpy(f.x); })
        .def_readonly("alpha", &FeatModel::alpha)
        .def_property_readonly("lambda_", [](const FeatModel& f) { return f.lambda; })
        .def_readonly("feature_count", &FeatModel::feature_count);

    py::class_<LatentModel>(m, "LatentModel")
        .def_property_readonly("kind", [](const LatentModel& l) { return to_string(l.kind); })
        .def_property_readonly("u", [](const LatentModel& l) { return to_numpy(l.u); })
        .def_property_readonly("v", [](const LatentModel& l) { return to_numpy(l.v); })
        .def_readonly("n_factors", &LatentModel::n_factors)
        .def_property_readonly("alpha", [](const LatentModel& l) { return l.hyperparams.alpha; })
        .def_property_readonly("lambda_",
                               [](const LatentModel& l) { return l.hyperparams.lambda; })
        .def_property_readonly("iterations",
                               [](const LatentModel& l) { return l.hyperparams.iterations; })
        .def_property_readonly("seed", [](const LatentModel& l) { return l.hyperparams.seed; })
        .def_property_readonly("beta_neg",
                               [](const LatentModel& l) { return l.hyperparams.beta_neg; })
        .def_readonly("objective_trace", &LatentModel::objective_trace);

    m.def("init_factors",
          [](std::size_t n_rows, std::size_t n_factors, std::uint64_t seed) {
              return to_numpy(init_factors(n_rows, n_factors, seed));
          },
          py::arg("n_rows"), py::arg("n_factors"), py::arg("seed"));

    m.def(
        "fit_feat_nnls",
        [](const InteractionMatrix& c, const TaskFeatureMatrix& y, double alpha, double lambda,
           int threads) { return fit_feat_nnls(c, y, alpha, lambda, {threads}); },
        py::arg("c"), py::arg("y"), py::arg("alpha") = 50.0, py::arg("lambda_") = 0.01,
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
    m.def(
        "fit_ifts",
        [](const InteractionMatrix& c, const TaskFeatureMatrix& y, std::size_t n_factors,
           double alpha, double lambda, std::size_t iterations, std::uint64_t seed, int threads,
           bool use_similarity) {
            IftsOptions options;
            options.threads = threads;
            options.use_similarity = use_similarity;
            return fit_ifts(c, y, n_factors, alpha, lambda, iterations, seed, options);
        },
        py::arg("c"), py::arg("y"), py::arg("n_factors") = 20, py::arg("alpha") = 50.0,
        py::arg("lambda_") = 0.01, py::arg("iterations") = 15, py::arg("seed") = 42,
        py::arg("threads") = 0, py::arg("use_similarity") = true,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "fit_implicit_als_neg",
        [](const InteractionMatrix& c, double alpha, double beta_neg, double lambda,
           std::size_t n_factors, std::size_t iterations, std::uint64_t seed, int threads) {
            BaselineConfig config;
            config.kind = ModelKind::als_neg;
            config.alpha = alpha;
            config.beta_neg = beta_neg;
            config.lambda = lambda;
            config.n_factors = n_factors;
            config.iterations = iterations;
            config.seed = seed;
            return fit_implicit_als_neg(c, config, {threads});
        },
        py::arg("c"), py::arg("alpha") = 50.0, py::arg("beta_neg") = 1.0,
        py::arg("lambda_") = 0.01, py::arg("n_factors") = 20, py::arg("iterations") = 15,
        py::arg("seed") = 42, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "fit_feature_reg",
        [](const InteractionMatrix& c, const TaskFeatureMatrix& y, double lambda, int threads) {
            return fit_feature_reg(c, y, lambda, {threads});
        },
        py::arg("c"), py::arg("y"), py::arg("lambda_") = 0.01, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def("predict_feat",
          [](const FeatModel& model, const TaskFeatureMatrix& y) {
              return to_numpy(predict_feat(model, y));
          },
          py::arg("model"), py::arg("y"));
    m.def("predict_latent",
          [](const LatentModel& model) { return to_numpy(predict_latent(model)); },
          py::arg("model"));

    py::class_<HoldoutSplit>(m, "HoldoutSplit")
        .def(py::init([](InteractionMatrix train, InteractionMatrix test, double ratio,
                         std::uint64_t seed) {
                 HoldoutSplit split;
                 split.train = std::move(train);
                 split.test = std::move(test);
                 split.ratio = ratio;
                 split.seed = seed;
                 return split;
             }),
             py::arg("train"), py::arg("test"), py::arg("ratio"), py::arg("seed"))
        .def_readonly("train", &HoldoutSplit::train)
        .def_readonly("test", &HoldoutSplit::test)
        .def_readonly("ratio", &HoldoutSplit::ratio)
        .def_readonly("seed", &HoldoutSplit::seed);

    m.def("split_holdout", &split_holdout, py::arg("c"), py::arg("ratio"), py::arg("seed"));

    m.def("percentile_ranks",
          [](const std::vector<double>& scores, const std::vector<TaskIndex>& candidates) {
              return percentile_ranks(scores, candidates);
          },
          py::arg("scores"), py::arg("candidates"));
    m.def(
        "mpr",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
           const HoldoutSplit& split) { return mpr(from_numpy(scores), split); },
        py::arg("scores"), py::arg("split"));
    m.def(
        "pr_curve",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
           const HoldoutSplit& split) {
            std::vector<std::tuple<int, double, double>> out;
            for (const auto& p : pr_curve(from_numpy(scores), split))
                out.emplace_back(p.t_percent, p.precision, p.recall);
            return out;
        },
        py::arg("scores"), py::arg("split"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("model", &EvalReport::model)
        .def_readonly("mpr", &EvalReport::mpr)
        .def_property_readonly("pr_points",
                               [](const EvalReport& r) {
                                   std::vector<std::tuple<int, double, double>> out;
                                   for (const auto& p : r.pr_points)
                                       out.emplace_back(p.t_percent, p.precision, p.recall);
                                   return out;
                               })
        .def_readonly("hyperparams", &EvalReport::hyperparams)
        .def_readonly("ratio", &EvalReport::ratio)
        .def_readonly("seed", &EvalReport::seed)
        .def_property_readonly("runs", [](const EvalReport& r) {
            std::vector<std::pair<std::uint64_t, std::optional<double>>> out;
            for (const auto& run : r.runs) out.emplace_back(run.seed, run.mpr);
            return out;
        });

    m.def(
        "run_protocol",
        [](const InteractionMatrix& c, const TaskFeatureMatrix* y, const std::string& kind,
           double ratio, std::uint64_t base_seed, double alpha, double lambda, double beta_neg,
           std::size_t n_factors, std::size_t iterations, const std::string& metric,
           std::size_t n_runs, int threads) {
            ModelConfig config;
            config.kind = parse_model_kind(kind);
            config.alpha = alpha;
            config.lambda = lambda;
            config.beta_neg = beta_neg;
            config.n_factors = n_factors;
            config.iterations = iterations;
            ProtocolOptions options;
            options.n_runs = n_runs;
            options.threads = threads;
            options.metric = metric == "mpr"  ? Metric::mpr
                             : metric == "pr" ? Metric::pr
                                              : Metric::both;
            return run_protocol(c, y, config, ratio, base_seed, options);
        },
        py::arg("c"), py::arg("y") = nullptr, py::arg("kind") = "feat-nnls",
        py::arg("ratio") = 0.9, py::arg("seed") = 42, py::arg("alpha") = 50.0,
        py::arg("lambda_") = 0.01, py::arg("beta_neg") = 1.0, py::arg("n_factors") = 20,
        py::arg("iterations") = 15, py::arg("metric") = "both", py::arg("n_runs") = 3,
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

    py::class_<IdMap>(m, "IdMap")
        .def("find", [](const IdMap& map, const std::string& id) { return map.find(id); })
        .def("name", &IdMap::name, py::arg("index"))
        .def("names", &IdMap::names)
        .def("__len__", &IdMap::size);

    py::class_<IdMaps>(m, "IdMaps")
        .def(py::init<>())
        .def_readonly("workers", &IdMaps::workers)
        .def_readonly("tasks", &IdMaps::tasks)
        .def_readonly("features", &IdMaps::features);

    m.def("load_observations", [](const std::string& path) {
        LoadedObservations loaded = load_observations(std::filesystem::path(path));
        return py::make_tuple(loaded.matrix, loaded.ids);
    });
    m.def("load_features", [](const std::string& path, IdMaps& ids) {
        LoadedFeatures loaded = load_features(std::filesystem::path(path), ids);
        return py::make_tuple(loaded.y, loaded.tasks_without_features);
    });
    m.def("save_model",
          [](const std::string& path, const FeatModel& model) { save_model(path, model); });
    m.def("save_model",
          [](const std::string& path, const LatentModel& model) { save_model(path, model); });
    m.def("load_model", [](const std::string& path) -> py::object {
        const AnyModel model = load_model(path);
        if (const auto* feat = std::get_if<FeatModel>(&model)) return py::cast(*feat);
        return py::cast(std::get<LatentModel>(model));
    });

    py::class_<SyntheticTruth>(m, "SyntheticTruth")
        .def_property_readonly("x_true",
                               [](const SyntheticTruth& t) { return to_numpy(t.x_true); })
        .def_property_readonly("seed",
                               [](const SyntheticTruth& t) { return t.params.seed; });

    m.def(
        "generate_synthetic",
        [](const std::string& out_obs, const std::string& out_feat, const std::string& out_truth,
           std::size_t n_workers, std::size_t n_tasks, std::size_t n_features,
           std::size_t features_per_task, std::size_t active_features_per_worker,
           double intensity, std::uint64_t seed) {
            SyntheticParams params{n_workers, n_tasks,
                                   n_features, features_per_task,
                                   active_features_per_worker, intensity,
                                   seed};
            return generate_synthetic(params, out_obs, out_feat, out_truth);
        },
        py::arg("out_obs"), py::arg("out_feat"), py::arg("out_truth"),
        py::arg("n_workers") = 200, py::arg("n_tasks") = 150, py::arg("n_features") = 30,
        py::arg("features_per_task") = 3, py::arg("active_features_per_worker") = 5,
        py::arg("intensity") = 2.0, py::arg("seed") = 42);
}
