#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "taskrec/baselines.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/io.hpp"

namespace {

using namespace taskrec;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct SplitArgs {
    std::string observations;
    double ratio = 0.9;
    std::uint64_t seed = 42;
    std::string train_out;
    std::string test_out;
};

int run_split(const SplitArgs& args) {
    const LoadedObservations loaded = load_observations(args.observations);
    const HoldoutSplit split = split_holdout(loaded.matrix, args.ratio, args.seed);
    write_observations(args.train_out, split.train, loaded.ids);
    write_observations(args.test_out, split.test, loaded.ids);
    std::cout << "split entries=" << loaded.matrix.nnz() << " train=" << split.train.nnz()
              << " test=" << split.test.nnz() << " seed=" << args.seed << "\n";
    return 0;
}

struct TrainArgs {
    std::string model;
    std::string observations;
    std::string features;
    std::string out;
    double alpha = 50.0;
    double lambda = 0.01;
    std::size_t factors = 20;
    std::size_t iters = 15;
    double beta_neg = 1.0;
    std::uint64_t seed = 42;
    int threads = 0;
};

int run_train(const TrainArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    IdMaps ids;
    InteractionMatrix c = load_observations(args.observations, ids);
    std::optional<TaskFeatureMatrix> y;
    if (!args.features.empty()) {
        LoadedFeatures loaded = load_features(args.features, ids);
        if (loaded.tasks_without_features > 0)
            std::cerr << "warning: " << loaded.tasks_without_features
                      << " task(s) have no features\n";
        y = std::move(loaded.y);
        c = c.resized(ids.workers.size(), ids.tasks.size());
    }

    ModelConfig config;
    config.kind = parse_model_kind(args.model);
    config.alpha = args.alpha;
    config.lambda = args.lambda;
    config.beta_neg = args.beta_neg;
    config.n_factors = args.factors;
    config.iterations = args.iters;

    const AnyModel model = train_model(c, y ? &*y : nullptr, config, args.seed, args.threads);
    save_model(args.out, model);

    if (const auto* feat = std::get_if<FeatModel>(&model)) {
        std::printf("trained model=%s dims=%zux%zu wall_s=%.3f\n", to_string(feat->kind).c_str(),
                    feat->x.rows, feat->x.cols, seconds_since(start));
    } else {
        const auto& latent = std::get<LatentModel>(model);
        std::printf("trained model=%s u_dims=%zux%zu v_dims=%zux%zu sweeps=%zu "
                    "final_objective=%s wall_s=%.3f\n",
                    to_string(latent.kind).c_str(), latent.u.rows, latent.u.cols, latent.v.rows,
                    latent.v.cols, latent.objective_trace.size(),
                    latent.objective_trace.empty()
                        ? "n/a"
                        : format_double(latent.objective_trace.back()).c_str(),
                    seconds_since(start));
    }
    return 0;
}

struct EvalArgs {
    std::string model_file;
    std::string train;
    std::string test;
    std::string metric = "both";
    std::string out;
    std::string features;
    std::string pr_out;
    int threads = 0;
};

int run_eval(const EvalArgs& args) {
    const AnyModel model = load_model(args.model_file);
    IdMaps ids;
    InteractionMatrix train = load_observations(args.train, ids);
    InteractionMatrix test = load_observations(args.test, ids);
    std::optional<TaskFeatureMatrix> y;
    if (!args.features.empty()) {
        LoadedFeatures loaded = load_features(args.features, ids);
        y = std::move(loaded.y);
    }
    const std::size_t n_workers = ids.workers.size();
    const std::size_t n_tasks = ids.tasks.size();
    train = train.resized(n_workers, n_tasks);
    test = test.resized(n_workers, n_tasks);

    EvalReport report;
    if (const auto* feat = std::get_if<FeatModel>(&model)) {
        if (!y) throw ValidationError("feature models require --features");
        if (feat->x.rows != n_workers)
            throw ValidationError("model/dataset dimension mismatch: model has " +
                                  std::to_string(feat->x.rows) + " workers, data has " +
                                  std::to_string(n_workers));
        if (feat->x.cols != y->n_features())
            throw ValidationError("model/dataset dimension mismatch: model has " +
                                  std::to_string(feat->x.cols) + " features, data has " +
                                  std::to_string(y->n_features()));
        report.model = to_string(feat->kind);
        if (feat->kind == ModelKind::feat_nnls) report.hyperparams["alpha"] = feat->alpha;
        report.hyperparams["lambda"] = feat->lambda;
    } else {
        const auto& latent = std::get<LatentModel>(model);
        if (latent.u.rows != n_workers || latent.v.rows != n_tasks)
            throw ValidationError(
                "model/dataset dimension mismatch: model is " + std::to_string(latent.u.rows) +
                "x" + std::to_string(latent.v.rows) + " workers x tasks, data is " +
                std::to_string(n_workers) + "x" + std::to_string(n_tasks));
        report.model = to_string(latent.kind);
        report.hyperparams["alpha"] = latent.hyperparams.alpha;
        report.hyperparams["lambda"] = latent.hyperparams.lambda;
        report.hyperparams["factors"] = static_cast<double>(latent.n_factors);
        report.hyperparams["iterations"] = static_cast<double>(latent.hyperparams.iterations);
        if (latent.kind == ModelKind::als_neg)
            report.hyperparams["beta_neg"] = latent.hyperparams.beta_neg;
        report.seed = latent.hyperparams.seed;
    }

    const DenseMatrix scores = predict_scores(model, y ? &*y : nullptr);
    HoldoutSplit split;
    split.train = std::move(train);
    split.test = std::move(test);
    split.ratio = static_cast<double>(split.train.nnz()) /
                  static_cast<double>(split.train.nnz() + split.test.nnz());
    report.ratio = split.ratio;

    if (args.metric != "pr") report.mpr = mpr(scores, split);
    if (args.metric != "mpr") report.pr_points = pr_curve(scores, split);

    write_report_file(args.out, report);
    if (!report.pr_points.empty()) {
        const std::string pr_path = args.pr_out.empty() ? args.out + ".pr.csv" : args.pr_out;
        write_pr_csv_file(pr_path, report.pr_points);
    }
    std::cout << "eval model=" << report.model
              << (report.mpr ? " mpr=" + format_double(*report.mpr) : "")
              << " report=" << args.out << "\n";
    return 0;
}

struct RecommendArgs {
    std::string model_file;
    std::string observations;
    std::string features;
    std::string worker;
    std::size_t top_k = 10;
};

int run_recommend(const RecommendArgs& args) {
    const AnyModel model = load_model(args.model_file);
    IdMaps ids;
    InteractionMatrix c = load_observations(args.observations, ids);
    std::optional<TaskFeatureMatrix> y;
    if (!args.features.empty()) {
        LoadedFeatures loaded = load_features(args.features, ids);
        y = std::move(loaded.y);
        c = c.resized(ids.workers.size(), ids.tasks.size());
    }
    const auto worker = ids.workers.find(args.worker);
    if (!worker) throw ValidationError("unknown worker id '" + args.worker + "'");

    const std::size_t n_tasks = ids.tasks.size();
    std::vector<double> scores(n_tasks, 0.0);
    if (const auto* feat = std::get_if<FeatModel>(&model)) {
        if (!y) throw ValidationError("feature models require --features");
        if (feat->x.rows <= *worker || feat->x.cols != y->n_features())
            throw ValidationError("model/dataset dimension mismatch");
        const auto xw = feat->x.row(*worker);
        for (TaskIndex i = 0; i < n_tasks; ++i) {
            double s = 0.0;
            for (FeatureIndex l : y->task_features(i)) s += xw[l];
            scores[i] = s;
        }
    } else {
        const auto& latent = std::get<LatentModel>(model);
        if (latent.u.rows <= *worker || latent.v.rows != n_tasks)
            throw ValidationError("model/dataset dimension mismatch");
        const auto uw = latent.u.row(*worker);
        for (TaskIndex i = 0; i < n_tasks; ++i) scores[i] = dot(uw, latent.v.row(i));
    }

    std::vector<TaskIndex> candidates;
    const auto positives = c.worker_entries(*worker);
    std::size_t cursor = 0;
    for (TaskIndex i = 0; i < n_tasks; ++i) {
        if (cursor < positives.size() && positives[cursor].first == i) {
            ++cursor;
            continue;
        }
        candidates.push_back(i);
    }
    const std::vector<TaskIndex> order = rank_candidates(scores, candidates);
    const std::size_t k = std::min(args.top_k, order.size());
    for (std::size_t r = 0; r < k; ++r)
        std::cout << (r + 1) << "," << ids.tasks.name(order[r]) << ","
                  << format_double(scores[order[r]]) << "\n";
    return 0;
}

struct SynthArgs {
    SyntheticParams params;
    std::string out_obs;
    std::string out_feat;
    std::string out_truth;
};

int run_synth(const SynthArgs& args) {
    generate_synthetic(args.params, args.out_obs, args.out_feat, args.out_truth);
    std::cout << "synthesized workers=" << args.params.n_workers
              << " tasks=" << args.params.n_tasks << " features=" << args.params.n_features
              << " seed=" << args.params.seed << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"taskrec: task recommendation from implicit completion counts.\n"
                 "All randomness flows from --seed: latent factor matrices are initialized\n"
                 "from --seed (U) and --seed+1 (V); holdout shuffling and synthetic data\n"
                 "use --seed directly. Reruns with identical flags produce identical files."};
    app.require_subcommand(1);

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "Split observations into train/test holdout");
    split_cmd->add_option("--observations", split_args.observations, "Observations csv")
        ->required();
    split_cmd->add_option("--ratio", split_args.ratio, "Train fraction in (0,1)")
        ->capture_default_str();
    split_cmd->add_option("--seed", split_args.seed, "Shuffle seed")->capture_default_str();
    split_cmd->add_option("--train-out", split_args.train_out, "Training split output")
        ->required();
    split_cmd->add_option("--test-out", split_args.test_out, "Test split output")->required();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a recommendation model");
    train_cmd->add_option("--model", train_args.model, "feat-nnls | ifts | als-neg | feat-reg")
        ->required()
        ->check(CLI::IsMember({"feat-nnls", "ifts", "als-neg", "feat-reg"}));
    train_cmd->add_option("--observations", train_args.observations, "Observations csv")
        ->required();
    train_cmd->add_option("--features", train_args.features,
                          "Task features csv (required for feat-nnls, ifts, feat-reg)");
    train_cmd->add_option("--out", train_args.out, "Model file output")->required();
    train_cmd->add_option("--alpha", train_args.alpha, "Confidence weight per completion")
        ->capture_default_str();
    train_cmd->add_option("--lambda", train_args.lambda, "Ridge regularization")
        ->capture_default_str();
    train_cmd->add_option("--factors", train_args.factors, "Latent factors (ifts, als-neg)")
        ->capture_default_str();
    train_cmd->add_option("--iters", train_args.iters, "ALS sweeps (ifts, als-neg)")
        ->capture_default_str();
    train_cmd->add_option("--beta-neg", train_args.beta_neg,
                          "Popularity weight of negative signals (als-neg)")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_args.seed, "Seed for factor initialization")
        ->capture_default_str();
    train_cmd->add_option("--threads", train_args.threads, "Worker threads (0 = all)")
        ->capture_default_str();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a holdout split");
    eval_cmd->add_option("--model-file", eval_args.model_file, "Trained model file")->required();
    eval_cmd->add_option("--train", eval_args.train, "Training observations csv")->required();
    eval_cmd->add_option("--test", eval_args.test, "Held-out observations csv")->required();
    eval_cmd->add_option("--metric", eval_args.metric, "mpr | pr | both")
        ->capture_default_str()
        ->check(CLI::IsMember({"mpr", "pr", "both"}));
    eval_cmd->add_option("--out", eval_args.out, "Report file output")->required();
    eval_cmd->add_option("--features", eval_args.features, "Task features csv");
    eval_cmd->add_option("--pr-out", eval_args.pr_out,
                         "PR curve csv output (default: <out>.pr.csv)");
    eval_cmd->add_option("--threads", eval_args.threads, "Worker threads (0 = all)")
        ->capture_default_str();

    RecommendArgs rec_args;
    auto* rec_cmd = app.add_subcommand("recommend", "Print top-k tasks for a worker");
    rec_cmd->add_option("--model-file", rec_args.model_file, "Trained model file")->required();
    rec_cmd->add_option("--observations", rec_args.observations, "Observations csv")->required();
    rec_cmd->add_option("--features", rec_args.features, "Task features csv");
    rec_cmd->add_option("--worker", rec_args.worker, "Worker id to recommend for")->required();
    rec_cmd->add_option("--top-k", rec_args.top_k, "Number of recommendations")
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted synthetic dataset");
    synth_cmd->add_option("--workers", synth_args.params.n_workers, "Worker count")
        ->capture_default_str();
    synth_cmd->add_option("--tasks", synth_args.params.n_tasks, "Task count")
        ->capture_default_str();
    synth_cmd->add_option("--features", synth_args.params.n_features, "Feature count")
        ->capture_default_str();
    synth_cmd
        ->add_option("--features-per-task", synth_args.params.features_per_task,
                     "Features present per task")
        ->capture_default_str();
    synth_cmd
        ->add_option("--active-features", synth_args.params.active_features_per_worker,
                     "Active features per worker")
        ->capture_default_str();
    synth_cmd->add_option("--intensity", synth_args.params.intensity, "Poisson rate scale")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.params.seed, "Generator seed")
        ->capture_default_str();
    synth_cmd->add_option("--out-obs", synth_args.out_obs, "Observations output")->required();
    synth_cmd->add_option("--out-feat", synth_args.out_feat, "Features output")->required();
    synth_cmd->add_option("--out-truth", synth_args.out_truth, "Planted truth output")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (split_cmd->parsed()) return run_split(split_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (rec_cmd->parsed()) return run_recommend(rec_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
    } catch (const taskrec::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const taskrec::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
