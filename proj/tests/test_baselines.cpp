#include <doctest.h>

#include "taskrec/baselines.hpp"
#include "test_util.hpp"

using namespace taskrec;
using namespace testutil;

TEST_SUITE("baselines") {

TEST_CASE("task popularity sums completions per task") {
    const InteractionMatrix c(3, 2, {{0, 0, 4}, {1, 0, 6}, {2, 1, 1}});
    const auto pop = task_popularity(c);
    CHECK(pop[0] == 10.0);
    CHECK(pop[1] == 1.0);
}

TEST_CASE("als-neg negative weights follow the popularity rule") {
    // pop = 10 with beta 1 gives q = 11 on a zero entry; pop = 0 gives q = 1.
    // Verified through the stationarity of the returned factors.
    const InteractionMatrix c(2, 2, {{0, 0, 10}});
    BaselineConfig config;
    config.alpha = 50.0;
    config.beta_neg = 1.0;
    config.lambda = 0.5;
    config.n_factors = 1;
    config.iterations = 1;
    config.seed = 3;
    const LatentModel model = fit_implicit_als_neg(c, config);

    // reproduce the final task update by hand: worker 0 with q = 501 on task 0
    // (c = 10) and q = 1 + 1*10 = 11 on task 1 (pop_0 = 10 ... pop_1 = 0 so
    // worker 1's weights are 1). Check stationarity per task.
    const auto pop = task_popularity(c);
    CHECK(pop[0] == 10.0);
    CHECK(pop[1] == 0.0);
    for (TaskIndex i = 0; i < 2; ++i) {
        double lhs = config.lambda * model.v(i, 0);
        double rhs = 0.0;
        for (WorkerIndex w = 0; w < 2; ++w) {
            const Count count = c.count(w, i);
            const double q = count > 0 ? 1.0 + config.alpha * static_cast<double>(count)
                                       : 1.0 + config.beta_neg * pop[i];
            const double p = count > 0 ? 1.0 : 0.0;
            lhs += q * model.u(w, 0) * model.u(w, 0) * model.v(i, 0);
            rhs += q * p * model.u(w, 0);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("als-neg is deterministic for a fixed seed") {
    SplitMix64 rng(401);
    const InteractionMatrix c = random_interactions(rng, 10, 8, 0.3);
    BaselineConfig config;
    config.n_factors = 3;
    config.iterations = 3;
    config.seed = 17;
    const LatentModel a = fit_implicit_als_neg(c, config);
    const LatentModel b = fit_implicit_als_neg(c, config);
    CHECK(bitwise_equal(a.u, b.u));
    CHECK(bitwise_equal(a.v, b.v));

    FitOptions parallel;
    parallel.threads = 4;
    const LatentModel d = fit_implicit_als_neg(c, config, parallel);
    CHECK(bitwise_equal(a.u, d.u));
}

TEST_CASE("als-neg with beta 0 collapses to similarity-free ifts") {
    SplitMix64 rng(409);
    const InteractionMatrix c = random_interactions(rng, 12, 9, 0.3);
    const TaskFeatureMatrix y = random_features(rng, 9, 4, 2);
    for (std::size_t sweeps = 1; sweeps <= 3; ++sweeps) {
        BaselineConfig config;
        config.alpha = 50.0;
        config.beta_neg = 0.0;
        config.lambda = 0.01;
        config.n_factors = 3;
        config.iterations = sweeps;
        config.seed = 42;
        const LatentModel neg = fit_implicit_als_neg(c, config);

        IftsOptions options;
        options.use_similarity = false;
        const LatentModel plain = fit_ifts(c, y, 3, 50.0, 0.01, sweeps, 42, options);

        CHECK(max_abs_diff(neg.u, plain.u) <= 1e-9);
        CHECK(max_abs_diff(neg.v, plain.v) <= 1e-9);
    }
}

TEST_CASE("feat-reg scalar closed form") {
    // n_l = 1, one task with y = 1, c = 4, lambda = 1 -> x = 4 / 2 = 2
    const InteractionMatrix c(1, 1, {{0, 0, 4}});
    const TaskFeatureMatrix y(1, 1, {{0}});
    const FeatModel model = fit_feature_reg(c, y, 1.0);
    CHECK(model.x(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(model.kind == ModelKind::feat_reg);
}

TEST_CASE("feat-reg: zero-completion worker has a zero row") {
    const InteractionMatrix c(2, 2, {{1, 1, 3}});
    const TaskFeatureMatrix y(2, 2, {{0}, {1}});
    const FeatModel model = fit_feature_reg(c, y, 0.5);
    CHECK(model.x(0, 0) == 0.0);
    CHECK(model.x(0, 1) == 0.0);
}

TEST_CASE("feat-reg satisfies the normal equations") {
    SplitMix64 rng(419);
    const InteractionMatrix c = random_interactions(rng, 6, 10, 0.4);
    const TaskFeatureMatrix y = random_features(rng, 10, 5, 2);
    const double lambda = 0.2;
    const FeatModel model = fit_feature_reg(c, y, lambda);
    for (WorkerIndex w = 0; w < 6; ++w) {
        // gradient of the ridge objective: (Y^tY + lambda I) x - Y^t C_w
        std::vector<double> grad(5, 0.0);
        for (std::size_t f1 = 0; f1 < 5; ++f1) {
            double value = lambda * model.x(w, f1);
            for (TaskIndex i = 0; i < 10; ++i) {
                if (!y.has_feature(i, static_cast<FeatureIndex>(f1))) continue;
                double predicted = 0.0;
                for (FeatureIndex l : y.task_features(i)) predicted += model.x(w, l);
                value += predicted - static_cast<double>(c.count(w, i));
            }
            grad[f1] = value;
        }
        for (double g : grad) CHECK(std::abs(g) <= 1e-8);
    }
}

TEST_CASE("feat-reg entries may be negative") {
    // worker completed only the {0} task; the {0,1} task counts as a zero
    // target, pushing feature 1 negative
    const InteractionMatrix c(1, 2, {{0, 0, 8}});
    const TaskFeatureMatrix y(2, 2, {{0}, {0, 1}});
    const FeatModel model = fit_feature_reg(c, y, 0.01);
    CHECK(model.x(0, 0) > 0.0);
    CHECK(model.x(0, 1) < 0.0);
}

} // TEST_SUITE
