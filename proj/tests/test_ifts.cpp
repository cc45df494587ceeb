#include <doctest.h>

#include "taskrec/ifts.hpp"
#include "test_util.hpp"

using namespace taskrec;
using namespace testutil;

TEST_SUITE("ifts") {

TEST_CASE("init_factors is deterministic and in range") {
    const DenseMatrix a = init_factors(2, 4, 99);
    const DenseMatrix b = init_factors(2, 4, 99);
    CHECK(bitwise_equal(a, b));
    const double bound = 1.0 / std::sqrt(4.0);
    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v < bound);
    }
    const DenseMatrix other = init_factors(2, 4, 100);
    CHECK(!bitwise_equal(a, other));
}

TEST_CASE("user update: empty worker row is zero") {
    const InteractionMatrix c(2, 2, {{1, 0, 1}});
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    const DenseMatrix v = init_factors(2, 3, 5);
    const DenseMatrix u = update_user_factors(v, q, p, 0.1);
    for (std::size_t f = 0; f < 3; ++f) CHECK(u(0, f) == 0.0);
}

TEST_CASE("user update: scalar toy evaluates the closed form") {
    // 1 factor, 1 task, v = [2], c = 1, alpha = 50, lambda = 1
    const InteractionMatrix c(1, 1, {{0, 0, 1}});
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    DenseMatrix v(1, 1);
    v(0, 0) = 2.0;
    const DenseMatrix u = update_user_factors(v, q, p, 1.0);
    CHECK(u(0, 0) == doctest::Approx(102.0 / 205.0).epsilon(1e-15));
}

TEST_CASE("user update matches the naive dense implementation") {
    SplitMix64 rng(301);
    for (int trial = 0; trial < 20; ++trial) {
        const InteractionMatrix c = random_interactions(rng, 6, 5, 0.4);
        const auto q = build_confidence(c, 50.0);
        const auto p = build_preference(c);
        const DenseMatrix v = random_matrix(rng, 5, 3, 0.0, 1.0);
        const DenseMatrix u = update_user_factors(v, q, p, 0.05);
        for (WorkerIndex w = 0; w < 6; ++w) {
            const auto naive = naive_user_row(v, c, 50.0, 0.05, w);
            for (std::size_t f = 0; f < 3; ++f)
                CHECK(std::abs(u(w, f) - naive[f]) <= 1e-10 * (1.0 + std::abs(naive[f])));
        }
    }
}

TEST_CASE("task update: zero user factors leave only the similarity pull") {
    SplitMix64 rng(307);
    const InteractionMatrix c = random_interactions(rng, 4, 5, 0.4);
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    const TaskFeatureMatrix y = random_features(rng, 5, 4, 2);
    const SimilarityMatrix s = task_similarity_matrix(y);
    const DenseMatrix u(4, 2, 0.0);
    const DenseMatrix v_prev = random_matrix(rng, 5, 2, 0.0, 1.0);
    const double lambda = 0.3;
    const DenseMatrix v = update_task_factors(u, q, p, &s, v_prev, lambda);
    for (TaskIndex i = 0; i < 5; ++i) {
        for (std::size_t f = 0; f < 2; ++f) {
            double expected = 0.0;
            for (TaskIndex other = 0; other < 5; ++other) {
                if (other == i) continue;
                expected += 0.5 * s.at(i, other) * v_prev(other, f);
            }
            CHECK(v(i, f) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("task update: single task reduces to the user update with roles swapped") {
    const InteractionMatrix c(2, 1, {{0, 0, 1}});
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    DenseMatrix u(2, 1);
    u(0, 0) = 2.0;
    u(1, 0) = 0.7;
    const TaskFeatureMatrix y(1, 1, {{0}});
    const SimilarityMatrix s = task_similarity_matrix(y);
    const DenseMatrix v_prev(1, 1, 5.0);
    const DenseMatrix v = update_task_factors(u, q, p, &s, v_prev, 1.0);
    // (51*4 + 0.49 + 1) v = 51*2  (worker 1 contributes q=1 on a zero entry)
    const double expected = 102.0 / (51.0 * 4.0 + 0.49 + 1.0);
    CHECK(v(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("task update satisfies the stationarity equation against v_prev") {
    SplitMix64 rng(311);
    for (int trial = 0; trial < 10; ++trial) {
        const InteractionMatrix c = random_interactions(rng, 5, 4, 0.5);
        const auto q = build_confidence(c, 50.0);
        const auto p = build_preference(c);
        const TaskFeatureMatrix y = random_features(rng, 4, 5, 2);
        const SimilarityMatrix s = task_similarity_matrix(y);
        const DenseMatrix u = random_matrix(rng, 5, 2, 0.0, 1.0);
        const DenseMatrix v_prev = random_matrix(rng, 4, 2, 0.0, 1.0);
        const double lambda = 0.2;
        const DenseMatrix v = update_task_factors(u, q, p, &s, v_prev, lambda);
        for (TaskIndex i = 0; i < 4; ++i) {
            // residual of (U^t Q^i U + lambda I) v_i - U^t Q^i P_i - 0.5 lambda sum
            DenseMatrix a(2, 2);
            std::vector<double> rhs(2, 0.0);
            for (WorkerIndex w = 0; w < 5; ++w) {
                const Count count = c.count(w, i);
                const double qwi = 1.0 + 50.0 * static_cast<double>(count);
                const double pwi = count > 0 ? 1.0 : 0.0;
                for (std::size_t f1 = 0; f1 < 2; ++f1) {
                    for (std::size_t f2 = 0; f2 < 2; ++f2)
                        a(f1, f2) += qwi * u(w, f1) * u(w, f2);
                    rhs[f1] += qwi * pwi * u(w, f1);
                }
            }
            for (std::size_t d = 0; d < 2; ++d) a(d, d) += lambda;
            for (TaskIndex other = 0; other < 4; ++other) {
                if (other == i) continue;
                for (std::size_t f = 0; f < 2; ++f)
                    rhs[f] += 0.5 * lambda * s.at(i, other) * v_prev(other, f);
            }
            for (std::size_t f1 = 0; f1 < 2; ++f1) {
                double lhs = 0.0;
                for (std::size_t f2 = 0; f2 < 2; ++f2) lhs += a(f1, f2) * v(i, f2);
                CHECK(std::abs(lhs - rhs[f1]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("speedup identity equals the direct weighted gram") {
    SplitMix64 rng(313);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 3 + rng.next_below(8);
        const std::size_t k = 1 + rng.next_below(4);
        const DenseMatrix factors = random_matrix(rng, rows, k, 0.0, 1.0);
        const InteractionMatrix c = random_interactions(rng, 2, rows, 0.5);
        const double alpha = 50.0, lambda = 0.15;
        const DenseMatrix gram = factor_gram(factors);
        const DenseMatrix fast =
            weighted_factor_gram(factors, gram, c.worker_entries(0), alpha, lambda);
        // direct dense: sum_j q_j outer(f_j) + lambda I
        DenseMatrix direct(k, k);
        for (std::size_t j = 0; j < rows; ++j) {
            const double q = 1.0 + alpha * static_cast<double>(c.count(0, static_cast<TaskIndex>(j)));
            for (std::size_t f1 = 0; f1 < k; ++f1)
                for (std::size_t f2 = 0; f2 < k; ++f2)
                    direct(f1, f2) += q * factors(j, f1) * factors(j, f2);
        }
        for (std::size_t d = 0; d < k; ++d) direct(d, d) += lambda;
        for (std::size_t f1 = 0; f1 < k; ++f1)
            for (std::size_t f2 = 0; f2 < k; ++f2)
                CHECK(std::abs(fast(f1, f2) - direct(f1, f2)) <=
                      1e-10 * std::max(1.0, std::abs(direct(f1, f2))));
    }
}

TEST_CASE("objective: zero factors leave only the weighted positive mass") {
    SplitMix64 rng(317);
    const InteractionMatrix c = random_interactions(rng, 4, 6, 0.4);
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    const DenseMatrix u(4, 2, 0.0), v(6, 2, 0.0);
    double expected = 0.0;
    for (const auto& e : c.entries()) expected += 1.0 + 50.0 * static_cast<double>(e.count);
    CHECK(objective_ifts(u, v, q, p, nullptr, 0.1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("objective matches the naive quadruple loop") {
    SplitMix64 rng(331);
    for (int trial = 0; trial < 10; ++trial) {
        const InteractionMatrix c = random_interactions(rng, 3, 3, 0.5);
        const auto q = build_confidence(c, 50.0);
        const auto p = build_preference(c);
        const TaskFeatureMatrix y = random_features(rng, 3, 4, 2);
        const SimilarityMatrix s = task_similarity_matrix(y);
        const DenseMatrix u = random_matrix(rng, 3, 2);
        const DenseMatrix v = random_matrix(rng, 3, 2);
        const double lambda = uniform(rng, 0.01, 1.0);
        const double fast = objective_ifts(u, v, q, p, &s, lambda);
        const double naive = naive_objective(u, v, c, 50.0, &s, lambda);
        CHECK(fast == doctest::Approx(naive).epsilon(1e-10));

        // lambda = 0 is rejected by fits but the objective accepts it: only
        // the data term remains
        const double no_reg = objective_ifts(u, v, q, p, &s, 0.0);
        CHECK(no_reg == doctest::Approx(naive_objective(u, v, c, 50.0, &s, 0.0)).epsilon(1e-10));
    }
}

TEST_CASE("fit: trace length equals completed sweeps and reruns are bitwise equal") {
    SplitMix64 rng(337);
    const InteractionMatrix c = random_interactions(rng, 8, 7, 0.3);
    const TaskFeatureMatrix y = random_features(rng, 7, 5, 2);
    const LatentModel one = fit_ifts(c, y, 3, 50.0, 0.01, 1, 42);
    CHECK(one.objective_trace.size() == 1);
    const LatentModel a = fit_ifts(c, y, 3, 50.0, 0.01, 4, 42);
    const LatentModel b = fit_ifts(c, y, 3, 50.0, 0.01, 4, 42);
    CHECK(bitwise_equal(a.u, b.u));
    CHECK(bitwise_equal(a.v, b.v));
    CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("fit: final objective does not exceed the value at initialization") {
    SplitMix64 rng(347);
    const InteractionMatrix c = random_interactions(rng, 50, 40, 0.15);
    const TaskFeatureMatrix y = random_features(rng, 40, 10, 3);
    const std::size_t n_factors = 8;
    const LatentModel model = fit_ifts(c, y, n_factors, 50.0, 0.01, 10, 42);
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    const SimilarityMatrix s = task_similarity_matrix(y);
    const double initial = objective_ifts(init_factors(50, n_factors, 42),
                                          init_factors(40, n_factors, 43), q, p, &s, 0.01);
    CHECK(model.objective_trace.back() <= initial);
}

TEST_CASE("fit with similarity off is exact block coordinate descent") {
    SplitMix64 rng(349);
    IftsOptions options;
    options.use_similarity = false;
    const InteractionMatrix c = random_interactions(rng, 20, 15, 0.25);
    const TaskFeatureMatrix y = random_features(rng, 15, 6, 2);
    const LatentModel model = fit_ifts(c, y, 4, 50.0, 0.01, 10, 7, options);
    for (std::size_t k = 1; k < model.objective_trace.size(); ++k)
        CHECK(model.objective_trace[k] <=
              model.objective_trace[k - 1] + 1e-9 * (1.0 + std::abs(model.objective_trace[k - 1])));
}

TEST_CASE("user update is the exact block minimizer of the objective") {
    SplitMix64 rng(353);
    const InteractionMatrix c = random_interactions(rng, 5, 6, 0.4);
    const auto q = build_confidence(c, 50.0);
    const auto p = build_preference(c);
    const TaskFeatureMatrix y = random_features(rng, 6, 4, 2);
    const SimilarityMatrix s = task_similarity_matrix(y);
    const DenseMatrix v = random_matrix(rng, 6, 3, 0.0, 1.0);
    const double lambda = 0.05;
    DenseMatrix u = update_user_factors(v, q, p, lambda);
    const double at_solution = objective_ifts(u, v, q, p, &s, lambda);
    for (int probe = 0; probe < 30; ++probe) {
        DenseMatrix perturbed = u;
        const std::size_t w = rng.next_below(5);
        for (std::size_t f = 0; f < 3; ++f)
            perturbed(w, f) += (rng.next_double() < 0.5 ? -1e-4 : 1e-4) * rng.next_double();
        CHECK(objective_ifts(perturbed, v, q, p, &s, lambda) >= at_solution - 1e-9);
    }
}

TEST_CASE("fit is bitwise identical across thread counts") {
    SplitMix64 rng(359);
    const InteractionMatrix c = random_interactions(rng, 15, 12, 0.3);
    const TaskFeatureMatrix y = random_features(rng, 12, 5, 2);
    IftsOptions serial;
    serial.threads = 1;
    IftsOptions parallel;
    parallel.threads = 4;
    const LatentModel a = fit_ifts(c, y, 4, 50.0, 0.01, 3, 42, serial);
    const LatentModel b = fit_ifts(c, y, 4, 50.0, 0.01, 3, 42, parallel);
    CHECK(bitwise_equal(a.u, b.u));
    CHECK(bitwise_equal(a.v, b.v));
}

TEST_CASE("predict_latent matches the naive triple loop") {
    SplitMix64 rng(367);
    LatentModel model;
    model.u = random_matrix(rng, 4, 3);
    model.v = random_matrix(rng, 5, 3);
    model.n_factors = 3;
    const DenseMatrix scores = predict_latent(model);
    for (std::size_t w = 0; w < 4; ++w)
        for (std::size_t i = 0; i < 5; ++i) {
            double expected = 0.0;
            for (std::size_t f = 0; f < 3; ++f) expected += model.u(w, f) * model.v(i, f);
            CHECK(std::abs(scores(w, i) - expected) <= 1e-12);
        }

    SUBCASE("scalar factors") {
        LatentModel tiny;
        tiny.u = DenseMatrix(1, 1, 2.0);
        tiny.v = DenseMatrix(1, 1, 3.0);
        tiny.n_factors = 1;
        CHECK(predict_latent(tiny)(0, 0) == 6.0);
    }
}

} // TEST_SUITE
