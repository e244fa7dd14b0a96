#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "support/oracles.hpp"
#include "ume/mcharness.hpp"
#include "ume/nbwalks.hpp"
#include "ume/spectral.hpp"

using namespace ume;

TEST_CASE("accumulator merge equals a single stream") {
    oracle::Gen gen(121);
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back({gen.real(-3, 5), gen.real(100, 101), gen.real(-1, 1) * 1e-3});
    MomentAccumulator whole(3, true);
    for (const auto& x : xs) whole.add(x);
    for (int k : {2, 3, 7, 16}) {
        std::vector<MomentAccumulator> parts(k, MomentAccumulator(3, true));
        for (std::size_t i = 0; i < xs.size(); ++i) parts[i * k / xs.size()].add(xs[i]);
        MomentAccumulator merged(3, true);
        for (const auto& p : parts) merged.merge(p);
        CHECK(merged.count() == whole.count());
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(merged.mean()[i] == doctest::Approx(whole.mean()[i]).epsilon(1e-12));
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(merged.covariance(i, j) == doctest::Approx(whole.covariance(i, j)).epsilon(1e-12));
        }
    }
    // Two-pass oracle for the variance.
    double m = 0, v = 0;
    for (const auto& x : xs) m += x[1];
    m /= xs.size();
    for (const auto& x : xs) v += (x[1] - m) * (x[1] - m);
    CHECK(whole.variance(1) == doctest::Approx(v / (xs.size() - 1)).epsilon(1e-12));
}

TEST_CASE("constant and deterministic statistics") {
    RunConfig cfg;
    cfg.N = 8;
    cfg.replicas = 1000;
    cfg.master_seed = 3;
    cfg.statistics = {"c", "y2"};
    const auto est = run_ensemble(cfg, [](const SeedSpec& s) -> std::optional<std::vector<double>> {
        return std::vector<double>{2.5, y_n(eigenvalues(build_ume(sample_phases(8, s))), 2)};
    });
    CHECK(est.count == 1000);
    CHECK(est.mean[0] == 2.5);
    CHECK(est.variance[0] == 0.0);
    CHECK(std::abs(est.mean[1]) < 1e-12);
    CHECK(est.variance[1] < 1e-24);
    CHECK(est.se[0] == 0.0);
}

TEST_CASE("results do not depend on the worker count") {
    RunConfig cfg;
    cfg.N = 10;
    cfg.replicas = 2345;
    cfg.master_seed = 17;
    cfg.full_covariance = true;
    auto stat = [](const SeedSpec& s) -> std::optional<std::vector<double>> {
        const auto sp = eigenvalues(build_ume(sample_phases(10, s)));
        if (s.replica_index % 97 == 0) return std::nullopt;
        return std::vector<double>{y_n(sp, 3), y_n(sp, 4), chebyshev_trace(sp, 5)};
    };
    cfg.workers = 1;
    const auto a = run_ensemble(cfg, stat);
    cfg.workers = 4;
    const auto b = run_ensemble(cfg, stat);
    ::setenv(kWorkersEnv, "3", 1);
    cfg.workers = 0;
    CHECK(resolve_workers(0) == 3);
    const auto c = run_ensemble(cfg, stat);
    ::unsetenv(kWorkersEnv);
    for (const auto* e : {&b, &c}) {
        CHECK(e->mean == a.mean);
        CHECK(e->variance == a.variance);
        CHECK(e->variance_se == a.variance_se);
        CHECK(*e->covariance == *a.covariance);
        CHECK(e->discarded == a.discarded);
    }
    CHECK(a.discarded == 25);
    CHECK(a.count == 2345 - 25);
    CHECK(a.blocks == 24);
}

TEST_CASE("replica failure reports the index") {
    RunConfig cfg;
    cfg.replicas = 500;
    try {
        run_ensemble(cfg, [](const SeedSpec& s) -> std::optional<std::vector<double>> {
            if (s.replica_index == 321) throw std::runtime_error("boom");
            return std::vector<double>{1.0};
        });
        FAIL("expected failure");
    } catch (const ReplicaFailure& f) {
        CHECK(f.replica == 321);
    }
}

TEST_CASE("jackknife error of a variance matches the spread over seeds") {
    // Independent check: repeat the run over seeds and compare the jackknife error
    // with the observed standard deviation of the variance estimates.
    oracle::Mean spread, jk;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        RunConfig cfg;
        cfg.replicas = 2000;
        cfg.master_seed = seed;
        const auto est = run_ensemble(cfg, [](const SeedSpec& s) -> std::optional<std::vector<double>> {
            CounterRng rng(s);
            const double x = rng.normal();
            return std::vector<double>{x * x * x};
        });
        spread.add(est.variance[0]);
        jk.add(est.variance_se[0]);
    }
    CHECK(jk.mean() == doctest::Approx(std::sqrt(spread.var())).epsilon(0.35));
}

TEST_CASE("covariance estimates") {
    RunConfig cfg;
    cfg.N = 12;
    cfg.replicas = 20000;
    cfg.master_seed = 8;
    cfg.statistics = {"y3", "y4"};
    const auto est = covariance_estimate(cfg, [](const SeedSpec& s) -> std::optional<std::vector<double>> {
        const auto sp = eigenvalues(build_ume(sample_phases(12, s)));
        return std::vector<double>{y_n(sp, 3), y_n(sp, 4)};
    });
    REQUIRE(est.covariance);
    CHECK(std::abs((*est.covariance)(0, 1)) < 3 * (*est.covariance_se)(0, 1));
    // Exact variance of y_3: 3 N(N-1)(N-2) / (N^2 (N-2)^3).
    const double exact = 3.0 * 12 * 11 * 10 / (144.0 * 1000.0);
    CHECK(std::abs((*est.covariance)(0, 0) - exact) < 3 * (*est.covariance_se)(0, 0));
    RunConfig one = cfg;
    one.replicas = 10;
    CHECK_THROWS(covariance_estimate(one, [](const SeedSpec&) -> std::optional<std::vector<double>> {
        return std::vector<double>{1.0};
    }));
}
