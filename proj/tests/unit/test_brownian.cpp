#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "ume/brownian.hpp"
#include "ume/spectral.hpp"

using namespace ume;
constexpr double kPi = std::numbers::pi;

namespace {
double wrapped_diff(double b, double a) { return std::remainder(b - a, 2 * kPi); }

double trace_at(const PhaseConfiguration& phi, int n) {
    const int ns[] = {n};
    return chebyshev_traces(phi, ns)[0];
}
}  // namespace

TEST_CASE("phase increments") {
    CounterRng rng({1, 0, 0});
    PhaseConfiguration phi = sample_phases(3, {1, 0});
    const double ds = 1e-4;
    oracle::Mean d0, d1, sq, cross;
    for (int i = 0; i < 1000000; ++i) {
        const auto next = brownian_step(phi, ds, rng);
        REQUIRE(next.valid());
        const double a = wrapped_diff(next.phases[0], phi.phases[0]);
        const double b = wrapped_diff(next.phases[1], phi.phases[1]);
        d0.add(a);
        sq.add(a * a);
        cross.add(a * b);
        phi = next;
    }
    CHECK(std::abs(d0.mean()) < 3 * d0.se());
    CHECK(sq.mean() == doctest::Approx(2 * ds).epsilon(0.01));
    CHECK(std::abs(cross.mean()) < 3 * cross.se());
}

TEST_CASE("wrapping keeps phases in range") {
    PhaseConfiguration phi{4, std::vector<double>(6, 2 * kPi - 1e-12)};
    CounterRng rng({2, 0, 0});
    for (int i = 0; i < 1000; ++i) {
        phi = brownian_step(phi, 0.5, rng);
        REQUIRE(phi.valid());
    }
}

TEST_CASE("exact generator against finite differences") {
    oracle::Gen gen(131);
    for (int trial = 0; trial < 6; ++trial) {
        const int N = gen.integer(4, 9);
        const auto phi = sample_phases(N, {gen.seed(), 0});
        const std::vector<int> ns{3, 4, 5, 6};
        const auto g = exact_generator(phi, ns);
        const double h = 1e-4;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            double lap = 0;
            std::vector<double> grad;
            for (std::size_t e = 0; e < phi.phases.size(); ++e) {
                auto p = phi, m = phi;
                p.phases[e] += h;
                m.phases[e] -= h;
                const double fp = trace_at(p, ns[i]), fm = trace_at(m, ns[i]), f0 = trace_at(phi, ns[i]);
                grad.push_back((fp - fm) / (2 * h));
                lap += (fp - 2 * f0 + fm) / (h * h);
                CHECK(g.gradient(i, e) == doctest::Approx(grad.back()).epsilon(1e-5).scale(1e-3));
            }
            CHECK(g.drift[i] == doctest::Approx(lap).epsilon(1e-3).scale(1e-2));
            double gamma = 0;
            for (double x : grad) gamma += 2 * x * x;
            CHECK(g.diffusion(i, i) == doctest::Approx(gamma).epsilon(1e-6));
        }
    }
}

TEST_CASE("one-step estimates agree with the exact generator") {
    const auto phi = sample_phases(12, {7, 0});
    const int ns[] = {3, 4};
    const auto g = exact_generator(phi, ns);
    const auto d = estimate_drift(phi, 3, 1e-3, 4000, {7, 1});
    CHECK(std::abs(d.empirical - g.drift[0]) < 3 * d.se + 0.02 * std::abs(g.drift[0]));
    CHECK(d.predicted == doctest::Approx(-3 * (g.traces[0] - centering_mean(3, 12))));
    CHECK(d.remainder == doctest::Approx(d.empirical - d.predicted));
    const auto half = estimate_drift(phi, 3, 5e-4, 4000, {7, 2});
    CHECK(std::abs(d.empirical - half.empirical) < 3 * std::hypot(d.se, half.se) + 0.02 * std::abs(g.drift[0]));
    const auto dif = estimate_diffusion(phi, 3, 4, 1e-3, 4000, {7, 3});
    CHECK(std::abs(dif.empirical - g.diffusion(0, 1)) < 3 * dif.se + 0.02);
    CHECK(dif.predicted == 0.0);
    CHECK_THROWS_AS(estimate_drift(phi, 2, 1e-3, 10, {7, 1}), DomainError);
}

TEST_CASE("drift regression and off-diagonal diffusion at N = 20") {
    DriftDiffusionRun run;
    run.N = 20;
    run.ns = {3, 4};
    run.configurations = 50;
    run.motion.replicas = 200;
    run.motion.seed = 11;
    const auto rep = drift_diffusion_report(run);
    CHECK(rep.slope[0] == doctest::Approx(-3.0).epsilon(0.1));
    CHECK(rep.slope[1] == doctest::Approx(-4.0).epsilon(0.1));
    CHECK(std::abs(rep.diffusion(0, 1)) < 3 * rep.diffusion_se(0, 1));
    CHECK(rep.diffusion(0, 1) == doctest::Approx(rep.diffusion(1, 0)));
    // The ensemble-mean diffusion equals 2n Var(Tr T_n) exactly; for n = 3 that is
    // 4.5 N(N-1)/(N-2)^2.
    CHECK(rep.diffusion_exact(0, 0) == doctest::Approx(4.5 * 20 * 19 / 324.0).epsilon(0.1));
}

TEST_CASE("third absolute moment scales like sqrt(ds)") {
    const auto phi = sample_phases(10, {9, 0});
    const auto a = third_moment_check(phi, 3, 4, 5, 4e-3, 4000, {9, 1});
    const auto b = third_moment_check(phi, 3, 4, 5, 1e-3, 4000, {9, 2});
    CHECK(a.value > 0);
    CHECK(a.value / b.value == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("stationarity") {
    const auto s0 = stationarity_check(10, 0.0, 2000, 1, 5);
    for (const auto& m : s0.moments) {
        CHECK(m.mean0 == m.mean1);
        CHECK(m.var0 == m.var1);
    }
    const auto s1 = stationarity_check(20, 1.0, 10000, 10, 6);
    CHECK(s1.pass());
    CHECK(s1.moments[0].var0 == doctest::Approx(s1.moments[0].var1).epsilon(0.1));
    CHECK(s1.chi2_p > 0.01);
}

TEST_CASE("exchangeable pair marginals") {
    const auto r = exchangeable_pair_check(12, 3, 0.05, 3000, 3);
    CHECK(r.p_value > 0.01);
}

TEST_CASE("Wasserstein distance and Gaussianity diagnostics") {
    CHECK_THROWS(gaussianity_report(Eigen::MatrixXd::Zero(50, 1), std::vector<int>{3}));
    CHECK(wasserstein1_gaussian({1.0}, 1.0) == doctest::Approx(1.0));
    // Shifted Gaussian sample: distance equals the shift.
    CounterRng rng({3, 0, 0});
    std::vector<double> z;
    for (int i = 0; i < 20000; ++i) z.push_back(0.5 * rng.normal() + 0.2);
    CHECK(wasserstein1_gaussian(z, 0.25) == doctest::Approx(0.2).epsilon(0.1));

    const std::vector<int> ns{3, 4};
    const auto s = sample_centered_traces(20, ns, 4000, 7);
    const auto rep = gaussianity_report(s, ns);
    for (const auto& c : rep.components) {
        CHECK(std::abs(c.mean) < 3 * c.mean_se + 0.02);
        CHECK(c.wasserstein >= 0);
    }
    CHECK(std::abs(rep.cross_covariance(0, 1)) < 3 * rep.cross_covariance_se(0, 1));
}

TEST_CASE("low orders are exact eigenfunctions of the generator") {
    // Periodic non-backtracking walks of length n <= 5 on K_N are simple n-cycles, whose phase
    // sums have n independent terms; F_n is then an exact eigenfunction with eigenvalue -n.
    oracle::Gen gen(141);
    for (int trial = 0; trial < 8; ++trial) {
        const int N = gen.integer(5, 16);
        const auto phi = sample_phases(N, {gen.seed(), 0});
        const std::vector<int> ns{3, 4, 5, 6};
        const auto g = exact_generator(phi, ns);
        for (std::size_t i = 0; i < 3; ++i) {
            const double F = g.traces[i] - centering_mean(ns[i], N);
            CHECK(std::abs(g.drift[i] + ns[i] * F) < 1e-10 * (1 + std::abs(g.drift[i])));
        }
        const double F6 = g.traces[3] - centering_mean(6, N);
        CHECK(std::abs(g.drift[3] + 6 * F6) > 1e-8);
    }
}
