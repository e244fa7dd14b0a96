// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance                 run all criteria
//   acceptance --criterion k   run criterion k only
//
// A criterion fails when any comparison misses its tolerance or the run exceeds its budget.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli/cli.hpp"
#include "ume/brownian.hpp"
#include "ume/density.hpp"
#include "ume/ensemble.hpp"
#include "ume/formfactor.hpp"
#include "ume/mcharness.hpp"
#include "ume/nbwalks.hpp"
#include "ume/spectral.hpp"

using namespace ume;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> lines;

    // Records a comparison; `ok` is the tolerance test as stated by the criterion.
    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    }
    void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunConfig config(int N, std::uint64_t replicas, std::uint64_t seed, std::vector<std::string> stats) {
    RunConfig c;
    c.N = N;
    c.replicas = replicas;
    c.master_seed = seed;
    c.statistics = std::move(stats);
    return c;
}

// 1. Deterministic identities per realization.
Verdict criterion1() {
    Verdict v;
    double worst_y = 0.0, worst_tr = 0.0;
    for (int N = 3; N <= 50; ++N)
        for (std::uint64_t d = 0; d < 100; ++d) {
            const auto phi = sample_phases(N, {101, d, static_cast<std::uint32_t>(N)});
            const auto s = eigenvalues(build_ume(phi));
            for (int n : {1, 2}) worst_y = std::max(worst_y, std::abs(y_n(s, n)) / y_n_scale(s, n));
            const double target = double(N) * (N - 1);
            worst_tr = std::max(worst_tr, std::abs(N * spectral_moment(s, 2) - target) / target);
        }
    v.check(worst_y <= 1e-10, fmt("max |y_1|, |y_2| relative to sum |T_n(eps)| scale: %.3e <= 1e-10", worst_y));
    v.check(worst_tr <= 1e-10, fmt("max relative error of Tr M^2 = N(N-1): %.3e <= 1e-10", worst_tr));
    return v;
}

// 2. Pre-trace identity against Hashimoto powers.
Verdict criterion2() {
    Verdict v;
    double worst = 0.0;
    int wN = 0, wn = 0;
    for (int N = 3; N <= 20; ++N)
        for (std::uint64_t d = 0; d < 10; ++d) {
            const auto phi = sample_phases(N, {102, d, static_cast<std::uint32_t>(N)});
            const auto s = eigenvalues(build_ume(phi));
            const auto hy = hashimoto_normalized_traces(phi, 12);
            for (int n = 0; n <= 12; ++n) {
                const double a = y_n(s, n), b = hy[n];
                const double rel = std::abs(a - b) / std::max({std::abs(a), std::abs(b), y_n_scale(s, n)});
                if (rel > worst) worst = rel, wN = N, wn = n;
            }
        }
    v.check(worst <= 1e-9, fmt("max relative mismatch %.3e (N=%d, n=%d) <= 1e-9", worst, wN, wn));
    return v;
}

// 3. Bass identity.
Verdict criterion3() {
    Verdict v;
    const std::complex<double> etas[] = {{0.3, 0.7}, {-1.1, 0.4}, {2.3, -0.9}, {0.05, 1.9}, {-0.6, -1.3}};
    for (int N = 3; N <= 8; ++N) {
        double worst = 0.0;
        for (std::uint64_t d = 0; d < 10; ++d) {
            const auto phi = sample_phases(N, {103, d, static_cast<std::uint32_t>(N)});
            for (auto eta : etas) worst = std::max(worst, bass_residual(phi, eta));
        }
        v.check(worst <= 1e-8, fmt("N=%d: max residual %.3e <= 1e-8", N, worst));
    }
    return v;
}

// 4. Fourth trace moment against the closed form 2N^3 - 3N^2 + N.
Verdict criterion4() {
    Verdict v;
    for (int N : {5, 8}) {
        const auto est = run_ensemble(config(N, 100000, 104, {"trM4"}), [N](const SeedSpec& s) {
            const auto m = build_ume(sample_phases(N, s)).entries;
            const CMatrix m2 = m * m;
            return std::optional(std::vector<double>{(m2 * m2).trace().real()});
        });
        const double n = N, closed = 2 * n * n * n - 3 * n * n + n, walks = n * (n - 1) * (2 * n - 3);
        const double mean = est.mean[0], se = est.se[0];
        v.check(std::abs(mean - closed) <= 3 * se,
                fmt("N=%d: <Tr M^4> = %.4f +- %.4f vs 2N^3-3N^2+N = %.0f (|diff| = %.1f se)", N, mean, se, closed,
                    std::abs(mean - closed) / se));
        v.note(fmt("N=%d: closed-walk count N(N-1)(2N-3) = %.0f (|diff| = %.1f se)", N, walks,
                   std::abs(mean - walks) / se));
    }
    return v;
}

// 5. GUE moments against the three-term recurrence.
Verdict criterion5() {
    Verdict v;
    constexpr int N = 8;
    const auto est = run_ensemble(config(N, 100000, 105, {"m1", "m2", "m3", "m4", "m5"}), [](const SeedSpec& s) {
        const auto sp = eigenvalues(build_gue(N, s));
        std::vector<double> m(5, 0.0);
        for (double l : sp.lambda) {
            double p = 1.0;
            for (int k = 0; k < 5; ++k) m[k] += (p *= l * l / N) / N;
        }
        return std::optional(m);
    });
    for (int k = 1; k <= 5; ++k) {
        const double pred = gue_moment(k, N), mean = est.mean[k - 1], se = est.se[k - 1];
        v.check(std::abs(mean - pred) <= 3 * se,
                fmt("m_%d = %.5f +- %.5f vs recurrence %.5f", k, mean, se, pred));
    }
    return v;
}

// 6. Leading expectation of y_{2n}.
Verdict criterion6() {
    Verdict v;
    constexpr int N = 50;
    const int ns[] = {5, 6, 8};
    const auto est = run_ensemble(config(N, 200000, 106, {"y10", "y12", "y16"}), [&](const SeedSpec& s) {
        const auto y = y_all(eigenvalues(build_ume(sample_phases(N, s))), 16);
        return std::optional(std::vector<double>{y[10], y[12], y[16]});
    });
    for (int i = 0; i < 3; ++i) {
        const double pred = expected_y2n_formula(ns[i], N), mean = est.mean[i], se = est.se[i];
        const double tol = 3 * se + 0.25 * std::abs(pred);
        v.check(std::abs(mean - pred) <= tol,
                fmt("<y_%d> N^2 = %.3f +- %.3f vs %.3f (tolerance 3 se + 25%%)", 2 * ns[i], mean * N * N,
                    se * N * N, pred * N * N));
    }
    return v;
}

// 7. Variance law for Tr T_n(W).
Verdict criterion7() {
    Verdict v;
    constexpr int N = 50;
    std::vector<std::string> names;
    for (int n = 3; n <= 8; ++n) names.push_back("T" + std::to_string(n));
    const auto est = run_ensemble(config(N, 100000, 107, names), [](const SeedSpec& s) {
        const auto sp = eigenvalues(build_ume(sample_phases(N, s)));
        std::vector<double> t;
        for (int n = 3; n <= 8; ++n) t.push_back(chebyshev_trace(sp, n));
        return std::optional(t);
    });
    for (int n = 3; n <= 8; ++n) {
        const double var = est.variance[n - 3], se = est.variance_se[n - 3], pred = variance_formula(n, N);
        v.check(std::abs(var - pred) <= 3 * se,
                fmt("Var Tr T_%d = %.4f +- %.4f (jackknife) vs n/4 - n(n+1)/(2N) = %.4f; n/4 + n(n+1)/(2N) = %.4f", n,
                    var, se, pred, n / 4.0 + n * (n + 1) / (2.0 * N)));
    }
    v.note(fmt("exact short-cycle value for n=3: (3/4) N(N-1)/(N-2)^2 = %.4f", 0.75 * N * (N - 1) / ((N - 2.0) * (N - 2.0))));
    return v;
}

// 8. Covariance law.
Verdict criterion8() {
    Verdict v;
    constexpr int N = 24;
    const auto est = covariance_estimate(config(N, 100000, 108, {"y3", "y4", "y9"}), [](const SeedSpec& s) {
        const auto y = y_all(eigenvalues(build_ume(sample_phases(N, s))), 9);
        return std::optional(std::vector<double>{y[3], y[4], y[9]});
    });
    const auto& cov = *est.covariance;
    const auto& cse = *est.covariance_se;
    const double pred = 27.0 / (N * N * N);
    v.check(std::abs(cov(2, 0) - pred) <= 3 * cse(2, 0),
            fmt("Cov(y_9, y_3) N^3 = %.3f +- %.3f (jackknife) vs 27", cov(2, 0) * N * N * N, cse(2, 0) * N * N * N));
    v.check(std::abs(cov(1, 0)) <= 3 * cse(1, 0),
            fmt("Cov(y_4, y_3) N^3 = %.3f +- %.3f vs 0", cov(1, 0) * N * N * N, cse(1, 0) * N * N * N));
    return v;
}

// 9. Enumeration oracles.
Verdict criterion9() {
    Verdict v;
    bool exact = true;
    for (int N = 3; N <= 5; ++N) {
        const auto tr = hashimoto_traces(zero_phases(N), 8);
        for (int n = 1; n <= 8; ++n) exact = exact && double(enumerate_nbw(N, n).count) == std::round(tr[n]) &&
                                             std::abs(tr[n] - std::round(tr[n])) < 1e-6;
    }
    v.check(exact, "enumerate_nbw(N, n) == Tr Y(0)^n for N = 3..5, n = 1..8");

    const auto zero = enumerate_zero_phase_walks(4, 10);
    const auto est = run_ensemble(config(4, 100000, 109, {"trY10"}), [](const SeedSpec& s) {
        return std::optional(std::vector<double>{hashimoto_traces(sample_phases(4, s), 10)[10]});
    });
    v.check(std::abs(est.mean[0] - double(zero.count)) <= 3 * est.se[0],
            fmt("zero-phase walks (N=4, n=10) = %llu vs <Tr Y^10> = %.3f +- %.3f", (unsigned long long)zero.count,
                est.mean[0], est.se[0]));

    std::uint64_t short_walks = 0;
    for (int N = 3; N <= 5; ++N)
        for (int n = 1; n <= 8; ++n) short_walks += enumerate_zero_phase_walks(N, n).count;
    v.check(short_walks == 0, fmt("zero-phase walks with n <= 8 (N = 3..5): %llu == 0", (unsigned long long)short_walks));
    return v;
}

// 10. Density overlay at N = 10 through the density command; the GUE curve must be emitted.
Verdict criterion10() {
    Verdict v;
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "ume_acceptance_fig2";
    fs::remove_all(dir);
    cli::json merged = cli::command_defaults("density");
    cli::overlay(merged, {{"n_dim", 10}, {"replicas", 20000}, {"seed", 110}, {"out_dir", dir.string()},
                          {"format", {"csv", "svg"}}});
    const auto config = cli::parse_config("density", merged);
    const auto r = cli::run_command(config);
    cli::write_outputs(r, config);
    const auto& rep = r.reports;
    const double l1m = rep["l1_mean_density"], l1s = rep["l1_semicircle"];
    v.check(l1m < l1s, fmt("L1 on [-0.8, 0.8]: mean density %.4f < semicircle %.4f", l1m, l1s));

    // The GUE column: finite, nonnegative, unit mass on eps in [-1, 1] up to its tails.
    const auto& curves = r.tables.at(0);
    double mass = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < curves.rows.size(); ++i) {
        finite = finite && std::isfinite(curves.rows[i][3]) && curves.rows[i][3] >= 0;
        if (i) mass += 0.5 * (curves.rows[i][3] + curves.rows[i - 1][3]) * (curves.rows[i][0] - curves.rows[i - 1][0]);
    }
    const bool files = fs::exists(dir / "density_curves.csv") && fs::exists(dir / "density_overlay.svg");
    v.check(finite && mass > 0.9 && mass <= 1.0 + 1e-6 && files && r.plots.at(0).series.size() == 4,
            fmt("finite-N GUE curve emitted (mass on [-1, 1] = %.4f, csv and four-curve svg written)", mass));
    v.note(fmt("non-Ramanujan replica fraction %.4f", rep["non_ramanujan_fraction"].get<double>()));
    return v;
}

// 11. Form factor at N = 20 against the GUE curve.
Verdict criterion11() {
    Verdict v;
    FormFactorRun run;
    run.N = 20;
    run.retained = 100000;
    run.t_max = 60;
    run.rms_t_max = 40;
    run.seed = 111;
    const auto fs = form_factor_series(run);
    v.check(fs.rms_deviation < 0.1, fmt("RMS(plateau-normalized K, K_GUE) over t = 1..40: %.4f < 0.1", fs.rms_deviation));
    v.note(fmt("retained %llu, discard fraction %.4f, plateau factor %.4f", (unsigned long long)fs.retained,
               fs.discard_fraction, fs.plateau_factor));
    int agree = 0, cosine_agree = 0;
    double worst = 0.0;
    for (int t = 1; t <= 12; ++t) {
        const double se = std::hypot(fs.defined_se[t - 1], fs.relation_se[t - 1]);
        const double z = std::abs(fs.defined[t - 1] - fs.relation[t - 1]) / se;
        worst = std::max(worst, z);
        agree += z <= 3;
        const double cse = std::hypot(fs.cosine_se[t - 1], fs.relation_se[t - 1]);
        cosine_agree += std::abs(fs.cosine[t - 1] - fs.relation[t - 1]) <= 3 * cse;
    }
    v.check(agree == 12, fmt("defining average vs y-relation, t = 1..12: %d/12 within 3 combined se (worst %.3g se)",
                             agree, worst));
    v.note(fmt("t=1: definition %.4f, relation %.4f; t=5: definition %.4f, relation %.4f", fs.defined[0], fs.relation[0],
               fs.defined[4], fs.relation[4]));
    v.note(fmt("cosine projection (1/N)<(sum cos)^2> vs y-relation: %d/12 within 3 combined se", cosine_agree));
    return v;
}

// 12. Brownian drift, diffusion and remainder decay.
Verdict criterion12() {
    Verdict v;
    DriftDiffusionRun run;
    run.N = 20;
    run.ns = {3, 4, 5};
    run.configurations = 50;
    run.motion.replicas = 400;
    run.motion.seed = 112;
    const auto rep = drift_diffusion_report(run);
    for (int i = 0; i < 3; ++i) {
        const int n = run.ns[i];
        v.check(std::abs(rep.slope[i] + n) <= 0.1 * n,
                fmt("drift slope n=%d: %.3f +- %.3f vs %d (10%%)", n, rep.slope[i], rep.slope_se[i], -n));
    }
    for (int i = 0; i < 3; ++i) {
        const int n = run.ns[i];
        const double pred = 0.5 * n * n;
        v.check(std::abs(rep.diffusion(i, i) - pred) <= 0.1 * pred,
                fmt("diffusion (%d,%d): %.3f +- %.3f vs n^2/2 = %.1f (10%%); exact generator mean %.3f", n, n,
                    rep.diffusion(i, i), rep.diffusion_se(i, i), pred, rep.diffusion_exact(i, i)));
    }
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            v.check(std::abs(rep.diffusion(i, j)) <= 3 * rep.diffusion_se(i, j),
                    fmt("diffusion (%d,%d): %.3f +- %.3f vs 0", run.ns[i], run.ns[j], rep.diffusion(i, j),
                        rep.diffusion_se(i, j)));

    auto exact_run = [](int N, std::vector<int> ns) {
        DriftDiffusionRun d;
        d.N = N;
        d.ns = std::move(ns);
        d.configurations = 30;
        d.motion.seed = 212;
        d.monte_carlo = false;
        return drift_diffusion_report(d);
    };
    const auto d20 = exact_run(20, {6, 7, 8}), d40 = exact_run(40, {6, 7, 8});
    for (int i = 0; i < 3; ++i) {
        const double ratio = d20.mean_abs_drift_remainder[i] / d40.mean_abs_drift_remainder[i];
        v.check(ratio >= 0.75 * 2.0, fmt("<|R_%d|> N=20 -> 40: %.4f -> %.4f, ratio %.3f >= 0.75 x 2", d20.ns[i],
                                         d20.mean_abs_drift_remainder[i], d40.mean_abs_drift_remainder[i], ratio));
    }
    const auto e20 = exact_run(20, {3, 4, 5}), e80 = exact_run(80, {3, 4, 5});
    for (int i = 0; i < 3; ++i) {
        const double a = e20.mean_abs_diffusion_remainder(i, i), b = e80.mean_abs_diffusion_remainder(i, i);
        v.check(a / b >= 0.75 * std::sqrt(2.0), fmt("<|R_%d%d|> N=20 -> 80: %.4f -> %.4f, ratio %.3f >= 0.75 x sqrt 2",
                                                    e20.ns[i], e20.ns[i], a, b, a / b));
    }
    return v;
}

// 13. Gaussianity of centered traces.
Verdict criterion13() {
    Verdict v;
    constexpr int N = 40;
    const std::vector<int> ns{3, 4, 5, 6};
    const auto rep = gaussianity_report(sample_centered_traces(N, ns, 10000, 113), ns);
    for (const auto& c : rep.components) {
        v.check(std::abs(c.mean) <= 3 * c.mean_se, fmt("F_%d mean %.4f +- %.4f vs 0", c.n, c.mean, c.mean_se));
        const double law = variance_formula(c.n, N);
        v.check(std::abs(c.variance - law) <= 3 * c.variance_se,
                fmt("F_%d variance %.4f +- %.4f vs n/4 - n(n+1)/(2N) = %.4f", c.n, c.variance, c.variance_se, law));
        v.check(std::abs(c.excess_kurtosis) <= 0.1 + 3 * c.kurtosis_se,
                fmt("F_%d excess kurtosis %.4f, bound 0.1 + 3 x %.4f", c.n, c.excess_kurtosis, c.kurtosis_se));
    }
    const int n3[] = {3};
    std::vector<double> w;
    for (int d : {10, 20, 40}) {
        const auto s = sample_centered_traces(d, n3, 10000, 213);
        w.push_back(wasserstein1_gaussian(std::vector<double>(s.data(), s.data() + s.rows()), 0.75));
    }
    v.check(w[0] > w[1] && w[1] > w[2],
            fmt("W1(F_3, N(0, 3/4)) over N = 10, 20, 40: %.4f, %.4f, %.4f strictly decreasing", w[0], w[1], w[2]));
    return v;
}

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "deterministic identities y_1 = y_2 = 0, Tr M^2 = N(N-1)", 10, criterion1},
        {2, "pre-trace identity against Hashimoto powers", 120, criterion2},
        {3, "Bass identity", 60, criterion3},
        {4, "fourth trace moment 2N^3 - 3N^2 + N", 60, criterion4},
        {5, "GUE moments against the three-term recurrence", 120, criterion5},
        {6, "leading expectation of y_2n", 600, criterion6},
        {7, "variance law n/4 - n(n+1)/(2N)", 300, criterion7},
        {8, "covariance law Cov(y_9, y_3) = 27/N^3", 300, criterion8},
        {9, "walk enumeration oracles", 600, criterion9},
        {10, "eigenvalue density overlay (N = 10)", 60, criterion10},
        {11, "form factor overlay (N = 20)", 600, criterion11},
        {12, "Brownian drift, diffusion and remainder decay", 900, criterion12},
        {13, "Gaussianity of centered traces", 600, criterion13},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-13)")->check(CLI::Range(1, 13));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (const auto& c : criteria()) {
        if (only && c.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        v.check(secs < c.budget_seconds, fmt("runtime %.1f s < %.0f s", secs, c.budget_seconds));
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << '\n';
        for (const auto& l : v.lines) std::cout << "    " << l << '\n';
        std::cout.flush();
        all_pass = all_pass && v.pass;
    }
    return all_pass ? 0 : 1;
}
