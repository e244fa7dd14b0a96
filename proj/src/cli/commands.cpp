#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

#include "cli/cli.hpp"
#include "ume/brownian.hpp"
#include "ume/density.hpp"
#include "ume/ensemble.hpp"
#include "ume/errors.hpp"
#include "ume/formfactor.hpp"
#include "ume/mcharness.hpp"
#include "ume/nbwalks.hpp"
#include "ume/spectral.hpp"

namespace ume::cli {
namespace {

template <class T>
T param(const LabConfig& c, const char* key) {
    if (!c.params.contains(key)) throw UsageError(c.command + ": missing parameter '" + key + "'");
    try {
        return c.params.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(c.command + ": parameter '" + key + "': " + e.what());
    }
}

void require_dim(const LabConfig& c, int lo, int hi = 1 << 20) {
    if (c.n_dim < lo || c.n_dim > hi)
        throw InvalidDimension(c.command + ": --n-dim must lie in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "], got " + std::to_string(c.n_dim));
}

RunConfig run_config(const LabConfig& c, std::vector<std::string> stats) {
    RunConfig r;
    r.N = c.n_dim;
    r.replicas = c.replicas;
    r.master_seed = c.seed;
    r.workers = c.workers;
    r.statistics = std::move(stats);
    return r;
}

Check within_se(std::string name, double value, double target, double se, double k = 3.0) {
    const double tol = k * se;
    return {std::move(name), value, target, tol, std::abs(value - target) <= tol, "|value - target| <= 3 se"};
}

Check within_rel(std::string name, double value, double target, double rel) {
    const double tol = rel * std::abs(target);
    return {std::move(name), value, target, tol, std::abs(value - target) <= tol,
            "|value - target| <= " + format_number(rel) + " |target|"};
}

std::string tag(const std::string& base, int n) { return base + "_" + std::to_string(n); }

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_moments(const LabConfig& c) {
    ExperimentResult r;
    const auto kind = param<std::string>(c, "kind");
    int k_max = param<int>(c, "k_max");
    const int N = c.n_dim;
    Table t{"moments", {}, {}};

    if (kind == "ume") {
        require_dim(c, 3);
        if (k_max <= 0) k_max = 4;
        if (k_max > 4) throw UsageError("moments: UME predictions exist for k <= 4");
        std::vector<std::string> names;
        for (int k = 1; k <= k_max; ++k) names.push_back(tag("trM", k));
        const auto est = run_ensemble(run_config(c, names), [&](const SeedSpec& s) {
            const auto m = build_ume(sample_phases(N, s));
            std::vector<double> out;
            CMatrix p = m.entries;
            for (int k = 1; k <= k_max; ++k) {
                out.push_back(p.trace().real());
                if (k < k_max) p = p * m.entries;
            }
            return std::optional(out);
        });
        const double n = N;
        const double predicted[] = {0.0, n * (n - 1), 0.0, 2 * n * n * n - 3 * n * n + n};
        // Closed walks with zero net phase: N(N-1) backtracking pairs plus two orderings of two spokes.
        const double walk_count[] = {0.0, n * (n - 1), 0.0, n * (n - 1) * (2 * n - 3)};
        t.columns = {"k", "sampled", "se", "predicted", "closed_walk_count"};
        for (int k = 1; k <= k_max; ++k) {
            const double v = est.mean[k - 1], se = est.se[k - 1];
            t.rows.push_back({double(k), v, se, predicted[k - 1], walk_count[k - 1]});
            if (k == 1 || k == 2) {
                // Deterministic identities: every realization must hit the value.
                const double tol = 1e-10 * std::max(1.0, std::abs(predicted[k - 1]));
                const double dev = std::abs(v - predicted[k - 1]) + std::sqrt(est.variance[k - 1]);
                r.checks.push_back({tag("trM", k) + "_exact", predicted[k - 1] + dev, predicted[k - 1], tol, dev <= tol,
                                    "mean and spread within 1e-10 relative"});
            } else {
                r.checks.push_back(within_se(tag("trM", k), v, predicted[k - 1], se));
            }
        }
    } else if (kind == "gue") {
        require_dim(c, 1);
        if (k_max <= 0) k_max = 5;
        std::vector<std::string> names;
        for (int k = 1; k <= k_max; ++k) names.push_back(tag("m", k));
        const auto est = run_ensemble(run_config(c, names), [&](const SeedSpec& s) {
            const auto sp = eigenvalues(build_gue(N, s));
            std::vector<double> out(k_max, 0.0);
            for (double l : sp.lambda) {
                const double x2 = l * l / N;
                double p = 1.0;
                for (int k = 1; k <= k_max; ++k) out[k - 1] += (p *= x2) / N;
            }
            return std::optional(out);
        });
        t.columns = {"k", "sampled", "se", "recurrence"};
        for (int k = 1; k <= k_max; ++k) {
            t.rows.push_back({double(k), est.mean[k - 1], est.se[k - 1], gue_moment(k, N)});
            r.checks.push_back(within_se(tag("m", k), est.mean[k - 1], gue_moment(k, N), est.se[k - 1]));
        }
    } else {
        throw UsageError("moments: kind must be 'ume' or 'gue'");
    }
    r.tables.push_back(std::move(t));
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_density(const LabConfig& c) {
    require_dim(c, 3);
    ExperimentResult r;
    const int N = c.n_dim;
    const double window = param<double>(c, "window");
    double width = param<double>(c, "bin_width");
    const int grid_points = param<int>(c, "grid_points");
    if (!(window > 0 && window <= 1)) throw UsageError("density: window must lie in (0, 1]");
    if (grid_points < 2) throw UsageError("density: grid_points must be >= 2");
    if (width <= 0) width = default_bin_width(c.replicas);

    std::vector<std::string> names;
    for (int j = 0; j < N; ++j) names.push_back(tag("eps", j));
    const Eigen::MatrixXd rows = collect_samples(run_config(c, names), [&](const SeedSpec& s) {
        return eigenvalues(build_ume(sample_phases(N, s))).eps;
    });
    std::vector<double> eps(rows.data(), rows.data() + rows.size());
    std::uint64_t non_ramanujan = 0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        if (rows.row(i).cwiseAbs().maxCoeff() > 1.0) ++non_ramanujan;

    const auto hist = make_histogram(eps, width, -1.0, c.replicas);
    auto mean_density = [N](double e) { return ume_mean_density(e, N); };
    const double l1_mean = l1_distance(hist, mean_density, -window, window);
    const double l1_semi = l1_distance(hist, semicircle, -window, window);
    r.checks.push_back({"l1_mean_density_below_semicircle", l1_mean, l1_semi, 0.0, l1_mean < l1_semi,
                        "L1(hist, mean density) < L1(hist, semicircle)"});

    Table curves{"curves", {"eps", "ume_mean_density", "semicircle", "gue_finite_n"}, {}};
    Series s_mean{"UME mean density"}, s_semi{"semicircle"}, s_gue{"GUE, finite N"};
    for (int i = 0; i < grid_points; ++i) {
        const double e = -1.0 + 2.0 * i / (grid_points - 1);
        // The GUE density lives on x = E / sqrt N in [-2, 2]; eps = x / 2.
        const double row[] = {e, ume_mean_density(e, N), semicircle(e), 2.0 * gue_finite_density(2.0 * e, N)};
        curves.rows.emplace_back(std::begin(row), std::end(row));
        s_mean.x.push_back(e), s_mean.y.push_back(row[1]);
        s_semi.x.push_back(e), s_semi.y.push_back(row[2]);
        s_gue.x.push_back(e), s_gue.y.push_back(row[3]);
    }
    Table ht{"histogram", {"left", "right", "height", "count"}, {}};
    Series s_hist{"eigenvalue histogram", Series::Style::Steps, hist.edges, hist.heights};
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        ht.rows.push_back({hist.edges[i], hist.edges[i + 1], hist.heights[i], double(hist.counts[i])});

    r.tables = {std::move(curves), std::move(ht)};
    Plot p{"overlay", "Eigenvalue density, N = " + std::to_string(N), "eps", "density", {}, {}, {}};
    p.series = {std::move(s_hist), std::move(s_mean), std::move(s_semi), std::move(s_gue)};
    p.xrange = std::pair{std::min(-1.05, hist.edges.front()), std::max(1.05, hist.edges.back())};
    r.plots.push_back(std::move(p));
    r.reports = {{"bin_width", width},
                 {"l1_window", window},
                 {"l1_mean_density", l1_mean},
                 {"l1_semicircle", l1_semi},
                 {"non_ramanujan_fraction", double(non_ramanujan) / double(c.replicas)}};
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_formfactor(const LabConfig& c) {
    require_dim(c, 3);
    ExperimentResult r;
    FormFactorRun run;
    run.N = c.n_dim;
    run.retained = c.replicas;
    run.t_max = param<int>(c, "t_max");
    run.rms_t_max = param<int>(c, "rms_t_max");
    run.seed = c.seed;
    run.workers = c.workers;
    const int agree_t_max = param<int>(c, "agree_t_max");
    const double bound = param<double>(c, "rms_bound");
    if (run.t_max < 1 || run.rms_t_max < 1 || agree_t_max > run.t_max)
        throw UsageError("formfactor: need 1 <= rms_t_max, agree_t_max <= t_max");
    const auto fs = form_factor_series(run);

    Table t{"series",
            {"t", "tau", "definition", "definition_se", "relation", "relation_se", "cosine", "cosine_se", "connected",
             "connected_se", "normalized", "gue"},
            {}};
    Series emp{"empirical, plateau-normalized", Series::Style::Points}, gue{"GUE K2(t/N)"};
    for (int i = 0; i < fs.t_max; ++i) {
        const double tau = double(fs.t[i]) / fs.N;
        t.rows.push_back({double(fs.t[i]), tau, fs.defined[i], fs.defined_se[i], fs.relation[i], fs.relation_se[i],
                          fs.cosine[i], fs.cosine_se[i], fs.connected[i], fs.connected_se[i], fs.normalized[i],
                          fs.gue[i]});
        emp.x.push_back(tau), emp.y.push_back(fs.normalized[i]), emp.err.push_back(fs.connected_se[i] * fs.plateau_factor);
        gue.x.push_back(tau), gue.y.push_back(fs.gue[i]);
    }
    r.tables.push_back(std::move(t));
    r.checks.push_back({"rms_deviation", fs.rms_deviation, 0.0, bound, fs.rms_deviation < bound,
                        "RMS(normalized - GUE) over t <= rms_t_max below the bound"});
    json cosine_agreement = json::array();
    for (int i = 0; i < agree_t_max; ++i) {
        const double se = std::hypot(fs.defined_se[i], fs.relation_se[i]);
        r.checks.push_back(within_se(tag("definition_vs_relation_t", fs.t[i]), fs.defined[i], fs.relation[i], se));
        const double cse = std::hypot(fs.cosine_se[i], fs.relation_se[i]);
        cosine_agreement.push_back({{"t", fs.t[i]},
                                    {"difference", fs.cosine[i] - fs.relation[i]},
                                    {"combined_se", cse},
                                    {"within_3se", std::abs(fs.cosine[i] - fs.relation[i]) <= 3 * cse}});
    }
    Plot p{"overlay", "Form factor, N = " + std::to_string(fs.N), "tau = t / N", "K2", {emp, gue}, {}, {}};
    r.plots.push_back(std::move(p));
    r.reports = {{"retained", fs.retained},
                 {"discard_fraction", fs.discard_fraction},
                 {"plateau_factor", fs.plateau_factor},
                 {"rms_deviation", fs.rms_deviation},
                 {"rms_t_max", fs.rms_t_max},
                 {"cosine_vs_relation", cosine_agreement}};
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_walks(const LabConfig& c) {
    require_dim(c, 3);
    ExperimentResult r;
    const int N = c.n_dim;
    const int n = param<int>(c, "length");
    const int oracle_dims = param<int>(c, "oracle_n_max");
    const int oracle_len = param<int>(c, "oracle_length_max");
    if (n < 1) throw UsageError("walks: length must be >= 1");

    // Exhaustive count against the operator trace with all phases zero.
    Table ot{"nbw_counts", {"N", "n", "enumerated", "trace"}, {}};
    double worst = 0.0;
    for (int m = 3; m <= oracle_dims; ++m) {
        const auto tr = hashimoto_traces(zero_phases(m), oracle_len);
        for (int len = 1; len <= oracle_len; ++len) {
            const double e = double(enumerate_nbw(m, len).count);
            ot.rows.push_back({double(m), double(len), e, tr[len]});
            worst = std::max(worst, std::abs(e - tr[len]));
        }
    }
    r.checks.push_back({"enumeration_equals_trace", worst, 0.0, 0.5, worst < 0.5, "max |count - Tr Y(0)^n| == 0"});

    // Zero-net-phase walks against the sampled mean trace.
    const auto zero = enumerate_zero_phase_walks(N, n);
    const auto est = run_ensemble(run_config(c, {tag("trY", n)}), [&](const SeedSpec& s) {
        return std::optional(std::vector<double>{hashimoto_traces(sample_phases(N, s), n)[n]});
    });
    r.checks.push_back(within_se("zero_phase_count_vs_sampled_trace", est.mean[0], double(zero.count), est.se[0]));

    // Short walks never cancel their phases.
    Table zt{"zero_phase_counts", {"N", "n", "count"}, {}};
    std::uint64_t short_total = 0;
    for (int len = 1; len <= std::min(8, n); ++len) {
        const auto z = enumerate_zero_phase_walks(N, len);
        zt.rows.push_back({double(N), double(len), double(z.count)});
        short_total += z.count;
    }
    zt.rows.push_back({double(N), double(n), double(zero.count)});
    r.checks.push_back({"no_zero_phase_walks_up_to_8", double(short_total), 0.0, 0.0, short_total == 0,
                        "sum of counts for n <= 8 == 0"});
    r.tables = {std::move(ot), std::move(zt)};
    r.reports = {{"sampled_trace", est.mean[0]}, {"sampled_trace_se", est.se[0]}, {"zero_phase_walks", zero.count}};
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_bass(const LabConfig& c) {
    const int lo = param<int>(c, "n_min");
    const double tol = param<double>(c, "tolerance");
    if (lo < 3) throw InvalidDimension("bass: n_min must be >= 3");
    require_dim(c, lo);
    ExperimentResult r;
    const std::complex<double> etas[] = {{0.3, 0.7}, {-1.1, 0.4}, {2.3, -0.9}, {0.05, 1.9}, {-0.6, -1.3}};
    Table t{"residuals", {"N", "eta_re", "eta_im", "max_residual"}, {}};
    Table sm{"spectrum_mismatch", {"N", "max_mismatch"}, {}};
    double worst = 0.0;
    for (int N = lo; N <= c.n_dim; ++N) {
        std::vector<PhaseConfiguration> draws;
        for (std::uint64_t d = 0; d < c.replicas; ++d)
            draws.push_back(sample_phases(N, {c.seed, d, static_cast<std::uint32_t>(N)}));
        for (const auto eta : etas) {
            double m = 0.0;
            for (const auto& phi : draws) m = std::max(m, bass_residual(phi, eta));
            t.rows.push_back({double(N), eta.real(), eta.imag(), m});
            worst = std::max(worst, m);
        }
        double mm = 0.0;
        for (const auto& phi : draws) mm = std::max(mm, bass_spectrum_mismatch(phi));
        sm.rows.push_back({double(N), mm});
    }
    r.checks.push_back({"bass_residual", worst, 0.0, tol, worst <= tol, "max residual <= tolerance"});
    r.tables = {std::move(t), std::move(sm)};
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_brownian(const LabConfig& c) {
    require_dim(c, 4);
    ExperimentResult r;
    DriftDiffusionRun run;
    run.N = c.n_dim;
    run.ns = param<std::vector<int>>(c, "ns");
    run.configurations = param<std::size_t>(c, "configurations");
    run.motion.ds = param<double>(c, "ds");
    run.motion.replicas = c.replicas;
    run.motion.seed = c.seed;
    for (int n : run.ns)
        if (n < 3) throw UsageError("brownian: ns must be >= 3");
    const auto rep = drift_diffusion_report(run);
    const std::size_t k = run.ns.size();

    Table st{"drift", {"n", "slope", "slope_se", "predicted"}, {}};
    Table dt{"diffusion", {"n", "m", "empirical", "se", "exact_generator", "predicted"}, {}};
    for (std::size_t i = 0; i < k; ++i) {
        const int n = run.ns[i];
        st.rows.push_back({double(n), rep.slope[i], rep.slope_se[i], -double(n)});
        r.checks.push_back(within_rel(tag("drift_slope", n), rep.slope[i], -n, 0.1));
        for (std::size_t j = 0; j < k; ++j) {
            const int m = run.ns[j];
            const double pred = i == j ? 0.5 * n * n : 0.0;
            dt.rows.push_back({double(n), double(m), rep.diffusion(i, j), rep.diffusion_se(i, j),
                               rep.diffusion_exact(i, j), pred});
            if (i == j)
                r.checks.push_back(within_rel(tag("diffusion", n), rep.diffusion(i, i), pred, 0.1));
            else if (i < j)
                r.checks.push_back(within_se(tag("diffusion", n) + "_" + std::to_string(m), rep.diffusion(i, j), 0.0,
                                             rep.diffusion_se(i, j)));
        }
    }

    // Remainder decay from the exact generator (no step-size bias).
    const double slack = 0.75;
    auto decay = [&](const char* which, const std::vector<int>& ns, const std::vector<int>& dims, double rate,
                     bool diffusion) {
        if (dims.size() != 2) throw UsageError("brownian: decay dims must have two entries");
        std::vector<DriftDiffusionReport> reps;
        for (int N : dims) {
            DriftDiffusionRun d;
            d.N = N;
            d.ns = ns;
            d.configurations = param<std::size_t>(c, "decay_configurations");
            d.motion.seed = c.seed;
            d.monte_carlo = false;
            reps.push_back(drift_diffusion_report(d));
        }
        const double expected = std::pow(double(dims[1]) / dims[0], rate);
        Table rt{which, {"n", "N0", "N1", "mean_abs_R_N0", "mean_abs_R_N1", "ratio", "expected"}, {}};
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double a = diffusion ? reps[0].mean_abs_diffusion_remainder(i, i) : reps[0].mean_abs_drift_remainder[i];
            const double b = diffusion ? reps[1].mean_abs_diffusion_remainder(i, i) : reps[1].mean_abs_drift_remainder[i];
            rt.rows.push_back({double(ns[i]), double(dims[0]), double(dims[1]), a, b, a / b, expected});
            // For low orders the remainder vanishes identically and only round-off is left.
            if (std::max(a, b) < 1e-10)
                r.checks.push_back({tag(which, ns[i]), std::max(a, b), 0.0, 1e-10, true, "remainder vanishes identically"});
            else
                r.checks.push_back({tag(which, ns[i]), a / b, expected, (1 - slack) * expected, a / b >= slack * expected,
                                    "decay ratio >= 0.75 x expected"});
        }
        r.tables.push_back(std::move(rt));
    };
    r.tables = {std::move(st), std::move(dt)};
    decay("drift_remainder_decay", param<std::vector<int>>(c, "drift_decay_ns"),
          param<std::vector<int>>(c, "drift_decay_dims"), 1.0, false);
    decay("diffusion_remainder_decay", param<std::vector<int>>(c, "diffusion_decay_ns"),
          param<std::vector<int>>(c, "diffusion_decay_dims"), 0.25, true);
    r.reports = {{"configurations", rep.configurations}};
    return r;
}

// ---------------------------------------------------------------------------------------------

ExperimentResult cmd_gaussianity(const LabConfig& c) {
    require_dim(c, 4);
    ExperimentResult r;
    const int N = c.n_dim;
    const auto ns = param<std::vector<int>>(c, "ns");
    const auto dims = param<std::vector<int>>(c, "w1_dims");
    const double slack = param<double>(c, "kurtosis_slack");
    for (int n : ns)
        if (n < 3) throw UsageError("gaussianity: ns must be >= 3");

    const auto samples = sample_centered_traces(N, ns, c.replicas, c.seed, c.workers);
    const auto rep = gaussianity_report(samples, ns);
    Table t{"components",
            {"n", "mean", "mean_se", "variance", "variance_se", "variance_law", "skewness", "excess_kurtosis",
             "kurtosis_se", "wasserstein1"},
            {}};
    for (const auto& d : rep.components) {
        const double law = variance_formula(d.n, N);
        t.rows.push_back({double(d.n), d.mean, d.mean_se, d.variance, d.variance_se, law, d.skewness,
                          d.excess_kurtosis, d.kurtosis_se, d.wasserstein});
        r.checks.push_back(within_se(tag("mean", d.n), d.mean, 0.0, d.mean_se));
        r.checks.push_back(within_se(tag("variance", d.n), d.variance, law, d.variance_se));
        const double tol = slack + 3 * d.kurtosis_se;
        r.checks.push_back({tag("excess_kurtosis", d.n), d.excess_kurtosis, 0.0, tol,
                            std::abs(d.excess_kurtosis) <= tol, "|excess kurtosis| <= slack + 3 se"});
    }

    Table wt{"wasserstein_trend", {"N", "wasserstein1_F3"}, {}};
    Series ws{"W1(F_3, N(0, 3/4))", Series::Style::Points};
    const int n3[] = {3};
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (int d : dims) {
        if (d < 4) throw InvalidDimension("gaussianity: w1_dims must be >= 4");
        const auto s = sample_centered_traces(d, n3, c.replicas, c.seed, c.workers);
        const double w = wasserstein1_gaussian(std::vector<double>(s.data(), s.data() + s.rows()), 0.75);
        wt.rows.push_back({double(d), w});
        ws.x.push_back(d), ws.y.push_back(w);
        decreasing = decreasing && w < prev;
        prev = w;
    }
    r.checks.push_back({"wasserstein_strictly_decreasing", wt.rows.empty() ? 0.0 : wt.rows.back()[1],
                        wt.rows.empty() ? 0.0 : wt.rows.front()[1], 0.0, decreasing,
                        "W1 strictly decreasing over the listed N"});
    r.tables = {std::move(t), std::move(wt)};
    r.plots.push_back({"wasserstein", "Wasserstein-1 distance of F_3", "N", "W1", {ws}, {}, {}});
    json cross = json::array();
    for (Eigen::Index i = 0; i < rep.cross_covariance.rows(); ++i)
        for (Eigen::Index j = i + 1; j < rep.cross_covariance.cols(); ++j)
            cross.push_back({{"n", ns[i]},
                             {"m", ns[j]},
                             {"covariance", rep.cross_covariance(i, j)},
                             {"se", rep.cross_covariance_se(i, j)}});
    r.reports = {{"samples", rep.samples}, {"cross_covariance", cross}};
    return r;
}

}  // namespace

ExperimentResult run_command(const LabConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult r;
    const auto& cmd = config.command;
    if (cmd == "moments") r = cmd_moments(config);
    else if (cmd == "density") r = cmd_density(config);
    else if (cmd == "formfactor") r = cmd_formfactor(config);
    else if (cmd == "walks") r = cmd_walks(config);
    else if (cmd == "bass") r = cmd_bass(config);
    else if (cmd == "brownian") r = cmd_brownian(config);
    else if (cmd == "gaussianity") r = cmd_gaussianity(config);
    else throw UsageError("unknown command '" + cmd + "'");
    r.command = cmd;
    r.config = config.to_json();
    r.seed = config.seed;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace ume::cli
