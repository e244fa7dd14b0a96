#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ume/ensemble.hpp"
#include "ume/formfactor.hpp"
#include "ume/rng.hpp"

namespace ume {

struct MotionConfig {
    double ds = 1e-3;
    std::uint64_t replicas = 400;  // one-step realizations per conditional expectation
    int horizon_steps = 10;
    std::uint64_t seed = 0;
};

// Adds an independent N(0, 2 ds) increment to every phase and wraps into [0, 2 pi).
PhaseConfiguration brownian_step(const PhaseConfiguration& phi, double ds, CounterRng& rng);

// Tr T_n(W) for each requested n.
std::vector<double> chebyshev_traces(const PhaseConfiguration& phi, std::span<const int> ns);
// Closed-form centering constant <Tr T_n(W)>.
double centering_mean(int n, int N);

struct DriftEstimate {
    double F = 0.0;          // centered trace at the starting point
    double empirical = 0.0;  // E[dF | phi] / ds
    double se = 0.0;
    double predicted = 0.0;  // -n F
    double remainder = 0.0;  // empirical - predicted
};
// One-step Monte Carlo with antithetic increment pairs.  `mean` is the centering constant.
DriftEstimate estimate_drift(const PhaseConfiguration& phi, int n, double ds, std::uint64_t replicas,
                             const SeedSpec& seed, double mean);
DriftEstimate estimate_drift(const PhaseConfiguration& phi, int n, double ds, std::uint64_t replicas,
                             const SeedSpec& seed);

struct DiffusionEstimate {
    double empirical = 0.0;  // E[dF_n dF_m | phi] / ds
    double se = 0.0;
    double predicted = 0.0;  // n^2/2 on the diagonal, 0 off it
    double remainder = 0.0;
};
DiffusionEstimate estimate_diffusion(const PhaseConfiguration& phi, int n, int m, double ds, std::uint64_t replicas,
                                     const SeedSpec& seed);

// E[|dF_n dF_m dF_l|] / ds.
ValueWithError third_moment_check(const PhaseConfiguration& phi, int n, int m, int l, double ds,
                                  std::uint64_t replicas, const SeedSpec& seed);

// The ds -> 0 limits computed from an eigendecomposition: drift L F_n with L the sum of
// second phase derivatives, and diffusion 2 sum_e dF_n/dphi_e dF_m/dphi_e.
struct GeneratorValues {
    std::vector<int> ns;
    std::vector<double> traces;     // Tr T_n(W)
    std::vector<double> drift;      // L Tr T_n(W)
    Eigen::MatrixXd diffusion;      // Gamma(F_n, F_m)
    Eigen::MatrixXd gradient;       // row i: dF_{ns[i]}/dphi_e, phases in storage order
};
GeneratorValues exact_generator(const PhaseConfiguration& phi, std::span<const int> ns);

struct DriftDiffusionReport {
    int N = 0;
    std::vector<int> ns;
    std::size_t configurations = 0;
    std::vector<double> slope, slope_se;          // regression of the drift on F_n
    Eigen::MatrixXd diffusion, diffusion_se;      // ensemble mean of the conditional estimates
    Eigen::MatrixXd diffusion_exact;              // same mean from the exact generator
    std::vector<double> mean_abs_drift_remainder; // <|R_n|>, exact generator
    Eigen::MatrixXd mean_abs_diffusion_remainder; // <|R_nm|>, exact generator
};

struct DriftDiffusionRun {
    int N = 20;
    std::vector<int> ns{3, 4, 5};
    std::size_t configurations = 50;
    MotionConfig motion{};
    bool monte_carlo = true;  // false: exact generator only
};
DriftDiffusionReport drift_diffusion_report(const DriftDiffusionRun& run);

struct MomentComparison {
    int n = 0;
    double mean0 = 0.0, mean0_se = 0.0, mean1 = 0.0, mean1_se = 0.0;
    double var0 = 0.0, var0_se = 0.0, var1 = 0.0, var1_se = 0.0;
    bool agree = true;  // both moments within 3 combined standard errors
};
struct StationarityReport {
    int N = 0;
    double horizon = 0.0;
    std::uint64_t replicas = 0;
    std::vector<MomentComparison> moments;
    double chi2 = 0.0;
    int chi2_dof = 0;
    double chi2_p = 1.0;  // uniformity of the phases at the horizon
    bool pass() const;
};
StationarityReport stationarity_check(int N, double horizon, std::uint64_t replicas, int steps, std::uint64_t seed,
                                      int workers = 0);

struct ExchangeableReport {
    double ks_statistic = 0.0;
    double p_value = 1.0;
};
// Two-sample Kolmogorov-Smirnov comparison of F_n(phi) and F_n(phi') for one step of size ds.
ExchangeableReport exchangeable_pair_check(int N, int n, double ds, std::uint64_t replicas, std::uint64_t seed);

struct ComponentDiagnostics {
    int n = 0;
    double mean = 0.0, mean_se = 0.0;
    double variance = 0.0, variance_se = 0.0;
    double skewness = 0.0, skewness_se = 0.0;
    double excess_kurtosis = 0.0, kurtosis_se = 0.0;
    double wasserstein = 0.0;  // to N(0, n/4)
};
struct GaussianityReport {
    std::size_t samples = 0;
    std::vector<ComponentDiagnostics> components;
    Eigen::MatrixXd cross_covariance, cross_covariance_se;
};
// samples: one row per replica, one column per n in ns.
GaussianityReport gaussianity_report(const Eigen::MatrixXd& samples, std::span<const int> ns);

// Order-statistics L1 distance between the sample and N(0, variance) quantiles.
double wasserstein1_gaussian(std::vector<double> sample, double variance);

// Centered traces F_n for n in ns over `replicas` uniform phase draws.
Eigen::MatrixXd sample_centered_traces(int N, std::span<const int> ns, std::uint64_t replicas, std::uint64_t seed,
                                       int workers = 0);

}  // namespace ume
