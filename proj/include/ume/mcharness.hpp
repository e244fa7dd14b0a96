#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ume/rng.hpp"

namespace ume {

// One-pass mean / (co)variance accumulator with Chan's pairwise merge.
class MomentAccumulator {
public:
    explicit MomentAccumulator(std::size_t dim = 0, bool full_covariance = false);

    void add(std::span<const double> x);
    void merge(const MomentAccumulator& other);

    std::size_t dim() const { return mean_.size(); }
    std::uint64_t count() const { return n_; }
    bool full_covariance() const { return full_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    // Unbiased (n - 1) estimators.
    double variance(std::size_t i) const;
    double covariance(std::size_t i, std::size_t j) const;  // needs full covariance unless i == j

private:
    std::uint64_t n_ = 0;
    bool full_ = false;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
    Eigen::MatrixXd comoment_;
    Eigen::VectorXd delta_;
};

struct EnsembleEstimate {
    std::vector<std::string> names;
    std::uint64_t count = 0;
    std::uint64_t discarded = 0;
    std::vector<double> mean;
    std::vector<double> variance;     // unbiased sample variance of each statistic
    std::vector<double> se;           // sqrt(variance / count)
    std::vector<double> variance_se;  // delete-one-block jackknife
    std::optional<Eigen::MatrixXd> covariance;
    std::optional<Eigen::MatrixXd> covariance_se;  // jackknife
    std::size_t blocks = 0;

    std::size_t index(const std::string& name) const;
    double discard_fraction() const {
        const auto total = count + discarded;
        return total ? static_cast<double>(discarded) / static_cast<double>(total) : 0.0;
    }
};

struct RunConfig {
    int N = 0;
    std::uint64_t replicas = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::string> statistics;  // names of the vector components
    std::map<std::string, double> params;  // module-specific knobs, echoed by the CLI
    int workers = 0;                       // 0: environment override or hardware concurrency
    std::size_t block_size = 100;
    bool full_covariance = false;
};

// Per-replica evaluator; std::nullopt discards the replica (counted, not averaged).
using ReplicaEvaluator = std::function<std::optional<std::vector<double>>(const SeedSpec&)>;

struct ReplicaFailure : std::runtime_error {
    ReplicaFailure(std::uint64_t index, const std::string& what)
        : std::runtime_error("replica " + std::to_string(index) + " failed: " + what), replica(index) {}
    std::uint64_t replica;
};

inline constexpr const char* kWorkersEnv = "UME_WORKERS";
int resolve_workers(int requested);

// Deterministic for any worker count: replicas are grouped in fixed blocks, each block
// is accumulated sequentially, and blocks are merged in index order.
EnsembleEstimate run_ensemble(const RunConfig& config, const ReplicaEvaluator& statistic);
// Same run with the full covariance matrix and its jackknife errors.
EnsembleEstimate covariance_estimate(RunConfig config, const ReplicaEvaluator& statistics);

// Raw per-replica values: row r holds the statistic of replica r.  Deterministic for any
// worker count because every row has a fixed owner index.
using SampleEvaluator = std::function<std::vector<double>(const SeedSpec&)>;
Eigen::MatrixXd collect_samples(const RunConfig& config, const SampleEvaluator& statistic);

// Builds an estimate from an already merged accumulator (no jackknife).
EnsembleEstimate summarize(const MomentAccumulator& acc, std::vector<std::string> names);

}  // namespace ume
