#include "ume/mcharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace ume {

MomentAccumulator::MomentAccumulator(std::size_t dim, bool full_covariance)
    : full_(full_covariance),
      mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      m2_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      delta_(static_cast<Eigen::Index>(dim)) {
    if (full_) comoment_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

void MomentAccumulator::add(std::span<const double> x) {
    if (x.size() != dim()) throw std::invalid_argument("MomentAccumulator: dimension mismatch");
    ++n_;
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    delta_ = v - mean_;
    mean_ += delta_ / static_cast<double>(n_);
    // Welford: M2 += delta_old * delta_new.
    m2_.array() += delta_.array() * (v - mean_).array();
    if (full_) comoment_.noalias() += delta_ * (v - mean_).transpose();
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (o.dim() != dim() || o.full_ != full_) throw std::invalid_argument("MomentAccumulator: incompatible merge");
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    delta_ = o.mean_ - mean_;
    mean_ += delta_ * (nb / n);
    m2_ += o.m2_ + delta_.cwiseProduct(delta_) * (na * nb / n);
    if (full_) comoment_ += o.comoment_ + delta_ * delta_.transpose() * (na * nb / n);
    n_ += o.n_;
}

double MomentAccumulator::variance(std::size_t i) const {
    return n_ > 1 ? m2_[static_cast<Eigen::Index>(i)] / static_cast<double>(n_ - 1) : 0.0;
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
    if (i == j) return variance(i);
    if (!full_) throw std::logic_error("MomentAccumulator: covariance requested without full tracking");
    return n_ > 1 ? comoment_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / static_cast<double>(n_ - 1)
                  : 0.0;
}

std::size_t EnsembleEstimate::index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no statistic named " + name);
    return static_cast<std::size_t>(it - names.begin());
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv(kWorkersEnv)) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleEstimate summarize(const MomentAccumulator& acc, std::vector<std::string> names) {
    EnsembleEstimate est;
    const std::size_t d = acc.dim();
    if (names.size() != d) {
        names.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            if (names[i].empty()) names[i] = "s" + std::to_string(i);
    }
    est.names = std::move(names);
    est.count = acc.count();
    est.mean.assign(acc.mean().data(), acc.mean().data() + d);
    for (std::size_t i = 0; i < d; ++i) {
        est.variance.push_back(acc.variance(i));
        est.se.push_back(acc.count() ? std::sqrt(acc.variance(i) / static_cast<double>(acc.count())) : 0.0);
    }
    if (acc.full_covariance()) {
        Eigen::MatrixXd c(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c(i, j) = acc.covariance(i, j);
        est.covariance = c;
    }
    return est;
}

EnsembleEstimate run_ensemble(const RunConfig& config, const ReplicaEvaluator& statistic) {
    if (config.replicas == 0) throw std::invalid_argument("run_ensemble: replica count must be positive");
    if (config.block_size == 0) throw std::invalid_argument("run_ensemble: block size must be positive");
    const std::uint64_t bs = config.block_size;
    const std::size_t nblocks = static_cast<std::size_t>((config.replicas + bs - 1) / bs);

    std::vector<MomentAccumulator> blocks(nblocks);
    std::vector<std::uint64_t> discarded(nblocks, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::atomic<std::size_t> dim{static_cast<std::size_t>(-1)};
    std::mutex fail_mu;
    std::uint64_t fail_index = 0;
    std::string fail_what;
    bool failed = false;

    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= nblocks || abort.load()) return;
            const std::uint64_t lo = b * bs, hi = std::min(config.replicas, lo + bs);
            std::optional<MomentAccumulator> acc;
            for (std::uint64_t r = lo; r < hi; ++r) {
                std::optional<std::vector<double>> x;
                try {
                    x = statistic(SeedSpec{config.master_seed, r, 0});
                    if (x) {
                        std::size_t expect = static_cast<std::size_t>(-1);
                        dim.compare_exchange_strong(expect, x->size());
                        if (x->size() != dim.load()) throw std::runtime_error("statistic changed dimension");
                    }
                } catch (const std::exception& e) {
                    std::lock_guard lock(fail_mu);
                    if (!failed || r < fail_index) fail_index = r, fail_what = e.what();
                    failed = true;
                    abort = true;
                    return;
                }
                if (!x) {
                    ++discarded[b];
                    continue;
                }
                if (!acc) acc.emplace(x->size(), config.full_covariance);
                acc->add(*x);
            }
            if (acc) blocks[b] = std::move(*acc);
        }
    };

    const int nw = std::min<int>(resolve_workers(config.workers), static_cast<int>(nblocks));
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed) throw ReplicaFailure(fail_index, fail_what);
    if (dim.load() == static_cast<std::size_t>(-1)) throw std::runtime_error("run_ensemble: every replica was discarded");

    const std::size_t d = dim.load();
    for (auto& blk : blocks)
        if (blk.dim() != d) blk = MomentAccumulator(d, config.full_covariance);

    // Prefix/suffix merges in block order give both the total and the delete-one-block sets.
    std::vector<MomentAccumulator> prefix(nblocks + 1, MomentAccumulator(d, config.full_covariance));
    std::vector<MomentAccumulator> suffix(nblocks + 1, MomentAccumulator(d, config.full_covariance));
    for (std::size_t b = 0; b < nblocks; ++b) {
        prefix[b + 1] = prefix[b];
        prefix[b + 1].merge(blocks[b]);
    }
    for (std::size_t b = nblocks; b-- > 0;) {
        suffix[b] = blocks[b];
        suffix[b].merge(suffix[b + 1]);
    }

    EnsembleEstimate est = summarize(prefix[nblocks], config.statistics);
    est.blocks = nblocks;
    for (auto x : discarded) est.discarded += x;

    est.variance_se.assign(d, 0.0);
    Eigen::MatrixXd cov_se;
    if (config.full_covariance) cov_se = Eigen::MatrixXd::Zero(d, d);
    if (nblocks >= 2) {
        // Delete-one-block jackknife: se^2 = (B-1)/B sum (theta_b - mean theta)^2.
        std::vector<MomentAccumulator> loo;
        loo.reserve(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) {
            MomentAccumulator m = prefix[b];
            m.merge(suffix[b + 1]);
            loo.push_back(std::move(m));
        }
        const double B = static_cast<double>(nblocks);
        auto jack = [&](auto&& theta) {
            double mean = 0.0;
            for (const auto& m : loo) mean += theta(m);
            mean /= B;
            double ss = 0.0;
            for (const auto& m : loo) ss += (theta(m) - mean) * (theta(m) - mean);
            return std::sqrt((B - 1.0) / B * ss);
        };
        for (std::size_t i = 0; i < d; ++i)
            est.variance_se[i] = jack([i](const MomentAccumulator& m) { return m.variance(i); });
        if (config.full_covariance)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i; j < d; ++j)
                    cov_se(i, j) = cov_se(j, i) =
                        jack([i, j](const MomentAccumulator& m) { return m.covariance(i, j); });
    }
    if (config.full_covariance) est.covariance_se = cov_se;
    return est;
}

Eigen::MatrixXd collect_samples(const RunConfig& config, const SampleEvaluator& statistic) {
    if (config.replicas == 0) throw std::invalid_argument("collect_samples: replica count must be positive");
    const auto n = static_cast<std::size_t>(config.replicas);
    std::vector<std::vector<double>> rows(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex fail_mu;
    std::uint64_t fail_index = 0;
    std::string fail_what;
    bool failed = false;
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= n || abort.load()) return;
            try {
                rows[r] = statistic(SeedSpec{config.master_seed, r, 0});
            } catch (const std::exception& e) {
                std::lock_guard lock(fail_mu);
                if (!failed || r < fail_index) fail_index = r, fail_what = e.what();
                failed = true;
                abort = true;
                return;
            }
        }
    };
    const int nw = std::min<std::size_t>(resolve_workers(config.workers), n);
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed) throw ReplicaFailure(fail_index, fail_what);
    const std::size_t d = rows.front().size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != d) throw ReplicaFailure(r, "statistic changed dimension");
        for (std::size_t j = 0; j < d; ++j) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
    }
    return out;
}

EnsembleEstimate covariance_estimate(RunConfig config, const ReplicaEvaluator& statistics) {
    config.full_covariance = true;
    EnsembleEstimate est = run_ensemble(config, statistics);
    if (est.mean.size() < 2) throw std::invalid_argument("covariance_estimate: needs at least two statistics");
    return est;
}

}  // namespace ume
