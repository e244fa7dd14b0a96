#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ume {

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replica_index = 0;
    // Independent sub-streams within one replica (e.g. initial phases vs. increments).
    std::uint32_t stream = 0;
};

// Philox4x32-10 block cipher.  Key is the master seed, the counter carries
// (block, stream, replica) so every (seed, replica, stream) triple owns a
// disjoint, scheduling-independent sequence.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(const SeedSpec& seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Standard normal via Box-Muller on uniform pairs (keeps the stream platform independent).
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
    std::uint64_t replica_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ume
