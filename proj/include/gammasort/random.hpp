#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace gammasort {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3", SC'11).
///
/// The 64-bit key is the seed. The 128-bit counter holds a 64-bit stream id
/// in its upper half and a 64-bit block index in its lower half, so any
/// (seed, stream) pair yields an independent sequence and streams can be
/// split off without coordination. Output is identical on every platform.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// The raw 10-round bijection.
    static Block encrypt(Block counter, Key key) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform integer in [0, n) without modulo bias. n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Independent generator for a child stream.
    Philox4x32 split(std::uint64_t child) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
};

/// SplitMix64-style mixing of a base seed with a path of ids. Used to derive
/// per-item seeds so parallel and serial construction agree.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) noexcept;

/// Poisson variate. Multiplication method below mean 10, Hormann's PTRS
/// transformed rejection above. Returns 0 for mean 0.
std::uint64_t sample_poisson(Philox4x32& rng, double mean);

}  // namespace gammasort
