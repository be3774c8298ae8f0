#ifndef DDSIM_RNG_H
#define DDSIM_RNG_H

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>

namespace ddsim {

/// SplitMix64 finalizer. Used for seed derivation only.
uint64_t splitmix64(uint64_t x);

/// Seed of the independent stream number `index` under `master_seed`.
///
/// stream_seed(m, i) = splitmix64(splitmix64(m) + (i + 1) * 0x9E3779B97F4A7C15), computed with
/// wrapping 64-bit arithmetic. It depends on nothing but its two arguments, so work items that
/// derive their stream from their own index give the same numbers under any scheduling.
uint64_t stream_seed(uint64_t master_seed, uint64_t index);

/// Random stream with platform-independent conversions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the standard. The standard
/// distributions are not, so the conversions below are written out explicitly.
class Rng {
   public:
    explicit Rng(uint64_t seed) : engine_(seed), seed_(seed) {}

    uint64_t seed() const { return seed_; }
    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1].
    double uniform_open_low();
    /// Uniform integer in [0, n). Unbiased (rejection sampling).
    std::size_t index_below(std::size_t n);
    /// Standard normal via the Marsaglia polar method.
    double normal();
    /// Complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal();
    /// Exponential with the given rate.
    double exponential(double rate);

   private:
    std::mt19937_64 engine_;
    uint64_t seed_;
    bool has_spare_ = false;
    double spare_ = 0;
};

}  // namespace ddsim

#endif
