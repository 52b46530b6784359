#pragma once
// Deterministic random source.
//
// std::mt19937_64 emits a portable bit stream, but the standard library's
// distribution adapters are implementation-defined, so every variate here is
// hand-rolled on top of the raw engine. This keeps experiment tables
// byte-identical across toolchains and runs.

#include <cstdint>
#include <random>

namespace pvi {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    // Derives an independent substream; same (seed, stream) -> same stream.
    Rng fork(std::uint64_t stream) const;

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via the Marsaglia polar method (caches the spare).
    double normal();

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
    // usual boost G(a) = G(a + 1) * U^{1/a}.
    double gamma(double shape);

    // Density proportional to exp(-|t|^p): sign * Gamma(1/p)^{1/p}.
    double generalized_normal(double p);

    // Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pvi
