#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qjspec {

// Derives a child seed from a master seed and a stream tag. Stage seeds and
// per-task ensemble seeds all go through this, so parallel and serial
// execution order cannot change what any consumer draws.
std::uint64_t seed_for(std::uint64_t master, std::string_view stream);
std::uint64_t seed_for(std::uint64_t master, std::string_view stream, std::uint64_t index);

// Seeded generator with explicit sampling transforms. std::* distributions
// are implementation-defined, which would break bit-identical replay of a
// seeded run; every draw here is specified arithmetic on mt19937_64 output.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller pairs (spare is cached)
    double normal();

    // exponential with the given mean
    double exponential(double mean);

    // Poisson with the given mean; exact inversion below PTRD_CUTOFF,
    // Hormann's transformed rejection above it
    std::uint64_t poisson(double mean);

    std::uint64_t raw() { return engine_(); }

  private:
    static constexpr double PTRD_CUTOFF = 12.0;
    std::uint64_t poisson_knuth(double mean);
    std::uint64_t poisson_ptrd(double mean);

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {
// log(k!) via Lanczos; local so Poisson sampling never depends on libm lgamma
double log_factorial(std::uint64_t k);
}  // namespace detail

}  // namespace qjspec
