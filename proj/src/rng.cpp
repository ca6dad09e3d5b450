#include "qjspec/rng.hpp"

#include <array>
#include <cmath>

namespace qjspec {

namespace {

constexpr std::uint64_t FNV_OFFSET = 0xcbf29ce484222325ull;
constexpr std::uint64_t FNV_PRIME = 0x100000001b3ull;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = FNV_OFFSET) {
    for (unsigned char c : s) {
        h ^= c;
        h *= FNV_PRIME;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t seed_for(std::uint64_t master, std::string_view stream) {
    return splitmix64(master ^ fnv1a(stream));
}

std::uint64_t seed_for(std::uint64_t master, std::string_view stream, std::uint64_t index) {
    return splitmix64(seed_for(master, stream) + 0x9e3779b97f4a7c15ull * (index + 1));
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::exponential(double mean) {
    return -mean * std::log1p(-uniform());
}

std::uint64_t Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < PTRD_CUTOFF) return poisson_knuth(mean);
    return poisson_ptrd(mean);
}

std::uint64_t Rng::poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double product = uniform();
    while (product > limit) {
        ++k;
        product *= uniform();
    }
    return k;
}

// Hormann's PTRD transformed-rejection sampler, valid for mean >= 10.
std::uint64_t Rng::poisson_ptrd(double mean) {
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mean);

    for (;;) {
        double v = uniform();
        if (v <= 0.86 * v_r) {
            const double u = v / v_r - 0.43;
            const double us = 0.5 - std::abs(u);
            return static_cast<std::uint64_t>(
                std::floor((2.0 * a / us + b) * u + mean + 0.445));
        }

        double u;
        if (v >= v_r) {
            u = uniform() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0 ? -0.5 : 0.5) - u;
            v = uniform() * v_r;
        }

        const double us = 0.5 - std::abs(u);
        if (us < 0.013 && v > us) continue;

        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.445);
        if (kf < 0.0) continue;
        v = v * inv_alpha / (a / (us * us) + b);
        if (std::log(v * smu) <=
            kf * log_mu - mean - detail::log_factorial(static_cast<std::uint64_t>(kf))) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

namespace detail {

double log_factorial(std::uint64_t k) {
    static const std::array<double, 16> small = [] {
        std::array<double, 16> t{};
        double acc = 0.0;
        t[0] = 0.0;
        for (std::uint64_t i = 1; i < t.size(); ++i) {
            acc += std::log(static_cast<double>(i));
            t[i] = acc;
        }
        return t;
    }();
    if (k < small.size()) return small[k];
    // Stirling series for log Gamma(k+1)
    const double x = static_cast<double>(k) + 1.0;
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * M_PI) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

}  // namespace detail

}  // namespace qjspec
