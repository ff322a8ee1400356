#pragma once
#include <cmath>
#include <cstdint>

namespace rfou {

// Gamma function, Lanczos approximation (g=7, 9 terms).
// Accurate to ~1e-13 relative over the ranges used here; reflection formula below 0.5.
double gamma_fn(double x);
double log_gamma_fn(double x); // x > 0

// Standard normal CDF via erfc.
double normal_cdf(double x);

// Kolmogorov distribution complement Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

namespace detail {

// splitmix64: seed scrambler used for counter-based stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based replication seed: parallel suites derive one stream per
// replication index, so scheduling cannot change results.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t sm = root ^ (0x632be59bd9b4e019ULL * (index + 1));
    return detail::splitmix64(sm);
}

// xoshiro256** stream with deterministic Gaussian draws (polar of uniforms).
// Purely value-semantic so samplers stay pure functions of (parameters, seed).
class rng_stream {
public:
    explicit rng_stream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = detail::splitmix64(sm);
        have_spare_ = false;
        spare_ = 0.0;
    }

    static rng_stream for_replication(std::uint64_t root_seed, std::uint64_t index) {
        return rng_stream(derive_seed(root_seed, index));
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in (0,1)
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method (stdlib-independent for reproducibility)
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * next_uniform() - 1.0;
            v = 2.0 * next_uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t s_[4];
    bool have_spare_;
    double spare_;
};

} // namespace rfou
