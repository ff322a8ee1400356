#include "rfou/math.hpp"

#include <cmath>

#include "rfou/errors.hpp"

namespace rfou {

namespace {

// Lanczos coefficients, g = 7, n = 9 (Godfrey's tabulation).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
    771.32342877765313,     -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7,
};

double lanczos_core(double x) {
    // x >= 0.5; returns Gamma(x)
    x -= 1.0;
    double a = kLanczos[0];
    for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
    const double t = x + kLanczosG + 0.5;
    return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

} // namespace

double gamma_fn(double x) {
    if (std::isnan(x)) throw parameter_error("gamma_fn: NaN argument");
    if (x == std::floor(x) && x <= 0.0) throw parameter_error("gamma_fn: non-positive integer pole");
    if (x < 0.5) {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return M_PI / (std::sin(M_PI * x) * lanczos_core(1.0 - x));
    }
    return lanczos_core(x);
}

double log_gamma_fn(double x) {
    if (!(x > 0.0)) throw parameter_error("log_gamma_fn: needs x > 0");
    if (x < 0.5) return std::log(M_PI / std::sin(M_PI * x)) - log_gamma_fn(1.0 - x);
    const double g = lanczos_core(x);
    return std::log(g);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double kolmogorov_q(double lambda) {
    if (lambda < 1e-10) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    const double q = 2.0 * sum;
    if (q < 0.0) return 0.0;
    if (q > 1.0) return 1.0;
    return q;
}

} // namespace rfou
