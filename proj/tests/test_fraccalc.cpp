#include <doctest.h>

#include <cmath>
#include <functional>

#include "rfou/fraccalc.hpp"
#include "rfou/math.hpp"

using namespace rfou;
using namespace rfou::fraccalc;

namespace {

SampledFn make_fn(const Grid& g, const std::function<double(double)>& f) {
    SampledFn out(g);
    for (int i = 0; i <= g.steps; ++i) out[i] = f(g.t(i));
    return out;
}

// relative L-infinity error against a reference, normalized by the sup of the reference
double rel_linf(const SampledFn& a, const std::function<double(double)>& ref, int from = 1) {
    double err = 0.0, scale = 0.0;
    for (int i = from; i <= a.grid.steps; ++i) {
        const double r = ref(a.grid.t(i));
        err = std::max(err, std::abs(a[i] - r));
        scale = std::max(scale, std::abs(r));
    }
    return err / scale;
}

double rel_linf_between(const SampledFn& a, const SampledFn& b, int from = 1) {
    double err = 0.0, scale = 0.0;
    for (int i = from; i <= a.grid.steps; ++i) {
        err = std::max(err, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return err / scale;
}

} // namespace

TEST_CASE("left integral of order 1 is the running integral") {
    Grid g(1.0, 512);
    const auto out = frac_integral_left(make_fn(g, [](double) { return 1.0; }), 1.0);
    for (int i = 0; i <= g.steps; ++i)
        CHECK(out[i] == doctest::Approx(g.t(i)).epsilon(1e-12));
}

TEST_CASE("power rule for left integrals") {
    Grid g(1.0, 2048);
    // I^a t^k = Gamma(k+1)/Gamma(k+1+a) t^(k+a)
    for (double a : {0.3, 0.5, 0.8}) {
        for (int k : {0, 1, 2}) {
            const auto f = make_fn(g, [k](double t) { return std::pow(t, k); });
            const auto out = frac_integral_left(f, a);
            const double c = gamma_fn(k + 1.0) / gamma_fn(k + 1.0 + a);
            CHECK(rel_linf(out, [&](double t) { return c * std::pow(t, k + a); }) < 1e-3);
        }
    }
    // closed form: I^0.5 applied to 1 gives t^0.5/Gamma(1.5)
    const auto one = frac_integral_left(make_fn(g, [](double) { return 1.0; }), 0.5);
    CHECK(one[g.steps] == doctest::Approx(1.0 / gamma_fn(1.5)).epsilon(1e-4));
    CHECK(one[g.steps] == doctest::Approx(1.1283791670955126).epsilon(1e-4));
    const auto lin = frac_integral_left(make_fn(g, [](double t) { return t; }), 0.5);
    CHECK(lin[g.steps] == doctest::Approx(gamma_fn(2.0) / gamma_fn(2.5)).epsilon(1e-6));
}

TEST_CASE("power-rule error shrinks under refinement") {
    auto err_at = [](int n) {
        Grid g(1.0, n);
        SampledFn f(g);
        for (int i = 0; i <= n; ++i) f[i] = g.t(i) * g.t(i);
        const auto out = frac_integral_left(f, 0.5);
        const double c = gamma_fn(3.0) / gamma_fn(3.5);
        double err = 0.0, scale = 0.0;
        for (int i = 1; i <= n; ++i) {
            const double r = c * std::pow(g.t(i), 2.5);
            err = std::max(err, std::abs(out[i] - r));
            scale = std::max(scale, std::abs(r));
        }
        return err / scale;
    };
    CHECK(err_at(512) / err_at(2048) > 1.5);
}

TEST_CASE("orders above one compose through the semigroup") {
    Grid g(1.0, 1024);
    const auto f = make_fn(g, [](double t) { return std::sin(t); });
    const auto direct = frac_integral_left(f, 1.5);
    const auto composed = frac_integral_left(frac_integral_left(f, 0.75), 0.75);
    CHECK(rel_linf_between(direct, composed) < 1e-3);
}

TEST_CASE("right integral mirrors the left one") {
    Grid g(1.0, 2048);
    const auto one = frac_integral_right(make_fn(g, [](double) { return 1.0; }), 0.5);
    // value at t=0 equals 1/Gamma(1.5)
    CHECK(one[0] == doctest::Approx(1.0 / gamma_fn(1.5)).epsilon(1e-4));
    const auto zero = frac_integral_right(make_fn(g, [](double) { return 0.0; }), 0.5);
    for (int i = 0; i <= g.steps; ++i) CHECK(zero[i] == 0.0);
    const auto mirror = frac_integral_right(make_fn(g, [](double t) { return 1.0 - t; }), 0.5);
    CHECK(mirror[0] == doctest::Approx(gamma_fn(2.0) / gamma_fn(2.5)).epsilon(1e-6));
}

TEST_CASE("left derivative of a constant") {
    Grid g(1.0, 2048);
    for (double a : {0.25, 0.5, 0.75}) {
        const auto out = frac_derivative_left(make_fn(g, [](double) { return 2.0; }), a);
        const double c = 2.0 / gamma_fn(1.0 - a);
        CHECK(rel_linf(out, [&](double t) { return c * std::pow(t, -a); }) < 2e-3);
    }
}

TEST_CASE("derivative power rule: D^0.5 t at t=1 is 2/sqrt(pi)") {
    Grid g(1.0, 2048);
    const auto out = frac_derivative_left(make_fn(g, [](double t) { return t; }), 0.5);
    CHECK(out[g.steps] == doctest::Approx(2.0 / std::sqrt(M_PI)).epsilon(1e-6));
    CHECK(rel_linf(out, [](double t) { return std::sqrt(t) / gamma_fn(1.5); }) < 1e-6);
}

TEST_CASE("right derivative of a constant matches the mirrored closed form") {
    Grid g(2.0, 2048);
    const double a = 0.35;
    const auto out = frac_derivative_right(make_fn(g, [](double) { return 1.0; }), a);
    const double c = 1.0 / gamma_fn(1.0 - a);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < g.steps; ++i) {
        const double r = c * std::pow(g.horizon - g.t(i), -a);
        err = std::max(err, std::abs(out[i] - r));
        scale = std::max(scale, std::abs(r));
    }
    CHECK(err / scale < 2e-3);
    const auto zero = frac_derivative_right(make_fn(g, [](double) { return 0.0; }), a);
    for (int i = 0; i <= g.steps; ++i) CHECK(zero[i] == 0.0);
}

TEST_CASE("inversion round trips improve under refinement") {
    auto roundtrip_err = [](int n, bool right_side) {
        Grid g(1.0, n);
        const auto f = make_fn(g, [&](double t) {
            const double u = right_side ? 1.0 - t : t;
            return u * u * (1.0 + 0.5 * std::sin(3.0 * u)); // smooth, vanishes at the anchor
        });
        const double a = 0.4;
        const SampledFn rt = right_side
            ? frac_derivative_right(frac_integral_right(f, a), a)
            : frac_derivative_left(frac_integral_left(f, a), a);
        double err = 0.0, scale = 0.0;
        for (int i = 0; i <= n; ++i) {
            err = std::max(err, std::abs(rt[i] - f[i]));
            scale = std::max(scale, std::abs(f[i]));
        }
        return err / scale;
    };
    for (bool right : {false, true}) {
        const double e1 = roundtrip_err(1 << 10, right);
        const double e2 = roundtrip_err(1 << 11, right);
        CHECK(e1 < 1e-2);
        CHECK(e1 / e2 >= 1.5);
    }
}

TEST_CASE("integral of derivative recovers f when f(0)=0") {
    Grid g(1.0, 2048);
    const auto f = make_fn(g, [](double t) { return t * (1.0 - 0.3 * t); });
    const auto rt = frac_integral_left(frac_derivative_left(f, 0.3), 0.3);
    CHECK(rel_linf_between(rt, f) < 1e-2);
}

TEST_CASE("semigroup property with refinement ratio") {
    auto err_at = [](int n) {
        Grid g(1.0, n);
        const auto f = make_fn(g, [](double t) { return std::cos(2.0 * t); });
        const auto ab = frac_integral_left(frac_integral_left(f, 0.35), 0.45);
        const auto sum = frac_integral_left(f, 0.8);
        double err = 0.0, scale = 0.0;
        for (int i = 0; i <= n; ++i) {
            err = std::max(err, std::abs(ab[i] - sum[i]));
            scale = std::max(scale, std::abs(sum[i]));
        }
        return err / scale;
    };
    const double e1 = err_at(1 << 10), e2 = err_at(1 << 11);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 >= 1.5);
}

TEST_CASE("linearity to machine precision") {
    Grid g(1.0, 256);
    const auto f = make_fn(g, [](double t) { return std::sin(5.0 * t); });
    const auto h = make_fn(g, [](double t) { return std::exp(-t); });
    SampledFn combo(g);
    for (int i = 0; i <= g.steps; ++i) combo[i] = 2.0 * f[i] - 3.0 * h[i];
    for (double a : {0.4}) {
        const auto lhs_i = frac_integral_left(combo, a);
        const auto fi = frac_integral_left(f, a);
        const auto hi = frac_integral_left(h, a);
        for (int i = 0; i <= g.steps; ++i)
            CHECK(lhs_i[i] == doctest::Approx(2.0 * fi[i] - 3.0 * hi[i]).epsilon(1e-11));
        const auto lhs_d = frac_derivative_left(combo, a);
        const auto fd = frac_derivative_left(f, a);
        const auto hd = frac_derivative_left(h, a);
        for (int i = 1; i <= g.steps; ++i)
            CHECK(lhs_d[i] ==
                  doctest::Approx(2.0 * fd[i] - 3.0 * hd[i]).epsilon(1e-10).scale(10.0));
    }
}

TEST_CASE("integration by parts on compact bumps") {
    Grid g(1.0, 4096);
    auto bump = [](double c, double w) {
        return [c, w](double t) {
            const double u = (t - c) / w;
            return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        };
    };
    const auto f = make_fn(g, bump(0.35, 0.2));
    const auto h = make_fn(g, bump(0.6, 0.25));
    const double a = 0.4;
    const auto df = frac_derivative_left(f, a);
    const auto dh = frac_derivative_right(h, a);
    double lhs = 0.0, rhs = 0.0;
    const double dt = g.dt();
    for (int i = 0; i <= g.steps; ++i) {
        lhs += df[i] * h[i] * dt;
        rhs += f[i] * dh[i] * dt;
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
}

TEST_CASE("young integral special cases") {
    Grid g(1.0, 2048);
    const auto one = make_fn(g, [](double) { return 1.0; });
    const auto lin = make_fn(g, [](double t) { return t; });
    const auto smooth = make_fn(g, [](double t) { return std::sin(2.0 * t) + 0.5 * t; });

    // int 1 dg = g(T) - g(0)
    CHECK(young_integral(one, smooth, 0.25) ==
          doctest::Approx(smooth[g.steps] - smooth[0]).epsilon(5e-3));
    // int t dt = 1/2
    CHECK(young_integral(lin, lin, 0.25) == doctest::Approx(0.5).epsilon(5e-3));

    // sine against itself vs a midpoint Riemann-Stieltjes oracle
    const auto f = make_fn(g, [](double t) { return std::sin(3.0 * t); });
    double rs = 0.0;
    for (int i = 0; i < g.steps; ++i)
        rs += 0.5 * (f[i] + f[i + 1]) * (f[i + 1] - f[i]);
    CHECK(young_integral(f, f, 0.5) == doctest::Approx(rs).epsilon(1e-2));
}

TEST_CASE("young integral rejects an empty exponent window") {
    Grid g(1.0, 1024);
    // Weierstrass-type function with Hölder exponent ~0.3; two of them cannot
    // satisfy the sum-above-one requirement
    auto weier = [](double t) {
        double v = 0.0;
        for (int k = 0; k < 14; ++k)
            v += std::pow(2.0, -0.3 * k) * std::sin(std::pow(2.0, k) * 6.0 * t + 0.7 * k);
        return v;
    };
    const auto rough = make_fn(g, weier);
    CHECK_THROWS_AS(young_integral(rough, rough, 0.5), parameter_error);
}

TEST_CASE("weighted operators reproduce power-law closed forms") {
    Grid g(1.0, 2048);
    const auto one = make_fn(g, [](double) { return 1.0; });
    // I^a (u^w) = Gamma(w+1)/Gamma(w+1+a) t^(w+a), here with singular w<0
    {
        const double w = -0.2, a = 0.2;
        const auto out = frac_integral_left_weighted(one, w, a);
        const double c = gamma_fn(w + 1.0) / gamma_fn(w + 1.0 + a);
        CHECK(rel_linf(out, [&](double t) { return c * std::pow(t, w + a); }) < 1e-2);
    }
    // D^b (u^w) = Gamma(w+1)/Gamma(w+1-b) t^(w-b)
    {
        const double w = -0.2, b = 0.2;
        const auto out = frac_derivative_left_weighted(one, w, b);
        const double c = gamma_fn(w + 1.0) / gamma_fn(w + 1.0 - b);
        CHECK(rel_linf(out, [&](double t) { return c * std::pow(t, w - b); }) < 1e-2);
    }
    // with t-weight exponent zero the weighted op agrees with the plain one
    {
        const auto f = make_fn(g, [](double t) { return std::cos(t); });
        const auto w0 = frac_derivative_left_weighted(f, 0.0, 0.3);
        const auto plain = frac_derivative_left(f, 0.3);
        CHECK(rel_linf_between(w0, plain) < 1e-12);
    }
}

TEST_CASE("weighted derivative handles the sufficient-statistic kernel shape") {
    // D^(H-1/2)(u^(1/2-H) * u^(H+1/2)) = D^(H-1/2) u = t^(3/2-H)/Gamma(5/2-H) ... scaled
    Grid g(1.0, 2048);
    const double H = 0.7;
    const auto f = make_fn(g, [&](double t) { return std::pow(t, H + 0.5); });
    const auto out = frac_derivative_left_weighted(f, 0.5 - H, H - 0.5);
    const double c = gamma_fn(2.0) / gamma_fn(2.0 - (H - 0.5));
    CHECK(rel_linf(out, [&](double t) { return c * std::pow(t, 1.5 - H); }) < 2e-3);
}

TEST_CASE("rejects bad input") {
    Grid g(1.0, 16);
    SampledFn f(g);
    f[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(frac_integral_left(f, 0.5), rejected_input_error);
    SampledFn ok(g);
    CHECK_THROWS_AS(frac_integral_left(ok, 2.5), parameter_error);
    CHECK_THROWS_AS(frac_derivative_left(ok, 1.5), parameter_error);
    CHECK_THROWS_AS(frac_derivative_left(ok, 0.0), parameter_error);
}

TEST_CASE("serial and openmp policies agree bitwise") {
    Grid g(1.0, 777);
    const auto f = make_fn(g, [](double t) { return std::sin(7.0 * t) + t * t; });
    const auto a = frac_derivative_left(f, 0.45, exec::serial);
    const auto b = frac_derivative_left(f, 0.45, exec::openmp);
    for (int i = 0; i <= g.steps; ++i) CHECK(a[i] == b[i]);
    const auto c = frac_integral_left(f, 0.6, exec::serial);
    const auto d = frac_integral_left(f, 0.6, exec::openmp);
    for (int i = 0; i <= g.steps; ++i) CHECK(c[i] == d[i]);
}
