#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "rfou/fgn.hpp"
#include "rfou/math.hpp"
#include "rfou/reflect.hpp"

using namespace rfou;
using namespace rfou::reflect;

namespace {

fgn::NoisePair zero_noise(const Grid& g, double H) {
    fgn::NoisePair np;
    np.hurst = H;
    np.fbm = SamplePath(g);
    np.has_bm = false;
    return np;
}

} // namespace

TEST_CASE("skorokhod map: no reflection when the path stays above the barrier") {
    Grid g(1.0, 100);
    SamplePath psi(g);
    for (int i = 0; i <= g.steps; ++i) psi[i] = 2.0 + g.t(i);
    const auto [x, l] = skorokhod_map(psi, 1.0);
    for (int i = 0; i <= g.steps; ++i) {
        CHECK(x[i] == psi[i]);
        CHECK(l[i] == 0.0);
    }
}

TEST_CASE("skorokhod map: deterministic piecewise solution at the barrier") {
    Grid g(1.0, 1000);
    SamplePath psi(g);
    for (int i = 0; i <= g.steps; ++i) psi[i] = 1.0 - 2.0 * g.t(i);
    const auto [x, l] = skorokhod_map(psi, 0.0);
    for (int i = 0; i <= g.steps; ++i) {
        const double t = g.t(i);
        CHECK(x[i] == doctest::Approx(std::max(1.0 - 2.0 * t, 0.0)).epsilon(1e-14));
        CHECK(l[i] == doctest::Approx(std::max(2.0 * t - 1.0, 0.0)).epsilon(1e-14));
    }
}

TEST_CASE("skorokhod map: complementarity on random free paths") {
    Grid g(1.0, 200);
    for (int s = 0; s < 100; ++s) {
        rng_stream rng(derive_seed(3, s));
        SamplePath psi(g);
        psi[0] = 0.3;
        for (int i = 1; i <= g.steps; ++i)
            psi[i] = psi[i - 1] + 0.2 * rng.next_gaussian() - 0.01;
        const auto [x, l] = skorokhod_map(psi, 0.1);
        double viol = 0.0;
        for (int i = 0; i < g.steps; ++i) {
            const double dl = l[i + 1] - l[i];
            CHECK(dl >= 0.0);
            CHECK(x[i] >= 0.1);
            if (x[i + 1] > 0.1 + 1e-12) viol += dl;
        }
        CHECK(viol == 0.0);
    }
    SamplePath below(g);
    below[0] = -1.0;
    CHECK_THROWS_AS(skorokhod_map(below, 0.0), rejected_input_error);
}

TEST_CASE("rfou simulation: reflected brownian mean and invariants") {
    ModelParams p;
    p.alpha = 0.0;
    p.sigma = 1.0;
    p.barrier = 0.0;
    p.x0 = 0.0;
    p.hurst = 0.5;
    Grid g(1.0, 2048); // fine enough that the projection-scheme bias sits inside the band
    const int M = 5000;
    double mean_T = 0.0;
    for (int r = 0; r < M; ++r) {
        const auto noise = fgn::make_noise_fgn(0.5, g, derive_seed(8, r));
        const auto path = simulate_rfou(p, noise);
        mean_T += path.X.back();
    }
    mean_T /= M;
    const double ref = std::sqrt(2.0 / M_PI); // E|N(0,1)|
    const double se = std::sqrt((1.0 - ref * ref) / M);
    CHECK(std::abs(mean_T - ref) <= 3.0 * se);
}

TEST_CASE("rfou simulation: noiseless euler decay and balance identity") {
    ModelParams p;
    p.alpha = 1.3;
    p.sigma = 2.0;
    p.barrier = 0.0;
    p.x0 = 1.0;
    p.hurst = 0.5;
    Grid g(1.0, 128);
    const auto path = simulate_rfou(p, zero_noise(g, 0.5));
    double expect = 1.0;
    for (int i = 0; i <= g.steps; ++i) {
        CHECK(path.X[i] == doctest::Approx(expect).epsilon(1e-13));
        CHECK(path.L[i] == 0.0);
        expect *= (1.0 - p.alpha * g.dt());
    }

    // balance: X_i = x0 - alpha*sum X_j dt + sigma W^H_i + L_i (left-point drift)
    const auto noise = fgn::make_noise_fgn(0.7, g, 99);
    ModelParams q = p;
    q.hurst = 0.7;
    const auto rp = simulate_rfou(q, noise);
    double drift = 0.0;
    for (int i = 0; i <= g.steps; ++i) {
        const double balance = q.x0 - drift + q.sigma * noise.fbm[i] + rp.L[i];
        CHECK(rp.X[i] == doctest::Approx(balance).epsilon(1e-11));
        drift += q.alpha * rp.X[i] * g.dt();
    }
}

TEST_CASE("pathwise inequalities: gronwall, hölder, domination, complementarity") {
    Grid g(2.0, 512);
    const double eps = 0.05;
    for (double H : {0.3, 0.5, 0.7}) {
        ModelParams p;
        p.alpha = 1.0;
        p.sigma = 1.0;
        p.barrier = 0.0;
        p.x0 = 1.0;
        p.hurst = H;
        for (int s = 0; s < 20; ++s) {
            const auto noise = fgn::make_noise_fgn(H, g, derive_seed(12, s));
            const auto path = simulate_rfou(p, noise);
            const auto fou = simulate_fou(p, noise);

            SamplePath xs(g, path.X);
            SamplePath scaled_noise(g);
            for (int i = 0; i <= g.steps; ++i) scaled_noise[i] = p.sigma * noise.fbm[i];

            // Gronwall sup bound
            const double lhs = sup_norm(xs);
            const double rhs = 2.0 * (p.x0 + p.sigma) * std::exp(2.0 * p.alpha * g.horizon) *
                               sup_norm(scaled_noise) / p.sigma;
            CHECK(lhs <= rhs);

            // Hölder bound with the scheme constants
            const double hx = holder_norm(xs, H - eps);
            const double hw = holder_norm(scaled_noise, H - eps);
            CHECK(hx <= 2.0 * p.alpha * lhs * std::pow(g.horizon, 1.0 + eps - H) +
                            2.0 * hw + 1e-12);

            // domination and constraints; X >= Y is exact for the projection
            // scheme whenever alpha*dt < 1 (induction on the recursion)
            for (int i = 0; i <= g.steps; ++i) {
                CHECK(path.X[i] >= 0.0);
                CHECK(path.X[i] >= fou[i]);
            }
            for (int i = 0; i < g.steps; ++i) {
                const double dl = path.L[i + 1] - path.L[i];
                CHECK(dl >= 0.0);
                if (path.X[i + 1] > 1e-12) CHECK(dl == 0.0);
            }
        }
    }
}

TEST_CASE("fou time average stabilizes for positive drift") {
    ModelParams p;
    p.alpha = 1.0;
    p.sigma = 1.0;
    p.barrier = 0.0;
    p.x0 = 1.0;
    p.hurst = 0.7;
    Grid g(200.0, 2000);
    int ok = 0;
    const int M = 50;
    double pool_half = 0.0, pool_full = 0.0;
    for (int s = 0; s < M; ++s) {
        const auto noise = fgn::make_noise_fgn(0.7, g, derive_seed(17, s));
        const auto y = simulate_fou(p, noise);
        double half = 0.0, full = 0.0;
        for (int i = 0; i < g.steps; ++i) {
            const double v = std::abs(y[i]) * g.dt();
            full += v;
            if (i < g.steps / 2) half += v;
        }
        const double avg_half = half / (g.horizon / 2.0);
        const double avg_full = full / g.horizon;
        pool_half += avg_half / M;
        pool_full += avg_full / M;
        if (std::abs(avg_full - avg_half) < 0.2 * std::abs(avg_full)) ++ok;
    }
    // long-memory averages wander path by path; the ensemble stabilizes tightly
    CHECK(std::abs(pool_full - pool_half) < 0.1 * std::abs(pool_full));
    CHECK(ok >= M * 8 / 10);
}

TEST_CASE("hölder and sup norms") {
    Grid g(1.0, 256);
    SamplePath c(g);
    for (int i = 0; i <= g.steps; ++i) c[i] = 3.14;
    CHECK(holder_norm(c, 0.5) == 0.0);
    CHECK(sup_norm(c) == doctest::Approx(3.14));

    SamplePath lin(g);
    for (int i = 0; i <= g.steps; ++i) lin[i] = g.t(i);
    CHECK(holder_norm(lin, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

    SamplePath two(g);
    for (int i = 0; i <= g.steps; ++i) two[i] = 2.0 * lin[i];
    CHECK(holder_norm(two, 0.3) == 2.0 * holder_norm(lin, 0.3));
    CHECK(holder_norm(lin, 0.4, exec::serial) == holder_norm(lin, 0.4, exec::openmp));
    CHECK_THROWS_AS(holder_norm(lin, 1.5), parameter_error);
}

TEST_CASE("simulation is a pure function of parameters and seed") {
    ModelParams p;
    p.alpha = 0.7;
    p.sigma = 1.1;
    p.barrier = 0.2;
    p.x0 = 0.5;
    p.hurst = 0.6;
    Grid g(1.0, 64);
    const auto n1 = fgn::make_noise_fgn(0.6, g, 5);
    const auto n2 = fgn::make_noise_fgn(0.6, g, 5);
    const auto a = simulate_rfou(p, n1);
    const auto b = simulate_rfou(p, n2);
    CHECK(a.X == b.X);
    CHECK(a.L == b.L);
}

TEST_CASE("parameter validation") {
    ModelParams p;
    p.sigma = -1.0;
    CHECK_THROWS_AS(p.validate(), parameter_error);
    p.sigma = 1.0;
    p.barrier = 0.5;
    p.x0 = 0.2;
    CHECK_THROWS_AS(p.validate(), parameter_error);
}
