#include "rfou/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfou/math.hpp"

namespace rfou::fraccalc {

namespace {

// 16-point Gauss-Legendre on [0,1].
constexpr int kGL = 16;
constexpr double kGLx[kGL] = {
    0.0052995325041750337, 0.0277124884633837103, 0.0671843988060841224, 0.1222977958224984868,
    0.1910618777986781147, 0.2709916111713863151, 0.3591982246103705422, 0.4524937450811812866,
    0.5475062549188187134, 0.6408017753896294578, 0.7290083888286136849, 0.8089381222013218853,
    0.8777022041775015132, 0.9328156011939158776, 0.9722875115366162897, 0.9947004674958249663,
};
constexpr double kGLw[kGL] = {
    0.0135762297058770482, 0.0311267619693239468, 0.0475792558412463928, 0.0623144856277669384,
    0.0747979944082883680, 0.0845782596975012679, 0.0913017075224617918, 0.0947253052275342510,
    0.0947253052275342510, 0.0913017075224617918, 0.0845782596975012679, 0.0747979944082883680,
    0.0623144856277669384, 0.0475792558412463928, 0.0311267619693239468, 0.0135762297058770482,
};

double gl16(double a, double b, const std::function<double(double)>& F) {
    const double len = b - a;
    double acc = 0.0;
    for (int q = 0; q < kGL; ++q) acc += kGLw[q] * F(a + len * kGLx[q]);
    return acc * len;
}

// int_a^b F with F ~ (s-a)^e near a; substitution s = a + (b-a) z^(1/(1+e)).
double gl16_left_power(double a, double b, double e, const std::function<double(double)>& F) {
    if (e == 0.0) return gl16(a, b, F);
    const double p = 1.0 / (1.0 + e);
    const double len = b - a;
    double acc = 0.0;
    for (int q = 0; q < kGL; ++q) {
        const double z = kGLx[q];
        const double zp = std::pow(z, p);
        acc += kGLw[q] * F(a + len * zp) * p * zp / z;
    }
    return acc * len;
}

double gl16_right_power(double a, double b, double e, const std::function<double(double)>& F) {
    if (e == 0.0) return gl16(a, b, F);
    return gl16_left_power(a, b, e, [&](double s) { return F(a + b - s); });
}

void validate_order_unit(double order, const char* what) {
    if (!(order > 0.0) || !(order < 1.0))
        throw parameter_error(std::string(what) + ": order must lie in (0,1)");
}

SampledFn reversed(const SampledFn& f) {
    SampledFn r(f.grid);
    const int n = f.grid.steps;
    for (int i = 0; i <= n; ++i) r[i] = f[n - i];
    return r;
}

// Core of I^a on (0,1]: per-node product-integration sums with lag tables.
SampledFn rl_integral_core(const SampledFn& f, double a, exec policy) {
    const int n = f.grid.steps;
    const double dt = f.grid.dt();
    const double inv_gamma = 1.0 / gamma_fn(a);

    // P(m) = int over cell at lag m of v^(a-1) dv, Q(m) = m*dt*P(m) - int v^a dv
    std::vector<double> P(n + 1), Q(n + 1);
    {
        const double ca = std::pow(dt, a) / a;
        const double cb = std::pow(dt, a + 1.0) / (a + 1.0);
        double pa_prev = 0.0, pb_prev = 0.0;
        for (int m = 1; m <= n; ++m) {
            const double pa = std::pow(double(m), a);
            const double pb = std::pow(double(m), a + 1.0);
            P[m] = ca * (pa - pa_prev);
            Q[m] = m * dt * P[m] - cb * (pb - pb_prev);
            pa_prev = pa;
            pb_prev = pb;
        }
    }

    std::vector<double> slope(n);
    for (int j = 0; j < n; ++j) slope[j] = (f[j + 1] - f[j]) / dt;

    SampledFn out(f.grid);
    const double* fv = f.values.data();
    for_each_index_dynamic(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii) + 1;
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            const int m = i - j;
            acc += fv[j] * P[m] + slope[j] * Q[m];
        }
        out[i] = inv_gamma * acc;
    });
    out[0] = 0.0;
    return out;
}

// Core of the Marchaud derivative D^b, b in (0,1), with a pluggable handler for
// the first cell (the weighted variants integrate u^w exactly there).
template <class Cell0>
SampledFn marchaud_core(const SampledFn& g, double b, exec policy, Cell0&& cell0,
                        double node0_value) {
    const int n = g.grid.steps;
    const double dt = g.grid.dt();
    const double inv_gamma = 1.0 / gamma_fn(1.0 - b);
    const double last_cell_factor = std::pow(dt, 1.0 - b) / (1.0 - b);

    // W0(m) = int v^(-b-1) over lag-m cell, Q2(m) = m*dt*W0(m) - int v^(-b)
    std::vector<double> W0(n + 1, 0.0), Q2(n + 1, 0.0);
    {
        const double ca = std::pow(dt, -b) / b;
        const double cb = std::pow(dt, 1.0 - b) / (1.0 - b);
        double pa_prev = 1.0, pb_prev = 1.0; // m = 1 values of m^-b, m^(1-b)
        for (int m = 2; m <= n; ++m) {
            const double pa = std::pow(double(m), -b);
            const double pb = std::pow(double(m), 1.0 - b);
            W0[m] = ca * (pa_prev - pa);
            Q2[m] = m * dt * W0[m] - cb * (pb - pb_prev);
            pa_prev = pa;
            pb_prev = pb;
        }
    }

    std::vector<double> slope(n);
    for (int j = 0; j < n; ++j) slope[j] = (g[j + 1] - g[j]) / dt;

    SampledFn out(g.grid);
    const double* gv = g.values.data();
    for_each_index_dynamic(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii) + 1;
        const double gi = gv[i];
        const double ti = g.grid.t(i);
        double acc = slope[i - 1] * last_cell_factor;
        for (int j = 1; j < i - 1; ++j) {
            const int m = i - j;
            acc += (gi - gv[j]) * W0[m] - slope[j] * Q2[m];
        }
        if (i >= 2) acc += cell0(i, gi);
        out[i] = inv_gamma * (gi * std::pow(ti, -b) + b * acc);
    });
    out[0] = node0_value;
    return out;
}

} // namespace

namespace detail {
double singular_cell_integral(double a, double b, double e_left, double e_right,
                              const std::function<double(double)>& F) {
    if (e_left != 0.0 && e_right != 0.0) {
        const double mid = 0.5 * (a + b);
        return gl16_left_power(a, mid, e_left, F) + gl16_right_power(mid, b, e_right, F);
    }
    if (e_left != 0.0) return gl16_left_power(a, b, e_left, F);
    if (e_right != 0.0) return gl16_right_power(a, b, e_right, F);
    return gl16(a, b, F);
}
} // namespace detail

SampledFn frac_integral_left(const SampledFn& f, double order, exec policy) {
    require_finite(f, "frac_integral_left");
    if (!(order > 0.0) || !(order < 2.0))
        throw parameter_error("frac_integral_left: order must lie in (0,2)");
    if (order > 1.0) // semigroup composition I^1 ∘ I^(order-1)
        return rl_integral_core(rl_integral_core(f, order - 1.0, policy), 1.0, policy);
    return rl_integral_core(f, order, policy);
}

SampledFn frac_integral_right(const SampledFn& f, double order, exec policy) {
    require_finite(f, "frac_integral_right");
    validate_order_unit(order, "frac_integral_right");
    return reversed(rl_integral_core(reversed(f), order, policy));
}

SampledFn frac_derivative_left(const SampledFn& f, double order, exec policy) {
    require_finite(f, "frac_derivative_left");
    validate_order_unit(order, "frac_derivative_left");
    const double dt = f.grid.dt();
    const double node0 = (f[0] == 0.0)
                             ? 0.0
                             : f[0] / (gamma_fn(1.0 - order) * std::pow(dt, order));
    // first cell enters as an ordinary chord cell (f finite at 0 by precondition)
    const double* fv = f.values.data();
    const double b = order;
    auto cell0 = [&, b](int i, double gi) {
        const double ti = f.grid.t(i);
        const double v_hi = ti, v_lo = ti - dt;
        const double W0 = (std::pow(v_lo, -b) - std::pow(v_hi, -b)) / b;
        const double W1 = (std::pow(v_hi, 1.0 - b) - std::pow(v_lo, 1.0 - b)) / (1.0 - b);
        const double slope0 = (fv[1] - fv[0]) / dt;
        return (gi - fv[0]) * W0 - slope0 * (ti * W0 - W1);
    };
    return marchaud_core(f, order, policy, cell0, node0);
}

SampledFn frac_derivative_right(const SampledFn& f, double order, exec policy) {
    require_finite(f, "frac_derivative_right");
    validate_order_unit(order, "frac_derivative_right");
    return reversed(frac_derivative_left(reversed(f), order, policy));
}

SampledFn frac_integral_left_weighted(const SampledFn& f, double wexp, double order,
                                      exec policy) {
    require_finite(f, "frac_integral_left_weighted");
    validate_order_unit(order, "frac_integral_left_weighted");
    if (!(wexp > -1.0) || !(wexp < 1.0))
        throw parameter_error("frac_integral_left_weighted: weight exponent must lie in (-1,1)");
    const int n = f.grid.steps;
    const double dt = f.grid.dt();
    const double a = order;

    SampledFn g(f.grid);
    for (int i = 1; i <= n; ++i) g[i] = std::pow(f.grid.t(i), wexp) * f[i];
    g[0] = (wexp == 0.0) ? f[0] : 0.0; // arbitrary: the chord through it is removed below

    SampledFn out = rl_integral_core(g, a, policy);

    // swap the first-cell chord contribution for the exact weighted integral
    const double f0 = f[0];
    const double slope0 = (f[1] - f[0]) / dt;
    const double inv_gamma = 1.0 / gamma_fn(a);
    for_each_index(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii) + 1;
        const double ti = f.grid.t(i);
        // chord term that rl_integral_core already added for cell 0
        const int m = i;
        const double ca = std::pow(dt, a) / a;
        const double cb = std::pow(dt, a + 1.0) / (a + 1.0);
        const double P = ca * (std::pow(double(m), a) - std::pow(double(m - 1), a));
        const double Q = m * dt * P - cb * (std::pow(double(m), a + 1.0) - std::pow(double(m - 1), a + 1.0));
        const double chord = g[0] * P + ((g[1] - g[0]) / dt) * Q;
        const double e_right = (i == 1) ? (a - 1.0) : 0.0;
        const double exact = detail::singular_cell_integral(
            0.0, dt, wexp, e_right, [&](double s) {
                return std::pow(s, wexp) * (f0 + slope0 * s) * std::pow(ti - s, a - 1.0);
            });
        out[i] += inv_gamma * (exact - chord);
    });
    return out;
}

SampledFn frac_derivative_left_weighted(const SampledFn& f, double wexp, double order,
                                        exec policy) {
    require_finite(f, "frac_derivative_left_weighted");
    validate_order_unit(order, "frac_derivative_left_weighted");
    if (!(wexp > -1.0) || !(wexp < 1.0))
        throw parameter_error("frac_derivative_left_weighted: weight exponent must lie in (-1,1)");
    const int n = f.grid.steps;
    const double dt = f.grid.dt();
    const double b = order;

    SampledFn g(f.grid);
    for (int i = 1; i <= n; ++i) g[i] = std::pow(f.grid.t(i), wexp) * f[i];
    g[0] = (wexp == 0.0) ? f[0] : 0.0;

    const double f0 = f[0];
    const double slope0 = (f[1] - f[0]) / dt;

    auto cell0 = [&](int i, double gi) {
        const double ti = f.grid.t(i);
        if (i == 1) return 0.0; // handled below: whole integral is the first cell
        const double v_hi = ti, v_lo = ti - dt;
        const double V0 = (std::pow(v_lo, -b) - std::pow(v_hi, -b)) / b;
        const double moment = detail::singular_cell_integral(
            0.0, dt, wexp, 0.0, [&](double s) {
                return std::pow(s, wexp) * (f0 + slope0 * s) * std::pow(ti - s, -b - 1.0);
            });
        return gi * V0 - moment;
    };

    SampledFn out = marchaud_core(g, b, policy, cell0, 0.0);

    // node 1: the difference integral spans exactly the weighted first cell
    {
        const double t1 = f.grid.t(1);
        const double g1 = g[1];
        const double diff = detail::singular_cell_integral(
            0.0, t1, wexp, -b, [&](double s) {
                return (g1 - std::pow(s, wexp) * (f0 + slope0 * s)) * std::pow(t1 - s, -b - 1.0);
            });
        out[1] = (g1 * std::pow(t1, -b) + b * diff) / gamma_fn(1.0 - b);
    }
    return out;
}

double discrete_holder_exponent(const SampledFn& f) {
    const int n = f.grid.steps;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (int lag = 1; lag <= n / 4; lag *= 2) {
        double osc = 0.0;
        for (int i = 0; i + lag <= n; ++i) osc = std::max(osc, std::abs(f[i + lag] - f[i]));
        if (osc <= 0.0) continue;
        const double x = std::log(lag * f.grid.dt());
        const double y = std::log(osc);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt < 2) return 1.0; // constant function: any exponent works
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return std::clamp(slope, 0.0, 1.0);
}

double young_integral(const SampledFn& f, const SampledFn& g, double order) {
    require_same_grid(f.grid, g.grid, "young_integral");
    require_finite(f, "young_integral");
    require_finite(g, "young_integral");
    validate_order_unit(order, "young_integral");

    const double hf = discrete_holder_exponent(f);
    const double hg = discrete_holder_exponent(g);
    constexpr double kMargin = 0.15;
    if (hf + hg < 1.0 - kMargin)
        throw parameter_error("young_integral: Hölder exponents sum below 1");
    if (order > hf + kMargin || 1.0 - order > hg + kMargin)
        throw parameter_error("young_integral: order outside the admissible exponent window");

    SampledFn g_anchored(g.grid);
    const int n = g.grid.steps;
    for (int i = 0; i <= n; ++i) g_anchored[i] = g[i] - g[n];

    const SampledFn df = frac_derivative_left(f, order);
    const SampledFn dg = frac_derivative_right(g_anchored, 1.0 - order);

    const double dt = f.grid.dt();
    double acc = 0.5 * (df[0] * dg[0] + df[n] * dg[n]);
    for (int i = 1; i < n; ++i) acc += df[i] * dg[i];
    // the dropped phases (-1)^order and (-1)^(1-order) multiply to -1 exactly,
    // so the real-valued product needs one global sign flip
    return -acc * dt;
}

} // namespace rfou::fraccalc
