#include "rfou/reflect.hpp"

#include <algorithm>
#include <cmath>

#include "rfou/errors.hpp"

namespace rfou::reflect {

void ModelParams::validate() const {
    if (!(sigma > 0.0)) throw parameter_error("ModelParams: sigma must be positive");
    if (barrier < 0.0) throw parameter_error("ModelParams: barrier must be non-negative");
    if (x0 < barrier) throw parameter_error("ModelParams: x0 must not start below the barrier");
    if (!(hurst > 0.0) || !(hurst < 1.0)) throw parameter_error("ModelParams: H must lie in (0,1)");
}

std::pair<SamplePath, SamplePath> skorokhod_map(const SamplePath& free_path, double barrier) {
    require_finite(free_path, "skorokhod_map");
    if (free_path[0] < barrier)
        throw rejected_input_error("skorokhod_map: initial value below barrier");
    const int n = free_path.grid.steps;
    SamplePath X(free_path.grid), L(free_path.grid);
    double running = 0.0; // sup_{s<=t} (b - psi_s), clipped at 0
    for (int i = 0; i <= n; ++i) {
        running = std::max(running, barrier - free_path[i]);
        L[i] = running;
        // psi + (b - psi) can land one ulp under b; pin the constraint bit-exactly
        X[i] = std::max(barrier, free_path[i] + running);
    }
    return {std::move(X), std::move(L)};
}

RfouPath simulate_rfou(const ModelParams& params, const fgn::NoisePair& noise) {
    params.validate();
    const Grid& grid = noise.fbm.grid;
    const int n = grid.steps;
    const double dt = grid.dt();
    RfouPath path;
    path.grid = grid;
    path.params = params;
    path.noise = noise;
    path.X.assign(n + 1, 0.0);
    path.L.assign(n + 1, 0.0);
    path.X[0] = params.x0;
    for (int i = 0; i < n; ++i) {
        const double dw = noise.fbm[i + 1] - noise.fbm[i];
        const double free_step = path.X[i] - params.alpha * path.X[i] * dt + params.sigma * dw;
        const double push = std::max(0.0, params.barrier - free_step);
        path.X[i + 1] = free_step + push;
        path.L[i + 1] = path.L[i] + push;
    }
    return path;
}

SamplePath simulate_fou(const ModelParams& params, const fgn::NoisePair& noise) {
    params.validate();
    const Grid& grid = noise.fbm.grid;
    const double dt = grid.dt();
    SamplePath y(grid);
    y[0] = params.x0;
    for (int i = 0; i < grid.steps; ++i) {
        const double dw = noise.fbm[i + 1] - noise.fbm[i];
        y[i + 1] = y[i] - params.alpha * y[i] * dt + params.sigma * dw;
    }
    return y;
}

double holder_norm(const SamplePath& path, double beta, exec policy) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw parameter_error("holder_norm: beta must lie in (0,1)");
    const int n = path.grid.steps;
    const double dt = path.grid.dt();
    // precomputed lag powers; max over pairs split by left node
    std::vector<double> lagpow(n + 1, 0.0);
    for (int m = 1; m <= n; ++m) lagpow[m] = std::pow(m * dt, -beta);
    std::vector<double> best(n, 0.0);
    for_each_index(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii);
        double b = 0.0;
        const double xi = path[i];
        for (int r = i + 1; r <= n; ++r)
            b = std::max(b, std::abs(path[r] - xi) * lagpow[r - i]);
        best[i] = b;
    });
    double out = 0.0;
    for (double b : best) out = std::max(out, b);
    return out;
}

double sup_norm(const SamplePath& path) {
    double out = 0.0;
    for (double v : path.values) out = std::max(out, std::abs(v));
    return out;
}

} // namespace rfou::reflect
