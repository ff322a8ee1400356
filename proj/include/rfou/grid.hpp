#pragma once
#include <cmath>
#include <vector>

#include "rfou/errors.hpp"

namespace rfou {

// Uniform time discretization of [0, T]: nodes t_i = i*T/n, i = 0..n.
struct Grid {
    double horizon = 1.0;
    int steps = 2;

    Grid() = default;
    Grid(double T, int n) : horizon(T), steps(n) {
        if (!(T > 0.0) || !std::isfinite(T)) throw parameter_error("Grid: horizon must be positive");
        if (n < 2) throw parameter_error("Grid: need at least 2 steps");
    }

    double dt() const { return horizon / steps; }
    double t(int i) const { return horizon * static_cast<double>(i) / steps; }
    int nodes() const { return steps + 1; }

    bool operator==(const Grid& o) const { return horizon == o.horizon && steps == o.steps; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Real-valued function sampled on a Grid. Doubles as a sampled stochastic path.
struct SampledFn {
    Grid grid;
    std::vector<double> values;

    SampledFn() = default;
    SampledFn(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.nodes())
            throw structural_error("SampledFn: value count must equal node count");
    }
    explicit SampledFn(Grid g) : grid(g), values(g.nodes(), 0.0) {}

    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    int nodes() const { return grid.nodes(); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

using SamplePath = SampledFn;

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b) throw structural_error(std::string(what) + ": grid mismatch");
}

inline void require_finite(const SampledFn& f, const char* what) {
    if (!f.all_finite()) throw rejected_input_error(std::string(what) + ": non-finite input values");
}

} // namespace rfou
