#pragma once
#include <utility>

#include "rfou/fgn.hpp"
#include "rfou/grid.hpp"
#include "rfou/parallel.hpp"

namespace rfou::reflect {

// Reflected Ornstein-Uhlenbeck model: dX = -alpha X dt + sigma dW^H + dL, X >= b.
struct ModelParams {
    double alpha = 1.0;   // drift, any sign
    double sigma = 1.0;   // > 0
    double barrier = 0.0; // b >= 0
    double x0 = 0.0;      // initial state, >= barrier
    double hurst = 0.5;

    void validate() const;
};

// Jointly sampled state, local time and driving noise of one trajectory.
// Invariants: X >= b everywhere, L non-decreasing from 0, dL > 0 only where
// the next state sits on the barrier, and the Euler balance identity
// X_i = x0 - alpha*sum X_j dt + sigma W^H_i + L_i holds to rounding.
struct RfouPath {
    Grid grid;
    std::vector<double> X;
    std::vector<double> L;
    ModelParams params;
    fgn::NoisePair noise;
};

// Discrete Skorokhod reflection of a given free path at barrier b:
//   L_t = max(0, sup_{s<=t} (b - psi_s)),  X = psi + L.
// Returns (X, L).
std::pair<SamplePath, SamplePath> skorokhod_map(const SamplePath& free_path, double barrier);

// Euler scheme with per-step projection (equivalent to per-step reflection):
//   Xhat = X_i - alpha X_i dt + sigma dW^H_i;  X_{i+1} = max(b, Xhat);
//   dL_i = max(0, b - Xhat).
RfouPath simulate_rfou(const ModelParams& params, const fgn::NoisePair& noise);

// Unreflected companion on the same noise and scheme (barrier ignored).
SamplePath simulate_fou(const ModelParams& params, const fgn::NoisePair& noise);

// Discrete Hölder seminorm max |x_r - x_s| / |t_r - t_s|^beta over node pairs.
double holder_norm(const SamplePath& path, double beta, exec policy = exec::openmp);

// max_i |x_i|
double sup_norm(const SamplePath& path);

} // namespace rfou::reflect
