#pragma once
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rfou/grid.hpp"
#include "rfou/math.hpp"
#include "rfou/parallel.hpp"

namespace rfou::fgn {

// Hurst index plus derived constants and (lazily built) tabulated kernels.
// Immutable after construction; the dense cell-averaged tables are guarded to
// steps <= 4096 and shared, so copies are cheap and thread-safe to read.
struct KernelSet {
    double hurst = 0.5;
    double b_h = 1.0;      // normalization of the Volterra kernel K_H
    double c_h = 0.0;      // b_h * (H - 1/2)
    double kappa_h = 1.0;  // 2H Gamma(3/2-H) Gamma(H+1/2)
    double lambda_h = 1.0; // 2H Gamma(3-2H) Gamma(H+1/2) / Gamma(3/2-H)
    Grid grid;

    // quadratic variation of the fundamental martingale: <M>_t = t^(2-2H)/lambda_h
    double qv(double t) const;
    double qv_node(int i) const { return qv(grid.t(i)); }

    // Cell-averaged kernel tables, packed lower-triangular (row i >= 1, col j < i):
    //   K_bar(i,j) = (1/dt) int_{t_j}^{t_j+1} K_H(t_i, s) ds, likewise k_bar for k_H.
    double K_bar(int i, int j) const;
    double k_bar(int i, int j) const;
    const std::vector<double>& K_cell_table() const;
    const std::vector<double>& k_cell_table() const;

private:
    struct tables;
    std::shared_ptr<tables> tbl_;
    friend KernelSet make_kernels(double H, const Grid& grid);
};

// Constants from Gamma evaluations plus lazy kernel tables; H must stay 1e-3
// away from 0 and 1. Validates the constants against the algebraic identity
// (b_H/2H)^2 / (2-2H) = 1/lambda_H to 12 digits.
KernelSet make_kernels(double H, const Grid& grid);

// fBm covariance 0.5 (t^2H + s^2H - |t-s|^2H).
double covariance(double H, double t, double s);

// Pointwise Volterra kernel K_H(t,s), 0 < s < t (general two-term form).
double kernel_K(double H, double t, double s);

// Standard Brownian path on the grid: W(0)=0, iid N(0,dt) increments.
SamplePath sample_bm(const Grid& grid, std::uint64_t seed);

// W^H(t_i) = sum_{j<i} K_bar(i,j) dW_j: the kernel image of a Brownian path.
SamplePath fbm_from_bm(const SamplePath& bm, const KernelSet& ks, exec policy = exec::openmp);

// Exact dense sampler from the covariance matrix (reference oracle, n <= 4096).
SamplePath fbm_cholesky(double H, const Grid& grid, std::uint64_t seed);

// Reusable Cholesky factor for Monte Carlo oracles.
struct fbm_factor {
    double hurst;
    Grid grid;
    std::vector<double> chol; // n x n row-major lower triangle, nodes 1..n
};
fbm_factor make_fbm_factor(double H, const Grid& grid, exec policy = exec::openmp);
SamplePath sample_fbm_from_factor(const fbm_factor& f, rng_stream& rng);

// Exact incremental fGn sampler (Durbin-Levinson recursion on the stationary
// increment covariance). O(k) work and memory per step; any H in (0,1).
class fgn_sampler {
public:
    fgn_sampler(double H, double dt);
    double next(rng_stream& rng); // next increment of W^H over one cell

private:
    double hurst_, step_scale_;
    bool iid_;
    std::vector<double> acov_;
    std::vector<double> phi_, phi_prev_;
    std::vector<double> history_;
    double innov_var_ = 1.0;
};

SamplePath sample_fbm_hosking(double H, const Grid& grid, std::uint64_t seed);

// Jointly sampled driving noise. The BM-first route fills both legs (W and its
// kernel image W^H); the fGn route fills only W^H for grids too large for the
// dense kernel table.
struct NoisePair {
    SamplePath bm;
    SamplePath fbm;
    double hurst = 0.5;
    std::uint64_t seed = 0;
    bool has_bm = false;
};
NoisePair make_noise(const KernelSet& ks, std::uint64_t seed);
NoisePair make_noise_fgn(double H, const Grid& grid, std::uint64_t seed);

// Fundamental martingale from the Brownian leg: dM = (b_H/2H) s^(1/2-H) dW with
// root-mean-square cell weights, so the increment variances sum to the
// quadratic variation t^(2-2H)/lambda_H exactly on every grid.
SamplePath fundamental_martingale(const NoisePair& noise);

// Direct route M(t_i) = sum k_bar(i,j) dW^H_j (cross-validation and the
// observation-side martingale of the estimators).
SamplePath martingale_from_fbm(const SamplePath& fbm, const KernelSet& ks);

// Inverse transformation W^H -> M -> B; B is the Brownian motion whose
// kernel image reproduces W^H. The constant H(2H-1)/C_H is simplified to
// 2H/b_H, valid on both sides of H=1/2.
SamplePath bm_from_fbm(const SamplePath& fbm, const KernelSet& ks);

// K_H^{-1} phi for absolutely continuous phi with phi(0)=0 (phi' by forward
// differences), using the H-regime closed forms on u^(1/2-H) phi'.
SampledFn kh_inverse(const SampledFn& phi, const KernelSet& ks);

// Direct dense-table construction with an explicit execution policy (the
// KernelSet cache always builds with the openmp policy; this seam exists for
// the serial-reference benchmark).
std::vector<double> build_kernel_cells(double H, const Grid& grid, exec policy);

// S_i = sum_{j<i} k_bar(i,j) d_j for arbitrary cell increments d (length n).
// Product-integration weights: the (t-s)-factor integrated exactly per cell,
// the s-factor chord-linearized, the first cell integrated exactly.
std::vector<double> k_weighted_sums(double H, const Grid& grid, std::span<const double> d);

// Increment vector of the quadratic variation <M>.
std::vector<double> qv_increments(double H, const Grid& grid);

} // namespace rfou::fgn
