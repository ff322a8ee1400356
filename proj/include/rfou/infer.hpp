#pragma once
#include <limits>
#include <optional>

#include "rfou/fgn.hpp"
#include "rfou/reflect.hpp"

namespace rfou::infer {

// Sufficient-statistic bundle of one observed trajectory:
//   chi_t  = (Gamma(2-2H)/Gamma(3/2-H)) t^(2H-1) D_{0+}^(H-1/2)(u^(1/2-H) X_u)(t)
//            (D of negative order means I^{-order}; chi of a constant path is the constant)
//   qv_t   = <M^H>_t = t^(2-2H)/lambda_H
//   info_t = int_0^t chi^2 d<M^H>   (left-point sums)
//   xt_tilde, lt_tilde: k_H cell-averaged transforms of X and L.
struct SufficientProcess {
    Grid grid;
    std::vector<double> chi;
    std::vector<double> qv;
    std::vector<double> info;
    std::vector<double> xt_tilde;
    std::vector<double> lt_tilde;
};

struct EstimateRecord {
    enum class Kind { fixed_horizon, sequential };
    Kind kind = Kind::fixed_horizon;
    double alpha_hat = 0.0;
    // Denominator information: I_T for fixed-horizon records, the design level h
    // for sequential ones (Eq-style: the nominal h divides the estimator).
    double info_used = 0.0;
    // Observed information actually accumulated by the end node; for hit
    // sequential records this exceeds h by at most one step (overshoot).
    double info_reached = 0.0;
    double horizon_or_tau = 0.0;
    bool hit = false;
    double standardized = std::numeric_limits<double>::quiet_NaN();
};

SufficientProcess chi_process(const reflect::RfouPath& path, const fgn::KernelSet& ks,
                              exec policy = exec::openmp);

// Fixed-horizon MLE: alpha_hat = (-int chi dXt + int chi dLt) / int chi^2 dqv.
// Both integrals use left-point sums. Since dXt carries dLt inside it, the
// local-time parts cancel exactly in the estimating equation, leaving the pure
// martingale error term; mixing evaluation points would bias the estimator.
EstimateRecord mle(const reflect::RfouPath& path, const fgn::KernelSet& ks,
                   std::optional<double> alpha_true = std::nullopt,
                   exec policy = exec::openmp);

struct SequentialOptions {
    double dt = 0.05;
    int chunk = 4096;       // capacity-growth quantum for the streamed state
    bool fill_standardized = true;
};

// Copy of the streamed state for identity checks and audits.
struct SequentialDiagnostics {
    reflect::RfouPath path; // simulated trajectory up to the stop node
    int tau_index = 0;
    double sum_chi_dxt = 0.0;
    double sum_chi_dlt = 0.0;
};

// Simulates forward (exact fGn Durbin-Levinson noise) until the observed
// information first reaches h; alpha_hat = (int chi dLt - int chi dXt)/h with
// the nominal h in the denominator. hit=false partial record when max_T is
// exhausted (flagged, not thrown).
EstimateRecord sequential_mle(const reflect::ModelParams& params, double h,
                              std::uint64_t seed, double max_T,
                              const SequentialOptions& opts = {},
                              SequentialDiagnostics* diag = nullptr);

struct LikelihoodRatio {
    double ratio = 1.0;
    double log_ratio = 0.0;
    bool overflow = false; // ratio not representable; log_ratio still valid
};

// Fundamental-martingale form: eta_T = exp((a/s) int chi dM - (a^2/2s^2) int chi^2 dqv).
// Uses the exact Brownian-route martingale when the path's noise carries W,
// otherwise the kernel-route martingale from W^H.
LikelihoodRatio likelihood_ratio_fm(const reflect::RfouPath& path, double alpha,
                                    const fgn::KernelSet& ks);

// Kernel-inverse form: xi_T = exp(int f dW - 1/2 int f^2 dt), f = K_H^{-1}((a/s) int X).
// Needs the coupled Brownian leg of the driving noise.
LikelihoodRatio likelihood_ratio_kinv(const reflect::RfouPath& path, double alpha,
                                      const fgn::KernelSet& ks);

// (alpha_hat - alpha_true) sqrt(info_used) / sigma
double standardized_stat(const EstimateRecord& record, double alpha_true, double sigma);

// Limit value of chi at t=0+ for a path started at x0 (constant-state closed form).
double chi_time_zero(double H, double x0);

} // namespace rfou::infer
