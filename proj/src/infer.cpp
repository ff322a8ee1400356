#include "rfou/infer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfou/errors.hpp"
#include "rfou/fraccalc.hpp"

namespace rfou::infer {

namespace {

void check_hurst_band(double H, const char* what) {
    if (!(H >= 0.1) || !(H <= 0.9))
        throw parameter_error(std::string(what) + ": H outside the supported band [0.1, 0.9]");
}

double qv_closed(double H, double lambda_h, double t) {
    if (H == 0.5) return t;
    return std::pow(t, 2.0 - 2.0 * H) / lambda_h;
}

double lambda_of(double H) {
    if (H == 0.5) return 1.0;
    return 2.0 * H * gamma_fn(3.0 - 2.0 * H) * gamma_fn(H + 0.5) / gamma_fn(1.5 - H);
}

// Incremental k_H transform: S_i = sum_{j<i} k_bar(i,j) d_j, one cell at a time.
// Mirrors fgn::k_weighted_sums cell formulas so stream and batch agree.
class k_stream {
public:
    k_stream(double H, double dt)
        : H_(H), dt_(dt), g_(0.5 - H), trivial_(H == 0.5) {
        if (!trivial_) {
            kappa_ = 2.0 * H * gamma_fn(1.5 - H) * gamma_fn(H + 0.5);
            ca_ = std::pow(dt, 1.0 + g_) / (1.0 + g_);
            cb_ = std::pow(dt, 2.0 + g_) / (2.0 + g_);
        }
    }

    void push(double d) {
        const int j = count_++;
        if (trivial_) {
            running_ += d;
            return;
        }
        if (j == 0) {
            d0_ = d;
            f_prev_ = std::pow(dt_, g_); // t_1^g
            return;
        }
        const double f_next = std::pow((j + 1) * dt_, g_);
        a_.push_back(0.5 * (f_prev_ + f_next) * d);
        b_.push_back(((f_next - f_prev_) / dt_) * d);
        f_prev_ = f_next;
    }

    // S at node i; requires i == number of pushed cells
    double eval(int i) {
        if (trivial_) return running_;
        if (i == 0) return 0.0;
        extend_lags(i);
        extend_c0(i);
        double acc = d0_ * c0_[i];
        for (int j = 1; j < i; ++j) {
            const int m = i - j;
            acc += a_[j - 1] * u0_[m] + b_[j - 1] * u2_[m];
        }
        return acc / (kappa_ * dt_);
    }

private:
    void extend_lags(int m_max) {
        while (static_cast<int>(u0_.size()) <= m_max) {
            const int m = static_cast<int>(u0_.size());
            if (m == 0) {
                u0_.push_back(0.0);
                u2_.push_back(0.0);
                continue;
            }
            const double pa = std::pow(double(m), 1.0 + g_);
            const double pb = std::pow(double(m), 2.0 + g_);
            const double u0v = ca_ * (pa - pa_prev_);
            u0_.push_back(u0v);
            u2_.push_back(dt_ * (m - 0.5) * u0v - cb_ * (pb - pb_prev_));
            pa_prev_ = pa;
            pb_prev_ = pb;
        }
    }
    void extend_c0(int i_max) {
        while (static_cast<int>(c0_.size()) <= i_max) {
            const int i = static_cast<int>(c0_.size());
            if (i == 0) {
                c0_.push_back(0.0);
                continue;
            }
            const double ti = i * dt_;
            c0_.push_back(fraccalc::detail::singular_cell_integral(
                0.0, dt_, g_, i == 1 ? g_ : 0.0,
                [&](double s) { return std::pow(s, g_) * std::pow(ti - s, g_); }));
        }
    }

    double H_, dt_, g_, kappa_ = 1.0, ca_ = 0.0, cb_ = 0.0;
    bool trivial_;
    int count_ = 0;
    double running_ = 0.0;
    double d0_ = 0.0, f_prev_ = 0.0;
    double pa_prev_ = 0.0, pb_prev_ = 0.0;
    std::vector<double> a_, b_, u0_, u2_, c0_;
};

// Incremental sufficient statistic chi_i = t_i^(2H-1) Op(u^(1/2-H) X_u)(t_i).
class chi_stream {
public:
    chi_stream(double H, double dt) : H_(H), dt_(dt), trivial_(H == 0.5) {
        if (trivial_) return;
        w_ = 0.5 - H;
        deriv_ = H > 0.5;
        order_ = deriv_ ? (H - 0.5) : (0.5 - H);
        inv_gamma_ = 1.0 / gamma_fn(deriv_ ? (1.0 - order_) : order_);
        last_cell_factor_ = std::pow(dt, 1.0 - order_) / (1.0 - order_);
        if (deriv_) {
            ca_ = std::pow(dt, -order_) / order_;
            cb_ = std::pow(dt, 1.0 - order_) / (1.0 - order_);
            pa_prev_ = 1.0;
            pb_prev_ = 1.0;
        } else {
            ca_ = std::pow(dt, order_) / order_;
            cb_ = std::pow(dt, order_ + 1.0) / (order_ + 1.0);
            pa_prev_ = 0.0;
            pb_prev_ = 0.0;
        }
        pre_ = gamma_fn(2.0 - 2.0 * H) / gamma_fn(1.5 - H);
    }

    void push(double x) {
        const int i = count_++;
        x_.push_back(x);
        if (trivial_) return;
        if (i >= 1) {
            g_.push_back(std::pow(i * dt_, w_) * x); // g_[i-1] = g at node i
            if (i >= 2) sg_.push_back((g_[i - 1] - g_[i - 2]) / dt_);
        }
    }

    // chi at node i; requires i == count-1
    double eval(int i) {
        if (trivial_) return x_[i];
        if (i == 0) return x_[0];
        const double ti = i * dt_;
        const double tpre = pre_ * std::pow(ti, 2.0 * H_ - 1.0);
        const double gi = g_[i - 1];
        const double s0 = (x_[1] - x_[0]) / dt_;
        if (deriv_) {
            const double b = order_;
            if (i == 1) {
                const double diff = fraccalc::detail::singular_cell_integral(
                    0.0, ti, w_, -b, [&](double s) {
                        return (gi - std::pow(s, w_) * (x_[0] + s0 * s)) *
                               std::pow(ti - s, -b - 1.0);
                    });
                return tpre * inv_gamma_ * (gi * std::pow(ti, -b) + b * diff);
            }
            extend_deriv_tables(i);
            const double slope_last = sg_[i - 2]; // slope of g on the last cell
            double acc = slope_last * last_cell_factor_;
            for (int j = 1; j < i - 1; ++j) {
                const int m = i - j;
                acc += (gi - g_[j - 1]) * W0_[m] - sg_[j - 1] * Q2_[m];
            }
            acc += gi * V0_[i] - (x_[0] * E0_[i] + s0 * E1_[i]);
            return tpre * inv_gamma_ * (gi * std::pow(ti, -b) + b * acc);
        }
        extend_integ_tables(i);
        double acc = x_[0] * E0_[i] + s0 * E1_[i];
        for (int j = 1; j < i; ++j) {
            const int m = i - j;
            acc += g_[j - 1] * P_[m] + sg_prior(j) * Q_[m];
        }
        return tpre * inv_gamma_ * acc;
    }

private:
    // slope of g on cell j (j >= 1); the last cell's slope may not be in sg_ yet
    double sg_prior(int j) const {
        if (j - 1 < static_cast<int>(sg_.size())) return sg_[j - 1];
        return (g_[j] - g_[j - 1]) / dt_;
    }

    void extend_deriv_tables(int i_max) {
        const double b = order_;
        while (static_cast<int>(W0_.size()) <= i_max) {
            const int m = static_cast<int>(W0_.size());
            if (m < 2) {
                W0_.push_back(0.0);
                Q2_.push_back(0.0);
                continue;
            }
            const double pa = std::pow(double(m), -b);
            const double pb = std::pow(double(m), 1.0 - b);
            const double w0 = ca_ * (pa_prev_ - pa);
            W0_.push_back(w0);
            Q2_.push_back(m * dt_ * w0 - cb_ * (pb - pb_prev_));
            pa_prev_ = pa;
            pb_prev_ = pb;
        }
        while (static_cast<int>(V0_.size()) <= i_max) {
            const int i = static_cast<int>(V0_.size());
            if (i < 2) {
                V0_.push_back(0.0);
                E0_.push_back(0.0);
                E1_.push_back(0.0);
                continue;
            }
            const double ti = i * dt_;
            V0_.push_back((std::pow(ti - dt_, -b) - std::pow(ti, -b)) / b);
            E0_.push_back(fraccalc::detail::singular_cell_integral(
                0.0, dt_, w_, 0.0,
                [&](double s) { return std::pow(s, w_) * std::pow(ti - s, -b - 1.0); }));
            E1_.push_back(fraccalc::detail::singular_cell_integral(
                0.0, dt_, w_ + 1.0, 0.0,
                [&](double s) { return std::pow(s, w_ + 1.0) * std::pow(ti - s, -b - 1.0); }));
        }
    }

    void extend_integ_tables(int i_max) {
        const double a = order_;
        while (static_cast<int>(P_.size()) <= i_max) {
            const int m = static_cast<int>(P_.size());
            if (m == 0) {
                P_.push_back(0.0);
                Q_.push_back(0.0);
                continue;
            }
            const double pa = std::pow(double(m), a);
            const double pb = std::pow(double(m), a + 1.0);
            const double p = ca_ * (pa - pa_prev_);
            P_.push_back(p);
            Q_.push_back(m * dt_ * p - cb_ * (pb - pb_prev_));
            pa_prev_ = pa;
            pb_prev_ = pb;
        }
        while (static_cast<int>(E0_.size()) <= i_max) {
            const int i = static_cast<int>(E0_.size());
            if (i == 0) {
                E0_.push_back(0.0);
                E1_.push_back(0.0);
                continue;
            }
            const double ti = i * dt_;
            const double e_right = (i == 1) ? (a - 1.0) : 0.0;
            E0_.push_back(fraccalc::detail::singular_cell_integral(
                0.0, dt_, w_, e_right,
                [&](double s) { return std::pow(s, w_) * std::pow(ti - s, a - 1.0); }));
            E1_.push_back(fraccalc::detail::singular_cell_integral(
                0.0, dt_, w_ + 1.0, e_right,
                [&](double s) { return std::pow(s, w_ + 1.0) * std::pow(ti - s, a - 1.0); }));
        }
    }

    double H_, dt_, w_ = 0.0, order_ = 0.0;
    bool trivial_, deriv_ = false;
    double inv_gamma_ = 1.0, last_cell_factor_ = 0.0, ca_ = 0.0, cb_ = 0.0;
    double pa_prev_ = 0.0, pb_prev_ = 0.0, pre_ = 1.0;
    int count_ = 0;
    std::vector<double> x_, g_, sg_;
    std::vector<double> W0_, Q2_, V0_, E0_, E1_; // derivative route
    std::vector<double> P_, Q_;                  // integral route
};

} // namespace

double chi_time_zero(double H, double x0) {
    // chi of a constant path equals the constant for every H, so the t->0 limit
    // with X continuous at 0 is X(0) itself
    (void)H;
    return x0;
}

SufficientProcess chi_process(const reflect::RfouPath& path, const fgn::KernelSet& ks,
                              exec policy) {
    require_same_grid(path.grid, ks.grid, "chi_process");
    check_hurst_band(ks.hurst, "chi_process");
    const int n = path.grid.steps;
    const double H = ks.hurst;

    SufficientProcess sp;
    sp.grid = path.grid;

    if (H == 0.5) {
        sp.chi = path.X;
    } else {
        SampledFn x(path.grid, path.X);
        const SampledFn core =
            (H > 0.5) ? fraccalc::frac_derivative_left_weighted(x, 0.5 - H, H - 0.5, policy)
                      : fraccalc::frac_integral_left_weighted(x, 0.5 - H, 0.5 - H, policy);
        // (Gamma(3/2-H) lambda_H / (2-2H)) / kappa_H collapses to this ratio
        const double pre = gamma_fn(2.0 - 2.0 * H) / gamma_fn(1.5 - H);
        sp.chi.assign(n + 1, 0.0);
        sp.chi[0] = chi_time_zero(H, path.X[0]);
        for (int i = 1; i <= n; ++i)
            sp.chi[i] = pre * std::pow(path.grid.t(i), 2.0 * H - 1.0) * core[i];
    }

    sp.qv.assign(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) sp.qv[i] = ks.qv_node(i);

    std::vector<double> dx(n), dl(n);
    for (int j = 0; j < n; ++j) {
        dx[j] = path.X[j + 1] - path.X[j];
        dl[j] = path.L[j + 1] - path.L[j];
    }
    sp.xt_tilde = fgn::k_weighted_sums(H, path.grid, dx);
    sp.lt_tilde = fgn::k_weighted_sums(H, path.grid, dl);

    sp.info.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i)
        sp.info[i + 1] = sp.info[i] + sp.chi[i] * sp.chi[i] * (sp.qv[i + 1] - sp.qv[i]);
    return sp;
}

EstimateRecord mle(const reflect::RfouPath& path, const fgn::KernelSet& ks,
                   std::optional<double> alpha_true, exec policy) {
    const SufficientProcess sp = chi_process(path, ks, policy);
    const int n = path.grid.steps;
    const double info_T = sp.info[n];
    if (!(info_T > 0.0))
        throw degenerate_estimate_error("mle: observed information is zero");
    double sum_x = 0.0, sum_l = 0.0;
    for (int i = 0; i < n; ++i) {
        sum_x += sp.chi[i] * (sp.xt_tilde[i + 1] - sp.xt_tilde[i]);
        sum_l += sp.chi[i] * (sp.lt_tilde[i + 1] - sp.lt_tilde[i]);
    }
    EstimateRecord rec;
    rec.kind = EstimateRecord::Kind::fixed_horizon;
    rec.alpha_hat = (sum_l - sum_x) / info_T;
    rec.info_used = info_T;
    rec.info_reached = info_T;
    rec.horizon_or_tau = path.grid.horizon;
    rec.hit = true;
    if (alpha_true)
        rec.standardized =
            (rec.alpha_hat - *alpha_true) * std::sqrt(info_T) / path.params.sigma;
    return rec;
}

EstimateRecord sequential_mle(const reflect::ModelParams& params, double h,
                              std::uint64_t seed, double max_T,
                              const SequentialOptions& opts, SequentialDiagnostics* diag) {
    params.validate();
    check_hurst_band(params.hurst, "sequential_mle");
    if (!(h > 0.0)) throw parameter_error("sequential_mle: h must be positive");
    if (!(max_T > 0.0)) throw parameter_error("sequential_mle: max_T must be positive");
    if (!(opts.dt > 0.0)) throw parameter_error("sequential_mle: dt must be positive");
    if (params.alpha * opts.dt >= 1.0)
        throw parameter_error("sequential_mle: alpha*dt >= 1 makes the Euler recursion flip sign");

    const double H = params.hurst;
    const double dt = opts.dt;
    const double lam = lambda_of(H);
    const int cap0 = std::max(2, opts.chunk);
    const int n_cap = static_cast<int>(std::ceil(max_T / dt));

    rng_stream rng(seed);
    fgn::fgn_sampler noise(H, dt);
    chi_stream cs(H, dt);
    k_stream xs(H, dt), ls(H, dt);

    std::vector<double> X, L, W;
    X.reserve(cap0);
    L.reserve(cap0);
    W.reserve(cap0);
    X.push_back(params.x0);
    L.push_back(0.0);
    W.push_back(0.0);
    cs.push(params.x0);

    double chi_i = cs.eval(0);
    double xt_i = 0.0, lt_i = 0.0;
    double info = 0.0, sum_x = 0.0, sum_l = 0.0;
    bool hit = false;
    int i = 0;
    while (true) {
        if (info >= h) {
            hit = true;
            break;
        }
        if (i >= n_cap) break; // max_T exhausted: flagged, not thrown
        if (X.size() == X.capacity()) {
            X.reserve(X.size() + opts.chunk);
            L.reserve(L.size() + opts.chunk);
            W.reserve(W.size() + opts.chunk);
        }
        const double dwh = noise.next(rng);
        const double xi = X[i];
        const double free_step = xi - params.alpha * xi * dt + params.sigma * dwh;
        const double push = std::max(0.0, params.barrier - free_step);
        X.push_back(free_step + push);
        L.push_back(L[i] + push);
        W.push_back(W[i] + dwh);

        xs.push(X[i + 1] - X[i]);
        ls.push(push);
        cs.push(X[i + 1]);

        const double xt_next = xs.eval(i + 1);
        const double lt_next = ls.eval(i + 1);
        const double chi_next = cs.eval(i + 1);

        sum_x += chi_i * (xt_next - xt_i);
        sum_l += chi_i * (lt_next - lt_i);
        info += chi_i * chi_i * (qv_closed(H, lam, (i + 1) * dt) - qv_closed(H, lam, i * dt));

        chi_i = chi_next;
        xt_i = xt_next;
        lt_i = lt_next;
        ++i;
    }

    EstimateRecord rec;
    rec.kind = EstimateRecord::Kind::sequential;
    rec.alpha_hat = (sum_l - sum_x) / h;
    rec.hit = hit;
    rec.horizon_or_tau = i * dt;
    rec.info_reached = info;
    rec.info_used = hit ? h : info;
    if (opts.fill_standardized && hit)
        rec.standardized = (rec.alpha_hat - params.alpha) * std::sqrt(h) / params.sigma;

    if (diag) {
        const int m = i;
        Grid g(std::max(m, 2) * dt, std::max(m, 2));
        // pad degenerate sub-2-step stops so the grid stays valid
        while (static_cast<int>(X.size()) < g.nodes()) {
            X.push_back(X.back());
            L.push_back(L.back());
            W.push_back(W.back());
        }
        diag->path.grid = g;
        diag->path.X = X;
        diag->path.L = L;
        diag->path.params = params;
        diag->path.noise.hurst = H;
        diag->path.noise.seed = seed;
        diag->path.noise.has_bm = false;
        diag->path.noise.fbm = SamplePath(g, W);
        diag->tau_index = m;
        diag->sum_chi_dxt = sum_x;
        diag->sum_chi_dlt = sum_l;
    }
    return rec;
}

LikelihoodRatio likelihood_ratio_fm(const reflect::RfouPath& path, double alpha,
                                    const fgn::KernelSet& ks) {
    const SufficientProcess sp = chi_process(path, ks);
    const SamplePath M = path.noise.has_bm ? fgn::fundamental_martingale(path.noise)
                                           : fgn::martingale_from_fbm(path.noise.fbm, ks);
    const int n = path.grid.steps;
    const double sigma = path.params.sigma;
    double mart = 0.0, quad = 0.0;
    for (int i = 0; i < n; ++i) {
        mart += sp.chi[i] * (M[i + 1] - M[i]);
        quad += sp.chi[i] * sp.chi[i] * (sp.qv[i + 1] - sp.qv[i]);
    }
    LikelihoodRatio lr;
    lr.log_ratio = (alpha / sigma) * mart - (alpha * alpha / (2.0 * sigma * sigma)) * quad;
    lr.overflow = lr.log_ratio > 700.0; // the negative side just underflows to 0
    lr.ratio = lr.overflow ? std::numeric_limits<double>::infinity() : std::exp(lr.log_ratio);
    if (alpha == 0.0) lr.ratio = 1.0; // both terms vanish identically
    return lr;
}

LikelihoodRatio likelihood_ratio_kinv(const reflect::RfouPath& path, double alpha,
                                      const fgn::KernelSet& ks) {
    if (!path.noise.has_bm)
        throw structural_error("likelihood_ratio_kinv: needs the coupled Brownian leg");
    check_hurst_band(ks.hurst, "likelihood_ratio_kinv");
    const int n = path.grid.steps;
    const double dt = path.grid.dt();
    const double sigma = path.params.sigma;
    SampledFn phi(path.grid);
    for (int i = 1; i <= n; ++i)
        phi[i] = phi[i - 1] + (alpha / sigma) * path.X[i - 1] * dt;
    SampledFn f = fgn::kh_inverse(phi, ks);
    if (ks.hurst > 0.5) {
        // the integrand behaves like s^(1/2-H) near 0; the first cell carries an
        // integrable singularity, so integrate its shape instead of sampling the
        // endpoint (coefficient extrapolated from node 1, RMS cell weight)
        const double g = 0.5 - ks.hurst;
        const double rms0 = std::sqrt(std::pow(dt, 2.0 * g) / (1.0 + 2.0 * g));
        f[0] = f[1] * rms0 / std::pow(path.grid.t(1), g);
    }
    double mart = 0.0, quad = 0.0;
    for (int i = 0; i < n; ++i) {
        mart += f[i] * (path.noise.bm[i + 1] - path.noise.bm[i]);
        quad += f[i] * f[i] * dt;
    }
    LikelihoodRatio lr;
    lr.log_ratio = mart - 0.5 * quad;
    lr.overflow = lr.log_ratio > 700.0;
    lr.ratio = lr.overflow ? std::numeric_limits<double>::infinity() : std::exp(lr.log_ratio);
    if (alpha == 0.0) lr.ratio = 1.0;
    return lr;
}

double standardized_stat(const EstimateRecord& record, double alpha_true, double sigma) {
    if (!(record.info_used > 0.0))
        throw degenerate_estimate_error("standardized_stat: zero information");
    return (record.alpha_hat - alpha_true) * std::sqrt(record.info_used) / sigma;
}

} // namespace rfou::infer
