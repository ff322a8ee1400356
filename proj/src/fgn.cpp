#include "rfou/fgn.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "rfou/errors.hpp"
#include "rfou/fraccalc.hpp"

namespace rfou::fgn {

namespace {

constexpr int kMaxTableSteps = 4096; // dense-table guard, matches the Cholesky guard

// 4-point Gauss-Legendre on [0,1] for the smooth inner-integral increments.
constexpr double kG4x[4] = {0.0694318442029737124, 0.3300094782075718676,
                            0.6699905217924281324, 0.9305681557970262876};
constexpr double kG4w[4] = {0.1739274225687269287, 0.3260725774312730713,
                            0.3260725774312730713, 0.1739274225687269287};

inline std::size_t tri_idx(int i, int j) {
    return static_cast<std::size_t>(i) * (i - 1) / 2 + j;
}

struct Constants {
    double b_h, c_h, kappa_h, lambda_h;
};

Constants constants_for(double H) {
    if (H == 0.5) return {1.0, 0.0, 1.0, 1.0};
    Constants c;
    c.b_h = std::sqrt(2.0 * H * gamma_fn(1.5 - H) /
                      (gamma_fn(H + 0.5) * gamma_fn(2.0 - 2.0 * H)));
    c.c_h = c.b_h * (H - 0.5);
    c.kappa_h = 2.0 * H * gamma_fn(1.5 - H) * gamma_fn(H + 0.5);
    c.lambda_h = 2.0 * H * gamma_fn(3.0 - 2.0 * H) * gamma_fn(H + 0.5) / gamma_fn(1.5 - H);
    return c;
}

// J(t,s) = int_s^t u^(H-3/2) (u-s)^(H-1/2) du. Dyadic segmentation away from
// u=s keeps the power-law tail resolved when t >> s.
double kernel_inner_J(double H, double t, double s) {
    const double e = H - 0.5;
    const double vend = t - s;
    auto F = [&](double u) { return std::pow(u, H - 1.5) * std::pow(u - s, e); };
    double v1 = std::min(s, vend);
    double J = fraccalc::detail::singular_cell_integral(s, s + v1, e, 0.0, F);
    double vcur = v1;
    while (vcur < vend) {
        const double vnext = std::min(vend, 2.0 * vcur);
        J += fraccalc::detail::singular_cell_integral(s + vcur, s + vnext, 0.0, 0.0, F);
        vcur = vnext;
    }
    return J;
}

void build_K_table(double H, const Grid& grid, std::vector<double>& tab, exec policy) {
    const int n = grid.steps;
    tab.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
    if (H == 0.5) {
        std::fill(tab.begin(), tab.end(), 1.0);
        return;
    }
    const Constants c = constants_for(H);
    const double dt = grid.dt();
    const double h_exp = H - 0.5;
    const double sing = -std::abs(h_exp); // s-exponent of K at s -> 0

    for_each_index_dynamic(policy, n, [&](std::int64_t jj) {
        const int j = static_cast<int>(jj);
        const double a = grid.t(j), b = grid.t(j + 1);

        // diagonal cell: pointwise kernel under the (t-s) endpoint singularity
        tab[tri_idx(j + 1, j)] =
            fraccalc::detail::singular_cell_integral(
                a, b, j == 0 ? sing : 0.0, h_exp,
                [&](double s) { return kernel_K(H, grid.t(j + 1), s); }) /
            dt;

        if (j + 2 > n) return;

        // fixed outer nodes on the cell (substituted for the j=0 column)
        constexpr int Q = 16;
        double sq[Q], wq[Q], spow[Q];
        {
            // Gauss nodes of singular_cell_integral's plain rule, inlined here so
            // the incremental J state can persist across rows.
            static constexpr double gx[Q] = {
                0.0052995325041750337, 0.0277124884633837103, 0.0671843988060841224,
                0.1222977958224984868, 0.1910618777986781147, 0.2709916111713863151,
                0.3591982246103705422, 0.4524937450811812866, 0.5475062549188187134,
                0.6408017753896294578, 0.7290083888286136849, 0.8089381222013218853,
                0.8777022041775015132, 0.9328156011939158776, 0.9722875115366162897,
                0.9947004674958249663};
            static constexpr double gw[Q] = {
                0.0135762297058770482, 0.0311267619693239468, 0.0475792558412463928,
                0.0623144856277669384, 0.0747979944082883680, 0.0845782596975012679,
                0.0913017075224617918, 0.0947253052275342510, 0.0947253052275342510,
                0.0913017075224617918, 0.0845782596975012679, 0.0747979944082883680,
                0.0623144856277669384, 0.0475792558412463928, 0.0311267619693239468,
                0.0135762297058770482};
            if (j == 0) {
                const double p = 1.0 / (1.0 + sing);
                for (int q = 0; q < Q; ++q) {
                    const double z = gx[q];
                    const double zp = std::pow(z, p);
                    sq[q] = a + (b - a) * zp;
                    wq[q] = gw[q] * (b - a) * p * zp / z;
                }
            } else {
                for (int q = 0; q < Q; ++q) {
                    sq[q] = a + (b - a) * gx[q];
                    wq[q] = gw[q] * (b - a);
                }
            }
            for (int q = 0; q < Q; ++q) spow[q] = std::pow(sq[q], 0.5 - H);
        }

        double J[Q];
        for (int i = j + 2; i <= n; ++i) {
            const double ti = grid.t(i);
            if (i == j + 2) {
                for (int q = 0; q < Q; ++q) J[q] = kernel_inner_J(H, ti, sq[q]);
            } else {
                // smooth increment over [t_{i-1}, t_i]; u nodes shared across q
                const double ua = grid.t(i - 1);
                double un[4], up[4];
                for (int r = 0; r < 4; ++r) {
                    un[r] = ua + dt * kG4x[r];
                    up[r] = std::pow(un[r], H - 1.5) * (dt * kG4w[r]);
                }
                for (int q = 0; q < Q; ++q) {
                    double inc = 0.0;
                    for (int r = 0; r < 4; ++r) inc += up[r] * std::pow(un[r] - sq[q], h_exp);
                    J[q] += inc;
                }
            }
            const double tpow = c.b_h * std::pow(ti, h_exp);
            double acc = 0.0;
            for (int q = 0; q < Q; ++q)
                acc += wq[q] * spow[q] * (tpow * std::pow(ti - sq[q], h_exp) - c.c_h * J[q]);
            tab[tri_idx(i, j)] = acc / dt;
        }
    });
}

void build_k_table(double H, const Grid& grid, std::vector<double>& tab, exec policy) {
    const int n = grid.steps;
    tab.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
    if (H == 0.5) {
        std::fill(tab.begin(), tab.end(), 1.0);
        return;
    }
    const Constants c = constants_for(H);
    const double dt = grid.dt();
    const double g = 0.5 - H;
    for_each_index_dynamic(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii) + 1;
        const double ti = grid.t(i);
        for (int j = 0; j < i; ++j) {
            const double v = fraccalc::detail::singular_cell_integral(
                grid.t(j), grid.t(j + 1), j == 0 ? g : 0.0, j == i - 1 ? g : 0.0,
                [&](double s) { return std::pow(s, g) * std::pow(ti - s, g); });
            tab[tri_idx(i, j)] = v / (c.kappa_h * dt);
        }
    });
}

} // namespace

struct KernelSet::tables {
    std::once_flag once_K, once_k;
    std::vector<double> K, k;
    double hurst;
    Grid grid;
};

double KernelSet::qv(double t) const {
    if (hurst == 0.5) return t;
    return std::pow(t, 2.0 - 2.0 * hurst) / lambda_h;
}

const std::vector<double>& KernelSet::K_cell_table() const {
    if (grid.steps > kMaxTableSteps)
        throw structural_error("KernelSet: dense kernel table guarded to 4096 steps");
    std::call_once(tbl_->once_K,
                   [&] { build_K_table(tbl_->hurst, tbl_->grid, tbl_->K, exec::openmp); });
    return tbl_->K;
}

const std::vector<double>& KernelSet::k_cell_table() const {
    if (grid.steps > kMaxTableSteps)
        throw structural_error("KernelSet: dense kernel table guarded to 4096 steps");
    std::call_once(tbl_->once_k,
                   [&] { build_k_table(tbl_->hurst, tbl_->grid, tbl_->k, exec::openmp); });
    return tbl_->k;
}

double KernelSet::K_bar(int i, int j) const { return K_cell_table()[tri_idx(i, j)]; }
double KernelSet::k_bar(int i, int j) const { return k_cell_table()[tri_idx(i, j)]; }

KernelSet make_kernels(double H, const Grid& grid) {
    if (!(H >= 1e-3) || !(H <= 1.0 - 1e-3))
        throw parameter_error("make_kernels: H must lie in [0.001, 0.999]");
    KernelSet ks;
    ks.hurst = H;
    ks.grid = grid;
    const Constants c = constants_for(H);
    ks.b_h = c.b_h;
    ks.c_h = c.c_h;
    ks.kappa_h = c.kappa_h;
    ks.lambda_h = c.lambda_h;
    // constant-table validation: (b_H/2H)^2 / (2-2H) = 1/lambda_H
    const double r = ks.b_h / (2.0 * H);
    const double identity = r * r / (2.0 - 2.0 * H) * ks.lambda_h;
    if (std::abs(identity - 1.0) > 1e-12)
        throw numerical_error("make_kernels: constants identity violated");
    ks.tbl_ = std::make_shared<KernelSet::tables>();
    ks.tbl_->hurst = H;
    ks.tbl_->grid = grid;
    return ks;
}

double covariance(double H, double t, double s) {
    if (t < 0.0 || s < 0.0) throw parameter_error("covariance: times must be non-negative");
    if (H == 0.5) return std::min(t, s);
    const double p = 2.0 * H;
    return 0.5 * (std::pow(t, p) + std::pow(s, p) - std::pow(std::abs(t - s), p));
}

double kernel_K(double H, double t, double s) {
    if (!(s > 0.0) || !(s < t)) throw parameter_error("kernel_K: need 0 < s < t");
    if (H == 0.5) return 1.0;
    const Constants c = constants_for(H);
    const double term1 = c.b_h * std::pow(t / s, H - 0.5) * std::pow(t - s, H - 0.5);
    return term1 - c.c_h * std::pow(s, 0.5 - H) * kernel_inner_J(H, t, s);
}

SamplePath sample_bm(const Grid& grid, std::uint64_t seed) {
    rng_stream rng(seed);
    SamplePath w(grid);
    const double sd = std::sqrt(grid.dt());
    for (int i = 1; i <= grid.steps; ++i) w[i] = w[i - 1] + sd * rng.next_gaussian();
    return w;
}

SamplePath fbm_from_bm(const SamplePath& bm, const KernelSet& ks, exec policy) {
    require_same_grid(bm.grid, ks.grid, "fbm_from_bm");
    if (ks.hurst == 0.5) return bm;
    const auto& tab = ks.K_cell_table();
    const int n = ks.grid.steps;
    std::vector<double> dw(n);
    for (int j = 0; j < n; ++j) dw[j] = bm[j + 1] - bm[j];
    SamplePath out(ks.grid);
    for_each_index_dynamic(policy, n, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii) + 1;
        const double* row = tab.data() + tri_idx(i, 0);
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += row[j] * dw[j];
        out[i] = acc;
    });
    return out;
}

fbm_factor make_fbm_factor(double H, const Grid& grid, exec policy) {
    const int n = grid.steps;
    if (n > kMaxTableSteps)
        throw parameter_error("fbm_cholesky: dense factorization guarded to 4096 steps");
    fbm_factor f;
    f.hurst = H;
    f.grid = grid;
    auto& L = f.chol;
    L.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b)
            L[static_cast<std::size_t>(a) * n + b] = covariance(H, grid.t(a + 1), grid.t(b + 1));
    for (int k = 0; k < n; ++k) {
        double* rk = L.data() + static_cast<std::size_t>(k) * n;
        double d = rk[k];
        for (int m = 0; m < k; ++m) d -= rk[m] * rk[m];
        if (!(d > 0.0))
            throw numerical_error("fbm_cholesky: covariance not numerically PD (H=" +
                                  std::to_string(H) + ", n=" + std::to_string(n) + ")");
        const double dk = std::sqrt(d);
        rk[k] = dk;
        for_each_index(policy, n - k - 1, [&](std::int64_t rr) {
            const int r = static_cast<int>(rr) + k + 1;
            double* row = L.data() + static_cast<std::size_t>(r) * n;
            double v = row[k];
            for (int m = 0; m < k; ++m) v -= row[m] * rk[m];
            row[k] = v / dk;
        });
    }
    return f;
}

SamplePath sample_fbm_from_factor(const fbm_factor& f, rng_stream& rng) {
    const int n = f.grid.steps;
    std::vector<double> xi(n);
    for (int m = 0; m < n; ++m) xi[m] = rng.next_gaussian();
    SamplePath out(f.grid);
    for (int a = 0; a < n; ++a) {
        const double* row = f.chol.data() + static_cast<std::size_t>(a) * n;
        double acc = 0.0;
        for (int m = 0; m <= a; ++m) acc += row[m] * xi[m];
        out[a + 1] = acc;
    }
    return out;
}

SamplePath fbm_cholesky(double H, const Grid& grid, std::uint64_t seed) {
    const fbm_factor f = make_fbm_factor(H, grid);
    rng_stream rng(seed);
    return sample_fbm_from_factor(f, rng);
}

fgn_sampler::fgn_sampler(double H, double dt)
    : hurst_(H), step_scale_(std::pow(dt, H)), iid_(H == 0.5) {
    acov_.push_back(1.0);
}

double fgn_sampler::next(rng_stream& rng) {
    const double xi = rng.next_gaussian();
    if (iid_) return step_scale_ * xi;
    const int k = static_cast<int>(history_.size());
    double x;
    if (k == 0) {
        x = xi;
        innov_var_ = 1.0;
        phi_.assign(1, 0.0);
    } else {
        const double p = 2.0 * hurst_;
        while (static_cast<int>(acov_.size()) <= k) {
            const double m = static_cast<double>(acov_.size());
            acov_.push_back(0.5 * (std::pow(m + 1.0, p) - 2.0 * std::pow(m, p) +
                                   std::pow(m - 1.0, p)));
        }
        double num = acov_[k];
        for (int j = 1; j < k; ++j) num -= phi_[j] * acov_[k - j];
        const double phi_kk = num / innov_var_;
        phi_prev_ = phi_;
        phi_.assign(k + 1, 0.0);
        for (int j = 1; j < k; ++j) phi_[j] = phi_prev_[j] - phi_kk * phi_prev_[k - j];
        phi_[k] = phi_kk;
        innov_var_ *= (1.0 - phi_kk * phi_kk);
        double mean = 0.0;
        for (int j = 1; j <= k; ++j) mean += phi_[j] * history_[k - j];
        x = mean + std::sqrt(innov_var_) * xi;
    }
    history_.push_back(x);
    return step_scale_ * x;
}

SamplePath sample_fbm_hosking(double H, const Grid& grid, std::uint64_t seed) {
    rng_stream rng(seed);
    fgn_sampler s(H, grid.dt());
    SamplePath out(grid);
    for (int i = 1; i <= grid.steps; ++i) out[i] = out[i - 1] + s.next(rng);
    return out;
}

NoisePair make_noise(const KernelSet& ks, std::uint64_t seed) {
    NoisePair np;
    np.hurst = ks.hurst;
    np.seed = seed;
    np.bm = sample_bm(ks.grid, seed);
    np.fbm = fbm_from_bm(np.bm, ks);
    np.has_bm = true;
    return np;
}

NoisePair make_noise_fgn(double H, const Grid& grid, std::uint64_t seed) {
    NoisePair np;
    np.hurst = H;
    np.seed = seed;
    np.fbm = sample_fbm_hosking(H, grid, seed);
    np.has_bm = false;
    return np;
}

SamplePath fundamental_martingale(const NoisePair& noise) {
    if (!noise.has_bm)
        throw structural_error("fundamental_martingale: noise must carry the Brownian leg");
    require_same_grid(noise.bm.grid, noise.fbm.grid, "fundamental_martingale");
    const double H = noise.hurst;
    if (H == 0.5) return noise.bm;
    const Constants c = constants_for(H);
    const Grid& grid = noise.bm.grid;
    const double dt = grid.dt();
    const double p = 2.0 - 2.0 * H;
    const double scale = c.b_h / (2.0 * H);
    SamplePath m(grid);
    double tp_prev = 0.0;
    for (int j = 0; j < grid.steps; ++j) {
        const double tp = std::pow(grid.t(j + 1), p);
        const double rms = std::sqrt((tp - tp_prev) / (p * dt));
        m[j + 1] = m[j] + scale * rms * (noise.bm[j + 1] - noise.bm[j]);
        tp_prev = tp;
    }
    return m;
}

std::vector<double> k_weighted_sums(double H, const Grid& grid, std::span<const double> d) {
    const int n = grid.steps;
    if (static_cast<int>(d.size()) != n)
        throw structural_error("k_weighted_sums: need one increment per cell");
    std::vector<double> S(n + 1, 0.0);
    if (H == 0.5) {
        for (int i = 1; i <= n; ++i) S[i] = S[i - 1] + d[i - 1];
        return S;
    }
    const Constants c = constants_for(H);
    const double dt = grid.dt();
    const double g = 0.5 - H;

    std::vector<double> u0(n + 1, 0.0), u2(n + 1, 0.0);
    {
        const double ca = std::pow(dt, 1.0 + g) / (1.0 + g);
        const double cb = std::pow(dt, 2.0 + g) / (2.0 + g);
        double pa_prev = 0.0, pb_prev = 0.0;
        for (int m = 1; m <= n; ++m) {
            const double pa = std::pow(double(m), 1.0 + g);
            const double pb = std::pow(double(m), 2.0 + g);
            u0[m] = ca * (pa - pa_prev);
            u2[m] = dt * (m - 0.5) * u0[m] - cb * (pb - pb_prev);
            pa_prev = pa;
            pb_prev = pb;
        }
    }
    std::vector<double> a(n, 0.0), b(n, 0.0);
    {
        double F_prev = std::pow(grid.t(1), g);
        for (int j = 1; j < n; ++j) {
            const double F_next = std::pow(grid.t(j + 1), g);
            a[j] = 0.5 * (F_prev + F_next) * d[j];
            b[j] = ((F_next - F_prev) / dt) * d[j];
            F_prev = F_next;
        }
    }
    const double inv = 1.0 / (c.kappa_h * dt);
    for (int i = 1; i <= n; ++i) {
        const double c0 = fraccalc::detail::singular_cell_integral(
            0.0, dt, g, i == 1 ? g : 0.0,
            [&](double s) { return std::pow(s, g) * std::pow(grid.t(i) - s, g); });
        double acc = d[0] * c0;
        for (int j = 1; j < i; ++j) acc += a[j] * u0[i - j] + b[j] * u2[i - j];
        S[i] = inv * acc;
    }
    return S;
}

SamplePath martingale_from_fbm(const SamplePath& fbm, const KernelSet& ks) {
    require_same_grid(fbm.grid, ks.grid, "martingale_from_fbm");
    const int n = ks.grid.steps;
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j) d[j] = fbm[j + 1] - fbm[j];
    auto S = k_weighted_sums(ks.hurst, ks.grid, d);
    return SamplePath(ks.grid, std::move(S));
}

SamplePath bm_from_fbm(const SamplePath& fbm, const KernelSet& ks) {
    require_same_grid(fbm.grid, ks.grid, "bm_from_fbm");
    if (ks.hurst == 0.5) return fbm;
    const SamplePath m = martingale_from_fbm(fbm, ks);
    const double H = ks.hurst;
    const Grid& grid = ks.grid;
    const double dt = grid.dt();
    const double scale = 2.0 * H / ks.b_h;
    const double p = H + 0.5;
    SamplePath bpath(grid);
    double tp_prev = 0.0;
    for (int j = 0; j < grid.steps; ++j) {
        const double tp = std::pow(grid.t(j + 1), p);
        const double wbar = (tp - tp_prev) / (p * dt); // cell average of s^(H-1/2)
        bpath[j + 1] = bpath[j] + scale * wbar * (m[j + 1] - m[j]);
        tp_prev = tp;
    }
    return bpath;
}

SampledFn kh_inverse(const SampledFn& phi, const KernelSet& ks) {
    require_same_grid(phi.grid, ks.grid, "kh_inverse");
    require_finite(phi, "kh_inverse");
    if (phi[0] != 0.0) throw rejected_input_error("kh_inverse: phi(0) must be 0");
    const int n = phi.grid.steps;
    const double dt = phi.grid.dt();
    SampledFn dphi(phi.grid);
    for (int i = 0; i < n; ++i) dphi[i] = (phi[i + 1] - phi[i]) / dt;
    dphi[n] = dphi[n - 1];
    const double H = ks.hurst;
    if (H == 0.5) return dphi;
    // below H=1/2 the order is negative and the derivative degenerates to the
    // integral I^(1/2-H); this is the form that actually inverts K_H
    SampledFn core = (H > 0.5)
        ? fraccalc::frac_derivative_left_weighted(dphi, 0.5 - H, H - 0.5)
        : fraccalc::frac_integral_left_weighted(dphi, 0.5 - H, 0.5 - H);
    const double norm = (H > 0.5) ? 1.0 / (ks.c_h * gamma_fn(H - 0.5))
                                  : 1.0 / (ks.b_h * gamma_fn(H + 0.5));
    SampledFn out(phi.grid);
    for (int i = 1; i <= n; ++i)
        out[i] = norm * std::pow(phi.grid.t(i), H - 0.5) * core[i];
    out[0] = 0.0;
    return out;
}

std::vector<double> build_kernel_cells(double H, const Grid& grid, exec policy) {
    std::vector<double> tab;
    build_K_table(H, grid, tab, policy);
    return tab;
}

std::vector<double> qv_increments(double H, const Grid& grid) {
    const int n = grid.steps;
    std::vector<double> dqv(n);
    if (H == 0.5) {
        for (int j = 0; j < n; ++j) dqv[j] = grid.t(j + 1) - grid.t(j);
        return dqv;
    }
    const Constants c = constants_for(H);
    const double p = 2.0 - 2.0 * H;
    double tp_prev = 0.0;
    for (int j = 0; j < n; ++j) {
        const double tp = std::pow(grid.t(j + 1), p);
        dqv[j] = (tp - tp_prev) / c.lambda_h;
        tp_prev = tp;
    }
    return dqv;
}

} // namespace rfou::fgn
