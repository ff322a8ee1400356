// Timing harness for the data-parallel kernels: runs each one under the serial
// reference policy and under OpenMP, checks the outputs agree bitwise, and
// prints the speedup. Every kernel fixes the per-element summation order, so
// thread count changes timing only, never results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rfou/fgn.hpp"
#include "rfou/fraccalc.hpp"
#include "rfou/harness.hpp"
#include "rfou/math.hpp"
#include "rfou/reflect.hpp"

using namespace rfou;

namespace {

double now_sec() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_sec();
        fn();
        best = std::min(best, now_sec() - t0);
    }
    return best;
}

void row(const std::string& name, double t_serial, double t_omp, bool equal) {
    std::printf("%-38s %9.3f ms %9.3f ms   x%.2f   %s\n", name.c_str(), 1e3 * t_serial,
                1e3 * t_omp, t_serial / t_omp, equal ? "bitwise-equal" : "MISMATCH");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("openmp not available: both columns run the serial path\n");
#endif
    std::printf("%-38s %12s %12s %7s\n", "kernel", "serial", "openmp", "speedup");

    // fractional derivative on a long sampled path
    {
        Grid g(1.0, 8192);
        SampledFn f(g);
        for (int i = 0; i <= g.steps; ++i) f[i] = std::sin(7.0 * g.t(i)) + g.t(i);
        SampledFn a, b;
        const double ts = time_best_of(3, [&] { a = fraccalc::frac_derivative_left(f, 0.45, exec::serial); });
        const double tp = time_best_of(3, [&] { b = fraccalc::frac_derivative_left(f, 0.45, exec::openmp); });
        row("frac_derivative_left n=8192", ts, tp, a.values == b.values);
    }

    // dense cell-averaged kernel table
    {
        Grid g(1.0, 768);
        std::vector<double> a, b;
        const double ts = time_best_of(2, [&] { a = fgn::build_kernel_cells(0.7, g, exec::serial); });
        const double tp = time_best_of(2, [&] { b = fgn::build_kernel_cells(0.7, g, exec::openmp); });
        row("kernel table build n=768", ts, tp, a == b);
    }

    // Hölder seminorm pair scan
    {
        Grid g(1.0, 4096);
        const auto path = fgn::sample_fbm_hosking(0.7, g, 42);
        double a = 0, b = 0;
        const double ts = time_best_of(3, [&] { a = reflect::holder_norm(path, 0.6, exec::serial); });
        const double tp = time_best_of(3, [&] { b = reflect::holder_norm(path, 0.6, exec::openmp); });
        row("holder_norm n=4096", ts, tp, a == b);
    }

    // Monte Carlo replication fan-out (sequential suite)
    {
        harness::ExperimentConfig cfg;
        cfg.model.alpha = 1.0;
        cfg.model.sigma = 1.0;
        cfg.model.x0 = 1.0;
        cfg.model.hurst = 0.5;
        cfg.h_level = 5.0;
        cfg.seq_dt = 0.01;
        cfg.max_horizon = 500.0;
        cfg.replications = 64;
        cfg.seq_check_2h = false;
        harness::ExperimentReport ra, rb;
        const double ts = time_best_of(2, [&] { ra = harness::run_sequential_suite(cfg, exec::serial); });
        const double tp = time_best_of(2, [&] { rb = harness::run_sequential_suite(cfg, exec::openmp); });
        bool eq = ra.summary.mean == rb.summary.mean && ra.summary.mse == rb.summary.mse;
        row("sequential suite 64 reps", ts, tp, eq);
    }
    return 0;
}
