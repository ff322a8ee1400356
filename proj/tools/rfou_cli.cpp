// Command-line front end: simulate RFOU paths, run the drift estimators, and
// drive the Monte Carlo verification suites.
//
// Exit codes: 0 success, 1 invalid configuration, 2 suite ran but one or more
// acceptance checks failed (the PASS/FAIL list is in the report payload).
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfou/fgn.hpp"
#include "rfou/harness.hpp"
#include "rfou/infer.hpp"
#include "rfou/math.hpp"
#include "rfou/reflect.hpp"

using namespace rfou;

namespace {

struct CliOptions {
    harness::ExperimentConfig cfg;
    std::string kind_name = "sequential";
    std::string noise_out;
    double seq_dt = 0.05;
};

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw parameter_error("cannot open output file: " + path);
    return file;
}

// the coupled Brownian leg needs the dense kernel table; fall back to the exact
// fGn sampler on grids too large for it
fgn::NoisePair make_path_noise(const harness::ExperimentConfig& cfg, const Grid& grid) {
    if (grid.steps <= 4096 && cfg.model.hurst >= 1e-3 && cfg.model.hurst <= 1.0 - 1e-3) {
        const auto ks = fgn::make_kernels(cfg.model.hurst, grid);
        return fgn::make_noise(ks, cfg.seed);
    }
    return fgn::make_noise_fgn(cfg.model.hurst, grid, cfg.seed);
}

int emit_report(const harness::ExperimentReport& rep, const harness::ExperimentConfig& cfg) {
    std::ofstream file;
    std::ostream& os = open_sink(cfg.out_path, file);
    if (cfg.format == "csv")
        os << harness::records_to_csv(rep.records);
    else
        os << harness::report_to_json(rep) << '\n';
    for (const auto& c : rep.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " (value=" << c.value
                  << ", threshold=" << c.threshold << ")\n";
    return rep.all_passed() ? 0 : 2;
}

int run_simulate(const CliOptions& opt) {
    const Grid grid(opt.cfg.horizon, opt.cfg.steps);
    const auto noise = make_path_noise(opt.cfg, grid);
    const auto path = reflect::simulate_rfou(opt.cfg.model, noise);
    std::ofstream file;
    std::ostream& os = open_sink(opt.cfg.out_path, file);
    harness::write_rfou_csv(os, path);
    if (!opt.noise_out.empty()) {
        if (!noise.has_bm)
            throw parameter_error("noise dump needs the coupled Brownian leg (steps <= 4096)");
        const auto ks = fgn::make_kernels(opt.cfg.model.hurst, grid);
        std::ofstream nf(opt.noise_out);
        if (!nf) throw parameter_error("cannot open output file: " + opt.noise_out);
        harness::write_noise_csv(nf, noise, fgn::fundamental_martingale(noise));
    }
    return 0;
}

int run_estimate(const CliOptions& opt) {
    const Grid grid(opt.cfg.horizon, opt.cfg.steps);
    const auto ks = fgn::make_kernels(opt.cfg.model.hurst, grid);
    const auto noise = make_path_noise(opt.cfg, grid);
    const auto path = reflect::simulate_rfou(opt.cfg.model, noise);
    const auto rec = infer::mle(path, ks, opt.cfg.model.alpha);
    std::vector<harness::RecordRow> rows(1);
    rows[0].rec = rec;
    std::ofstream file;
    std::ostream& os = open_sink(opt.cfg.out_path, file);
    os << harness::records_to_csv(rows);
    return 0;
}

int run_sequential_one(const CliOptions& opt) {
    infer::SequentialOptions sopts;
    sopts.dt = opt.seq_dt;
    sopts.chunk = opt.cfg.chunk;
    const auto rec = infer::sequential_mle(opt.cfg.model, opt.cfg.h_level, opt.cfg.seed,
                                           opt.cfg.max_horizon, sopts);
    std::vector<harness::RecordRow> rows(1);
    rows[0].rec = rec;
    std::ofstream file;
    std::ostream& os = open_sink(opt.cfg.out_path, file);
    os << harness::records_to_csv(rows);
    return rec.hit ? 0 : 2;
}

int run_suite(CliOptions& opt) {
    opt.cfg.kind = harness::kind_from_name(opt.kind_name);
    opt.cfg.seq_dt = opt.seq_dt;
    harness::ExperimentReport rep;
    switch (opt.cfg.kind) {
        case harness::ExperimentKind::sequential:
            rep = harness::run_sequential_suite(opt.cfg);
            break;
        case harness::ExperimentKind::consistency:
        case harness::ExperimentKind::normality:
            rep = harness::run_mle_suite(opt.cfg);
            break;
        case harness::ExperimentKind::girsanov:
            rep = harness::run_girsanov_suite(opt.cfg);
            break;
        case harness::ExperimentKind::queue_demo:
            rep = harness::queue_scaling_demo(opt.cfg);
            break;
    }
    return emit_report(rep, opt.cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflected fractional Ornstein-Uhlenbeck simulation and drift inference"};
    app.set_config("--config", "", "key=value file mirroring the flags; flags override it");

    CliOptions opt;
    auto& cfg = opt.cfg;
    app.add_option("--hurst", cfg.model.hurst, "Hurst index in (0,1)")->capture_default_str();
    app.add_option("--alpha", cfg.model.alpha, "drift parameter")->capture_default_str();
    app.add_option("--sigma", cfg.model.sigma, "diffusion coefficient")->capture_default_str();
    app.add_option("--barrier", cfg.model.barrier, "reflecting barrier b >= 0")
        ->capture_default_str();
    app.add_option("--x0", cfg.model.x0, "initial state >= barrier")->capture_default_str();
    app.add_option("--horizon", cfg.horizon, "time horizon T")->capture_default_str();
    app.add_option("--steps", cfg.steps, "grid steps over the horizon")->capture_default_str();
    app.add_option("--reps", cfg.replications, "Monte Carlo replications")
        ->capture_default_str();
    app.add_option("--h-level", cfg.h_level, "sequential information level h")
        ->capture_default_str();
    app.add_option("--max-horizon", cfg.max_horizon, "sequential horizon guard")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "root seed")->capture_default_str();
    app.add_option("--out", cfg.out_path, "output file (default: stdout)");
    app.add_option("--format", cfg.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--seq-dt", opt.seq_dt, "sequential simulation step")->capture_default_str();
    app.add_option("--chunk", cfg.chunk, "sequential state growth quantum")
        ->capture_default_str();
    app.add_option("--reps-ks", cfg.replications_ks, "replications for the normality batch")
        ->capture_default_str();
    app.add_option("--ladder", cfg.horizon_ladder, "horizon ladder for the MLE suite")
        ->capture_default_str();
    app.add_option("--queue-steps", cfg.queue_steps, "queue demo grid steps")
        ->capture_default_str();
    app.add_option("--refine-steps", cfg.refine_steps,
                   "base grid of the likelihood-ratio refinement pair")
        ->capture_default_str();
    app.add_option("--scales", cfg.queue_scales, "queue demo N ladder")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "simulate one RFOU path, dump t,X,L,WH");
    sim->add_option("--noise-out", opt.noise_out, "also dump the driving noise as t,W,WH,M");
    auto* est = app.add_subcommand("estimate", "simulate one path and run the fixed-T MLE");
    auto* seq = app.add_subcommand("sequential", "run one sequential estimation plan");
    auto* suite = app.add_subcommand("suite", "run a Monte Carlo verification suite");
    suite->add_option("--kind", opt.kind_name,
                      "consistency | normality | sequential | girsanov | queue-demo")
        ->check(CLI::IsMember({"consistency", "normality", "sequential", "girsanov",
                               "queue-demo"}))
        ->capture_default_str();
    auto* queue = app.add_subcommand("queue-demo", "heavy-traffic queue scaling demo");
    for (auto* sub : {sim, est, seq, suite, queue}) sub->fallthrough();
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return run_simulate(opt);
        if (est->parsed()) return run_estimate(opt);
        if (seq->parsed()) return run_sequential_one(opt);
        if (queue->parsed()) {
            opt.kind_name = "queue-demo";
            return run_suite(opt);
        }
        return run_suite(opt);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
