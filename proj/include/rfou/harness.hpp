#pragma once
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfou/infer.hpp"

namespace rfou::harness {

enum class ExperimentKind { consistency, normality, sequential, girsanov, queue_demo };

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

struct ExperimentConfig {
    reflect::ModelParams model;
    double horizon = 10.0;
    int steps = 1000;
    int replications = 200;
    std::uint64_t seed = 20250808;
    ExperimentKind kind = ExperimentKind::sequential;

    // sequential plan
    double h_level = 50.0;
    double max_horizon = 4000.0;
    double seq_dt = 0.05;
    int chunk = 4096;
    bool seq_check_2h = true;

    // fixed-horizon suite
    std::vector<double> horizon_ladder = {25.0, 50.0, 100.0};
    int replications_ks = 500;

    // girsanov refinement pair baseline
    int refine_steps = 128;

    // queue demo
    std::vector<double> queue_scales = {10.0, 100.0, 1000.0};
    int queue_steps = 1000;

    std::string out_path;
    std::string format = "json"; // csv | json

    void validate() const;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct SummaryStats {
    int count = 0;
    double mean = 0.0;
    double bias = 0.0;
    double se_mean = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    double ks_stat = 0.0;
    double ks_p = 0.0;
    bool has_ks = false;
};

struct RecordRow {
    infer::EstimateRecord rec;
    std::string error; // non-empty: replication failed, excluded from the summary
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RecordRow> records;
    SummaryStats summary;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<CheckResult> checks;
    std::string note;
    double wall_clock_sec = 0.0;

    bool all_passed() const;
};

// One-sample Kolmogorov-Smirnov against the standard normal CDF; asymptotic p.
std::pair<double, double> ks_test_normal(std::span<const double> sample);
// Two-sample KS with the effective-size asymptotic p.
std::pair<double, double> ks_test_two_sample(std::span<const double> a,
                                             std::span<const double> b);

// Permutation-invariant moment summary (values sorted before accumulation, so
// reordering replications cannot change the result bit for bit).
SummaryStats summarize(const std::vector<RecordRow>& rows, double alpha_true,
                       bool ks_on_standardized);

ExperimentReport run_sequential_suite(const ExperimentConfig& cfg, exec policy = exec::openmp);
ExperimentReport run_mle_suite(const ExperimentConfig& cfg, exec policy = exec::openmp);
ExperimentReport run_girsanov_suite(const ExperimentConfig& cfg, exec policy = exec::openmp);
ExperimentReport queue_scaling_demo(const ExperimentConfig& cfg, exec policy = exec::openmp);

std::string report_to_json(const ExperimentReport& report);
std::string records_to_csv(const std::vector<RecordRow>& rows);
void write_rfou_csv(std::ostream& os, const reflect::RfouPath& path);
void write_noise_csv(std::ostream& os, const fgn::NoisePair& noise, const SamplePath& mart);

} // namespace rfou::harness
