#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sortbench/element.hpp"
#include "sortbench/parallel_sort.hpp"
#include "sortbench/perf_models.hpp"
#include "sortbench/runtime.hpp"

namespace sortbench::bench {

// One benchmark execution's inputs.
struct RunConfig {
    parallel::Algorithm algorithm = parallel::Algorithm::bubble;
    std::size_t n = 0;
    int procs = 1;
    int cores = 1;
    std::uint64_t seed = 1;
    runtime::Mode mode = runtime::Mode::counted;
    int repetitions = 1;
};

std::string run_id(const RunConfig& config);

// The verified result of one configuration. Reports are only built for runs
// whose gathered output passed the sorted + permutation check.
struct RunReport {
    RunConfig config;
    double wall_seconds = 0.0;   // median over repetitions (wall mode)
    std::uint64_t weighted_ops = 0;
    double compute_total = 0.0;  // seconds (wall) or weighted units (counted)
    double overhead_total = 0.0; // communication + idle
    std::uint64_t peak_elements = 0;
    runtime::WorldReport world;  // the median repetition's world
    std::vector<kernels::SortStats> local_sort_stats;
};

// Deterministic uniform 64-bit data (splitmix64 stream over the seed).
DataList gen_data(std::size_t n, std::uint64_t seed);

// Throws VerificationError unless output is exactly the ascending sort of
// input. Every report goes through this gate before it is emitted anywhere.
void verify_output(const RunConfig& config, const DataList& input,
                   const DataList& output);

// Runs one configuration (with repetitions in wall mode), verifies the
// output against the reference sort and returns the report. Throws
// VerificationError when the gathered output is not the sorted input.
RunReport run_benchmark(const RunConfig& config);

struct OverheadRatio {
    std::vector<double> per_rank;
    double aggregate = 0.0;
    bool infinite = false; // some rank had zero compute time
};

// (send + recv + collectives + idle) / compute per rank; aggregate is the
// mean over ranks.
OverheadRatio overhead_ratio(const runtime::WorldReport& world);

// Experiment grids. Every run is verified before its row is recorded; a
// verification failure aborts the whole experiment.
struct Exp1Result {
    std::vector<std::string> csv_rows;  // formatted, excluding the header
    std::vector<RunReport> reports;
};

extern const char* const kExp1CsvHeader;
extern const char* const kExp2CsvHeader;

std::string exp1_csv_row(const RunReport& report);

Exp1Result experiment1(const std::vector<parallel::Algorithm>& algorithms,
                       const std::vector<std::size_t>& n_per_algorithm,
                       const std::vector<int>& proc_list,
                       const std::vector<int>& core_list, std::uint64_t seed,
                       runtime::Mode mode, int repetitions);

struct Exp2Result {
    std::vector<std::string> csv_rows;
    std::vector<RunReport> reports;
};

// Memory experiment: m = 2, k = 2 for every size.
Exp2Result experiment2(const std::vector<parallel::Algorithm>& algorithms,
                       const std::vector<std::vector<std::size_t>>& sizes,
                       std::uint64_t seed);

// Default desk-scale grids.
std::vector<std::size_t> default_exp1_sizes(
    const std::vector<parallel::Algorithm>& algorithms);
std::vector<std::vector<std::size_t>> default_exp2_sizes(
    const std::vector<parallel::Algorithm>& algorithms);

void write_csv(const std::string& path, const char* header,
               const std::vector<std::string>& rows);

// Trace export: JSON Lines, one event per line, plus a companion
// "<path>.summary.json" with per-rank compute/communication/idle totals and
// the full counter set.
void emit_trace(const RunReport& report, const std::string& path);

std::string trace_to_jsonl(const RunReport& report);
std::string trace_summary_json(const RunReport& report);

// Model curves: model predictions over the measurement rows when
// measurements are given, otherwise over a default grid. Also renders one
// small SVG chart per algorithm next to the CSV.
void emit_model_curves(const models::ModelParams& params,
                       const std::vector<models::Measurement>& measurements,
                       const std::string& csv_path, bool render_svg = true);

// Stable shortest-round-trip formatting used for every CSV double.
std::string format_double(double value);

} // namespace sortbench::bench
