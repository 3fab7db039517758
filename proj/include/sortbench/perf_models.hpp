#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sortbench/parallel_sort.hpp"

namespace sortbench::models {

// Calibration constants of the analytic time model. All costs in seconds:
// c_comp per unit of compute work, c_init per process, c_msg per message,
// c_byte per element transferred.
struct ModelParams {
    double c_comp = 0.0;
    double c_init = 0.0;
    double c_msg = 0.0;
    double c_byte = 0.0;
};

// One point of a model curve.
struct ModelPoint {
    parallel::Algorithm algorithm = parallel::Algorithm::bubble;
    std::size_t n = 0;
    int m = 1;
    int cores = 1;
    double t_model_s = 0.0;
    std::uint64_t mem_model_elements = 0;
};

// One timed run used for calibration.
struct Measurement {
    parallel::Algorithm algorithm = parallel::Algorithm::bubble;
    std::size_t n = 0;
    int m = 1;
    int cores = 1;
    double seconds = 0.0;
};

// Fixed small constants of the memory model, in elements.
inline constexpr std::uint64_t kMemBaseElements = 64;  // flat per-run slack
inline constexpr std::uint64_t kMemDepthElements = 2;  // per recursion level

// Compute-work basis of the time models: total work divided by the
// effective core count min(cores, m). Bubble's total work shrinks as n^2/m;
// the n log n sorts keep total work 2n log2(n/m).
double bubble_work_basis(std::size_t n, int m, int cores);
double nlogn_work_basis(std::size_t n, int m, int cores);

// Time models: compute term plus m * c_init plus, for m >= 2, m phases of
// (c_msg + (n/m) * c_byte). A single process exchanges no messages, so the
// phase term vanishes at m = 1.
double bubble_time(std::size_t n, int m, int cores, const ModelParams& params);
double nlogn_time(parallel::Algorithm algorithm, std::size_t n, int m,
                  int cores, const ModelParams& params);
double model_time(parallel::Algorithm algorithm, std::size_t n, int m,
                  int cores, const ModelParams& params);

// Peak memory in elements: n + C0 (bubble), 2n + C0 (merge),
// n + C1 * ceil(log2 n) + C0 (quick).
std::uint64_t memory_model(parallel::Algorithm algorithm, std::size_t n);

struct FitResult {
    ModelParams params;
    std::vector<double> rel_residuals; // per measurement
    double max_rel_residual = 0.0;
};

// Least-squares fit of the parameters to the measurements. Requires an
// (m=1, cores=1) anchor point. Parameters whose basis column is identically
// zero over the measurements (e.g. message costs when every run has m=1)
// are fixed at zero, as are the lowest-priority parameters when there are
// fewer measurements than observable parameters (priority c_comp, c_init,
// c_msg, c_byte). Genuinely collinear configurations throw
// CalibrationError naming what is missing.
FitResult calibrate(const std::vector<Measurement>& measurements);

} // namespace sortbench::models
