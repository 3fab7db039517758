#include "sortbench/perf_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sortbench/errors.hpp"

namespace sortbench::models {

namespace {

double clamped_log2(double x) { return x > 1.0 ? std::log2(x) : 0.0; }

int effective_cores(int m, int cores) { return std::min(cores, m); }

// Per-phase message cost term; zero for a single process, which exchanges
// no messages.
double phase_basis_msg(int m) { return m >= 2 ? static_cast<double>(m) : 0.0; }

double phase_basis_byte(std::size_t n, int m) {
    // m phases, each moving n/m elements: m * (n/m) = n.
    return m >= 2 ? static_cast<double>(n) : 0.0;
}

} // namespace

double bubble_work_basis(std::size_t n, int m, int cores) {
    const double nd = static_cast<double>(n);
    return nd * nd /
           (static_cast<double>(m) *
            static_cast<double>(effective_cores(m, cores)));
}

double nlogn_work_basis(std::size_t n, int m, int cores) {
    const double nd = static_cast<double>(n);
    return 2.0 * nd * clamped_log2(nd / static_cast<double>(m)) /
           static_cast<double>(effective_cores(m, cores));
}

double bubble_time(std::size_t n, int m, int cores,
                   const ModelParams& params) {
    return params.c_comp * bubble_work_basis(n, m, cores) +
           params.c_init * static_cast<double>(m) +
           params.c_msg * phase_basis_msg(m) +
           params.c_byte * phase_basis_byte(n, m);
}

double nlogn_time(parallel::Algorithm /*algorithm*/, std::size_t n, int m,
                  int cores, const ModelParams& params) {
    return params.c_comp * nlogn_work_basis(n, m, cores) +
           params.c_init * static_cast<double>(m) +
           params.c_msg * phase_basis_msg(m) +
           params.c_byte * phase_basis_byte(n, m);
}

double model_time(parallel::Algorithm algorithm, std::size_t n, int m,
                  int cores, const ModelParams& params) {
    if (algorithm == parallel::Algorithm::bubble) {
        return bubble_time(n, m, cores, params);
    }
    return nlogn_time(algorithm, n, m, cores, params);
}

namespace {

std::uint64_t ceil_log2(std::uint64_t n) {
    std::uint64_t bits = 0;
    std::uint64_t value = 1;
    while (value < n) {
        value <<= 1;
        ++bits;
    }
    return bits;
}

} // namespace

std::uint64_t memory_model(parallel::Algorithm algorithm, std::size_t n) {
    const auto nd = static_cast<std::uint64_t>(n);
    switch (algorithm) {
        case parallel::Algorithm::bubble:
            return nd + kMemBaseElements;
        case parallel::Algorithm::merge:
            return 2 * nd + kMemBaseElements;
        case parallel::Algorithm::quick:
            return nd + kMemDepthElements * ceil_log2(nd) + kMemBaseElements;
    }
    return nd;
}

namespace {

// Least squares via column-scaled modified Gram-Schmidt QR with one
// reorthogonalization pass. Four columns, so this stays tiny and keeps the
// wildly different column magnitudes (n^2 vs. m) well conditioned.
struct LsqProblem {
    std::vector<std::array<double, 4>> rows;
    std::vector<double> rhs;
};

std::array<double, 4> basis_row(const Measurement& meas) {
    const double comp =
        meas.algorithm == parallel::Algorithm::bubble
            ? bubble_work_basis(meas.n, meas.m, meas.cores)
            : nlogn_work_basis(meas.n, meas.m, meas.cores);
    return {comp, static_cast<double>(meas.m), phase_basis_msg(meas.m),
            phase_basis_byte(meas.n, meas.m)};
}

const char* kColumnHints[4] = {
    "vary the data size or process count to separate the compute term",
    "include runs at several process counts to identify the per-process "
    "initialization cost",
    "include at least two runs with m >= 2 and different m to identify the "
    "per-message cost",
    "include runs with m >= 2 at different data sizes to identify the "
    "per-element transfer cost",
};

} // namespace

FitResult calibrate(const std::vector<Measurement>& measurements) {
    if (measurements.empty()) {
        throw CalibrationError("calibration needs at least one measurement");
    }
    const bool has_sequential_point =
        std::any_of(measurements.begin(), measurements.end(),
                    [](const Measurement& m) { return m.m == 1 && m.cores == 1; });
    if (!has_sequential_point) {
        throw CalibrationError(
            "calibration needs an (m=1, cores=1) measurement to anchor the "
            "sequential compute cost");
    }

    const std::size_t rows = measurements.size();
    std::vector<std::array<double, 4>> full(rows);
    std::vector<double> t(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        full[i] = basis_row(measurements[i]);
        t[i] = measurements[i].seconds;
    }

    // A parameter whose basis column is identically zero cannot be observed
    // by these measurements; the minimum-norm solution pins it to zero.
    std::vector<int> active;
    for (int c = 0; c < 4; ++c) {
        bool nonzero = false;
        for (std::size_t i = 0; i < rows; ++i) {
            if (full[i][static_cast<std::size_t>(c)] != 0.0) {
                nonzero = true;
                break;
            }
        }
        if (nonzero) active.push_back(c);
    }
    // With fewer measurements than observable parameters, fix the
    // lower-priority parameters at zero (c_comp first, c_byte last) so a
    // single sequential point still yields an exact c_comp.
    if (rows < active.size()) active.resize(rows);
    const std::size_t cols = active.size();

    std::vector<std::vector<double>> a(rows, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            a[i][c] = full[i][static_cast<std::size_t>(active[c])];
        }
    }

    // Scale each column to unit infinity-norm.
    std::vector<double> scale(cols, 1.0);
    for (std::size_t c = 0; c < cols; ++c) {
        double mx = 0.0;
        for (std::size_t i = 0; i < rows; ++i) mx = std::max(mx, std::fabs(a[i][c]));
        scale[c] = mx;
        for (std::size_t i = 0; i < rows; ++i) a[i][c] /= mx;
    }

    // Modified Gram-Schmidt with a second orthogonalization pass.
    std::vector<std::vector<double>> r(cols, std::vector<double>(cols, 0.0));
    auto dot = [&](std::size_t c1, std::size_t c2) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += a[i][c1] * a[i][c2];
        return s;
    };
    for (std::size_t c = 0; c < cols; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t prev = 0; prev < c; ++prev) {
                const double proj = dot(prev, c);
                r[prev][c] += proj;
                for (std::size_t i = 0; i < rows; ++i) a[i][c] -= proj * a[i][prev];
            }
        }
        const double norm = std::sqrt(dot(c, c));
        if (norm < 1e-10) {
            throw CalibrationError(
                std::string("calibration is singular: ") +
                kColumnHints[active[c]]);
        }
        r[c][c] = norm;
        for (std::size_t i = 0; i < rows; ++i) a[i][c] /= norm;
    }

    // x = R^-1 Q^T t, then undo the column scaling.
    std::vector<double> qt(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += a[i][c] * t[i];
        qt[c] = s;
    }
    std::vector<double> solved(cols, 0.0);
    for (std::size_t c = cols; c-- > 0;) {
        double s = qt[c];
        for (std::size_t c2 = c + 1; c2 < cols; ++c2) s -= r[c][c2] * solved[c2];
        solved[c] = s / r[c][c];
    }
    std::array<double, 4> x{};
    for (std::size_t c = 0; c < cols; ++c) {
        x[static_cast<std::size_t>(active[c])] = solved[c] / scale[c];
    }

    FitResult fit;
    fit.params.c_comp = std::max(0.0, x[0]);
    fit.params.c_init = std::max(0.0, x[1]);
    fit.params.c_msg = std::max(0.0, x[2]);
    fit.params.c_byte = std::max(0.0, x[3]);

    fit.rel_residuals.reserve(rows);
    for (const Measurement& meas : measurements) {
        const double pred =
            model_time(meas.algorithm, meas.n, meas.m, meas.cores, fit.params);
        const double denom = std::max(std::fabs(meas.seconds), 1e-300);
        const double rel = std::fabs(pred - meas.seconds) / denom;
        fit.rel_residuals.push_back(rel);
        fit.max_rel_residual = std::max(fit.max_rel_residual, rel);
    }
    return fit;
}

} // namespace sortbench::models
