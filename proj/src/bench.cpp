#include "sortbench/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sortbench/errors.hpp"

namespace sortbench::bench {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Formatting

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general);
    return std::string(buf, res.ptr);
}

std::string run_id(const RunConfig& config) {
    std::string key = std::string(parallel::to_string(config.algorithm)) + "|" +
                      std::to_string(config.n) + "|" +
                      std::to_string(config.procs) + "|" +
                      std::to_string(config.cores) + "|" +
                      std::to_string(config.seed) + "|" +
                      runtime::to_string(config.mode) + "|" +
                      std::to_string(config.repetitions);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : key) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// Data generation

DataList gen_data(std::size_t n, std::uint64_t seed) {
    DataList out;
    out.reserve(n);
    std::uint64_t x = seed;
    for (std::size_t i = 0; i < n; ++i) {
        // splitmix64
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z = z ^ (z >> 31);
        out.push_back(static_cast<Element>(z));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Running and verifying one configuration

namespace {

std::string describe(const RunConfig& c) {
    return std::string(parallel::to_string(c.algorithm)) +
           " n=" + std::to_string(c.n) + " m=" + std::to_string(c.procs) +
           " k=" + std::to_string(c.cores) + " seed=" + std::to_string(c.seed) +
           " mode=" + runtime::to_string(c.mode);
}

bool is_compute(runtime::EventKind kind) {
    return kind == runtime::EventKind::compute;
}

double event_duration(const runtime::TraceEvent& ev) {
    return static_cast<double>(ev.t_end - ev.t_start);
}

} // namespace

void verify_output(const RunConfig& config, const DataList& input,
                   const DataList& output) {
    DataList reference = input;
    std::sort(reference.begin(), reference.end());
    if (!kernels::is_sorted(output) || output != reference) {
        throw VerificationError(
            "run produced output that is not the sorted input: " +
            describe(config));
    }
}

RunReport run_benchmark(const RunConfig& config) {
    if (config.procs < 1 || config.cores < 1 || config.repetitions < 1) {
        throw ConfigError("invalid run configuration: " + describe(config));
    }

    const DataList input = gen_data(config.n, config.seed);

    runtime::WorldOptions options;
    options.procs = config.procs;
    options.core_slots = config.cores;
    options.mode = config.mode;

    // Counted runs are bit-deterministic, so one repetition tells all.
    const int reps =
        config.mode == runtime::Mode::wall ? config.repetitions : 1;

    std::vector<parallel::SortOutcome> outcomes;
    std::vector<double> times;
    outcomes.reserve(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        parallel::SortOutcome outcome =
            parallel::scatter_merge_sort(config.algorithm, input, options);
        verify_output(config, input, outcome.sorted);
        times.push_back(outcome.world.wall_seconds);
        outcomes.push_back(std::move(outcome));
    }

    // Median repetition (lower middle for even counts).
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    const std::size_t median_idx = order[(order.size() - 1) / 2];

    RunReport report;
    report.config = config;
    report.wall_seconds =
        config.mode == runtime::Mode::wall ? times[median_idx] : 0.0;
    parallel::SortOutcome& chosen = outcomes[median_idx];
    report.local_sort_stats = std::move(chosen.local_sort_stats);
    report.world = std::move(chosen.world);
    report.weighted_ops = report.world.weighted_ops;

    const double unit =
        config.mode == runtime::Mode::wall ? 1e-9 : 1.0; // ns -> s
    for (const auto& ev : report.world.trace) {
        if (is_compute(ev.kind)) {
            report.compute_total += event_duration(ev) * unit;
        } else {
            report.overhead_total += event_duration(ev) * unit;
        }
    }

    report.peak_elements =
        report.world.total(&runtime::CostCounters::peak_tracked_elements);
    if (config.algorithm == parallel::Algorithm::quick) {
        std::uint64_t deepest = 0;
        for (const auto& c : report.world.counters) {
            deepest = std::max(deepest, c.max_recursion_depth);
        }
        report.peak_elements += models::kMemDepthElements * deepest;
    }
    return report;
}

OverheadRatio overhead_ratio(const runtime::WorldReport& world) {
    const int p = world.options.procs;
    std::vector<double> compute(static_cast<std::size_t>(p), 0.0);
    std::vector<double> overhead(static_cast<std::size_t>(p), 0.0);
    for (const auto& ev : world.trace) {
        auto& bucket = is_compute(ev.kind)
                           ? compute[static_cast<std::size_t>(ev.rank)]
                           : overhead[static_cast<std::size_t>(ev.rank)];
        bucket += event_duration(ev);
    }
    OverheadRatio result;
    result.per_rank.resize(static_cast<std::size_t>(p), 0.0);
    double sum = 0.0;
    for (int r = 0; r < p; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        if (compute[idx] > 0.0) {
            result.per_rank[idx] = overhead[idx] / compute[idx];
        } else if (overhead[idx] == 0.0) {
            result.per_rank[idx] = 0.0;
        } else {
            result.per_rank[idx] = std::numeric_limits<double>::infinity();
            result.infinite = true;
        }
        sum += result.per_rank[idx];
    }
    result.aggregate = result.infinite
                           ? std::numeric_limits<double>::infinity()
                           : sum / static_cast<double>(p);
    return result;
}

// ---------------------------------------------------------------------------
// Experiments

const char* const kExp1CsvHeader =
    "algorithm,n,m,k,time_s,weighted_ops,compute_s,overhead_s,ratio";
const char* const kExp2CsvHeader =
    "algorithm,n,peak_elements,model_elements,ratio";

std::string exp1_csv_row(const RunReport& report) {
    const OverheadRatio ratio = overhead_ratio(report.world);
    std::ostringstream row;
    row << parallel::to_string(report.config.algorithm) << ','
        << report.config.n << ',' << report.config.procs << ','
        << report.config.cores << ',' << format_double(report.wall_seconds)
        << ',' << report.weighted_ops << ','
        << format_double(report.compute_total) << ','
        << format_double(report.overhead_total) << ','
        << format_double(ratio.aggregate);
    return row.str();
}

Exp1Result experiment1(const std::vector<parallel::Algorithm>& algorithms,
                       const std::vector<std::size_t>& n_per_algorithm,
                       const std::vector<int>& proc_list,
                       const std::vector<int>& core_list, std::uint64_t seed,
                       runtime::Mode mode, int repetitions) {
    if (algorithms.empty() || proc_list.empty() || core_list.empty()) {
        throw ConfigError("experiment 1 needs non-empty algorithm, process "
                          "and core grids");
    }
    if (n_per_algorithm.size() != algorithms.size()) {
        throw ConfigError("experiment 1 needs one data size per algorithm");
    }
    Exp1Result result;
    for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
        for (int m : proc_list) {
            for (int k : core_list) {
                RunConfig config;
                config.algorithm = algorithms[ai];
                config.n = n_per_algorithm[ai];
                config.procs = m;
                config.cores = k;
                config.seed = seed;
                config.mode = mode;
                config.repetitions = repetitions;
                RunReport report = run_benchmark(config);
                result.csv_rows.push_back(exp1_csv_row(report));
                result.reports.push_back(std::move(report));
            }
        }
    }
    return result;
}

Exp2Result experiment2(const std::vector<parallel::Algorithm>& algorithms,
                       const std::vector<std::vector<std::size_t>>& sizes,
                       std::uint64_t seed) {
    if (algorithms.empty()) {
        throw ConfigError("experiment 2 needs at least one algorithm");
    }
    if (sizes.size() != algorithms.size()) {
        throw ConfigError("experiment 2 needs one size list per algorithm");
    }
    Exp2Result result;
    for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
        if (sizes[ai].empty()) {
            throw ConfigError("experiment 2 size list is empty for " +
                              std::string(parallel::to_string(algorithms[ai])));
        }
        for (std::size_t n : sizes[ai]) {
            RunConfig config;
            config.algorithm = algorithms[ai];
            config.n = n;
            config.procs = 2; // the memory experiment runs two processes
            config.cores = 2; // on two cores
            config.seed = seed;
            config.mode = runtime::Mode::counted;
            config.repetitions = 1;
            RunReport report = run_benchmark(config);
            const std::uint64_t model =
                models::memory_model(config.algorithm, n);
            std::ostringstream row;
            row << parallel::to_string(config.algorithm) << ',' << n << ','
                << report.peak_elements << ',' << model << ','
                << format_double(static_cast<double>(report.peak_elements) /
                                 static_cast<double>(model));
            result.csv_rows.push_back(row.str());
            result.reports.push_back(std::move(report));
        }
    }
    return result;
}

std::vector<std::size_t> default_exp1_sizes(
    const std::vector<parallel::Algorithm>& algorithms) {
    std::vector<std::size_t> sizes;
    for (auto algo : algorithms) {
        sizes.push_back(algo == parallel::Algorithm::bubble ? 20000 : 600000);
    }
    return sizes;
}

std::vector<std::vector<std::size_t>> default_exp2_sizes(
    const std::vector<parallel::Algorithm>& algorithms) {
    std::vector<std::vector<std::size_t>> sizes;
    for (auto algo : algorithms) {
        std::vector<std::size_t> list;
        if (algo == parallel::Algorithm::bubble) {
            for (std::size_t n = 50000; n <= 100000; n += 10000) {
                list.push_back(n);
            }
        } else {
            for (std::size_t n = 250000; n <= 500000; n += 50000) {
                list.push_back(n);
            }
        }
        sizes.push_back(std::move(list));
    }
    return sizes;
}

void write_csv(const std::string& path, const char* header,
               const std::vector<std::string>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write CSV file: " + path);
    out << header << '\n';
    for (const auto& row : rows) out << row << '\n';
    if (!out) throw std::runtime_error("error while writing CSV file: " + path);
}

// ---------------------------------------------------------------------------
// Trace export

std::string trace_to_jsonl(const RunReport& report) {
    const std::string id = run_id(report.config);
    std::string lines;
    for (const auto& ev : report.world.trace) {
        ordered_json j;
        j["run_id"] = id;
        j["rank"] = ev.rank;
        j["kind"] = runtime::to_string(ev.kind);
        j["t_start_ns"] = ev.t_start;
        j["t_end_ns"] = ev.t_end;
        j["bytes"] = ev.bytes;
        lines += j.dump();
        lines += '\n';
    }
    return lines;
}

std::string trace_summary_json(const RunReport& report) {
    const runtime::WorldReport& world = report.world;
    const int p = world.options.procs;
    std::vector<std::int64_t> compute(static_cast<std::size_t>(p), 0);
    std::vector<std::int64_t> communication(static_cast<std::size_t>(p), 0);
    std::vector<std::int64_t> idle(static_cast<std::size_t>(p), 0);
    for (const auto& ev : world.trace) {
        const auto r = static_cast<std::size_t>(ev.rank);
        const std::int64_t dur = ev.t_end - ev.t_start;
        if (ev.kind == runtime::EventKind::compute) {
            compute[r] += dur;
        } else if (ev.kind == runtime::EventKind::idle) {
            idle[r] += dur;
        } else {
            communication[r] += dur;
        }
    }

    ordered_json summary;
    summary["run_id"] = run_id(report.config);
    summary["mode"] = runtime::to_string(report.config.mode);
    summary["procs"] = p;
    summary["cores"] = world.options.core_slots;
    summary["ranks"] = ordered_json::array();
    for (int r = 0; r < p; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        const runtime::CostCounters& c = world.counters[idx];
        ordered_json jr;
        jr["rank"] = r;
        jr["compute"] = compute[idx];
        jr["communication"] = communication[idx];
        jr["idle"] = idle[idx];
        jr["counters"] = {
            {"comparisons", c.comparisons},
            {"swaps", c.swaps},
            {"element_moves", c.element_moves},
            {"messages_sent", c.messages_sent},
            {"bytes_sent", c.bytes_sent},
            {"peak_tracked_elements", c.peak_tracked_elements},
            {"max_recursion_depth", c.max_recursion_depth},
        };
        summary["ranks"].push_back(std::move(jr));
    }
    return summary.dump(2) + "\n";
}

void emit_trace(const RunReport& report, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trace file: " + path);
        out << trace_to_jsonl(report);
        if (!out) {
            throw std::runtime_error("error while writing trace file: " + path);
        }
    }
    const std::string summary_path = path + ".summary.json";
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write trace summary: " + summary_path);
    }
    out << trace_summary_json(report);
    if (!out) {
        throw std::runtime_error("error while writing trace summary: " +
                                 summary_path);
    }
}

// ---------------------------------------------------------------------------
// Model curves

namespace {

struct CurveRow {
    parallel::Algorithm algorithm;
    std::size_t n;
    int m;
    int cores;
    bool has_measured = false;
    double measured = 0.0;
    double model = 0.0;
    std::uint64_t mem_model = 0;
};

std::vector<CurveRow> build_curve_rows(
    const models::ModelParams& params,
    const std::vector<models::Measurement>& measurements) {
    std::vector<CurveRow> rows;
    if (!measurements.empty()) {
        for (const auto& meas : measurements) {
            CurveRow row;
            row.algorithm = meas.algorithm;
            row.n = meas.n;
            row.m = meas.m;
            row.cores = meas.cores;
            row.has_measured = true;
            row.measured = meas.seconds;
            row.model =
                models::model_time(meas.algorithm, meas.n, meas.m, meas.cores,
                                   params);
            row.mem_model = models::memory_model(meas.algorithm, meas.n);
            rows.push_back(row);
        }
        return rows;
    }
    const std::vector<parallel::Algorithm> algos = {
        parallel::Algorithm::bubble, parallel::Algorithm::merge,
        parallel::Algorithm::quick};
    const auto sizes = default_exp1_sizes(algos);
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        for (int cores : {1, 2}) {
            for (int m = 1; m <= 64; m *= 2) {
                CurveRow row;
                row.algorithm = algos[ai];
                row.n = sizes[ai];
                row.m = m;
                row.cores = cores;
                row.model = models::model_time(row.algorithm, row.n, m, cores,
                                               params);
                row.mem_model = models::memory_model(row.algorithm, row.n);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

std::string svg_escape_free_title(parallel::Algorithm algo) {
    return std::string(parallel::to_string(algo)) + " sort: time vs processes";
}

// A minimal measured-vs-model chart: log2(m) on x, time on y.
std::string render_svg(parallel::Algorithm algo,
                       const std::vector<CurveRow>& rows) {
    std::vector<const CurveRow*> own;
    double max_y = 0.0;
    double max_x = 1.0;
    for (const auto& row : rows) {
        if (row.algorithm != algo) continue;
        own.push_back(&row);
        max_y = std::max({max_y, row.model, row.has_measured ? row.measured : 0.0});
        max_x = std::max(max_x, std::log2(static_cast<double>(row.m)) + 1.0);
    }
    const double width = 480.0;
    const double height = 320.0;
    const double margin = 48.0;
    if (max_y <= 0.0) max_y = 1.0;
    auto x_of = [&](int m) {
        return margin + (std::log2(static_cast<double>(m)) + 0.5) /
                            max_x * (width - 2 * margin);
    };
    auto y_of = [&](double t) {
        return height - margin - t / max_y * (height - 2 * margin);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "  <text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">"
        << svg_escape_free_title(algo) << "</text>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << height - margin
        << "\" x2=\"" << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\""
        << margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";

    // One model polyline per core count, measured values as dots.
    for (int cores : {1, 2}) {
        std::ostringstream pts;
        bool any = false;
        for (const CurveRow* row : own) {
            if (row->cores != cores) continue;
            pts << x_of(row->m) << ',' << y_of(row->model) << ' ';
            any = true;
        }
        if (any) {
            svg << "  <polyline fill=\"none\" stroke=\""
                << (cores == 1 ? "#1f77b4" : "#2ca02c")
                << "\" stroke-width=\"1.5\" points=\"" << pts.str()
                << "\"/>\n";
        }
    }
    for (const CurveRow* row : own) {
        if (!row->has_measured) continue;
        svg << "  <circle cx=\"" << x_of(row->m) << "\" cy=\""
            << y_of(row->measured) << "\" r=\"3\" fill=\""
            << (row->cores == 1 ? "#d62728" : "#ff7f0e") << "\"/>\n";
    }
    svg << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">processes (log scale)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace

void emit_model_curves(const models::ModelParams& params,
                       const std::vector<models::Measurement>& measurements,
                       const std::string& csv_path, bool render) {
    const std::vector<CurveRow> rows = build_curve_rows(params, measurements);
    const bool with_measured = !measurements.empty();

    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write curves CSV: " + csv_path);
    if (with_measured) {
        out << "algorithm,n,m,P,t_measured_s,t_model_s,mem_model_elements\n";
    } else {
        out << "algorithm,n,m,P,t_model_s,mem_model_elements\n";
    }
    for (const auto& row : rows) {
        out << parallel::to_string(row.algorithm) << ',' << row.n << ','
            << row.m << ',' << row.cores << ',';
        if (with_measured) out << format_double(row.measured) << ',';
        out << format_double(row.model) << ',' << row.mem_model << '\n';
    }
    if (!out) throw std::runtime_error("error writing curves CSV: " + csv_path);
    out.close();

    if (!render) return;
    const std::string stem = csv_path.size() > 4 &&
                                     csv_path.substr(csv_path.size() - 4) ==
                                         ".csv"
                                 ? csv_path.substr(0, csv_path.size() - 4)
                                 : csv_path;
    for (auto algo : {parallel::Algorithm::bubble, parallel::Algorithm::merge,
                      parallel::Algorithm::quick}) {
        const bool present = std::any_of(
            rows.begin(), rows.end(),
            [&](const CurveRow& row) { return row.algorithm == algo; });
        if (!present) continue;
        const std::string suffix = std::string("_") + parallel::to_string(algo);
        const bool already_suffixed =
            stem.size() >= suffix.size() &&
            stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) ==
                0;
        const std::string path =
            already_suffixed ? stem + ".svg" : stem + suffix + ".svg";
        std::ofstream svg(path, std::ios::binary);
        if (!svg) throw std::runtime_error("cannot write SVG chart: " + path);
        svg << render_svg(algo, rows);
    }
}

} // namespace sortbench::bench
