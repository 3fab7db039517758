// sortbench - parallel sorting benchmark harness over the rank-based
// message-passing runtime.
//
//   sortbench run   one configuration, optional CSV row and trace
//   sortbench exp1  time vs. process count x core slots grid
//   sortbench exp2  tracked memory vs. data size (m=2, k=2)
//   sortbench model fit the analytic time model and export curves
//
// Exit codes: 0 success, 1 verification/runtime failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sortbench/bench.hpp"
#include "sortbench/errors.hpp"

using namespace sortbench;

namespace {

std::vector<parallel::Algorithm> parse_algorithms(const std::string& csv) {
    std::vector<parallel::Algorithm> algos;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) algos.push_back(parallel::algorithm_from_string(item));
    }
    if (algos.empty()) throw ConfigError("no algorithms given");
    return algos;
}

template <typename T>
std::vector<T> parse_list(const std::string& csv, const char* what) {
    std::vector<T> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            values.push_back(static_cast<T>(std::stoull(item)));
        } catch (const std::exception&) {
            throw ConfigError(std::string("cannot parse ") + what + " value '" +
                              item + "'");
        }
    }
    if (values.empty()) {
        throw ConfigError(std::string("empty ") + what + " list");
    }
    return values;
}

runtime::Mode parse_mode(const std::string& mode) {
    if (mode == "wall") return runtime::Mode::wall;
    if (mode == "counted") return runtime::Mode::counted;
    throw ConfigError("unknown mode '" + mode + "' (expected wall or counted)");
}

int default_reps(runtime::Mode mode, int reps) {
    if (reps > 0) return reps;
    return mode == runtime::Mode::wall ? 3 : 1;
}

void print_report(const bench::RunReport& report) {
    const auto& cfg = report.config;
    std::cout << "run " << bench::run_id(cfg) << ": "
              << parallel::to_string(cfg.algorithm) << " n=" << cfg.n
              << " procs=" << cfg.procs << " cores=" << cfg.cores
              << " seed=" << cfg.seed << " mode="
              << runtime::to_string(cfg.mode) << "\n";
    std::cout << "  output verified sorted\n";
    if (cfg.mode == runtime::Mode::wall) {
        std::cout << "  median wall seconds: "
                  << bench::format_double(report.wall_seconds) << "\n";
    }
    std::cout << "  weighted ops: " << report.weighted_ops << "\n";
    std::cout << "  compute total: "
              << bench::format_double(report.compute_total)
              << "  overhead total: "
              << bench::format_double(report.overhead_total) << "\n";
    const auto ratio = bench::overhead_ratio(report.world);
    std::cout << "  overhead/compute ratio: "
              << bench::format_double(ratio.aggregate) << "\n";
    std::cout << "  peak tracked elements: " << report.peak_elements << "\n";
    std::cout << "  messages sent: "
              << report.world.total(&runtime::CostCounters::messages_sent)
              << "  max concurrent compute: "
              << report.world.max_concurrent_compute << "\n";
}

struct FitInput {
    std::vector<models::Measurement> measurements;
    bool from_weighted_ops = false;
};

FitInput read_measurements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read measurement CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("measurement CSV is empty: " + path);
    }
    struct Row {
        parallel::Algorithm algo;
        std::size_t n;
        int m;
        int k;
        double time_s;
        double weighted;
    };
    std::vector<Row> rows;
    bool any_time = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 6) {
            throw ConfigError("measurement CSV row has too few columns: " +
                              line);
        }
        Row row;
        row.algo = parallel::algorithm_from_string(fields[0]);
        row.n = std::stoull(fields[1]);
        row.m = std::stoi(fields[2]);
        row.k = std::stoi(fields[3]);
        row.time_s = std::stod(fields[4]);
        row.weighted = std::stod(fields[5]);
        if (row.time_s > 0) any_time = true;
        rows.push_back(row);
    }
    if (rows.empty()) {
        throw ConfigError("measurement CSV has no data rows: " + path);
    }
    FitInput input;
    input.from_weighted_ops = !any_time;
    for (const auto& row : rows) {
        models::Measurement meas;
        meas.algorithm = row.algo;
        meas.n = row.n;
        meas.m = row.m;
        meas.cores = row.k;
        meas.seconds = any_time ? row.time_s : row.weighted;
        input.measurements.push_back(meas);
    }
    return input;
}

std::string stem_of(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
        return path.substr(0, path.size() - 4);
    }
    return path;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel sorting benchmark harness"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "run one configuration");
    std::string run_algo = "bubble";
    std::uint64_t run_n = 20000;
    int run_procs = 1;
    int run_cores = 1;
    std::uint64_t run_seed = 1;
    std::string run_mode = "counted";
    int run_reps = 0;
    std::string run_csv;
    std::string run_trace;
    run_cmd->add_option("--algo", run_algo, "bubble|merge|quick");
    run_cmd->add_option("--n", run_n, "data size");
    run_cmd->add_option("--procs", run_procs, "process count m");
    run_cmd->add_option("--cores", run_cores, "core slots k");
    run_cmd->add_option("--seed", run_seed, "data seed")
        ->envname("SORTBENCH_SEED");
    run_cmd->add_option("--mode", run_mode, "wall|counted");
    run_cmd->add_option("--reps", run_reps,
                        "repetitions (default 3 wall, 1 counted)");
    run_cmd->add_option("--csv", run_csv, "CSV output path (header + one row)");
    run_cmd->add_option("--trace", run_trace, "trace JSONL output path");

    // --- exp1 --------------------------------------------------------------
    auto* exp1_cmd =
        app.add_subcommand("exp1", "time vs process count and core slots");
    std::string exp1_algos = "bubble,merge,quick";
    std::uint64_t exp1_n_bubble = 20000;
    std::uint64_t exp1_n_merge = 600000;
    std::uint64_t exp1_n_quick = 600000;
    std::string exp1_procs = "1,2,4,8,16,32,64";
    std::string exp1_cores = "1,2";
    std::uint64_t exp1_seed = 1;
    std::string exp1_mode = "counted";
    int exp1_reps = 0;
    std::string exp1_csv;
    std::string exp1_trace_dir;
    exp1_cmd->add_option("--algos", exp1_algos, "comma list of algorithms");
    exp1_cmd->add_option("--n-bubble", exp1_n_bubble, "bubble data size");
    exp1_cmd->add_option("--n-merge", exp1_n_merge, "merge data size");
    exp1_cmd->add_option("--n-quick", exp1_n_quick, "quick data size");
    exp1_cmd->add_option("--procs", exp1_procs, "comma list of process counts");
    exp1_cmd->add_option("--cores", exp1_cores, "comma list of core slots");
    exp1_cmd->add_option("--seed", exp1_seed, "data seed")
        ->envname("SORTBENCH_SEED");
    exp1_cmd->add_option("--mode", exp1_mode, "wall|counted");
    exp1_cmd->add_option("--reps", exp1_reps,
                         "repetitions (default 3 wall, 1 counted)");
    exp1_cmd->add_option("--csv", exp1_csv, "result CSV path")->required();
    exp1_cmd->add_option("--trace-dir", exp1_trace_dir,
                         "emit one trace file per configuration here");

    // --- exp2 --------------------------------------------------------------
    auto* exp2_cmd =
        app.add_subcommand("exp2", "tracked memory vs data size (m=2, k=2)");
    std::string exp2_algos = "bubble,merge,quick";
    std::string exp2_sizes_bubble = "50000,60000,70000,80000,90000,100000";
    std::string exp2_sizes_merge = "250000,300000,350000,400000,450000,500000";
    std::string exp2_sizes_quick = "250000,300000,350000,400000,450000,500000";
    std::uint64_t exp2_seed = 1;
    std::string exp2_csv;
    exp2_cmd->add_option("--algos", exp2_algos, "comma list of algorithms");
    exp2_cmd->add_option("--sizes-bubble", exp2_sizes_bubble,
                         "comma list of bubble data sizes");
    exp2_cmd->add_option("--sizes-merge", exp2_sizes_merge,
                         "comma list of merge data sizes");
    exp2_cmd->add_option("--sizes-quick", exp2_sizes_quick,
                         "comma list of quick data sizes");
    exp2_cmd->add_option("--seed", exp2_seed, "data seed")
        ->envname("SORTBENCH_SEED");
    exp2_cmd->add_option("--csv", exp2_csv, "result CSV path")->required();

    // --- model -------------------------------------------------------------
    auto* model_cmd =
        app.add_subcommand("model", "calibrate the analytic time model");
    std::string model_fit;
    std::string model_out;
    std::string model_curves;
    bool model_no_svg = false;
    model_cmd->add_option("--fit", model_fit, "exp1-format CSV to fit")
        ->required();
    model_cmd->add_option("--out", model_out, "fitted parameter JSON path")
        ->required();
    model_cmd->add_option("--curves", model_curves,
                          "emit measured-vs-model curve CSVs (one per "
                          "algorithm, derived from this stem)");
    model_cmd->add_flag("--no-svg", model_no_svg, "skip SVG chart rendering");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            bench::RunConfig config;
            config.algorithm = parallel::algorithm_from_string(run_algo);
            config.n = run_n;
            config.procs = run_procs;
            config.cores = run_cores;
            config.seed = run_seed;
            config.mode = parse_mode(run_mode);
            config.repetitions = default_reps(config.mode, run_reps);
            const auto report = bench::run_benchmark(config);
            print_report(report);
            if (!run_csv.empty()) {
                bench::write_csv(run_csv, bench::kExp1CsvHeader,
                                 {bench::exp1_csv_row(report)});
                std::cout << "  wrote " << run_csv << "\n";
            }
            if (!run_trace.empty()) {
                bench::emit_trace(report, run_trace);
                std::cout << "  wrote " << run_trace << " (+summary)\n";
            }
        } else if (exp1_cmd->parsed()) {
            const auto algos = parse_algorithms(exp1_algos);
            std::vector<std::size_t> sizes;
            for (auto algo : algos) {
                switch (algo) {
                    case parallel::Algorithm::bubble:
                        sizes.push_back(exp1_n_bubble);
                        break;
                    case parallel::Algorithm::merge:
                        sizes.push_back(exp1_n_merge);
                        break;
                    case parallel::Algorithm::quick:
                        sizes.push_back(exp1_n_quick);
                        break;
                }
            }
            const auto mode = parse_mode(exp1_mode);
            const auto result = bench::experiment1(
                algos, sizes, parse_list<int>(exp1_procs, "process"),
                parse_list<int>(exp1_cores, "core"), exp1_seed, mode,
                default_reps(mode, exp1_reps));
            bench::write_csv(exp1_csv, bench::kExp1CsvHeader, result.csv_rows);
            std::cout << "wrote " << result.csv_rows.size() << " rows to "
                      << exp1_csv << "\n";
            if (!exp1_trace_dir.empty()) {
                for (const auto& report : result.reports) {
                    bench::emit_trace(report,
                                      exp1_trace_dir + "/exp1_" +
                                          bench::run_id(report.config) +
                                          ".jsonl");
                }
                std::cout << "wrote " << result.reports.size()
                          << " traces to " << exp1_trace_dir << "\n";
            }
        } else if (exp2_cmd->parsed()) {
            const auto algos = parse_algorithms(exp2_algos);
            std::vector<std::vector<std::size_t>> sizes;
            for (auto algo : algos) {
                switch (algo) {
                    case parallel::Algorithm::bubble:
                        sizes.push_back(parse_list<std::size_t>(
                            exp2_sizes_bubble, "bubble size"));
                        break;
                    case parallel::Algorithm::merge:
                        sizes.push_back(parse_list<std::size_t>(
                            exp2_sizes_merge, "merge size"));
                        break;
                    case parallel::Algorithm::quick:
                        sizes.push_back(parse_list<std::size_t>(
                            exp2_sizes_quick, "quick size"));
                        break;
                }
            }
            const auto result = bench::experiment2(algos, sizes, exp2_seed);
            bench::write_csv(exp2_csv, bench::kExp2CsvHeader, result.csv_rows);
            std::cout << "wrote " << result.csv_rows.size() << " rows to "
                      << exp2_csv << "\n";
        } else if (model_cmd->parsed()) {
            const FitInput input = read_measurements(model_fit);
            nlohmann::ordered_json out;
            out["source"] = model_fit;
            out["time_basis"] =
                input.from_weighted_ops ? "weighted_ops" : "time_s";
            for (auto algo :
                 {parallel::Algorithm::bubble, parallel::Algorithm::merge,
                  parallel::Algorithm::quick}) {
                std::vector<models::Measurement> subset;
                for (const auto& meas : input.measurements) {
                    if (meas.algorithm == algo) subset.push_back(meas);
                }
                if (subset.empty()) continue;
                const auto fit = models::calibrate(subset);
                nlohmann::ordered_json jf;
                jf["c_comp"] = fit.params.c_comp;
                jf["c_init"] = fit.params.c_init;
                jf["c_msg"] = fit.params.c_msg;
                jf["c_byte"] = fit.params.c_byte;
                jf["max_rel_residual"] = fit.max_rel_residual;
                jf["measurements"] = subset.size();
                out[parallel::to_string(algo)] = jf;
                if (!model_curves.empty()) {
                    const std::string path = stem_of(model_curves) + "_" +
                                             parallel::to_string(algo) +
                                             ".csv";
                    bench::emit_model_curves(fit.params, subset, path,
                                             !model_no_svg);
                    std::cout << "wrote " << path << "\n";
                }
            }
            std::ofstream os(model_out, std::ios::binary);
            if (!os) throw ConfigError("cannot write " + model_out);
            os << out.dump(2) << "\n";
            std::cout << "wrote " << model_out << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const VerificationError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
