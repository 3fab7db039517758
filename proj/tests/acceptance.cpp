// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Exits non-zero if any criterion fails.
//
// Usage: acceptance <path-to-sortbench-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sortbench/bench.hpp"
#include "sortbench/errors.hpp"
#include "sortbench/parallel_sort.hpp"
#include "sortbench/perf_models.hpp"
#include "sortbench/runtime.hpp"

using namespace sortbench;
using parallel::Algorithm;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

void criterion(int number, const std::string& name, bool pass,
               const std::string& detail = "") {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << number
              << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::string("<unreadable: ") + path + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t ceil_log2(std::uint64_t n) {
    std::uint64_t bits = 0;
    std::uint64_t v = 1;
    while (v < n) {
        v <<= 1;
        ++bits;
    }
    return bits;
}

runtime::WorldOptions world_opts(int p, int k, runtime::Mode mode) {
    runtime::WorldOptions o;
    o.procs = p;
    o.core_slots = k;
    o.mode = mode;
    return o;
}

// Accounting closure check shared by criterion 8: per-rank sum of event
// durations must match the rank's wall (or logical) span within the slack.
bool accounting_closes(const runtime::WorldReport& world, double slack,
                       std::string& detail) {
    const int p = world.options.procs;
    std::vector<double> covered(static_cast<std::size_t>(p), 0.0);
    for (const auto& ev : world.trace) {
        covered[static_cast<std::size_t>(ev.rank)] +=
            static_cast<double>(ev.t_end - ev.t_start);
    }
    for (int r = 0; r < p; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        double span = 0.0;
        if (world.options.mode == runtime::Mode::wall) {
            span = world.rank_wall_seconds[idx] * 1e9;
        } else {
            span = static_cast<double>(world.rank_logical_end[idx]);
        }
        if (span <= 0.0) continue;
        const double rel = std::fabs(covered[idx] - span) / span;
        if (rel > slack) {
            std::ostringstream ss;
            ss << "rank " << r << " covered " << covered[idx] << " of "
               << span << " (" << rel * 100 << "% off)";
            detail = ss.str();
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <sortbench-cli> <scratch-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    fs::create_directories(scratch);

    std::vector<const runtime::WorldReport*> emitted_wall_reports;
    std::vector<bench::RunReport> kept_reports;

    // ------------------------------------------------------------------ 1
    {
        bool pass = true;
        std::string detail;
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(20240601);
        const int p_choices[5] = {1, 2, 3, 4, 8};
        const Algorithm algos[3] = {Algorithm::bubble, Algorithm::merge,
                                    Algorithm::quick};
        for (int i = 0; i < 1000 && pass; ++i) {
            const std::size_t n = rng() % 4097;
            const int p = p_choices[rng() % 5];
            const Algorithm algo = algos[i % 3];
            const DataList input = bench::gen_data(n, rng());
            DataList expected = input;
            std::sort(expected.begin(), expected.end());
            auto outcome = parallel::scatter_merge_sort(
                algo, input,
                world_opts(p, 1 + (i % 2), runtime::Mode::counted));
            if (outcome.sorted != expected) {
                pass = false;
                std::ostringstream ss;
                ss << "mismatch at case " << i << ": "
                   << parallel::to_string(algo) << " n=" << n << " p=" << p;
                detail = ss.str();
            }
        }
        const double elapsed = seconds_since(t0);
        if (pass && elapsed >= 60.0) {
            pass = false;
            detail = "took " + std::to_string(elapsed) + " s (limit 60)";
        }
        if (pass) {
            detail = "1000 cases in " + std::to_string(elapsed) + " s";
        }
        criterion(1, "oracle equivalence over 1000 seeded cases", pass,
                  detail);
    }

    // ------------------------------------------------------------------ 2
    {
        bool pass = true;
        std::string detail;
        long cases = 0;
        for (int p : {2, 3, 4}) {
            for (std::size_t n = 0; n <= 12 && pass; ++n) {
                for (std::uint32_t mask = 0; mask < (1u << n) && pass;
                     ++mask) {
                    DataList input(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        input[i] = (mask >> i) & 1u;
                    }
                    auto outcome = parallel::scatter_merge_sort(
                        Algorithm::bubble, input,
                        world_opts(p, 2, runtime::Mode::counted));
                    if (!kernels::is_sorted(outcome.sorted)) {
                        pass = false;
                        std::ostringstream ss;
                        ss << "unsorted for p=" << p << " n=" << n
                           << " mask=" << mask;
                        detail = ss.str();
                    }
                    ++cases;
                }
            }
        }
        if (pass) detail = std::to_string(cases) + " exhaustive 0/1 inputs";
        criterion(2, "odd-even completeness on exhaustive 0/1 inputs", pass,
                  detail);
    }

    // ------------------------------------------------------------------ 3
    {
        bool pass = true;
        std::string detail;
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 100 && pass; ++trial) {
            const std::size_t s = rng() % 512;
            DataList block = bench::gen_data(s, rng());
            kernels::SortStats stats;
            kernels::bubble_sort(block, stats);
            if (stats.comparisons != s * (s - 1) / 2) {
                pass = false;
                detail = "sequential block of " + std::to_string(s);
            }
        }
        if (pass) {
            const std::size_t n = 20000;
            const int p = 4;
            auto outcome = parallel::scatter_merge_sort(
                Algorithm::bubble, bench::gen_data(n, 5),
                world_opts(p, 1, runtime::Mode::counted));
            const auto plan = parallel::plan_partition(n, p);
            std::uint64_t expected = 0;
            for (auto s : plan.sizes) expected += s * (s - 1) / 2;
            std::uint64_t measured = 0;
            for (const auto& stats : outcome.local_sort_stats) {
                measured += stats.comparisons;
            }
            if (measured != expected) {
                pass = false;
                detail = "parallel local sums " + std::to_string(measured) +
                         " vs " + std::to_string(expected);
            }
        }
        criterion(3, "bubble comparisons are exactly oblivious", pass, detail);
    }

    // --------------------------------------------------------------- 4+6+9
    // One counted pass over the full default grid feeds criteria 4, 6 and 9.
    std::map<std::pair<std::string, int>, std::uint64_t> weighted_at_k1;
    bool slot_bound_ok = true;
    std::string slot_detail;
    bool counted_closure_ok = true;
    std::string counted_closure_detail;
    {
        const std::vector<Algorithm> algos = {
            Algorithm::bubble, Algorithm::merge, Algorithm::quick};
        const auto result = bench::experiment1(
            algos, bench::default_exp1_sizes(algos), {1, 2, 4, 8, 16, 32, 64},
            {1, 2}, 1, runtime::Mode::counted, 1);
        for (const auto& report : result.reports) {
            if (report.config.cores == 1) {
                weighted_at_k1[{parallel::to_string(report.config.algorithm),
                                report.config.procs}] = report.weighted_ops;
            }
            if (report.world.max_concurrent_compute >
                report.config.cores) {
                slot_bound_ok = false;
                slot_detail = "config " + bench::run_id(report.config) +
                              " reached " +
                              std::to_string(
                                  report.world.max_concurrent_compute) +
                              " > k=" + std::to_string(report.config.cores);
            }
            if (counted_closure_ok &&
                !accounting_closes(report.world, 1e-9,
                                   counted_closure_detail)) {
                counted_closure_ok = false;
            }
        }
    }
    {
        const double w1 =
            static_cast<double>(weighted_at_k1[{"bubble", 1}]);
        const double w2 =
            static_cast<double>(weighted_at_k1[{"bubble", 2}]);
        const double w4 =
            static_cast<double>(weighted_at_k1[{"bubble", 4}]);
        const double r12 = w1 / w2;
        const double r14 = w1 / w4;
        std::ostringstream ss;
        ss << "m1/m2 = " << r12 << ", m1/m4 = " << r14;
        criterion(4, "bubble weighted-op ratios follow the measured trend",
                  r12 >= 1.8 && r12 <= 2.2 && r14 >= 3.5 && r14 <= 4.5,
                  ss.str());
    }

    // ------------------------------------------------------------------ 5
    {
        bool pass = true;
        std::string detail;
        const auto t0 = std::chrono::steady_clock::now();
        bench::RunConfig cfg;
        cfg.algorithm = Algorithm::bubble;
        cfg.n = 20000;
        cfg.procs = 2;
        cfg.seed = 1;
        cfg.mode = runtime::Mode::wall;
        cfg.repetitions = 1;
        // Each repetition runs on a quiesced machine: the host meters CPU
        // with a burst budget, so back-to-back hot runs would measure the
        // host limiter instead of the core-slot scheduler.
        auto median_of_three = [&](int k) {
            std::vector<double> times;
            for (int rep = 0; rep < 3; ++rep) {
                std::this_thread::sleep_for(std::chrono::milliseconds(2500));
                cfg.cores = k;
                auto report = bench::run_benchmark(cfg);
                times.push_back(report.wall_seconds);
                kept_reports.push_back(std::move(report));
            }
            std::sort(times.begin(), times.end());
            return times[1];
        };
        const double t_k1 = median_of_three(1);
        const double t_k2 = median_of_three(2);
        const double ratio = t_k1 / t_k2;
        const double elapsed = seconds_since(t0);
        std::ostringstream ss;
        ss << "k1/k2 = " << ratio << " in " << elapsed
           << " s incl. quiesce gaps";
        detail = ss.str();
        if (ratio < 1.6 || ratio > 2.4 || elapsed >= 120.0) pass = false;
        criterion(5, "halving the cores doubles wall time for bubble m=2",
                  pass, detail);
    }

    // ------------------------------------------------------------------ 6
    {
        bool pass = true;
        std::string detail = "weighted ops:";
        const int ms[6] = {2, 4, 8, 16, 32, 64};
        for (const char* algo : {"merge", "quick"}) {
            std::uint64_t prev = 0;
            for (int i = 0; i < 6; ++i) {
                const std::uint64_t w = weighted_at_k1[{algo, ms[i]}];
                if (i > 0 && static_cast<double>(w) <
                                 0.95 * static_cast<double>(prev)) {
                    pass = false;
                    detail = std::string(algo) + " drops at m=" +
                             std::to_string(ms[i]);
                }
                prev = w;
            }
            detail += std::string(" ") + algo + "@64/" + algo + "@2 = " +
                      std::to_string(
                          static_cast<double>(weighted_at_k1[{algo, 64}]) /
                          static_cast<double>(weighted_at_k1[{algo, 2}]));
        }
        criterion(6, "merge and quick weighted ops grow from m=2 to m=64",
                  pass, detail);
    }

    // ------------------------------------------------------------------ 7
    {
        bool pass = true;
        std::string detail;

        // merge: peak = 2n + c, c <= 64, ratio to 2n within 0.1%
        auto merge_result = bench::experiment2({Algorithm::merge},
                                               {{250000, 500000}}, 1);
        for (const auto& report : merge_result.reports) {
            const double n = static_cast<double>(report.config.n);
            const double peak = static_cast<double>(report.peak_elements);
            const double c = peak - 2 * n;
            if (c < 0 || c > 64 || std::fabs(peak / (2 * n) - 1.0) > 0.001) {
                pass = false;
                detail = "merge peak " + std::to_string(report.peak_elements) +
                         " at n=" + std::to_string(report.config.n);
            }
        }

        // bubble: peak - n constant across the grid
        if (pass) {
            std::vector<std::vector<std::size_t>> grid = {
                {50000, 60000, 70000, 80000, 90000, 100000}};
            auto bubble_result =
                bench::experiment2({Algorithm::bubble}, grid, 1);
            std::int64_t surplus = -1;
            for (const auto& report : bubble_result.reports) {
                const std::int64_t s =
                    static_cast<std::int64_t>(report.peak_elements) -
                    static_cast<std::int64_t>(report.config.n);
                if (surplus == -1) surplus = s;
                if (s != surplus) {
                    pass = false;
                    detail = "bubble surplus varies: " + std::to_string(s) +
                             " vs " + std::to_string(surplus);
                }
            }
        }

        // quick: depth within 4*ceil(log2 n) on the fixed acceptance seeds
        if (pass) {
            for (std::uint64_t seed : {1ULL, 42ULL, 1337ULL}) {
                for (std::size_t n : {std::size_t{1} << 18,
                                      std::size_t{1} << 19}) {
                    auto outcome = parallel::scatter_merge_sort(
                        Algorithm::quick, bench::gen_data(n, seed),
                        world_opts(2, 2, runtime::Mode::counted));
                    std::uint64_t deepest = 0;
                    for (const auto& c : outcome.world.counters) {
                        deepest =
                            std::max(deepest, c.max_recursion_depth);
                    }
                    if (deepest > 4 * ceil_log2(n)) {
                        pass = false;
                        detail = "quick depth " + std::to_string(deepest) +
                                 " at n=" + std::to_string(n) +
                                 " seed=" + std::to_string(seed);
                    }
                }
            }
        }
        criterion(7, "tracked memory matches the per-algorithm model", pass,
                  detail);
    }

    // ------------------------------------------------------------------ 8
    {
        bool pass = counted_closure_ok;
        std::string detail = counted_closure_detail;
        for (const auto& report : kept_reports) {
            std::string local_detail;
            if (!accounting_closes(report.world, 0.02, local_detail)) {
                pass = false;
                detail = local_detail;
            }
        }
        if (pass) {
            detail = "wall reports within 2%, counted reports exact";
        }
        criterion(8, "per-rank compute + communication + idle covers the wall",
                  pass, detail);
    }

    // ------------------------------------------------------------------ 9
    criterion(9, "concurrent compute sections never exceed the core slots",
              slot_bound_ok, slot_detail);

    // ----------------------------------------------------------------- 10
    {
        bool pass = true;
        std::string detail;
        const fs::path dir_a = scratch / "det_a";
        const fs::path dir_b = scratch / "det_b";
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);
        fs::create_directories(dir_a);
        fs::create_directories(dir_b);
        const std::string flags =
            " exp1 --algos bubble,merge,quick --n-bubble 4000 --n-merge 50000"
            " --n-quick 50000 --procs 1,2,4 --cores 1,2 --mode counted"
            " --seed 7";
        const std::string cmd_a = cli + flags + " --csv " +
                                  (dir_a / "exp1.csv").string() +
                                  " --trace-dir " + dir_a.string() +
                                  " > /dev/null 2>&1";
        const std::string cmd_b = cli + flags + " --csv " +
                                  (dir_b / "exp1.csv").string() +
                                  " --trace-dir " + dir_b.string() +
                                  " > /dev/null 2>&1";
        if (std::system(cmd_a.c_str()) != 0 ||
            std::system(cmd_b.c_str()) != 0) {
            pass = false;
            detail = "CLI invocation failed";
        } else {
            std::vector<std::string> names;
            for (const auto& entry : fs::directory_iterator(dir_a)) {
                names.push_back(entry.path().filename().string());
            }
            std::sort(names.begin(), names.end());
            if (names.empty()) {
                pass = false;
                detail = "no outputs produced";
            }
            for (const auto& name : names) {
                if (!fs::exists(dir_b / name)) {
                    pass = false;
                    detail = "missing " + name + " in second invocation";
                    break;
                }
                if (slurp((dir_a / name).string()) !=
                    slurp((dir_b / name).string())) {
                    pass = false;
                    detail = name + " differs between invocations";
                    break;
                }
            }
            if (pass) {
                detail = std::to_string(names.size()) +
                         " files bit-identical across invocations";
            }
        }
        criterion(10, "counted-mode experiment outputs are bit-identical",
                  pass, detail);
    }

    // ----------------------------------------------------------------- 11
    {
        bool pass = true;
        std::string detail;
        models::ModelParams truth;
        truth.c_comp = 2.5e-9;
        truth.c_init = 1.2e-3;
        truth.c_msg = 3.4e-5;
        truth.c_byte = 7.7e-9;
        std::vector<models::Measurement> synthetic;
        for (auto algo : {Algorithm::bubble, Algorithm::merge,
                          Algorithm::quick}) {
            const std::size_t n = algo == Algorithm::bubble ? 20000 : 600000;
            for (int cores : {1, 2}) {
                for (int m : {1, 2, 4, 8, 16, 32}) {
                    synthetic.push_back(models::Measurement{
                        algo, n, m, cores,
                        models::model_time(algo, n, m, cores, truth)});
                }
            }
        }
        const auto fit = models::calibrate(synthetic);
        const double errs[4] = {
            std::fabs(fit.params.c_comp - truth.c_comp) / truth.c_comp,
            std::fabs(fit.params.c_init - truth.c_init) / truth.c_init,
            std::fabs(fit.params.c_msg - truth.c_msg) / truth.c_msg,
            std::fabs(fit.params.c_byte - truth.c_byte) / truth.c_byte};
        double max_err = 0;
        for (double e : errs) max_err = std::max(max_err, e);
        if (max_err > 1e-9) {
            pass = false;
            detail = "parameter error " + std::to_string(max_err);
        }

        if (pass) {
            models::ModelParams pure;
            pure.c_comp = fit.params.c_comp;
            for (int cores : {1, 2}) {
                double prev =
                    models::bubble_time(20000, 1, cores, pure);
                for (int m = 2; m <= 64; ++m) {
                    const double t =
                        models::bubble_time(20000, m, cores, pure);
                    if (t >= prev) {
                        pass = false;
                        detail = "bubble model not decreasing at m=" +
                                 std::to_string(m);
                    }
                    prev = t;
                }
            }
        }
        if (pass) {
            std::ostringstream ss;
            ss << "max parameter error " << max_err;
            detail = ss.str();
        }
        criterion(11, "model calibration round-trips within 1e-9", pass,
                  detail);
    }

    std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                  : "ACCEPTANCE: " +
                                        std::to_string(g_failures) +
                                        " criterion(s) failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
