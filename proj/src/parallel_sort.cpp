#include "sortbench/parallel_sort.hpp"

#include <utility>

#include "sortbench/errors.hpp"

namespace sortbench::parallel {

const char* to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::bubble: return "bubble";
        case Algorithm::merge: return "merge";
        case Algorithm::quick: return "quick";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "bubble") return Algorithm::bubble;
    if (name == "merge") return Algorithm::merge;
    if (name == "quick") return Algorithm::quick;
    throw ConfigError("unknown algorithm '" + name +
                      "' (expected bubble, merge or quick)");
}

PartitionPlan plan_partition(std::size_t n, int p) {
    if (p < 1) throw ConfigError("partition needs at least one process");
    PartitionPlan plan;
    plan.n = n;
    plan.procs = p;
    plan.sizes.resize(static_cast<std::size_t>(p));
    const std::size_t base = n / static_cast<std::size_t>(p);
    const std::size_t extra = n % static_cast<std::size_t>(p);
    for (std::size_t r = 0; r < plan.sizes.size(); ++r) {
        plan.sizes[r] = base + (r < extra ? 1 : 0);
    }
    return plan;
}

PhaseSchedule build_schedule(int p) {
    if (p < 1) throw ConfigError("schedule needs at least one process");
    PhaseSchedule schedule;
    schedule.procs = p;
    schedule.partners.assign(static_cast<std::size_t>(p),
                             std::vector<int>(static_cast<std::size_t>(p), -1));
    for (int phase = 0; phase < p; ++phase) {
        auto& row = schedule.partners[static_cast<std::size_t>(phase)];
        const int first = (phase % 2 == 0) ? 0 : 1;
        for (int r = first; r + 1 < p; r += 2) {
            row[static_cast<std::size_t>(r)] = r + 1;
            row[static_cast<std::size_t>(r + 1)] = r;
        }
    }
    return schedule;
}

namespace {

// The lowest `take` elements of the merged pair, stable towards `mine`.
DataList merge_take_low(std::span<const Element> mine,
                        std::span<const Element> theirs, std::size_t take,
                        kernels::SortStats& stats) {
    DataList out(take);
    std::size_t i = 0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < take; ++k) {
        bool take_mine;
        if (i >= mine.size()) {
            take_mine = false;
        } else if (j >= theirs.size()) {
            take_mine = true;
        } else {
            stats.comparisons += 1;
            take_mine = mine[i] <= theirs[j];
        }
        out[k] = take_mine ? mine[i++] : theirs[j++];
        stats.moves += 1;
    }
    return out;
}

// The highest `take` elements of the merged pair.
DataList merge_take_high(std::span<const Element> mine,
                         std::span<const Element> theirs, std::size_t take,
                         kernels::SortStats& stats) {
    DataList out(take);
    std::size_t i = mine.size();
    std::size_t j = theirs.size();
    for (std::size_t k = take; k-- > 0;) {
        bool take_mine;
        if (i == 0) {
            take_mine = false;
        } else if (j == 0) {
            take_mine = true;
        } else {
            stats.comparisons += 1;
            take_mine = mine[i - 1] > theirs[j - 1];
        }
        out[k] = take_mine ? mine[--i] : theirs[--j];
        stats.moves += 1;
    }
    return out;
}

} // namespace

DataList merge_split(std::span<const Element> mine,
                     std::span<const Element> theirs, KeepHalf keep,
                     kernels::SortStats& stats) {
    return keep == KeepHalf::low
               ? merge_take_low(mine, theirs, mine.size(), stats)
               : merge_take_high(mine, theirs, mine.size(), stats);
}

PaddedBlock merge_split_padded(const PaddedBlock& mine,
                               const PaddedBlock& theirs, KeepHalf keep,
                               kernels::SortStats& stats) {
    const std::size_t width = mine.width();
    const std::size_t total_reals = mine.reals.size() + theirs.reals.size();
    PaddedBlock out;
    if (keep == KeepHalf::low) {
        // virtuals order above every real, so the low side fills with reals
        // first and pads only if the pair runs out of them
        const std::size_t take = std::min(width, total_reals);
        out.reals = merge_take_low(mine.reals, theirs.reals, take, stats);
        out.virtuals = width - take;
    } else {
        const std::size_t total_virtuals = mine.virtuals + theirs.virtuals;
        out.virtuals = std::min(width, total_virtuals);
        out.reals = merge_take_high(mine.reals, theirs.reals,
                                    width - out.virtuals, stats);
    }
    return out;
}

namespace {

void bubble_kernel(std::span<Element> block, std::span<Element> /*scratch*/,
                   kernels::SortStats& stats) {
    kernels::bubble_sort(block, stats);
}

void merge_kernel(std::span<Element> block, std::span<Element> scratch,
                  kernels::SortStats& stats) {
    kernels::merge_sort(block, 0,
                        static_cast<std::ptrdiff_t>(block.size()) - 1, scratch,
                        stats);
}

void quick_kernel(std::span<Element> block, std::span<Element> /*scratch*/,
                  kernels::SortStats& stats) {
    kernels::quick_sort(block, 0, block.size(), stats);
}

} // namespace

KernelFn select_kernel(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::bubble: return &bubble_kernel;
        case Algorithm::merge: return &merge_kernel;
        case Algorithm::quick: return &quick_kernel;
    }
    throw ConfigError("unknown algorithm id");
}

SortOutcome scatter_merge_sort(Algorithm algorithm, const DataList& data,
                               const runtime::WorldOptions& options) {
    const int p = options.procs;
    SortOutcome outcome;
    outcome.local_sort_stats.assign(static_cast<std::size_t>(p),
                                    kernels::SortStats{});
    KernelFn kernel = select_kernel(algorithm);
    DataList sorted_at_master;

    auto program = [&](runtime::Comm& comm) {
        const int rank = comm.rank();

        // The master announces the base partition size and the total length.
        DataList header;
        if (rank == 0) {
            const auto n0 = static_cast<Element>(data.size());
            header = {n0 / p, n0};
        }
        header = comm.broadcast(0, std::move(header));
        const auto n = static_cast<std::size_t>(header[1]);
        const PartitionPlan plan = plan_partition(n, p);

        PaddedBlock block;
        block.reals = comm.scatter(
            0, rank == 0 ? std::span<const Element>(data)
                         : std::span<const Element>{},
            plan.sizes);
        comm.tracked_alloc(block.reals.size());

        // All ranks run the phases at the uniform width ceil(n/p); ranks
        // with a short block carry virtual top sentinels to make it up.
        const std::size_t width = plan.sizes.empty() ? 0 : plan.sizes[0];
        block.virtuals = width - block.reals.size();

        // Local sort. The merge kernel needs a same-size scratch buffer.
        DataList scratch;
        if (algorithm == Algorithm::merge) {
            scratch.resize(block.reals.size());
            comm.tracked_alloc(scratch.size());
        }
        kernels::SortStats local;
        comm.compute([&] {
            kernel(block.reals, scratch, local);
            comm.add_sort_stats(local);
        });
        outcome.local_sort_stats[static_cast<std::size_t>(rank)] = local;
        if (algorithm == Algorithm::merge) {
            comm.tracked_free(scratch.size());
            scratch = DataList{};
        }

        // Odd-even merge phases: exchange full blocks, both partners merge,
        // the lower rank keeps the low half and the higher rank the high.
        const PhaseSchedule schedule = build_schedule(p);
        for (int phase = 0; phase < schedule.phases(); ++phase) {
            const int partner = schedule.partner(phase, rank);
            if (partner < 0) continue;
            comm.send(partner, phase, block.reals);
            PaddedBlock theirs;
            theirs.reals = comm.recv(partner, phase);
            theirs.virtuals = width - theirs.reals.size();
            const KeepHalf keep =
                rank < partner ? KeepHalf::low : KeepHalf::high;
            kernels::SortStats phase_stats;
            PaddedBlock next = comm.compute([&] {
                PaddedBlock merged =
                    merge_split_padded(block, theirs, keep, phase_stats);
                comm.add_sort_stats(phase_stats);
                return merged;
            });
            if (next.width() != width) {
                throw ProgrammingError(
                    "merge_split changed the block width on rank " +
                    std::to_string(rank));
            }
            comm.tracked_free(block.reals.size());
            comm.tracked_alloc(next.reals.size());
            block = std::move(next);
        }

        DataList gathered = comm.gather(0, block.reals);
        comm.tracked_free(block.reals.size());
        if (rank == 0) sorted_at_master = std::move(gathered);
    };

    outcome.world = runtime::spawn_world(options, program);
    outcome.sorted = std::move(sorted_at_master);
    return outcome;
}

} // namespace sortbench::parallel
