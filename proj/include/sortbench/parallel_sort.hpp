#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sortbench/element.hpp"
#include "sortbench/runtime.hpp"
#include "sortbench/sort_core.hpp"

namespace sortbench::parallel {

enum class Algorithm { bubble, merge, quick };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

// How n elements split over p ranks: the first n mod p ranks get one extra.
struct PartitionPlan {
    std::size_t n = 0;
    int procs = 1;
    std::vector<std::size_t> sizes;
};

PartitionPlan plan_partition(std::size_t n, int p);

// The p-phase odd-even pairing: even phases pair (r, r+1) for even r, odd
// phases for odd r. partner(phase, rank) is -1 when the rank idles.
struct PhaseSchedule {
    int procs = 1;
    std::vector<std::vector<int>> partners; // [phase][rank]

    int phases() const { return static_cast<int>(partners.size()); }
    int partner(int phase, int rank) const {
        return partners[static_cast<std::size_t>(phase)]
                       [static_cast<std::size_t>(rank)];
    }
};

PhaseSchedule build_schedule(int p);

enum class KeepHalf { low, high };

// Merges two sorted blocks and keeps the lowest (or highest) |mine|
// elements. Both partners call this with the same two blocks in swapped
// roles, so their outputs partition the merged multiset.
DataList merge_split(std::span<const Element> mine,
                     std::span<const Element> theirs, KeepHalf keep,
                     kernels::SortStats& stats);

// A phase block padded to the uniform width ceil(n/p): `virtuals` counts
// sentinel slots that order above every real element. Padding is what lets
// the p-phase schedule sort when p does not divide n; with equal blocks the
// count is zero and this reduces to merge_split.
struct PaddedBlock {
    DataList reals;           // sorted
    std::size_t virtuals = 0;

    std::size_t width() const { return reals.size() + virtuals; }
};

PaddedBlock merge_split_padded(const PaddedBlock& mine,
                               const PaddedBlock& theirs, KeepHalf keep,
                               kernels::SortStats& stats);

// A sequential kernel behind a uniform signature; the scratch span is only
// used by the merge-sort kernel.
using KernelFn = void (*)(std::span<Element> block, std::span<Element> scratch,
                          kernels::SortStats& stats);

KernelFn select_kernel(Algorithm algorithm);

struct SortOutcome {
    DataList sorted;                                    // at the master
    runtime::WorldReport world;
    std::vector<kernels::SortStats> local_sort_stats;   // per rank
};

// Runs the full scatter / local sort / odd-even merge / gather pipeline on a
// fresh world and returns the globally sorted list together with the world
// report. The input lives at the master (rank 0).
SortOutcome scatter_merge_sort(Algorithm algorithm, const DataList& data,
                               const runtime::WorldOptions& options);

} // namespace sortbench::parallel
