#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sortbench/element.hpp"

namespace sortbench::kernels {

// Operation counts accumulated by the sequential kernels. Owned by the
// caller; kernels never touch runtime state.
struct SortStats {
    std::uint64_t comparisons = 0;
    std::uint64_t swaps = 0;
    std::uint64_t moves = 0;
    std::uint64_t max_depth = 0;

    SortStats& operator+=(const SortStats& other) {
        comparisons += other.comparisons;
        swaps += other.swaps;
        moves += other.moves;
        if (other.max_depth > max_depth) max_depth = other.max_depth;
        return *this;
    }
};

// Exchanges elements i and j. Counts one swap and the three assignments it
// performs as moves. Indices out of range abort via exception.
void swap_elements(std::span<Element> block, std::size_t i, std::size_t j,
                   SortStats& stats);

// Adjacent-exchange sort. The loop structure is oblivious to the data:
// exactly s*(s-1)/2 comparisons for a block of length s.
void bubble_sort(std::span<Element> block, SortStats& stats);

// Merges two non-decreasing runs into a fresh sorted sequence. Stable:
// ties take from run_a first. moves == |a| + |b|, comparisons <= |a|+|b|-1.
DataList merge_runs(std::span<const Element> run_a,
                    std::span<const Element> run_b, SortStats& stats);

// Top-down in-place merge sort of block[first..last] (inclusive bounds).
// One scratch buffer of capacity >= block length is threaded through the
// recursion; no other allocation happens. Empty ranges (first > last) are
// permitted and return immediately.
void merge_sort(std::span<Element> block, std::ptrdiff_t first,
                std::ptrdiff_t last, std::span<Element> scratch,
                SortStats& stats);

// Middle-element-pivot quicksort of block[start, start+length). Equal
// elements land right of the pivot, so all-equal inputs recurse linearly;
// max_depth records the deepest call reached.
void quick_sort(std::span<Element> block, std::size_t start,
                std::size_t length, SortStats& stats);

// True iff the sequence is non-decreasing.
bool is_sorted(std::span<const Element> seq);

} // namespace sortbench::kernels
