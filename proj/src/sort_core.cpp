#include "sortbench/sort_core.hpp"

#include <string>

#include "sortbench/errors.hpp"

namespace sortbench::kernels {

void swap_elements(std::span<Element> block, std::size_t i, std::size_t j,
                   SortStats& stats) {
    if (i >= block.size() || j >= block.size()) {
        throw ProgrammingError("swap index out of range: i=" + std::to_string(i) +
                               " j=" + std::to_string(j) +
                               " size=" + std::to_string(block.size()));
    }
    Element temp = block[i];
    block[i] = block[j];
    block[j] = temp;
    stats.swaps += 1;
    stats.moves += 3;
}

void bubble_sort(std::span<Element> block, SortStats& stats) {
    const std::size_t s = block.size();
    if (s < 2) return;
    for (std::size_t i = s - 1; i-- > 0;) {
        for (std::size_t j = 0; j <= i; ++j) {
            if (block[j] > block[j + 1]) {
                swap_elements(block, j, j + 1, stats);
            }
        }
        // The inner loop always performs i+1 comparisons; count them in one
        // step to keep the hot loop tight.
        stats.comparisons += i + 1;
    }
}

DataList merge_runs(std::span<const Element> run_a,
                    std::span<const Element> run_b, SortStats& stats) {
    DataList out;
    out.reserve(run_a.size() + run_b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < run_a.size() && j < run_b.size()) {
        stats.comparisons += 1;
        if (run_a[i] <= run_b[j]) {
            out.push_back(run_a[i++]);
        } else {
            out.push_back(run_b[j++]);
        }
        stats.moves += 1;
    }
    for (; i < run_a.size(); ++i) {
        out.push_back(run_a[i]);
        stats.moves += 1;
    }
    for (; j < run_b.size(); ++j) {
        out.push_back(run_b[j]);
        stats.moves += 1;
    }
    return out;
}

namespace {

// Merges the sorted halves block[first..mid] and block[mid+1..last] through
// scratch and back. Stable: ties take from the lower half.
void merge_in_place(std::span<Element> block, std::ptrdiff_t first,
                    std::ptrdiff_t mid, std::ptrdiff_t last,
                    std::span<Element> scratch, SortStats& stats) {
    std::ptrdiff_t i = first;
    std::ptrdiff_t j = mid + 1;
    std::ptrdiff_t k = first;
    while (i <= mid && j <= last) {
        stats.comparisons += 1;
        scratch[static_cast<std::size_t>(k++)] =
            (block[static_cast<std::size_t>(i)] <= block[static_cast<std::size_t>(j)])
                ? block[static_cast<std::size_t>(i++)]
                : block[static_cast<std::size_t>(j++)];
        stats.moves += 1;
    }
    while (i <= mid) {
        scratch[static_cast<std::size_t>(k++)] = block[static_cast<std::size_t>(i++)];
        stats.moves += 1;
    }
    while (j <= last) {
        scratch[static_cast<std::size_t>(k++)] = block[static_cast<std::size_t>(j++)];
        stats.moves += 1;
    }
    for (std::ptrdiff_t t = first; t <= last; ++t) {
        block[static_cast<std::size_t>(t)] = scratch[static_cast<std::size_t>(t)];
        stats.moves += 1;
    }
}

} // namespace

void merge_sort(std::span<Element> block, std::ptrdiff_t first,
                std::ptrdiff_t last, std::span<Element> scratch,
                SortStats& stats) {
    if (first >= last) return;
    const std::ptrdiff_t mid = (first + last) / 2;
    merge_sort(block, first, mid, scratch, stats);
    merge_sort(block, mid + 1, last, scratch, stats);
    merge_in_place(block, first, mid, last, scratch, stats);
}

namespace {

void quick_sort_rec(std::span<Element> block, std::size_t start,
                    std::size_t length, std::uint64_t depth,
                    SortStats& stats) {
    if (depth > stats.max_depth) stats.max_depth = depth;
    if (length <= 1) return;
    // Pick the middle element as pivot and park it at the front.
    const Element pivot = block[start + length / 2];
    swap_elements(block, start, start + length / 2, stats);
    // One-pass partition: pstart trails the region of elements < pivot.
    std::size_t pstart = start;
    for (std::size_t i = start + 1; i < start + length; ++i) {
        stats.comparisons += 1;
        if (block[i] < pivot) {
            ++pstart;
            swap_elements(block, i, pstart, stats);
        }
    }
    swap_elements(block, start, pstart, stats);
    quick_sort_rec(block, start, pstart - start, depth + 1, stats);
    quick_sort_rec(block, pstart + 1, start + length - pstart - 1, depth + 1,
                   stats);
}

} // namespace

void quick_sort(std::span<Element> block, std::size_t start,
                std::size_t length, SortStats& stats) {
    if (start + length > block.size()) {
        throw ProgrammingError("quick_sort segment out of range: start=" +
                               std::to_string(start) +
                               " length=" + std::to_string(length) +
                               " size=" + std::to_string(block.size()));
    }
    quick_sort_rec(block, start, length, 1, stats);
}

bool is_sorted(std::span<const Element> seq) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i - 1] > seq[i]) return false;
    }
    return true;
}

} // namespace sortbench::kernels
