#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "sortbench/bench.hpp"
#include "sortbench/errors.hpp"
#include "sortbench/sort_core.hpp"

using namespace sortbench;
using kernels::SortStats;

namespace {

DataList sorted_copy(DataList v) {
    std::sort(v.begin(), v.end());
    return v;
}

void run_merge_sort(DataList& v, SortStats& stats) {
    DataList scratch(v.size());
    kernels::merge_sort(v, 0, static_cast<std::ptrdiff_t>(v.size()) - 1,
                        scratch, stats);
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

} // namespace

TEST_CASE("swap exchanges elements and counts one swap, three moves") {
    DataList v{10, 20};
    SortStats stats;
    kernels::swap_elements(v, 0, 1, stats);
    CHECK(v == DataList{20, 10});
    CHECK(stats.swaps == 1);
    CHECK(stats.moves == 3);

    // self-swap leaves the data unchanged but still counts
    kernels::swap_elements(v, 1, 1, stats);
    CHECK(v == DataList{20, 10});
    CHECK(stats.swaps == 2);

    // swapping the same pair twice restores the original order
    kernels::swap_elements(v, 0, 1, stats);
    kernels::swap_elements(v, 0, 1, stats);
    CHECK(v == DataList{20, 10});

    CHECK_THROWS_AS(kernels::swap_elements(v, 0, 2, stats), ProgrammingError);
}

TEST_CASE("bubble sort basics") {
    SUBCASE("empty block: no comparisons") {
        DataList v;
        SortStats stats;
        kernels::bubble_sort(v, stats);
        CHECK(v.empty());
        CHECK(stats.comparisons == 0);
    }
    SUBCASE("five elements: 10 comparisons") {
        DataList v{5, 1, 4, 2, 8};
        SortStats stats;
        kernels::bubble_sort(v, stats);
        CHECK(v == DataList{1, 2, 4, 5, 8});
        CHECK(stats.comparisons == 10); // 5*4/2, oblivious loops
    }
    SUBCASE("descending triple: exactly 3 swaps") {
        DataList v{3, 2, 1};
        SortStats stats;
        kernels::bubble_sort(v, stats);
        CHECK(v == DataList{1, 2, 3});
        CHECK(stats.swaps == 3);
    }
}

TEST_CASE("bubble sort comparisons are oblivious: s*(s-1)/2 for any input") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t s = rng() % 200;
        DataList v = bench::gen_data(s, rng());
        SortStats stats;
        kernels::bubble_sort(v, stats);
        CHECK(stats.comparisons == s * (s - 1) / 2);
        CHECK(kernels::is_sorted(v));
    }
}

TEST_CASE("merge_runs") {
    SortStats stats;
    SUBCASE("empty left run is the identity") {
        const DataList b{1, 2, 3};
        CHECK(kernels::merge_runs({}, b, stats) == b);
        CHECK(kernels::merge_runs(b, {}, stats) == b);
    }
    SUBCASE("interleaving") {
        const DataList a{1, 3, 5};
        const DataList b{2, 4, 6};
        CHECK(kernels::merge_runs(a, b, stats) == DataList{1, 2, 3, 4, 5, 6});
        CHECK(stats.moves == 6);
        CHECK(stats.comparisons <= 5);
    }
    SUBCASE("ties take from run_a first") {
        // With run_a preferred on ties, both of run_a's 1s are compared and
        // taken before run_b's: two comparisons. Taking run_b first would
        // exhaust it after a single comparison.
        const DataList a{1, 1};
        const DataList b{1};
        SortStats tie_stats;
        CHECK(kernels::merge_runs(a, b, tie_stats) == DataList{1, 1, 1});
        CHECK(tie_stats.comparisons == 2);
        CHECK(tie_stats.moves == 3);
    }
}

TEST_CASE("merge sort basics") {
    SUBCASE("single element: no comparisons") {
        DataList v{9};
        SortStats stats;
        run_merge_sort(v, stats);
        CHECK(v == DataList{9});
        CHECK(stats.comparisons == 0);
    }
    SUBCASE("reverse input") {
        DataList v{4, 3, 2, 1};
        SortStats stats;
        run_merge_sort(v, stats);
        CHECK(v == DataList{1, 2, 3, 4});
    }
    SUBCASE("duplicates, comparison bound") {
        DataList v{2, 7, 1, 8, 2, 8};
        SortStats stats;
        run_merge_sort(v, stats);
        CHECK(v == sorted_copy(DataList{2, 7, 1, 8, 2, 8}));
        CHECK(stats.comparisons <= 6 * ceil_log2(6));
    }
    SUBCASE("empty range convention first > last") {
        DataList v{3, 1};
        DataList scratch(v.size());
        SortStats stats;
        kernels::merge_sort(v, 1, 0, scratch, stats);
        CHECK(v == DataList{3, 1});
        CHECK(stats.comparisons == 0);
    }
}

TEST_CASE("quick sort basics") {
    SUBCASE("length <= 1 returns untouched") {
        DataList v{2, 1};
        SortStats stats;
        kernels::quick_sort(v, 0, 1, stats);
        CHECK(v == DataList{2, 1});
        CHECK(stats.comparisons == 0);
    }
    SUBCASE("middle pivot on [3,1,2]") {
        // Pivot is the element at index 1 (value 1); the partition leaves
        // nothing on the left, then [3,2] sorts with one more level.
        DataList v{3, 1, 2};
        SortStats stats;
        kernels::quick_sort(v, 0, 3, stats);
        CHECK(v == DataList{1, 2, 3});
        CHECK(stats.comparisons == 3);
    }
    SUBCASE("all-equal input recurses one level per element") {
        DataList v{5, 5, 5, 5};
        SortStats stats;
        kernels::quick_sort(v, 0, 4, stats);
        CHECK(v == DataList{5, 5, 5, 5});
        CHECK(stats.max_depth == 4);
    }
    SUBCASE("out of range segment") {
        DataList v{1, 2};
        SortStats stats;
        CHECK_THROWS_AS(kernels::quick_sort(v, 1, 2, stats), ProgrammingError);
    }
}

TEST_CASE("is_sorted") {
    CHECK(kernels::is_sorted(DataList{}));
    CHECK(kernels::is_sorted(DataList{1, 2, 2, 3}));
    CHECK_FALSE(kernels::is_sorted(DataList{2, 1}));
}

TEST_CASE("all kernels match the reference sort on random inputs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 250; ++trial) {
        const std::size_t s = rng() % 512;
        // small value range to exercise duplicates
        DataList input(s);
        for (auto& x : input) x = static_cast<Element>(rng() % 32);
        const DataList expected = sorted_copy(input);

        DataList b = input;
        SortStats sb;
        kernels::bubble_sort(b, sb);
        CHECK(b == expected);

        DataList m = input;
        SortStats sm;
        run_merge_sort(m, sm);
        CHECK(m == expected);
        if (s >= 1) CHECK(sm.comparisons <= s * ceil_log2(s));

        DataList q = input;
        SortStats sq;
        kernels::quick_sort(q, 0, q.size(), sq);
        CHECK(q == expected);
    }
}

TEST_CASE("quick sort depth stays within 4*ceil(log2 s) on seeded random input") {
    for (std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        for (std::size_t s : {std::size_t{1} << 10, std::size_t{1} << 13,
                              std::size_t{1} << 16}) {
            DataList v = bench::gen_data(s, seed);
            SortStats stats;
            kernels::quick_sort(v, 0, v.size(), stats);
            CHECK(kernels::is_sorted(v));
            CHECK(stats.max_depth <= 4 * ceil_log2(s));
        }
    }
}
