#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sortbench/element.hpp"
#include "sortbench/errors.hpp"
#include "sortbench/sort_core.hpp"

namespace sortbench::runtime {

enum class Mode { wall, counted };

const char* to_string(Mode mode);

// Trace event kinds. Everything that is not compute counts as overhead.
enum class EventKind {
    compute,
    send,
    recv,
    bcast,
    scatter,
    gather,
    barrier,
    idle,
};

const char* to_string(EventKind kind);

// One interval on a rank's timeline. Timestamps are nanoseconds since the
// world epoch in wall mode and weighted operation counts in counted mode.
struct TraceEvent {
    int rank = 0;
    EventKind kind = EventKind::compute;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    std::uint64_t bytes = 0;
};

// Per-rank operation counts. Monotone non-decreasing during a run.
struct CostCounters {
    std::uint64_t comparisons = 0;
    std::uint64_t swaps = 0;
    std::uint64_t element_moves = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t peak_tracked_elements = 0;
    std::uint64_t max_recursion_depth = 0;
};

// World parameters. core_slots is the emulated physical core count: at most
// that many ranks may be inside a compute section at any instant. The
// weights define counted-mode message cost: latency_weight per message plus
// bandwidth_weight per element.
struct WorldOptions {
    int procs = 1;
    int core_slots = 1;
    Mode mode = Mode::counted;
    std::uint64_t latency_weight = 1000;
    std::uint64_t bandwidth_weight = 1;
};

// Everything spawn_world hands back: merged trace, per-rank counters and
// timings, and the compute-slot high-water mark.
struct WorldReport {
    WorldOptions options;
    double wall_seconds = 0.0;                  // wall mode only, else 0
    std::vector<double> rank_wall_seconds;      // wall mode only, else 0
    std::vector<std::uint64_t> rank_logical_end;  // counted mode clocks
    std::vector<CostCounters> counters;
    std::vector<std::uint64_t> messages_received;
    std::vector<TraceEvent> trace;              // ordered by (rank, time)
    int max_concurrent_compute = 0;
    std::uint64_t weighted_ops = 0;             // sum over ranks

    std::uint64_t total(std::uint64_t CostCounters::* field) const {
        std::uint64_t sum = 0;
        for (const auto& c : counters) sum += c.*field;
        return sum;
    }
};

namespace detail {
class World;
struct RankState;
} // namespace detail

// A rank's handle into the world. Holds the rank identity and provides
// point-to-point traffic, collectives, compute-slot sections and tracked
// allocation. Not safe to share between threads of control.
class Comm {
public:
    int rank() const { return rank_; }
    int size() const;

    // Point-to-point. Tags must be non-negative; negative tags are reserved
    // for collective traffic. FIFO order holds per (src, dst, tag).
    void send(int dst, int tag, std::span<const Element> payload);
    DataList recv(int src, int tag);

    // Flat root-centric collectives built on send/recv, so their cost shows
    // up in the message counters. Every rank must call with the same root.
    DataList broadcast(int root, DataList value);
    DataList scatter(int root, std::span<const Element> list,
                     std::span<const std::size_t> sizes);
    DataList gather(int root, std::span<const Element> block);
    void barrier();

    // Runs work while holding one of the k compute slots. Counted mode
    // advances the logical clock by the comparisons and element moves the
    // work performed. Nesting is a programming error.
    template <typename F>
    auto compute(F&& work) -> std::invoke_result_t<F&> {
        ComputeGuard guard(*this);
        return std::forward<F>(work)();
    }

    // Element-denominated allocation accounting for the rank's own buffers.
    void tracked_alloc(std::uint64_t n_elements);
    void tracked_free(std::uint64_t n_elements);
    std::uint64_t tracked_current() const;

    CostCounters& counters();
    void add_sort_stats(const kernels::SortStats& stats);

    std::uint64_t logical_now() const;

private:
    friend class detail::World;

    class ComputeGuard {
    public:
        explicit ComputeGuard(Comm& comm);
        ~ComputeGuard();
        ComputeGuard(const ComputeGuard&) = delete;
        ComputeGuard& operator=(const ComputeGuard&) = delete;

    private:
        Comm& comm_;
        std::int64_t wall_start_ns_ = 0;
        std::uint64_t ops_before_ = 0;
    };

    Comm(detail::World& world, int rank) : world_(&world), rank_(rank) {}

    detail::World* world_;
    int rank_;
};

// Runs the same program on p logical ranks and blocks until all finish.
// Throws DeadlockError when every live rank is blocked with nothing able to
// unblock it, ConfigError on invalid parameters, and rethrows the first
// exception a rank program raised. In wall mode at most one world runs per
// OS process at a time; counted worlds may run concurrently.
WorldReport spawn_world(const WorldOptions& options,
                        const std::function<void(Comm&)>& program);

} // namespace sortbench::runtime
