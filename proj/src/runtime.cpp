#include "sortbench/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace sortbench::runtime {

namespace {
using SteadyClock = std::chrono::steady_clock;
constexpr std::chrono::milliseconds kWatchdogTick{25};
constexpr int kTagCollective = -1;
} // namespace

const char* to_string(Mode mode) {
    return mode == Mode::wall ? "wall" : "counted";
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::compute: return "compute";
        case EventKind::send: return "send";
        case EventKind::recv: return "recv";
        case EventKind::bcast: return "bcast";
        case EventKind::scatter: return "scatter";
        case EventKind::gather: return "gather";
        case EventKind::barrier: return "barrier";
        case EventKind::idle: return "idle";
    }
    return "unknown";
}

namespace detail {

enum class RankStatus { running, blocked_recv, blocked_slot, done };

struct Msg {
    DataList payload;
    std::uint64_t sent_ts = 0; // counted-mode logical completion of the send
    int coll_seq = -1;         // -1 marks user traffic
    int coll_kind = -1;
    int coll_root = -1;
};

struct RankState {
    int rank = 0;
    std::vector<TraceEvent> trace;
    CostCounters counters;
    std::uint64_t messages_received = 0;
    std::uint64_t tracked_current = 0;
    std::uint64_t logical_now = 0;
    bool in_compute = false;
    bool in_collective = false;
    std::uint64_t coll_bytes = 0;
    int coll_seq = 0;
    RankStatus status = RankStatus::running;
    int wait_src = -1;
    int wait_tag = 0;
    SteadyClock::time_point wall_start{};
    SteadyClock::time_point wall_end{};

    void emit(EventKind kind, std::int64_t t0, std::int64_t t1,
              std::uint64_t bytes) {
        trace.push_back(TraceEvent{rank, kind, t0, t1, bytes});
    }

    std::uint64_t weighted_compute_ops() const {
        return counters.comparisons + counters.element_moves;
    }
};

class World {
public:
    explicit World(const WorldOptions& options) : opts_(options) {
        ranks_.reserve(static_cast<std::size_t>(opts_.procs));
        for (int r = 0; r < opts_.procs; ++r) {
            ranks_.push_back(std::make_unique<RankState>());
            ranks_.back()->rank = r;
        }
        epoch_ = SteadyClock::now();
    }

    const WorldOptions& options() const { return opts_; }
    bool counted() const { return opts_.mode == Mode::counted; }
    RankState& rank_state(int r) { return *ranks_[static_cast<std::size_t>(r)]; }

    std::int64_t now_ns() const {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   SteadyClock::now() - epoch_)
            .count();
    }

    std::uint64_t message_cost(std::size_t elements) const {
        return opts_.latency_weight +
               opts_.bandwidth_weight * static_cast<std::uint64_t>(elements);
    }

    void run_rank(int r, const std::function<void(Comm&)>& program);

    void send_impl(RankState& rs, int dst, int tag,
                   std::span<const Element> payload, bool internal,
                   int coll_seq, int coll_kind, int coll_root);
    DataList recv_impl(RankState& rs, int src, int tag, bool internal,
                       int expect_seq, int expect_kind, int expect_root);

    void acquire_slot(RankState& rs, bool& waited, std::int64_t& t_call_ns,
                      std::int64_t& t_acq_ns);
    void release_slot();

    void record_error();
    void finish_checks();
    WorldReport build_report(SteadyClock::time_point joined_at);

    std::exception_ptr first_error() const { return first_error_; }

private:
    using ChannelKey = std::tuple<int, int, int>; // (src, dst, tag)

    template <typename Pred>
    bool blocking_wait(std::unique_lock<std::mutex>& lk, RankState& rs,
                       RankStatus status, int wait_src, int wait_tag,
                       Pred&& pred);
    void check_deadlock_locked();
    std::string describe_rank_locked(const RankState& rs) const;

    WorldOptions opts_;
    SteadyClock::time_point epoch_;
    std::vector<std::unique_ptr<RankState>> ranks_;

    std::mutex mu_;
    std::condition_variable cv_;
    std::map<ChannelKey, std::deque<Msg>> queues_;
    int active_compute_ = 0;
    int max_active_compute_ = 0;
    int blocked_count_ = 0;
    int done_count_ = 0;
    bool aborted_ = false;
    std::string abort_reason_;
    std::exception_ptr first_error_;
};

template <typename Pred>
bool World::blocking_wait(std::unique_lock<std::mutex>& lk, RankState& rs,
                          RankStatus status, int wait_src, int wait_tag,
                          Pred&& pred) {
    if (aborted_) throw DeadlockError(abort_reason_);
    if (pred()) return false;
    rs.status = status;
    rs.wait_src = wait_src;
    rs.wait_tag = wait_tag;
    ++blocked_count_;
    bool satisfied = false;
    for (;;) {
        if (aborted_) break;
        cv_.wait_for(lk, kWatchdogTick);
        if (aborted_) break;
        if (pred()) {
            satisfied = true;
            break;
        }
        check_deadlock_locked();
    }
    --blocked_count_;
    rs.status = RankStatus::running;
    if (!satisfied) throw DeadlockError(abort_reason_);
    return true;
}

void World::check_deadlock_locked() {
    if (aborted_) return;
    if (blocked_count_ + done_count_ != opts_.procs) return;
    for (int r = 0; r < opts_.procs; ++r) {
        const RankState& rs = *ranks_[static_cast<std::size_t>(r)];
        if (rs.status == RankStatus::blocked_recv) {
            auto it = queues_.find(ChannelKey{rs.wait_src, r, rs.wait_tag});
            if (it != queues_.end() && !it->second.empty()) return;
        } else if (rs.status == RankStatus::blocked_slot) {
            if (active_compute_ < opts_.core_slots) return;
        }
    }
    std::ostringstream reason;
    reason << "deadlock detected: every live rank is blocked;";
    for (int r = 0; r < opts_.procs; ++r) {
        reason << " rank " << r << ": "
               << describe_rank_locked(*ranks_[static_cast<std::size_t>(r)])
               << ";";
    }
    aborted_ = true;
    abort_reason_ = reason.str();
    cv_.notify_all();
}

std::string World::describe_rank_locked(const RankState& rs) const {
    switch (rs.status) {
        case RankStatus::running:
            return "running";
        case RankStatus::blocked_recv:
            if (rs.wait_tag == kTagCollective) {
                return "blocked in collective (waiting on rank " +
                       std::to_string(rs.wait_src) + ")";
            }
            return "blocked on recv(src=" + std::to_string(rs.wait_src) +
                   ", tag=" + std::to_string(rs.wait_tag) + ")";
        case RankStatus::blocked_slot:
            return "blocked waiting for a compute slot";
        case RankStatus::done:
            return "done";
    }
    return "unknown";
}

void World::send_impl(RankState& rs, int dst, int tag,
                      std::span<const Element> payload, bool internal,
                      int coll_seq, int coll_kind, int coll_root) {
    if (rs.in_compute) {
        throw ProgrammingError("communication inside a compute section (rank " +
                               std::to_string(rs.rank) + ")");
    }
    if (dst < 0 || dst >= opts_.procs) {
        throw ConfigError("send destination out of range: dst=" +
                          std::to_string(dst) +
                          " world size=" + std::to_string(opts_.procs));
    }
    if (dst == rs.rank) {
        throw ConfigError("send to self (rank " + std::to_string(rs.rank) + ")");
    }

    const std::uint64_t bytes = payload.size() * kElementBytes;
    const std::int64_t t0 = counted() ? 0 : now_ns();

    Msg msg;
    msg.payload.assign(payload.begin(), payload.end());
    msg.coll_seq = coll_seq;
    msg.coll_kind = coll_kind;
    msg.coll_root = coll_root;

    std::int64_t logical_start = 0;
    if (counted()) {
        logical_start = static_cast<std::int64_t>(rs.logical_now);
        rs.logical_now += message_cost(payload.size());
        msg.sent_ts = rs.logical_now;
    }

    rs.counters.messages_sent += 1;
    rs.counters.bytes_sent += bytes;
    if (internal) rs.coll_bytes += bytes;

    {
        std::lock_guard<std::mutex> lk(mu_);
        queues_[ChannelKey{rs.rank, dst, tag}].push_back(std::move(msg));
    }
    cv_.notify_all();

    if (!internal) {
        if (counted()) {
            rs.emit(EventKind::send, logical_start,
                    static_cast<std::int64_t>(rs.logical_now), bytes);
        } else {
            rs.emit(EventKind::send, t0, now_ns(), bytes);
        }
    }
}

DataList World::recv_impl(RankState& rs, int src, int tag, bool internal,
                          int expect_seq, int expect_kind, int expect_root) {
    if (rs.in_compute) {
        throw ProgrammingError("communication inside a compute section (rank " +
                               std::to_string(rs.rank) + ")");
    }
    if (src < 0 || src >= opts_.procs || src == rs.rank) {
        throw ConfigError("recv source invalid: src=" + std::to_string(src) +
                          " rank=" + std::to_string(rs.rank) +
                          " world size=" + std::to_string(opts_.procs));
    }

    const std::int64_t t0 =
        counted() ? static_cast<std::int64_t>(rs.logical_now) : now_ns();

    Msg msg;
    {
        std::unique_lock<std::mutex> lk(mu_);
        const ChannelKey key{src, rs.rank, tag};
        blocking_wait(lk, rs, RankStatus::blocked_recv, src, tag, [&] {
            auto it = queues_.find(key);
            return it != queues_.end() && !it->second.empty();
        });
        auto& q = queues_[key];
        msg = std::move(q.front());
        q.pop_front();
    }

    rs.messages_received += 1;
    const std::uint64_t bytes = msg.payload.size() * kElementBytes;

    if (internal) {
        if (msg.coll_seq != expect_seq || msg.coll_kind != expect_kind ||
            msg.coll_root != expect_root) {
            throw ProgrammingError(
                "collective sequence mismatch on rank " +
                std::to_string(rs.rank) + ": expected (seq=" +
                std::to_string(expect_seq) + ", kind=" +
                std::to_string(expect_kind) + ", root=" +
                std::to_string(expect_root) + "), got (seq=" +
                std::to_string(msg.coll_seq) + ", kind=" +
                std::to_string(msg.coll_kind) + ", root=" +
                std::to_string(msg.coll_root) + ")");
        }
        rs.coll_bytes += bytes;
    }

    if (counted()) {
        rs.logical_now = std::max(rs.logical_now, msg.sent_ts);
        if (!internal) {
            rs.emit(EventKind::recv, t0,
                    static_cast<std::int64_t>(rs.logical_now), bytes);
        }
    } else if (!internal) {
        rs.emit(EventKind::recv, t0, now_ns(), bytes);
    }
    return std::move(msg.payload);
}

void World::acquire_slot(RankState& rs, bool& waited, std::int64_t& t_call_ns,
                         std::int64_t& t_acq_ns) {
    t_call_ns = counted() ? 0 : now_ns();
    {
        std::unique_lock<std::mutex> lk(mu_);
        waited = blocking_wait(lk, rs, RankStatus::blocked_slot, -1, 0,
                               [&] { return active_compute_ < opts_.core_slots; });
        ++active_compute_;
        max_active_compute_ = std::max(max_active_compute_, active_compute_);
    }
    t_acq_ns = counted() ? 0 : now_ns();
}

void World::release_slot() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        --active_compute_;
    }
    cv_.notify_all();
}

void World::record_error() {
    std::lock_guard<std::mutex> lk(mu_);
    if (!first_error_) first_error_ = std::current_exception();
    if (!aborted_) {
        aborted_ = true;
        abort_reason_ = "world aborted: a rank program failed";
    }
    cv_.notify_all();
}

void World::run_rank(int r, const std::function<void(Comm&)>& program) {
    RankState& rs = rank_state(r);
    rs.wall_start = SteadyClock::now();
    Comm comm(*this, r);
    try {
        program(comm);
    } catch (...) {
        record_error();
    }
    rs.wall_end = SteadyClock::now();
    {
        std::lock_guard<std::mutex> lk(mu_);
        rs.status = RankStatus::done;
        ++done_count_;
    }
    cv_.notify_all();
}

void World::finish_checks() {
    for (const auto& [key, q] : queues_) {
        if (!q.empty()) {
            const auto& [src, dst, tag] = key;
            throw ProgrammingError(
                "world ended with undelivered traffic: " +
                std::to_string(q.size()) + " message(s) from rank " +
                std::to_string(src) + " to rank " + std::to_string(dst) +
                " tag " + std::to_string(tag));
        }
    }
}

WorldReport World::build_report(SteadyClock::time_point joined_at) {
    WorldReport report;
    report.options = opts_;
    report.max_concurrent_compute = max_active_compute_;
    const int p = opts_.procs;
    report.rank_wall_seconds.assign(static_cast<std::size_t>(p), 0.0);
    report.rank_logical_end.assign(static_cast<std::size_t>(p), 0);
    report.counters.resize(static_cast<std::size_t>(p));
    report.messages_received.assign(static_cast<std::size_t>(p), 0);
    for (int r = 0; r < p; ++r) {
        RankState& rs = rank_state(r);
        report.counters[static_cast<std::size_t>(r)] = rs.counters;
        report.messages_received[static_cast<std::size_t>(r)] =
            rs.messages_received;
        report.rank_logical_end[static_cast<std::size_t>(r)] = rs.logical_now;
        if (!counted()) {
            report.rank_wall_seconds[static_cast<std::size_t>(r)] =
                std::chrono::duration<double>(rs.wall_end - rs.wall_start)
                    .count();
        }
        report.trace.insert(report.trace.end(), rs.trace.begin(),
                            rs.trace.end());
        const CostCounters& c = rs.counters;
        report.weighted_ops += c.comparisons + c.element_moves +
                               opts_.latency_weight * c.messages_sent +
                               opts_.bandwidth_weight *
                                   (c.bytes_sent / kElementBytes);
    }
    if (!counted()) {
        report.wall_seconds =
            std::chrono::duration<double>(joined_at - epoch_).count();
    }
    return report;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Comm

int Comm::size() const { return world_->options().procs; }

void Comm::send(int dst, int tag, std::span<const Element> payload) {
    if (tag < 0) throw ConfigError("negative tags are reserved");
    world_->send_impl(world_->rank_state(rank_), dst, tag, payload,
                      /*internal=*/false, -1, -1, -1);
}

DataList Comm::recv(int src, int tag) {
    if (tag < 0) throw ConfigError("negative tags are reserved");
    return world_->recv_impl(world_->rank_state(rank_), src, tag,
                             /*internal=*/false, -1, -1, -1);
}

namespace {

// Bookkeeping shared by the collectives: validates the root, claims the
// next collective sequence number and emits one event of the given kind
// covering the whole operation.
class CollectiveScope {
public:
    CollectiveScope(detail::World& world, detail::RankState& rs,
                    EventKind kind, int root)
        : world_(world), rs_(rs), kind_(kind) {
        if (rs_.in_compute) {
            throw ProgrammingError(
                "collective inside a compute section (rank " +
                std::to_string(rs_.rank) + ")");
        }
        if (root < 0 || root >= world_.options().procs) {
            throw ConfigError("collective root out of range: " +
                              std::to_string(root));
        }
        seq_ = rs_.coll_seq++;
        rs_.in_collective = true;
        rs_.coll_bytes = 0;
        t0_ = world_.counted() ? static_cast<std::int64_t>(rs_.logical_now)
                               : world_.now_ns();
    }

    ~CollectiveScope() {
        rs_.in_collective = false;
        const std::int64_t t1 = world_.counted()
                                    ? static_cast<std::int64_t>(rs_.logical_now)
                                    : world_.now_ns();
        rs_.emit(kind_, t0_, t1, rs_.coll_bytes);
    }

    int seq() const { return seq_; }
    int kind_id() const { return static_cast<int>(kind_); }

private:
    detail::World& world_;
    detail::RankState& rs_;
    EventKind kind_;
    int seq_ = 0;
    std::int64_t t0_ = 0;
};

} // namespace

DataList Comm::broadcast(int root, DataList value) {
    detail::RankState& rs = world_->rank_state(rank_);
    CollectiveScope scope(*world_, rs, EventKind::bcast, root);
    const int p = size();
    if (rank_ == root) {
        for (int r = 0; r < p; ++r) {
            if (r == root) continue;
            world_->send_impl(rs, r, -1, value, /*internal=*/true, scope.seq(),
                              scope.kind_id(), root);
        }
        return value;
    }
    return world_->recv_impl(rs, root, -1, /*internal=*/true, scope.seq(),
                             scope.kind_id(), root);
}

DataList Comm::scatter(int root, std::span<const Element> list,
                       std::span<const std::size_t> sizes) {
    detail::RankState& rs = world_->rank_state(rank_);
    CollectiveScope scope(*world_, rs, EventKind::scatter, root);
    const int p = size();
    if (rank_ == root) {
        if (sizes.size() != static_cast<std::size_t>(p)) {
            throw ConfigError("scatter sizes length " +
                              std::to_string(sizes.size()) +
                              " does not match world size " +
                              std::to_string(p));
        }
        std::size_t total = 0;
        for (std::size_t s : sizes) total += s;
        if (total != list.size()) {
            throw ConfigError("scatter sizes sum to " + std::to_string(total) +
                              " but the list has " +
                              std::to_string(list.size()) + " elements");
        }
        std::size_t offset = 0;
        DataList own;
        for (int r = 0; r < p; ++r) {
            const std::size_t len = sizes[static_cast<std::size_t>(r)];
            auto slice = list.subspan(offset, len);
            if (r == root) {
                own.assign(slice.begin(), slice.end());
            } else {
                world_->send_impl(rs, r, -1, slice, /*internal=*/true,
                                  scope.seq(), scope.kind_id(), root);
            }
            offset += len;
        }
        return own;
    }
    return world_->recv_impl(rs, root, -1, /*internal=*/true, scope.seq(),
                             scope.kind_id(), root);
}

DataList Comm::gather(int root, std::span<const Element> block) {
    detail::RankState& rs = world_->rank_state(rank_);
    CollectiveScope scope(*world_, rs, EventKind::gather, root);
    const int p = size();
    if (rank_ == root) {
        DataList all;
        for (int r = 0; r < p; ++r) {
            if (r == root) {
                all.insert(all.end(), block.begin(), block.end());
            } else {
                DataList part =
                    world_->recv_impl(rs, r, -1, /*internal=*/true, scope.seq(),
                                      scope.kind_id(), root);
                all.insert(all.end(), part.begin(), part.end());
            }
        }
        return all;
    }
    world_->send_impl(rs, root, -1, block, /*internal=*/true, scope.seq(),
                      scope.kind_id(), root);
    return {};
}

void Comm::barrier() {
    detail::RankState& rs = world_->rank_state(rank_);
    CollectiveScope scope(*world_, rs, EventKind::barrier, 0);
    const int p = size();
    if (p == 1) return;
    if (rank_ == 0) {
        for (int r = 1; r < p; ++r) {
            world_->recv_impl(rs, r, -1, /*internal=*/true, scope.seq(),
                              scope.kind_id(), 0);
        }
        for (int r = 1; r < p; ++r) {
            world_->send_impl(rs, r, -1, {}, /*internal=*/true, scope.seq(),
                              scope.kind_id(), 0);
        }
    } else {
        world_->send_impl(rs, 0, -1, {}, /*internal=*/true, scope.seq(),
                          scope.kind_id(), 0);
        world_->recv_impl(rs, 0, -1, /*internal=*/true, scope.seq(),
                          scope.kind_id(), 0);
    }
}

Comm::ComputeGuard::ComputeGuard(Comm& comm) : comm_(comm) {
    detail::World& w = *comm_.world_;
    detail::RankState& rs = w.rank_state(comm_.rank_);
    if (rs.in_compute) {
        throw ProgrammingError("nested compute section on rank " +
                               std::to_string(rs.rank));
    }
    bool waited = false;
    std::int64_t t_call = 0;
    std::int64_t t_acq = 0;
    w.acquire_slot(rs, waited, t_call, t_acq);
    rs.in_compute = true;
    if (!w.counted() && waited) {
        rs.emit(EventKind::idle, t_call, t_acq, 0);
    }
    wall_start_ns_ = t_acq;
    ops_before_ = rs.weighted_compute_ops();
}

Comm::ComputeGuard::~ComputeGuard() {
    detail::World& w = *comm_.world_;
    detail::RankState& rs = w.rank_state(comm_.rank_);
    rs.in_compute = false;
    if (w.counted()) {
        const std::uint64_t delta = rs.weighted_compute_ops() - ops_before_;
        rs.emit(EventKind::compute, static_cast<std::int64_t>(rs.logical_now),
                static_cast<std::int64_t>(rs.logical_now + delta), 0);
        rs.logical_now += delta;
    } else {
        rs.emit(EventKind::compute, wall_start_ns_, w.now_ns(), 0);
    }
    w.release_slot();
}

void Comm::tracked_alloc(std::uint64_t n_elements) {
    detail::RankState& rs = world_->rank_state(rank_);
    rs.tracked_current += n_elements;
    rs.counters.peak_tracked_elements =
        std::max(rs.counters.peak_tracked_elements, rs.tracked_current);
}

void Comm::tracked_free(std::uint64_t n_elements) {
    detail::RankState& rs = world_->rank_state(rank_);
    if (n_elements > rs.tracked_current) {
        throw ProgrammingError(
            "tracked_free of " + std::to_string(n_elements) +
            " elements exceeds the balance of " +
            std::to_string(rs.tracked_current) + " on rank " +
            std::to_string(rank_));
    }
    rs.tracked_current -= n_elements;
}

std::uint64_t Comm::tracked_current() const {
    return world_->rank_state(rank_).tracked_current;
}

CostCounters& Comm::counters() { return world_->rank_state(rank_).counters; }

void Comm::add_sort_stats(const kernels::SortStats& stats) {
    CostCounters& c = counters();
    c.comparisons += stats.comparisons;
    c.swaps += stats.swaps;
    c.element_moves += stats.moves;
    c.max_recursion_depth = std::max(c.max_recursion_depth, stats.max_depth);
}

std::uint64_t Comm::logical_now() const {
    return world_->rank_state(rank_).logical_now;
}

// ---------------------------------------------------------------------------
// spawn_world

WorldReport spawn_world(const WorldOptions& options,
                        const std::function<void(Comm&)>& program) {
    if (options.procs < 1) {
        throw ConfigError("world needs at least one process, got " +
                          std::to_string(options.procs));
    }
    if (options.core_slots < 1) {
        throw ConfigError("world needs at least one core slot, got " +
                          std::to_string(options.core_slots));
    }

    // Wall-mode worlds are exclusive per OS process to keep timing clean.
    static std::mutex wall_gate;
    std::unique_lock<std::mutex> gate(wall_gate, std::defer_lock);
    if (options.mode == Mode::wall) gate.lock();

    detail::World world(options);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(options.procs));
    for (int r = 0; r < options.procs; ++r) {
        threads.emplace_back([&world, &program, r] { world.run_rank(r, program); });
    }
    for (auto& t : threads) t.join();
    const auto joined_at = std::chrono::steady_clock::now();

    if (world.first_error()) std::rethrow_exception(world.first_error());
    world.finish_checks();
    return world.build_report(joined_at);
}

} // namespace sortbench::runtime
