#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hetfj/distributions.hpp"
#include "hetfj/model.hpp"

namespace hetfj {

enum class PowerPhase : std::uint8_t { Busy, Linger, LowPower, Waking };

std::string_view to_string(PowerPhase p);

struct PhaseRecord {
    PowerPhase phase;
    double start;
    double end;
};

using PhaseLog = std::vector<PhaseRecord>;

struct JobRecord {
    std::uint64_t id;
    int class_id;
    double arrival;
    double finish;

    double latency() const { return finish - arrival; }
};

struct RawTrace {
    std::vector<JobRecord> jobs;           // completions past warm-up, in completion order
    std::vector<PhaseLog> phase_logs;      // per server, partitioning [0, end_time]
    std::vector<std::uint64_t> completed;  // per class index, past warm-up
    double window_start = 0.0;             // completion time of the last warm-up job
    double end_time = 0.0;

    std::uint64_t arrived = 0;
    std::uint64_t cancelled_queued = 0;     // sub-tasks dropped before service
    std::uint64_t aborted_in_service = 0;   // sub-tasks interrupted by cancellation
    std::uint64_t preemptions = 0;
};

/// Thrown when queues grow past the guard or simulated time runs away.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double time, std::size_t queued)
        : std::runtime_error(what), time_(time), queued_(queued) {}
    double time() const { return time_; }
    std::size_t queued() const { return queued_; }

private:
    double time_;
    std::size_t queued_;
};

struct ScriptedArrival {
    double time;
    std::size_t class_idx;
};

enum class PreemptMode { Resume, Restart };

struct EngineOptions {
    std::uint64_t replication = 0;
    /// Overrides cfg.sim.split_merge when set.
    std::optional<bool> split_merge;
    /// When nonempty, replaces the random arrival processes; the run ends once
    /// every scripted job has completed and warm-up is ignored.
    std::vector<ScriptedArrival> script;
    PreemptMode preempt = PreemptMode::Resume;
    /// Re-check conservation and accounting invariants after every event (slow).
    bool check_invariants = false;
    std::size_t max_queued_subtasks = 1'000'000;
    double max_time = 1e9;
};

/// Ordering key of a queued sub-task. rank is 0 under FCFS, the class
/// priority rank otherwise; earlier enqueue time wins within a rank.
struct QueueKey {
    int rank;
    double enqueue_time;
    std::uint64_t seq;

    auto operator<=>(const QueueKey&) const = default;
};

struct SubTask {
    std::uint64_t job_id;
    std::uint32_t class_idx;
    int server;
    QueueKey key;
    double remaining;  // work left, seconds at full speed
};

/// Per-server waiting room ordered by the scheduling policy.
class ServerQueue {
public:
    void push(const SubTask& t) { items_.emplace(t.key, t); }
    bool erase(const QueueKey& k) { return items_.erase(k) > 0; }
    bool contains(const QueueKey& k) const { return items_.count(k) > 0; }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }

    /// Next sub-task to serve: lowest rank, then earliest enqueue time.
    std::optional<SubTask> pop_next();
    const SubTask* peek() const { return items_.empty() ? nullptr : &items_.begin()->second; }

private:
    std::map<QueueKey, SubTask> items_;
};

int queue_rank(Policy p, const DataClass& c);

/// True when an arriving sub-task of rank `arriving` interrupts one of rank `in_service`.
bool preempts(Policy p, int arriving, int in_service);

/// r distinct servers out of n, uniformly without replacement. r == n returns 0..n-1 in order.
std::vector<int> choose_servers(int n, int r, RngStream& rng);

/// Simulates one replication of the fork-join system.
RawTrace run(const ValidatedConfig& cfg, const EngineOptions& opts = {});

/// Line-delimited record file: a version header, a column header, then one
/// `job_id,class_id,arrival,finish` row per completed job.
void write_trace(std::ostream& os, const RawTrace& trace);

inline constexpr const char* kTraceFormatHeader = "# hetfj-trace v1";

}  // namespace hetfj
