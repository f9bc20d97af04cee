#include "hetfj/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <unordered_map>

#include "hetfj/bounds.hpp"

namespace hetfj {

std::string_view to_string(PowerPhase p) {
    switch (p) {
        case PowerPhase::Busy: return "busy";
        case PowerPhase::Linger: return "linger";
        case PowerPhase::LowPower: return "low";
        case PowerPhase::Waking: return "wake";
    }
    return "?";
}

std::optional<SubTask> ServerQueue::pop_next() {
    if (items_.empty()) return std::nullopt;
    auto it = items_.begin();
    SubTask t = it->second;
    items_.erase(it);
    return t;
}

int queue_rank(Policy p, const DataClass& c) { return p == Policy::Fcfs ? 0 : c.priority_rank; }

bool preempts(Policy p, int arriving, int in_service) {
    return p == Policy::PreemptivePriority && arriving < in_service;
}

std::vector<int> choose_servers(int n, int r, RngStream& rng) {
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    if (r >= n) return all;
    // Partial Fisher-Yates.
    for (int i = 0; i < r; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(r));
    return all;
}

namespace {

// Simultaneous events: completions free servers before anything else happens.
enum class EventType : std::uint8_t { ServiceComplete = 0, WakeComplete = 1, LingerExpire = 2, Arrival = 3 };

struct Event {
    double time;
    EventType type;
    int target;  // server id, or class index for arrivals
    std::uint64_t seq;
    std::uint64_t token;

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (type != o.type) return type > o.type;
        if (target != o.target) return target > o.target;
        return seq > o.seq;
    }
};

constexpr std::uint64_t kServiceStream = 1ULL << 32;
constexpr std::uint64_t kArrivalStream = 2ULL << 32;
constexpr std::uint64_t kPlacementStream = 3ULL << 32;

struct Server {
    ServerQueue queue;
    std::optional<SubTask> in_service;
    double service_start = 0.0;
    std::uint64_t service_token = 0;
    std::uint64_t linger_token = 0;
    PowerPhase phase = PowerPhase::Linger;
    double phase_start = 0.0;
    PhaseLog log;
};

struct Slot {
    int server;
    QueueKey key;
};

struct Job {
    std::size_t class_idx;
    double arrival;
    int completed = 0;
    int cancelled = 0;
    std::vector<Slot> slots;
    std::vector<SubTask> parked;  // split-merge: sub-tasks not dispatched or suspended
};

class Engine {
public:
    Engine(const ValidatedConfig& cfg, const EngineOptions& opts)
        : cfg_(cfg),
          opts_(opts),
          policy_(cfg.policy()),
          split_merge_(opts.split_merge.value_or(cfg.config().sim.split_merge)),
          seed_(splitmix64(cfg.config().sim.seed ^ (0xD1B54A32D192ED03ULL * (opts.replication + 1)))),
          placement_rng_(seed_, kPlacementStream),
          servers_(static_cast<std::size_t>(cfg.n())) {
        const auto R = cfg.num_classes();
        for (std::size_t s = 0; s < servers_.size(); ++s) service_rng_.emplace_back(seed_, kServiceStream | s);
        for (std::size_t c = 0; c < R; ++c) {
            arrival_rng_.emplace_back(seed_, kArrivalStream | c);
            service_dist_.push_back(cfg.service_distribution(c));
            arrival_dist_.push_back(cfg.interarrival_distribution(c));
            ranks_.push_back(queue_rank(policy_, cfg.cls(c)));
        }
        trace_.completed.assign(R, 0);
        trace_.phase_logs.resize(servers_.size());

        if (opts.script.empty()) {
            horizon_ = static_cast<std::uint64_t>(cfg.config().sim.horizon_jobs);
            warmup_ = static_cast<std::uint64_t>(cfg.config().sim.warmup_jobs);
        } else {
            horizon_ = opts.script.size();
            warmup_ = 0;
        }

        const double d_l = cfg.config().power.d_l;
        for (std::size_t s = 0; s < servers_.size(); ++s) enter_idle(static_cast<int>(s), 0.0, d_l);
    }

    RawTrace run() {
        if (!cfg_.config().sim.allow_unstable && !is_stable(cfg_.config()))
            throw std::domain_error("configuration is unstable; set allow_unstable to simulate it");

        if (opts_.script.empty()) {
            for (std::size_t c = 0; c < cfg_.num_classes(); ++c) schedule_arrival(c, 0.0);
        } else {
            for (const auto& a : opts_.script) {
                if (a.class_idx >= cfg_.num_classes()) throw std::out_of_range("scripted arrival for unknown class");
                push({a.time, EventType::Arrival, static_cast<int>(a.class_idx), next_seq_++, 0});
            }
        }

        while (completed_total_ < horizon_) {
            if (events_.empty()) throw std::logic_error("event queue drained before the horizon");
            const Event ev = events_.top();
            events_.pop();
            now_ = ev.time;
            if (now_ > opts_.max_time) throw DivergenceError("simulated time exceeded guard", now_, queued_);
            switch (ev.type) {
                case EventType::Arrival: on_arrival(static_cast<std::size_t>(ev.target)); break;
                case EventType::ServiceComplete: on_service_complete(ev.target, ev.token); break;
                case EventType::LingerExpire: on_linger_expire(ev.target, ev.token); break;
                case EventType::WakeComplete: on_wake_complete(ev.target); break;
            }
            if (opts_.check_invariants) check_invariants();
        }

        trace_.end_time = now_;
        for (std::size_t s = 0; s < servers_.size(); ++s) {
            auto& sv = servers_[s];
            close_phase(sv, now_);
            trace_.phase_logs[s] = std::move(sv.log);
        }
        return std::move(trace_);
    }

private:
    void push(const Event& e) { events_.push(e); }

    // ---- power phases -----------------------------------------------------

    void close_phase(Server& sv, double t) {
        if (t > sv.phase_start) {
            if (!sv.log.empty() && sv.log.back().phase == sv.phase && sv.log.back().end == sv.phase_start)
                sv.log.back().end = t;
            else
                sv.log.push_back({sv.phase, sv.phase_start, t});
        }
        sv.phase_start = t;
    }

    void set_phase(Server& sv, PowerPhase p, double t) {
        if (sv.phase == p) return;
        close_phase(sv, t);
        sv.phase = p;
    }

    void enter_idle(int s, double t, double d_l) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        if (d_l > 0.0) {
            set_phase(sv, PowerPhase::Linger, t);
            push({t + d_l, EventType::LingerExpire, s, next_seq_++, ++sv.linger_token});
        } else {
            set_phase(sv, PowerPhase::LowPower, t);
        }
    }

    // ---- per-server scheduling ----------------------------------------------

    void start_next(int s) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        auto next = sv.queue.pop_next();
        if (!next) {
            enter_idle(s, now_, cfg_.config().power.d_l);
            return;
        }
        --queued_;
        sv.in_service = *next;
        sv.service_start = now_;
        ++sv.service_token;
        set_phase(sv, PowerPhase::Busy, now_);
        push({now_ + next->remaining, EventType::ServiceComplete, s, next_seq_++, sv.service_token});
    }

    void receive(const SubTask& t) {
        auto& sv = servers_[static_cast<std::size_t>(t.server)];
        sv.queue.push(t);
        ++queued_;
        switch (sv.phase) {
            case PowerPhase::Linger:
                ++sv.linger_token;
                start_next(t.server);
                break;
            case PowerPhase::LowPower: {
                const double w_l = cfg_.config().power.w_l;
                if (w_l > 0.0) {
                    set_phase(sv, PowerPhase::Waking, now_);
                    push({now_ + w_l, EventType::WakeComplete, t.server, next_seq_++, 0});
                } else {
                    start_next(t.server);
                }
                break;
            }
            case PowerPhase::Waking: break;
            case PowerPhase::Busy:
                if (sv.in_service && preempts(policy_, t.key.rank, sv.in_service->key.rank)) preempt(t.server);
                break;
        }
    }

    // Takes the in-service sub-task off the server with its remaining work updated.
    SubTask interrupt(Server& sv, int s) {
        SubTask t = *sv.in_service;
        sv.in_service.reset();
        ++sv.service_token;
        if (opts_.preempt == PreemptMode::Resume)
            t.remaining = std::max(0.0, t.remaining - (now_ - sv.service_start));
        else
            t.remaining = sample(service_dist_[t.class_idx], service_rng_[static_cast<std::size_t>(s)]);
        return t;
    }

    void preempt(int s) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        ++trace_.preemptions;
        const SubTask t = interrupt(sv, s);
        sv.queue.push(t);
        ++queued_;
        start_next(s);
    }

    // ---- job lifecycle --------------------------------------------------------

    void schedule_arrival(std::size_t c, double from) {
        const double gap = sample(arrival_dist_[c], arrival_rng_[c]);
        push({from + gap, EventType::Arrival, static_cast<int>(c), next_seq_++, 0});
    }

    void on_arrival(std::size_t c) {
        if (opts_.script.empty()) schedule_arrival(c, now_);

        const auto& dc = cfg_.cls(c);
        const std::uint64_t id = next_job_id_++;
        ++trace_.arrived;
        Job job{c, now_, 0, 0, {}, {}};
        const auto targets = choose_servers(cfg_.n(), dc.r, placement_rng_);
        job.slots.reserve(targets.size());
        std::vector<SubTask> tasks;
        tasks.reserve(targets.size());
        for (int s : targets) {
            const double work = sample(service_dist_[c], service_rng_[static_cast<std::size_t>(s)]);
            const QueueKey key{ranks_[c], now_, next_seq_++};
            job.slots.push_back({s, key});
            tasks.push_back({id, static_cast<std::uint32_t>(c), s, key, work});
        }

        if (split_merge_) {
            job.parked = std::move(tasks);
            queued_ += job.parked.size();
            jobs_.emplace(id, std::move(job));
            const QueueKey jkey{ranks_[c], now_, id};
            waiting_.emplace(jkey, id);
            if (!active_) {
                activate_next();
            } else if (preempts(policy_, ranks_[c], ranks_[jobs_.at(*active_).class_idx])) {
                suspend_active();
                activate_next();
            }
        } else {
            jobs_.emplace(id, std::move(job));
            for (const auto& t : tasks) receive(t);
        }

        if (queued_ > opts_.max_queued_subtasks)
            throw DivergenceError("queued sub-tasks exceeded guard", now_, queued_);
    }

    void on_service_complete(int s, std::uint64_t token) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        if (token != sv.service_token || !sv.in_service) return;  // stale
        const SubTask done = *sv.in_service;
        sv.in_service.reset();
        ++sv.service_token;

        auto it = jobs_.find(done.job_id);
        Job& job = it->second;
        ++job.completed;
        if (job.completed == cfg_.cls(job.class_idx).k) {
            finish_job(it, s);
            if (split_merge_) {
                active_.reset();
                activate_next();
            }
        }
        // The server may already have been handed work by activate_next.
        if (!sv.in_service && sv.phase != PowerPhase::Waking) start_next(s);
    }

    void finish_job(std::unordered_map<std::uint64_t, Job>::iterator it, int finishing_server) {
        const std::uint64_t id = it->first;
        Job& job = it->second;
        for (const auto& slot : job.slots) {
            if (slot.server == finishing_server) continue;
            auto& sv = servers_[static_cast<std::size_t>(slot.server)];
            if (sv.in_service && sv.in_service->job_id == id) {
                sv.in_service.reset();
                ++sv.service_token;
                ++job.cancelled;
                ++trace_.aborted_in_service;
                start_next(slot.server);
            } else if (sv.queue.erase(slot.key)) {
                --queued_;
                ++job.cancelled;
                ++trace_.cancelled_queued;
                // A waking server whose queue empties still completes its wake-up.
            }
        }

        ++completed_total_;
        const auto& dc = cfg_.cls(job.class_idx);
        if (completed_total_ > warmup_) {
            trace_.jobs.push_back({id, dc.id, job.arrival, now_});
            ++trace_.completed[job.class_idx];
        } else if (completed_total_ == warmup_) {
            trace_.window_start = now_;
        }
        jobs_.erase(it);
    }

    void on_linger_expire(int s, std::uint64_t token) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        if (token != sv.linger_token || sv.phase != PowerPhase::Linger) return;
        set_phase(sv, PowerPhase::LowPower, now_);
    }

    void on_wake_complete(int s) {
        auto& sv = servers_[static_cast<std::size_t>(s)];
        if (sv.phase != PowerPhase::Waking) return;
        // Leave the waking phase before choosing; start_next re-enters Busy or idles.
        start_next(s);
    }

    // ---- split-merge ------------------------------------------------------------

    void activate_next() {
        if (waiting_.empty()) return;
        auto it = waiting_.begin();
        const std::uint64_t id = it->second;
        waiting_.erase(it);
        active_ = id;
        Job& job = jobs_.at(id);
        auto tasks = std::move(job.parked);
        job.parked.clear();
        queued_ -= tasks.size();
        for (const auto& t : tasks) receive(t);
    }

    void suspend_active() {
        const std::uint64_t id = *active_;
        Job& job = jobs_.at(id);
        for (const auto& slot : job.slots) {
            auto& sv = servers_[static_cast<std::size_t>(slot.server)];
            if (sv.in_service && sv.in_service->job_id == id) {
                ++trace_.preemptions;
                job.parked.push_back(interrupt(sv, slot.server));
                enter_idle(slot.server, now_, cfg_.config().power.d_l);
            } else if (const SubTask* head = sv.queue.peek(); head && head->job_id == id) {
                job.parked.push_back(*sv.queue.pop_next());
                --queued_;
            }
        }
        queued_ += job.parked.size();
        const QueueKey jkey{ranks_[job.class_idx], job.arrival, id};
        waiting_.emplace(jkey, id);
        active_.reset();
    }

    // ---- invariants ---------------------------------------------------------------

    void check_invariants() const {
        if (trace_.arrived != completed_total_ + jobs_.size())
            throw std::logic_error("job conservation violated");
        for (const auto& [id, job] : jobs_) {
            int in_flight = static_cast<int>(job.parked.size());
            for (const auto& slot : job.slots) {
                const auto& sv = servers_[static_cast<std::size_t>(slot.server)];
                if (sv.in_service && sv.in_service->job_id == id) ++in_flight;
                else if (sv.queue.contains(slot.key)) ++in_flight;
            }
            if (job.completed + job.cancelled + in_flight != cfg_.cls(job.class_idx).r)
                throw std::logic_error("sub-task accounting violated for job " + std::to_string(id));
        }
        for (const auto& sv : servers_) {
            if ((sv.phase == PowerPhase::Busy) != sv.in_service.has_value())
                throw std::logic_error("busy phase does not match in-service state");
            if (!sv.queue.empty() && sv.phase != PowerPhase::Busy && sv.phase != PowerPhase::Waking)
                throw std::logic_error("server idle with a nonempty queue");
        }
    }

    const ValidatedConfig& cfg_;
    const EngineOptions& opts_;
    Policy policy_;
    bool split_merge_;
    std::uint64_t seed_;

    RngStream placement_rng_;
    std::vector<RngStream> service_rng_;
    std::vector<RngStream> arrival_rng_;
    std::vector<Distribution> service_dist_;
    std::vector<Distribution> arrival_dist_;
    std::vector<int> ranks_;

    std::vector<Server> servers_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::unordered_map<std::uint64_t, Job> jobs_;
    std::map<QueueKey, std::uint64_t> waiting_;  // split-merge admission queue
    std::optional<std::uint64_t> active_;

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_job_id_ = 0;
    std::uint64_t completed_total_ = 0;
    std::uint64_t horizon_ = 0;
    std::uint64_t warmup_ = 0;
    std::size_t queued_ = 0;
    RawTrace trace_;
};

}  // namespace

RawTrace run(const ValidatedConfig& cfg, const EngineOptions& opts) {
    Engine engine(cfg, opts);
    return engine.run();
}

void write_trace(std::ostream& os, const RawTrace& trace) {
    os << kTraceFormatHeader << '\n' << "job_id,class_id,arrival,finish\n";
    char buf[128];
    for (const auto& j : trace.jobs) {
        std::snprintf(buf, sizeof buf, "%llu,%d,%.17g,%.17g\n", static_cast<unsigned long long>(j.id), j.class_id,
                      j.arrival, j.finish);
        os << buf;
    }
}

}  // namespace hetfj
