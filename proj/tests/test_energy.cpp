#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "hetfj/bounds.hpp"
#include "hetfj/energy.hpp"

using namespace hetfj;

namespace {

constexpr double kPon = 323.13;
constexpr double kPoff = 28.1;

SystemConfig single_server(double d_l, double w_l) {
    SystemConfig cfg;
    cfg.n = 1;
    cfg.mu = 1.0;
    cfg.service.kind = ServiceFamily::Kind::Deterministic;
    cfg.classes = {DataClass{.id = 1, .k = 1, .l = 1.0, .lambda = 0.1}};
    cfg.power.d_l = d_l;
    cfg.power.w_l = w_l;
    return cfg;
}

std::vector<PhaseRecord> phases_of(const RawTrace& tr, PowerPhase p) {
    std::vector<PhaseRecord> out;
    for (const auto& r : tr.phase_logs.at(0))
        if (r.phase == p && r.end > r.start) out.push_back(r);
    return out;
}

}  // namespace

TEST_CASE("hand-computed ledger") {
    const std::vector<PhaseLog> logs{{{PowerPhase::Busy, 0.0, 1.0},
                                      {PowerPhase::Linger, 1.0, 1.5},
                                      {PowerPhase::LowPower, 1.5, 2.0}}};
    const auto led = accumulate(logs, 0.0, 2.0, kPon, kPoff);
    CHECK(led.t_active == doctest::Approx(1.5));
    CHECK(led.t_low == doctest::Approx(0.5));
    CHECK(led.energy_j == doctest::Approx(498.745).epsilon(1e-12));
    const std::uint64_t one[] = {1};
    const double l[] = {1.0};
    CHECK(efficiency(led, one, l) == doctest::Approx(2.005).epsilon(1e-3));
    CHECK(efficiency(led, one, l) == doctest::Approx(1000.0 / 498.745).epsilon(1e-12));
    const std::uint64_t none[] = {0};
    CHECK(efficiency(led, none, l) == 0.0);
}

TEST_CASE("the same ledger produced by the engine") {
    auto cfg = single_server(0.5, 0.0);
    EngineOptions opts;
    opts.script = {{0.0, 0}};
    auto v = validate_or_throw(cfg);
    auto tr = run(v, opts);
    // Stretch the window to 2 s as in the hand computation.
    auto log = tr.phase_logs[0];
    REQUIRE(tr.end_time == doctest::Approx(1.0));
    log.push_back({PowerPhase::Linger, 1.0, 1.5});
    log.push_back({PowerPhase::LowPower, 1.5, 2.0});
    const std::vector<PhaseLog> logs{log};
    const auto led = accumulate(logs, 0.0, 2.0, v.p_on(), v.p_off());
    CHECK(led.energy_j == doctest::Approx(498.745).epsilon(1e-12));
    CHECK(efficiency(led, tr.completed, v) == doctest::Approx(1000.0 / 498.745).epsilon(1e-12));
}

TEST_CASE("short idle gaps stay active") {
    auto cfg = single_server(0.5, 0.0);
    EngineOptions opts;
    opts.script = {{0.0, 0}, {1.3, 0}};
    const auto tr = run(validate_or_throw(cfg), opts);
    CHECK(phases_of(tr, PowerPhase::LowPower).empty());
    const auto led = accumulate(tr, validate_or_throw(cfg));
    CHECK(led.t_low == 0.0);
    CHECK(led.servers[0].linger == doctest::Approx(0.3));
}

TEST_CASE("long idle gap sleeps and wakes") {
    auto cfg = single_server(0.5, 0.25);
    EngineOptions opts;
    opts.script = {{0.0, 0}, {3.0, 0}};
    const auto tr = run(validate_or_throw(cfg), opts);
    const auto low = phases_of(tr, PowerPhase::LowPower);
    REQUIRE(low.size() == 1);
    CHECK(low[0].start == doctest::Approx(1.5));
    CHECK(low[0].end == doctest::Approx(3.0));
    const auto wake = phases_of(tr, PowerPhase::Waking);
    REQUIRE(wake.size() == 1);
    CHECK(wake[0].start == doctest::Approx(3.0));
    CHECK(wake[0].end == doctest::Approx(3.25));
    REQUIRE(tr.jobs.size() == 2);
    CHECK(tr.jobs[1].latency() == doctest::Approx(1.25));

    const auto led = accumulate(tr, validate_or_throw(cfg));
    CHECK(led.servers[0].wake == doctest::Approx(0.25));
    CHECK(led.servers[0].busy == doctest::Approx(2.0));
    CHECK(led.servers[0].linger == doctest::Approx(0.5));
    CHECK(led.servers[0].low == doctest::Approx(1.5));
}

TEST_CASE("arrivals during wake-up wait for the full wake") {
    auto cfg = single_server(0.5, 1.0);
    EngineOptions opts;
    opts.script = {{0.0, 0}, {3.0, 0}, {3.5, 0}};
    const auto tr = run(validate_or_throw(cfg), opts);
    REQUIRE(tr.jobs.size() == 3);
    CHECK(tr.jobs[1].finish == doctest::Approx(5.0));
    CHECK(tr.jobs[2].finish == doctest::Approx(6.0));
}

TEST_CASE("malformed logs are rejected") {
    const std::vector<PhaseLog> overlap{{{PowerPhase::Busy, 0.0, 1.0}, {PowerPhase::Linger, 0.9, 2.0}}};
    CHECK_THROWS_AS(accumulate(overlap, 0.0, 2.0, kPon, kPoff), LedgerError);
    const std::vector<PhaseLog> gap{{{PowerPhase::Busy, 0.0, 1.0}, {PowerPhase::Linger, 1.1, 2.0}}};
    CHECK_THROWS_AS(accumulate(gap, 0.0, 2.0, kPon, kPoff), LedgerError);
    const std::vector<PhaseLog> short_log{{{PowerPhase::Busy, 0.0, 1.0}}};
    CHECK_THROWS_AS(accumulate(short_log, 0.0, 2.0, kPon, kPoff), LedgerError);

    const std::vector<PhaseLog> ok{{{PowerPhase::Busy, 0.0, 1.0}}};
    const auto empty = accumulate(ok, 1.0, 1.0, kPon, kPoff);
    const std::uint64_t one[] = {1};
    const double l[] = {1.0};
    CHECK_THROWS(efficiency(empty, one, l));
}

TEST_CASE("window clipping") {
    const std::vector<PhaseLog> logs{{{PowerPhase::Busy, 0.0, 1.0},
                                      {PowerPhase::Linger, 1.0, 1.5},
                                      {PowerPhase::LowPower, 1.5, 4.0},
                                      {PowerPhase::Waking, 4.0, 4.5},
                                      {PowerPhase::Busy, 4.5, 6.0}}};
    const auto led = accumulate(logs, 0.75, 5.0, kPon, kPoff);
    CHECK(led.servers[0].busy == doctest::Approx(0.25 + 0.5));
    CHECK(led.servers[0].linger == doctest::Approx(0.5));
    CHECK(led.servers[0].low == doctest::Approx(2.5));
    CHECK(led.servers[0].wake == doctest::Approx(0.5));
    CHECK(led.servers[0].total() == doctest::Approx(led.horizon()));
}

TEST_CASE("time partition on simulated traces") {
    for (Policy p : {Policy::Fcfs, Policy::PreemptivePriority}) {
        auto cfg = default_two_class_config();
        cfg.policy = p;
        cfg.classes[0].r = 6;
        cfg.power.d_l = 1.0;
        cfg.sim.horizon_jobs = 20'000;
        const auto v = validate_or_throw(cfg);
        const auto tr = run(v);
        const auto led = accumulate(tr, v);
        for (const auto& s : led.servers) CHECK(s.total() == doctest::Approx(led.horizon()).epsilon(1e-9));
        CHECK(led.t_active + led.t_low == doctest::Approx(v.n() * led.horizon()).epsilon(1e-9));
        CHECK(led.energy_j == doctest::Approx(v.p_on() * led.t_active + v.p_off() * led.t_low).epsilon(1e-12));
    }
}

TEST_CASE("equal phase powers make energy independent of the phase split") {
    auto cfg = default_two_class_config();
    cfg.power.c0 = 10.0;
    cfg.power.p_a = 5.0;
    cfg.power.c_l = 7.0;
    cfg.power.p_l = 8.0;
    cfg.sim.horizon_jobs = 10'000;
    const auto v = validate_or_throw(cfg);
    REQUIRE(v.p_on() == v.p_off());
    const auto tr = run(v);
    const auto led = accumulate(tr, v);
    const double bits = 1000.0 * static_cast<double>(tr.completed[0] + tr.completed[1]);
    CHECK(efficiency(led, tr.completed, v) == doctest::Approx(bits / (15.0 * v.n() * led.horizon())).epsilon(1e-9));
}

TEST_CASE("efficiency ignores server and class labels") {
    const std::vector<PhaseLog> logs{{{PowerPhase::Busy, 0.0, 2.0}, {PowerPhase::LowPower, 2.0, 3.0}},
                                     {{PowerPhase::Linger, 0.0, 1.0}, {PowerPhase::Busy, 1.0, 3.0}},
                                     {{PowerPhase::LowPower, 0.0, 3.0}}};
    std::vector<PhaseLog> swapped{logs[2], logs[0], logs[1]};
    const auto a = accumulate(logs, 0.0, 3.0, kPon, kPoff);
    const auto b = accumulate(swapped, 0.0, 3.0, kPon, kPoff);
    const std::uint64_t n1[] = {3, 5};
    const std::uint64_t n2[] = {5, 3};
    const double l1[] = {1.0, 2.0};
    const double l2[] = {2.0, 1.0};
    CHECK(efficiency(a, n1, l1) == doctest::Approx(efficiency(b, n2, l2)).epsilon(1e-14));
}

TEST_CASE("single-server efficiency matches l over P_on times mean service") {
    SystemConfig cfg;
    cfg.n = 1;
    cfg.mu = 1.0;
    cfg.classes = {DataClass{.id = 1, .k = 1, .l = 1.0, .lambda = 0.5}};
    cfg.power.d_l = 0.0;
    cfg.power.w_l = 0.0;
    cfg.power.c_l = 0.0;
    cfg.power.p_l = 0.0;
    cfg.sim.horizon_jobs = 1'000'000;
    const auto v = validate_or_throw(cfg);
    const auto tr = run(v);
    const double got = efficiency(accumulate(tr, v), tr.completed, v);
    CHECK(got == doctest::Approx(mm1_energy_efficiency(1.0, v.p_on(), 1.0)).epsilon(0.02));
}
