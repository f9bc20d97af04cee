#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hetfj/bounds.hpp"

using namespace hetfj;

namespace {

QueueingModel single(int n, int k, double lambda, double rate) { return {n, {ClassLoad{k, lambda, rate, 1}}}; }

QueueingModel two_class_example() {
    return {3, {ClassLoad{1, 0.25, 1.0, 1}, ClassLoad{2, 0.25, 1.0, 2}}};
}

double H(int x, int y, int z) {
    double s = 0.0;
    for (int j = x + 1; j <= y; ++j) s += std::pow(j, -z);
    return s;
}

// Sequential-stage lower bound written directly from its definition, using
// class positions as priority (listed order) for the test models below.
double stage_oracle(const QueueingModel& m, std::size_t i, Policy p) {
    const auto& ci = m.classes[i];
    double total = 0.0;
    for (int s = 1; s <= ci.k; ++s) {
        auto t = [&](const ClassLoad& c) { return c.lambda / ((m.n - s + 1) * c.rate); };
        double unf_t = 0.0, unf_t2 = 0.0, hi_t = 0.0, hi_t2 = 0.0;
        for (std::size_t r = 0; r < m.classes.size(); ++r) {
            const auto& c = m.classes[r];
            if (c.k < s) continue;
            unf_t += t(c);
            unf_t2 += t(c) * t(c) / c.lambda;
            if (c.priority_rank < ci.priority_rank) {
                hi_t += t(c);
                hi_t2 += t(c) * t(c) / c.lambda;
            }
        }
        const double ti = t(ci);
        const double z = 1.0 - hi_t;
        switch (p) {
            case Policy::Fcfs: total += ti / ci.lambda + unf_t2 / (1.0 - unf_t); break;
            case Policy::NonPreemptivePriority: total += ti / ci.lambda + unf_t2 / (z * (z - ti)); break;
            case Policy::PreemptivePriority:
                total += ti / (ci.lambda * z) + (ti * ti / ci.lambda + hi_t2) / (z * (z - ti));
                break;
        }
    }
    return total;
}

QueueingModel scaled(QueueingModel m, double c) {
    for (auto& cl : m.classes) {
        cl.lambda *= c;
        cl.rate *= c;
    }
    return m;
}

}  // namespace

TEST_CASE("stability conditions") {
    auto cfg = default_two_class_config();
    CHECK(stability_fcfs(cfg));
    CHECK(stability_priority(cfg));

    SystemConfig one;
    one.n = 10;
    one.mu = 1.0;
    one.classes = {DataClass{.id = 1, .k = 3, .l = 1.0, .lambda = 9.99}};
    CHECK(stability_fcfs(one));
    CHECK(stability_priority(one));
    one.classes[0].lambda = 10.0;
    CHECK_FALSE(stability_fcfs(one));
    CHECK_FALSE(stability_priority(one));

    SystemConfig mm1;
    mm1.n = 1;
    mm1.mu = 1.0;
    mm1.classes = {DataClass{.id = 1, .k = 1, .l = 1.0, .lambda = 0.5}};
    CHECK(stability_priority(mm1));
}

TEST_CASE("single-server closed forms") {
    CHECK(mm1_latency(0.5, 1.0) == doctest::Approx(2.0));
    CHECK(mm1_latency(0.0, 4.0) == doctest::Approx(0.25));
    CHECK(mm1_latency(0.9, 1.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(mm1_latency(1.0, 1.0), InstabilityError);

    CHECK(mm1_energy_efficiency(1.0, 323.13, 1.0) == doctest::Approx(3.0947).epsilon(1e-4));
    CHECK(mm1_energy_efficiency(1.0, 323.13, 2.0) == doctest::Approx(3.0947 / 2).epsilon(1e-4));
    CHECK(mm1_energy_efficiency(2.0, 323.13, 1.0) == doctest::Approx(2 * 3.0947).epsilon(1e-4));

    const ServiceMoments exp_class[] = {{0.3, 1.0 / 1.2, 1.0 / (1.2 * 1.2)}};
    CHECK(fcfs_mg1_latency(exp_class)[0] == doctest::Approx(mm1_latency(0.3, 1.2)));
    const ServiceMoments idle[] = {{1e-12, 0.7, 0.1}};
    CHECK(fcfs_mg1_latency(idle)[0] == doctest::Approx(0.7));
    const ServiceMoments two[] = {{0.5, 0.5, 0.25}, {0.5, 0.5, 0.25}};
    const auto t = fcfs_mg1_latency(two);
    CHECK(t[0] == doctest::Approx(1.0));
    CHECK(t[1] == doctest::Approx(1.0));
    const ServiceMoments full[] = {{1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(fcfs_mg1_latency(full), InstabilityError);
}

TEST_CASE("upper bounds: worked values") {
    const auto fcfs = ub_fcfs(single(3, 2, 0.5, 1.0));
    CHECK(fcfs[0].valid());
    CHECK(fcfs[0].value == doctest::Approx(0.833333 + 0.452381).epsilon(1e-6));
    CHECK(fcfs[0].value == doctest::Approx(1.285714).epsilon(1e-6));

    CHECK(ub_fcfs(single(1, 1, 0.3, 1.0))[0].value == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
    CHECK(ub_fcfs(single(10, 4, 1e-12, 2.0))[0].value == doctest::Approx(H(6, 10, 1) / 2.0).epsilon(1e-9));

    const auto m = two_class_example();
    CHECK(split_merge_load(m, 0) == doctest::Approx(0.083333).epsilon(1e-5));
    CHECK(split_merge_load(m, 1) == doctest::Approx(0.291667).epsilon(1e-5));
    const auto npq = ub_npq(m);
    CHECK(npq[0].value == doctest::Approx(0.507576).epsilon(1e-6));
    // Exact fractions: S1 = 1/12, S2 = 7/24, numerator 23/72.
    const double wait = (23.0 / 72.0) / (2.0 * (11.0 / 12.0) * (17.0 / 24.0));
    CHECK(npq[1].value == doctest::Approx(5.0 / 6.0 + wait).epsilon(1e-12));
    CHECK(npq[1].value == doctest::Approx(1.079340).epsilon(1e-4));
    const auto pq = ub_pq(m);
    CHECK(pq[0].value == doctest::Approx(0.363636).epsilon(1e-6));
    CHECK(pq[1].value == doctest::Approx((5.0 / 6.0) / (11.0 / 12.0) + wait).epsilon(1e-12));
    CHECK(pq[1].value == doctest::Approx(1.155098).epsilon(1e-4));
}

TEST_CASE("upper bounds: collapse and independence") {
    const auto m = single(7, 3, 0.8, 0.9);
    CHECK(ub_npq(m)[0].value == doctest::Approx(ub_fcfs(m)[0].value).epsilon(1e-12));
    CHECK(ub_pq(m)[0].value == doctest::Approx(ub_fcfs(m)[0].value).epsilon(1e-12));

    auto a = two_class_example();
    auto b = a;
    b.classes[1].lambda = 0.6;
    CHECK(ub_pq(a)[0].value == doctest::Approx(ub_pq(b)[0].value).epsilon(1e-14));

    const auto zero = ub_npq({3, {ClassLoad{1, 1e-12, 1.0, 1}, ClassLoad{2, 1e-12, 1.0, 2}}});
    CHECK(zero[1].value == doctest::Approx(H(1, 3, 1)).epsilon(1e-9));
}

TEST_CASE("upper bounds are marked invalid when the split-merge load reaches 1") {
    // Stable fork-join system whose split-merge load exceeds 1.
    const auto m = single(10, 10, 0.4, 1.0);  // S = 0.4 * H(0,10) = 1.17
    CHECK(ub_fcfs(m)[0].status == BoundStatus::BoundInvalid);
    CHECK(ub_npq(m)[0].status == BoundStatus::BoundInvalid);
    CHECK(ub_pq(m)[0].status == BoundStatus::BoundInvalid);
}

TEST_CASE("naive lower bound") {
    CHECK(naive_lower(single(3, 2, 0.5, 1.0))[0].value == doctest::Approx(1.0 / 2.5 + 1.0 / 1.5).epsilon(1e-12));
    CHECK(naive_lower(single(1, 1, 0.5, 1.0))[0].value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(naive_lower(single(9, 4, 1e-12, 3.0))[0].value == doctest::Approx(H(5, 9, 1) / 3.0).epsilon(1e-9));
    CHECK(naive_lower(single(3, 3, 1.0, 1.0))[0].status == BoundStatus::Unstable);
}

TEST_CASE("lower bounds: worked values and collapse") {
    const auto m = single(3, 2, 0.5, 1.0);
    CHECK(lb_fcfs(m)[0].value == doctest::Approx(1.066667).epsilon(1e-6));
    for (int n : {1, 3, 10})
        for (int k = 1; k <= n; ++k)
            for (double load : {0.1, 0.5, 0.9}) {
                const double rate = 1.3;
                const auto mm = single(n, k, load * (n - k + 1) * rate, rate);
                const double naive = naive_lower(mm)[0].value;
                CHECK(lb_fcfs(mm)[0].value == doctest::Approx(naive).epsilon(1e-12));
                CHECK(lb_npq(mm)[0].value == doctest::Approx(naive).epsilon(1e-12));
                CHECK(lb_pq(mm)[0].value == doctest::Approx(naive).epsilon(1e-12));
            }
}

TEST_CASE("lower bounds agree with the stage oracle") {
    const QueueingModel models[] = {
        two_class_example(),
        {10, {ClassLoad{5, 0.15, 5.0 / 6.0, 1}, ClassLoad{5, 0.5, 5.0 / 6.0, 2}}},
        {10, {ClassLoad{3, 0.2, 0.5, 1}, ClassLoad{1, 0.4, 0.3, 2}, ClassLoad{2, 0.3, 0.7, 3}}},
        {6, {ClassLoad{6, 0.1, 1.0, 1}, ClassLoad{2, 0.5, 2.0, 2}, ClassLoad{4, 0.2, 0.5, 3}}},
    };
    for (const auto& m : models) {
        const auto f = lb_fcfs(m), n = lb_npq(m), p = lb_pq(m);
        for (std::size_t i = 0; i < m.classes.size(); ++i) {
            CAPTURE(i);
            CHECK(f[i].value == doctest::Approx(stage_oracle(m, i, Policy::Fcfs)).epsilon(1e-12));
            CHECK(n[i].value == doctest::Approx(stage_oracle(m, i, Policy::NonPreemptivePriority)).epsilon(1e-12));
            CHECK(p[i].value == doctest::Approx(stage_oracle(m, i, Policy::PreemptivePriority)).epsilon(1e-12));
        }
    }
}

TEST_CASE("stage context bookkeeping") {
    const QueueingModel m{10, {ClassLoad{3, 0.2, 1.0, 1}, ClassLoad{1, 0.2, 1.0, 2}, ClassLoad{2, 0.2, 1.0, 3}}};
    auto s1 = stage_context(m, 2, 1);
    CHECK(s1.finished_before == 0);
    CHECK(s1.higher_unfinished == std::vector<std::size_t>{0, 1});
    auto s2 = stage_context(m, 2, 2);
    CHECK(s2.finished_before == 1);
    CHECK(s2.higher_unfinished == std::vector<std::size_t>{0});
    CHECK(s2.residual == doctest::Approx(1.0 - 0.2 / 9.0));
    auto s3 = stage_context(m, 0, 3);
    CHECK(s3.finished_before == 2);
    CHECK(s3.unfinished == std::vector<std::size_t>{0});

    // Equal k finish together.
    const QueueingModel tie{5, {ClassLoad{2, 0.1, 1.0, 1}, ClassLoad{2, 0.1, 1.0, 2}, ClassLoad{4, 0.1, 1.0, 3}}};
    CHECK(stage_context(tie, 2, 2).finished_before == 0);
    CHECK(stage_context(tie, 2, 3).finished_before == 2);
}

TEST_CASE("lower bound properties") {
    // Highest priority class: preemptive bound sees only its own load.
    const QueueingModel m{10, {ClassLoad{4, 0.3, 0.8, 1}, ClassLoad{6, 0.6, 1.2, 2}}};
    const QueueingModel alone{10, {ClassLoad{4, 0.3, 0.8, 1}}};
    CHECK(lb_pq(m)[0].value == doctest::Approx(lb_fcfs(alone)[0].value).epsilon(1e-12));

    // Splitting identical classes does not change the FCFS bound.
    const QueueingModel merged{8, {ClassLoad{3, 0.9, 1.0, 1}}};
    const QueueingModel split{8, {ClassLoad{3, 0.2, 1.0, 1}, ClassLoad{3, 0.7, 1.0, 2}}};
    CHECK(lb_fcfs(split)[0].value == doctest::Approx(lb_fcfs(merged)[0].value).epsilon(1e-12));
    CHECK(lb_fcfs(split)[1].value == doctest::Approx(lb_fcfs(merged)[0].value).epsilon(1e-12));

    // Lowest priority, everything idle.
    const QueueingModel idle{8, {ClassLoad{3, 1e-12, 1.0, 1}, ClassLoad{5, 1e-12, 2.0, 2}}};
    const double expect = H(3, 8, 1) / 2.0;
    CHECK(lb_npq(idle)[1].value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(lb_pq(idle)[1].value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(lb_fcfs(idle)[1].value == doctest::Approx(expect).epsilon(1e-9));

    // Preemptive service term inflates by 1/Z with busy higher classes.
    const QueueingModel busy{8, {ClassLoad{5, 3.0, 1.0, 1}, ClassLoad{2, 1e-9, 1.0, 2}}};
    double inflated = 0.0;
    for (int s = 1; s <= 2; ++s) {
        const double t1 = 3.0 / (8 - s + 1);
        const double z = 1.0 - t1;
        inflated += 1.0 / ((8 - s + 1) * z) + (t1 * t1 / 3.0) / (z * z);
    }
    CHECK(lb_pq(busy)[1].value == doctest::Approx(inflated).epsilon(1e-6));
}

TEST_CASE("preemptive lower bound numerator variants") {
    const QueueingModel m{10, {ClassLoad{5, 0.15, 5.0 / 6.0, 1}, ClassLoad{5, 0.5, 5.0 / 6.0, 2}}};
    const auto second = lb_pq(m, PqNumerator::SecondMoment);
    const auto first = lb_pq(m, PqNumerator::FirstMoment);
    // The top class has no higher classes, so the variants differ only in the t_i term.
    double expect = 0.0;
    for (int s = 1; s <= 5; ++s) {
        const double c = (10 - s + 1) * 5.0 / 6.0;
        const double ti = 0.15 / c;
        expect += ti / 0.15 + (ti / c) / (1.0 - ti);
    }
    CHECK(first[0].value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(first[1].value != doctest::Approx(second[1].value));
}

TEST_CASE("lower bounds flag invalid stages") {
    const QueueingModel m{4, {ClassLoad{4, 0.9, 1.0, 1}, ClassLoad{4, 0.2, 1.0, 2}}};
    // Stage 4 has rate 1 and the top class alone uses 0.9 of it.
    CHECK(lb_npq(m)[1].status == BoundStatus::BoundInvalid);
    CHECK(lb_pq(m)[1].status == BoundStatus::BoundInvalid);
    CHECK(lb_fcfs(m)[1].status == BoundStatus::BoundInvalid);
}

TEST_CASE("zero-load limits order the bounds") {
    for (int n : {2, 5, 10})
        for (int k = 1; k <= n; ++k) {
            const auto m = single(n, k, 1e-12, 1.0);
            CHECK(ub_fcfs(m)[0].value >= lb_fcfs(m)[0].value - 1e-12);
        }
}

TEST_CASE("upper bound is nondecreasing in each arrival rate") {
    QueueingModel m{10, {ClassLoad{5, 0.15, 5.0 / 6.0, 1}, ClassLoad{3, 0.2, 0.5, 2}}};
    for (std::size_t r = 0; r < 2; ++r) {
        auto prev = ub_fcfs(m);
        auto probe = m;
        for (int step = 0; step < 10; ++step) {
            probe.classes[r].lambda *= 1.1;
            const auto cur = ub_fcfs(probe);
            if (!cur[0].valid()) break;
            for (std::size_t i = 0; i < 2; ++i) CHECK(cur[i].value >= prev[i].value);
            prev = cur;
        }
    }
}

TEST_CASE("bounds scale inversely with the rates") {
    const QueueingModel m{10, {ClassLoad{5, 0.15, 5.0 / 6.0, 1}, ClassLoad{3, 0.5, 0.5, 2}}};
    for (double c : {0.5, 3.0}) {
        const auto s = scaled(m, c);
        for (Policy p : {Policy::Fcfs, Policy::NonPreemptivePriority, Policy::PreemptivePriority}) {
            const auto lo = lower_bound(m, p), lo_s = lower_bound(s, p);
            const auto hi = upper_bound(m, p), hi_s = upper_bound(s, p);
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(lo_s[i].value == doctest::Approx(lo[i].value / c).epsilon(1e-12));
                CHECK(hi_s[i].value == doctest::Approx(hi[i].value / c).epsilon(1e-12));
            }
        }
        const auto nv = naive_lower(m), nv_s = naive_lower(s);
        for (std::size_t i = 0; i < 2; ++i) CHECK(nv_s[i].value == doctest::Approx(nv[i].value / c).epsilon(1e-12));
    }
}

TEST_CASE("bound report for the default configuration") {
    auto cfg = default_two_class_config();
    const auto rep = bound_report(validate_or_throw(cfg));
    CHECK(rep.stable);
    REQUIRE(rep.classes.size() == 2);
    for (const auto& cb : rep.classes) {
        for (Policy p : {Policy::Fcfs, Policy::NonPreemptivePriority, Policy::PreemptivePriority}) {
            REQUIRE(cb[p].lower.valid());
            REQUIRE(cb[p].upper.valid());
            CHECK(cb.naive.value <= cb[p].lower.value + 1e-12);
            CHECK(cb[p].lower.value <= cb[p].upper.value);
        }
    }
    CHECK(rep.notes.size() == 1);  // wake-up latency

    cfg.classes[1].lambda = 5.0;
    cfg.sim.allow_unstable = true;
    const auto bad = bound_report(validate_or_throw(cfg));
    CHECK_FALSE(bad.stable);
    CHECK(bad.classes[0][Policy::Fcfs].upper.status == BoundStatus::Unstable);
    CHECK(bad.classes[0].naive.status == BoundStatus::Unstable);

    SystemConfig mm1;
    mm1.n = 1;
    mm1.mu = 1.0;
    mm1.power.w_l = 0.0;
    mm1.classes = {DataClass{.id = 1, .k = 1, .l = 1.0, .lambda = 0.5}};
    const auto r1 = bound_report(validate_or_throw(mm1));
    CHECK(r1.classes[0][Policy::Fcfs].lower.value == doctest::Approx(2.0));
    CHECK(r1.classes[0][Policy::Fcfs].upper.value == doctest::Approx(2.0));
    CHECK(r1.notes.empty());
}
