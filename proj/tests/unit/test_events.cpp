#include <doctest.h>

#include <cmath>

#include "sepmix/events.hpp"

using namespace sepmix;

TEST_CASE("per-site streams are rate-one Poisson with uniform marks") {
    EventSource src(42);
    double t = 0, marks = 0;
    int count = 0;
    const double horizon = 20000;
    for (;;) {
        auto ev = src.next_ring_after(3, t);
        if (ev.time > horizon) break;
        CHECK(ev.time > t);
        t = ev.time;
        marks += ev.mark;
        ++count;
    }
    CHECK(std::abs(count - horizon) < 5 * std::sqrt(horizon));
    CHECK(std::abs(marks / count - 0.5) < 0.01);
}

TEST_CASE("scheduler merges site streams in time order") {
    EventSource src(7);
    RingScheduler all(src, 10), two(src, 10);
    for (int x = 1; x <= 10; ++x) all.retain(x, 0.0);
    two.retain(4, 0.0);
    two.retain(9, 0.0);
    double last = 0;
    std::vector<RingEvent> sub;
    for (int i = 0; i < 5000; ++i) {
        auto ev = all.pop();
        CHECK(ev.time >= last);
        last = ev.time;
        if (ev.site == 4 || ev.site == 9) sub.push_back(ev);
    }
    // the restricted scheduler sees exactly the same rings for its sites
    for (const auto& ev : sub) {
        auto e2 = two.pop();
        CHECK(e2.time == ev.time);
        CHECK(e2.site == ev.site);
        CHECK(e2.mark == ev.mark);
    }
}

TEST_CASE("release and re-retain keep the canonical stream") {
    EventSource src(11);
    RingScheduler s(src, 3);
    s.retain(2, 0.0);
    auto a = s.pop();
    s.release(2);
    CHECK(std::isinf(s.peek_time()));
    s.retain(2, a.time);
    auto b = s.pop();
    CHECK(b.time == src.next_ring_after(2, a.time).time);
}

TEST_CASE("merged stream over n sites has rate n and uniform labels") {
    EventSource src(99);
    const int n = 8;
    RingScheduler s(src, n);
    for (int x = 1; x <= n; ++x) s.retain(x, 0.0);
    std::vector<int> hits(n + 1, 0);
    int count = 0;
    while (s.peek_time() <= 5000.0) {
        hits[static_cast<std::size_t>(s.pop().site)]++;
        ++count;
    }
    CHECK(std::abs(count - 5000.0 * n) < 5 * std::sqrt(5000.0 * n));
    for (int x = 1; x <= n; ++x) CHECK(std::abs(hits[static_cast<std::size_t>(x)] - 5000.0) < 5 * std::sqrt(5000.0));
    // replay
    RingScheduler a(src, n), b(src, n);
    for (int x = 1; x <= n; ++x) {
        a.retain(x, 0.0);
        b.retain(x, 0.0);
    }
    for (int i = 0; i < 1000; ++i) {
        auto e1 = a.pop(), e2 = b.pop();
        CHECK(e1.time == e2.time);
        CHECK(e1.site == e2.site);
        CHECK(e1.mark == e2.mark);
    }
}
