#include "sepmix/events.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sepmix/rng.hpp"

namespace sepmix {

namespace {

constexpr int kMaxPerBlock = 24;

int poisson_one(double u) {
    // inversion for Poisson(1)
    double p = std::exp(-1.0), c = p;
    int i = 0;
    while (u > c && i < kMaxPerBlock) {
        ++i;
        p /= i;
        c += p;
    }
    return i;
}

}  // namespace

int EventSource::block_rings(int site, std::int64_t b, double* times, double* marks, int cap) const {
    const auto s = static_cast<std::uint64_t>(site);
    const auto ub = static_cast<std::uint64_t>(b);
    int c = std::min(cap, poisson_one(hash_uniform(seed_, Stream::ClockCount, s, ub)));
    for (int j = 0; j < c; ++j)
        times[j] = static_cast<double>(b) + hash_uniform(seed_, Stream::ClockTime, s, ub, static_cast<std::uint64_t>(j));
    std::sort(times, times + c);
    for (int j = 0; j < c; ++j) marks[j] = hash_uniform(seed_, Stream::ClockMark, s, ub, static_cast<std::uint64_t>(j));
    return c;
}

RingEvent EventSource::next_ring_after(int site, double t) const {
    std::array<double, kMaxPerBlock> times{}, marks{};
    auto b = static_cast<std::int64_t>(std::floor(std::max(t, 0.0)));
    if (t < 0.0) b = 0;
    for (;; ++b) {
        int c = block_rings(site, b, times.data(), marks.data(), kMaxPerBlock);
        for (int j = 0; j < c; ++j)
            if (times[static_cast<std::size_t>(j)] > t)
                return RingEvent{times[static_cast<std::size_t>(j)], site, marks[static_cast<std::size_t>(j)]};
    }
}

RingScheduler::RingScheduler(const EventSource& src, int max_site)
    : src_(&src), ref_(static_cast<std::size_t>(max_site + 2), 0), scheduled_(static_cast<std::size_t>(max_site + 2), 0) {}

void RingScheduler::retain(int site, double now) {
    auto s = static_cast<std::size_t>(site);
    if (ref_[s]++ == 0 && !scheduled_[s]) {
        auto r = src_->next_ring_after(site, now);
        heap_.push(Entry{r.time, r.mark, site});
        scheduled_[s] = 1;
    }
}

void RingScheduler::release(int site) { --ref_[static_cast<std::size_t>(site)]; }

void RingScheduler::drop_stale() {
    while (!heap_.empty()) {
        auto s = static_cast<std::size_t>(heap_.top().site);
        if (ref_[s] > 0) return;
        scheduled_[s] = 0;
        heap_.pop();
    }
}

double RingScheduler::peek_time() {
    drop_stale();
    return heap_.empty() ? std::numeric_limits<double>::infinity() : heap_.top().time;
}

RingEvent RingScheduler::pop() {
    drop_stale();
    Entry e = heap_.top();
    heap_.pop();
    auto r = src_->next_ring_after(e.site, e.time);
    heap_.push(Entry{r.time, r.mark, e.site});
    return RingEvent{e.time, e.site, e.mark};
}

}  // namespace sepmix
