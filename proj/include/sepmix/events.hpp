#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace sepmix {

struct RingEvent {
    double time;
    int site;
    double mark;
};

// Independent rate-1 Poisson clocks per site with uniform marks.
// Site x's clock is built block by block on [b, b+1): a Poisson(1) count and
// sorted uniform offsets, all keyed by (seed, x, b). Any ring can be recomputed
// without replaying the others, so copies that only look at a few sites still
// see exactly the same stream as the full superposition.
class EventSource {
public:
    explicit EventSource(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

    // First ring of `site` strictly after time t.
    RingEvent next_ring_after(int site, double t) const;
    // All rings of `site` in block b, sorted by time.
    int block_rings(int site, std::int64_t b, double* times, double* marks, int cap) const;

private:
    std::uint64_t seed_;
};

// Min-heap over the clocks of the sites some process currently cares about.
// Sites are reference counted; a dropped site's stale entry is discarded lazily.
class RingScheduler {
public:
    RingScheduler(const EventSource& src, int max_site);

    void retain(int site, double now);
    void release(int site);
    bool active(int site) const { return ref_[static_cast<std::size_t>(site)] > 0; }

    // Time of the next ring among active sites, +inf if none.
    double peek_time();
    RingEvent pop();

private:
    struct Entry {
        double time;
        double mark;
        int site;
        bool operator>(const Entry& o) const { return time > o.time || (time == o.time && site > o.site); }
    };

    void drop_stale();

    const EventSource* src_;
    std::vector<int> ref_;
    std::vector<char> scheduled_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

}  // namespace sepmix
