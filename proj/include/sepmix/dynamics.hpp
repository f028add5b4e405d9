#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "sepmix/environment.hpp"
#include "sepmix/events.hpp"
#include "sepmix/state.hpp"

namespace sepmix {

// Edge {x, x+1} is stored as x. Set i is blocked on [breakpoints[i], breakpoints[i+1]);
// nothing is blocked before the first or after the last breakpoint.
class CensoringScheme {
public:
    CensoringScheme() = default;
    CensoringScheme(std::vector<double> breakpoints, std::vector<std::vector<int>> blocked);

    bool empty() const { return sets_.empty(); }
    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<std::vector<int>>& sets() const { return sets_; }
    // index of the interval containing t, -1 outside
    int interval_at(double t) const;
    const std::vector<int>& blocked_at(double t) const;
    bool is_blocked(int edge, double t) const;
    double end_time() const { return bp_.empty() ? 0.0 : bp_.back(); }

private:
    std::vector<double> bp_;
    std::vector<std::vector<int>> sets_;
};

using DisplacementMap = std::function<Configuration(const Configuration&)>;

struct DisplacementSchedule {
    std::vector<double> times;
    std::vector<DisplacementMap> maps;
    bool empty() const { return times.empty(); }
};

struct Move {
    int from = 0;  // 0 when the copy did not move
    int to = 0;
};

// Copies of the exclusion process driven by one ring stream (the grand coupling).
class ExclusionFamily {
public:
    ExclusionFamily(const Environment& env, const EventSource& src, std::vector<Configuration> copies,
                    const CensoringScheme* scheme = nullptr, const DisplacementSchedule* displacements = nullptr);

    double time() const { return now_; }
    long long rings() const { return rings_; }
    const std::vector<Configuration>& copies() const { return copies_; }
    const std::vector<Move>& last_moves() const { return moves_; }
    // sites where copies 0 and 1 differ (0 when there is a single copy)
    int pair_diff() const { return diff_; }

    // Processes every ring with time <= horizon. `after` is called after each ring
    // and may return true to stop; returns true when stopped early.
    template <class F>
    bool advance(double horizon, F&& after);
    void advance(double horizon) {
        advance(horizon, [](const RingEvent&) { return false; });
    }

private:
    void apply(const RingEvent& ev);
    void displace(std::size_t j);
    void recount_diff();

    const Environment* env_;
    const CensoringScheme* scheme_;
    const DisplacementSchedule* disp_;
    RingScheduler sched_;
    std::vector<Configuration> copies_;
    std::vector<Move> moves_;
    double now_ = 0.0;
    long long rings_ = 0;
    std::size_t next_disp_ = 0;
    int diff_ = 0;
};

template <class F>
bool ExclusionFamily::advance(double horizon, F&& after) {
    for (;;) {
        double t = sched_.peek_time();
        if (disp_ && next_disp_ < disp_->times.size() && disp_->times[next_disp_] <= horizon &&
            disp_->times[next_disp_] <= t) {
            displace(next_disp_++);
            continue;
        }
        if (t > horizon) break;
        RingEvent ev = sched_.pop();
        apply(ev);
        if (after(ev)) return true;
    }
    now_ = std::max(now_, horizon);
    return false;
}

Configuration evolve(const Configuration& xi0, const Environment& env, const EventSource& src, double horizon,
                     const CensoringScheme* scheme = nullptr, const DisplacementSchedule* displacements = nullptr);

// Snapshots at each grid time (grid must be non-decreasing).
std::vector<Configuration> evolve_sampled(const Configuration& xi0, const Environment& env, const EventSource& src,
                                          const std::vector<double>& grid, const CensoringScheme* scheme = nullptr,
                                          const DisplacementSchedule* displacements = nullptr);

std::vector<Configuration> evolve_coupled(std::vector<Configuration> xis, const Environment& env,
                                          const EventSource& src, double horizon,
                                          const CensoringScheme* scheme = nullptr);

struct HitResult {
    bool reached;
    double time;  // hitting time, or the cap on timeout
    long long rings;
};

HitResult coupling_time(const Environment& env, int k, const EventSource& src, double cap);
HitResult hit_time_max(const Environment& env, int k, const EventSource& src, double cap);

struct SweepPlan {
    CensoringScheme scheme;
    DisplacementSchedule displacements;
    double horizon;  // t0 for k <= q, t1 for k > q
};

SweepPlan build_sweep_scheme(int n, int k, int q, double T);

// Boundary-driven process on the window [x2, y2].
struct FlowState {
    int x2 = 0;
    int y2 = 0;
    std::vector<std::uint8_t> occ;  // occ[i] is site x2 + i
    long long absorbed = 0;

    static FlowState empty(int x2, int y2);
    int count() const;
};

// Optional observer sees every ring the window reacts to and whether the window changed.
using FlowObserver = std::function<void(const RingEvent&, bool)>;

FlowState flow_run(const Environment& env, const FlowState& initial, const EventSource& src, double horizon,
                   const FlowObserver* observer = nullptr);

// Runs the full-segment process from xi_min together with the boundary-driven
// process from `initial` on one stream, checking at each grid time that the
// flow process dominates the tail counts of the full process.
struct FlowDominationReport {
    std::vector<double> times;
    std::vector<int> violations_at;  // per grid time, number of x violating the inequality
    std::vector<long long> absorbed;
    std::vector<int> tail_counts;  // J at y2 for the full process
    int total_violations = 0;
};

FlowDominationReport flow_domination_run(const Environment& env, int k, const FlowState& initial,
                                         const EventSource& src, const std::vector<double>& grid);

struct FlowStationary {
    double flow;
    std::vector<double> mu;  // stationary law indexed by window mask (bit i is site x2+i)
};

FlowStationary flow_stationary_law(const Environment& env, int x2, int y2);
double flow_stationary_exact(const Environment& env, int x2, int y2);

// Flow bound 16 e^2 (y2-x2)(y2-x2+2) exp(-(V(y2)-V(x2))/2)
double flow_upper_bound(const PotentialProfile& profile, int x2, int y2);

}  // namespace sepmix
