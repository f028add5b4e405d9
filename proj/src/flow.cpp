#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "sepmix/dynamics.hpp"
#include "sepmix/errors.hpp"

namespace sepmix {

FlowState FlowState::empty(int x2, int y2) {
    FlowState s;
    s.x2 = x2;
    s.y2 = y2;
    s.occ.assign(static_cast<std::size_t>(y2 - x2 + 1), 0);
    return s;
}

int FlowState::count() const {
    int c = 0;
    for (auto o : occ) c += o;
    return c;
}

namespace {

void check_window(const Environment& env, int x2, int y2) {
    if (!(x2 >= 2 && x2 <= y2 && y2 <= env.n - 1))
        throw Error(ErrorKind::InvalidArgument, "flow window needs 2 <= x2 <= y2 <= n-1");
}

// Boundary-driven window sharing a scheduler with other processes.
// Injection at x2 is driven by the ring at x2-1 with mark <= omega_{x2-1}, the same
// ring that would push a particle from x2-1 to x2 in the full process.
struct FlowMachine {
    const Environment& env;
    FlowState st;
    RingScheduler& sched;

    bool occ(int x) const { return st.occ[static_cast<std::size_t>(x - st.x2)] != 0; }
    void set(int x, bool v) { st.occ[static_cast<std::size_t>(x - st.x2)] = v ? 1 : 0; }

    void init(double now) {
        for (int x = st.x2; x <= st.y2; ++x)
            if (occ(x)) sched.retain(x, now);
        if (!occ(st.x2)) sched.retain(st.x2 - 1, now);
    }

    void vacate(int x, double now) {
        set(x, false);
        sched.release(x);
        if (x == st.x2) sched.retain(st.x2 - 1, now);
    }

    void fill(int x, double now) {
        set(x, true);
        sched.retain(x, now);
        if (x == st.x2) sched.release(st.x2 - 1);
    }

    void apply(const RingEvent& ev) {
        const int s = ev.site;
        const double t = ev.time;
        if (s == st.x2 - 1) {
            if (!occ(st.x2) && ev.mark <= env.at(s)) fill(st.x2, t);
            return;
        }
        if (s < st.x2 || s > st.y2 || !occ(s)) return;
        if (ev.mark <= env.at(s)) {
            if (s == st.y2) {
                vacate(s, t);
                ++st.absorbed;
            } else if (!occ(s + 1)) {
                vacate(s, t);
                fill(s + 1, t);
            }
        } else if (s > st.x2 && !occ(s - 1)) {
            vacate(s, t);
            fill(s - 1, t);
        }
    }
};

}  // namespace

FlowState flow_run(const Environment& env, const FlowState& initial, const EventSource& src, double horizon,
                   const FlowObserver* observer) {
    check_window(env, initial.x2, initial.y2);
    RingScheduler sched(src, env.n);
    FlowMachine fm{env, initial, sched};
    fm.init(0.0);
    while (sched.peek_time() <= horizon) {
        RingEvent ev = sched.pop();
        if (observer) {
            auto occ = fm.st.occ;
            auto absorbed = fm.st.absorbed;
            fm.apply(ev);
            (*observer)(ev, occ != fm.st.occ || absorbed != fm.st.absorbed);
        } else {
            fm.apply(ev);
        }
    }
    return fm.st;
}

FlowDominationReport flow_domination_run(const Environment& env, int k, const FlowState& initial,
                                         const EventSource& src, const std::vector<double>& grid) {
    check_window(env, initial.x2, initial.y2);
    const int n = env.n, x2 = initial.x2, y2 = initial.y2;
    RingScheduler sched(src, n);
    FlowMachine fm{env, initial, sched};
    fm.init(0.0);
    Configuration xi = extremal(n, k).first;
    for (int x : xi.positions()) sched.retain(x, 0.0);

    FlowDominationReport rep;
    for (double tg : grid) {
        while (sched.peek_time() <= tg) {
            RingEvent ev = sched.pop();
            fm.apply(ev);
            const int x = ev.site;
            if (!xi.occupied(x)) continue;
            const bool right = ev.mark <= env.at(x);
            const int to = right ? x + 1 : x - 1;
            if (to < 1 || to > n || xi.occupied(to)) continue;
            xi.jump(x, to);
            sched.release(x);
            sched.retain(to, ev.time);
        }
        int bad = 0;
        long long flow_tail = fm.st.absorbed;
        for (int x = y2 + 1; x >= x2; --x) {
            if (x <= y2) flow_tail += fm.occ(x);
            if (tail_count(xi, x - 1) > flow_tail) ++bad;
        }
        rep.times.push_back(tg);
        rep.violations_at.push_back(bad);
        rep.absorbed.push_back(fm.st.absorbed);
        rep.tail_counts.push_back(tail_count(xi, y2));
        rep.total_violations += bad;
    }
    return rep;
}

FlowStationary flow_stationary_law(const Environment& env, int x2, int y2) {
    check_window(env, x2, y2);
    const int L = y2 - x2 + 1;
    if (L > 14) throw Error(ErrorKind::WindowTooLarge, "exact flow needs a window of at most 14 sites");
    const int S = 1 << L;
    const double a = env.at(x2 - 1), b = env.at(y2);
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> exit(static_cast<std::size_t>(S), 0.0);
    // Q^T entries: column = source state, row = target state
    auto add = [&](int from, int to, double rate) {
        trip.emplace_back(to, from, rate);
        exit[static_cast<std::size_t>(from)] += rate;
    };
    for (int m = 0; m < S; ++m) {
        if (!(m & 1)) add(m, m | 1, a);
        for (int i = 0; i + 1 < L; ++i) {
            const bool p = (m >> i) & 1, q = (m >> (i + 1)) & 1;
            const int z = x2 + i;
            if (p && !q) add(m, m ^ (3 << i), env.at(z));
            if (!p && q) add(m, m ^ (3 << i), 1.0 - env.at(z + 1));
        }
        if ((m >> (L - 1)) & 1) add(m, m & ~(1 << (L - 1)), b);
    }
    for (int m = 0; m < S; ++m) trip.emplace_back(m, m, -exit[static_cast<std::size_t>(m)]);
    // replace the last balance equation by normalization
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(trip.size() + static_cast<std::size_t>(S));
    for (const auto& t : trip)
        if (t.row() != S - 1) kept.push_back(t);
    for (int m = 0; m < S; ++m) kept.emplace_back(S - 1, m, 1.0);
    Eigen::SparseMatrix<double> A(S, S);
    A.setFromTriplets(kept.begin(), kept.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::PropertyViolation, "stationary solve failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs(S - 1) = 1.0;
    Eigen::VectorXd mu = lu.solve(rhs);
    FlowStationary out;
    out.mu.resize(static_cast<std::size_t>(S));
    double occ_right = 0.0;
    for (int m = 0; m < S; ++m) {
        double v = std::max(mu(m), 0.0);
        out.mu[static_cast<std::size_t>(m)] = v;
        if ((m >> (L - 1)) & 1) occ_right += v;
    }
    out.flow = b * occ_right;
    return out;
}

double flow_stationary_exact(const Environment& env, int x2, int y2) { return flow_stationary_law(env, x2, y2).flow; }

double flow_upper_bound(const PotentialProfile& profile, int x2, int y2) {
    const double d = y2 - x2;
    return 16.0 * std::exp(2.0) * d * (d + 2.0) * std::exp(-(profile.V(y2) - profile.V(x2)) / 2.0);
}

}  // namespace sepmix
