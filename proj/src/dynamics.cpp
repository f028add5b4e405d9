#include "sepmix/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "sepmix/errors.hpp"

namespace sepmix {

CensoringScheme::CensoringScheme(std::vector<double> breakpoints, std::vector<std::vector<int>> blocked)
    : bp_(std::move(breakpoints)), sets_(std::move(blocked)) {
    if (!sets_.empty() && bp_.size() != sets_.size() + 1)
        throw Error(ErrorKind::InvalidArgument, "need one more breakpoint than blocked sets");
    for (std::size_t i = 1; i < bp_.size(); ++i)
        if (!(bp_[i] > bp_[i - 1])) throw Error(ErrorKind::InvalidArgument, "breakpoints must increase");
    for (auto& s : sets_) std::sort(s.begin(), s.end());
}

int CensoringScheme::interval_at(double t) const {
    if (sets_.empty() || t < bp_.front() || t >= bp_.back()) return -1;
    auto it = std::upper_bound(bp_.begin(), bp_.end(), t);
    return static_cast<int>(it - bp_.begin()) - 1;
}

const std::vector<int>& CensoringScheme::blocked_at(double t) const {
    static const std::vector<int> none;
    int i = interval_at(t);
    return i < 0 ? none : sets_[static_cast<std::size_t>(i)];
}

bool CensoringScheme::is_blocked(int edge, double t) const {
    const auto& s = blocked_at(t);
    return std::binary_search(s.begin(), s.end(), edge);
}

ExclusionFamily::ExclusionFamily(const Environment& env, const EventSource& src, std::vector<Configuration> copies,
                                 const CensoringScheme* scheme, const DisplacementSchedule* displacements)
    : env_(&env),
      scheme_(scheme && !scheme->empty() ? scheme : nullptr),
      disp_(displacements && !displacements->empty() ? displacements : nullptr),
      sched_(src, env.n),
      copies_(std::move(copies)),
      moves_(copies_.size()) {
    for (const auto& c : copies_) {
        if (c.n() != env.n) throw Error(ErrorKind::ShapeMismatch, "configuration length differs from environment");
        if (c.k() != copies_.front().k()) throw Error(ErrorKind::ShapeMismatch, "coupled copies differ in k");
        for (int x : c.positions()) sched_.retain(x, 0.0);
    }
    recount_diff();
}

void ExclusionFamily::recount_diff() {
    diff_ = 0;
    if (copies_.size() < 2) return;
    for (int x = 1; x <= env_->n; ++x) diff_ += copies_[0].occupied(x) != copies_[1].occupied(x);
}

void ExclusionFamily::apply(const RingEvent& ev) {
    ++rings_;
    now_ = ev.time;
    const int x = ev.site, n = env_->n;
    const bool right = ev.mark <= env_->at(x);
    const int target = right ? x + 1 : x - 1;
    const int edge = right ? x : x - 1;
    bool edge_ok = target >= 1 && target <= n && !(scheme_ && scheme_->is_blocked(edge, ev.time));
    const bool track = copies_.size() >= 2;
    int before = 0;
    if (track && edge_ok)
        before = (copies_[0].occupied(x) != copies_[1].occupied(x)) +
                 (copies_[0].occupied(target) != copies_[1].occupied(target));
    for (std::size_t c = 0; c < copies_.size(); ++c) {
        auto& xi = copies_[c];
        moves_[c] = Move{};
        if (!edge_ok || !xi.occupied(x) || xi.occupied(target)) continue;
        xi.jump(x, target);
        sched_.release(x);
        sched_.retain(target, ev.time);
        moves_[c] = Move{x, target};
    }
    if (track && edge_ok)
        diff_ += (copies_[0].occupied(x) != copies_[1].occupied(x)) +
                 (copies_[0].occupied(target) != copies_[1].occupied(target)) - before;
}

void ExclusionFamily::displace(std::size_t j) {
    const double s = disp_->times[j];
    now_ = std::max(now_, s);
    for (auto& xi : copies_) {
        Configuration next = disp_->maps[j](xi);
        if (!leq(next, xi)) throw Error(ErrorKind::PropertyViolation, "displacement map must move particles left");
        for (int x : xi.positions()) sched_.release(x);
        for (int x : next.positions()) sched_.retain(x, s);
        xi = std::move(next);
    }
    for (auto& m : moves_) m = Move{};
    recount_diff();
}

Configuration evolve(const Configuration& xi0, const Environment& env, const EventSource& src, double horizon,
                     const CensoringScheme* scheme, const DisplacementSchedule* displacements) {
    if (horizon < 0) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 0");
    ExclusionFamily fam(env, src, {xi0}, scheme, displacements);
    fam.advance(horizon);
    return fam.copies().front();
}

std::vector<Configuration> evolve_sampled(const Configuration& xi0, const Environment& env, const EventSource& src,
                                          const std::vector<double>& grid, const CensoringScheme* scheme,
                                          const DisplacementSchedule* displacements) {
    ExclusionFamily fam(env, src, {xi0}, scheme, displacements);
    std::vector<Configuration> out;
    out.reserve(grid.size());
    for (double t : grid) {
        fam.advance(t);
        out.push_back(fam.copies().front());
    }
    return out;
}

std::vector<Configuration> evolve_coupled(std::vector<Configuration> xis, const Environment& env,
                                          const EventSource& src, double horizon, const CensoringScheme* scheme) {
    ExclusionFamily fam(env, src, std::move(xis), scheme);
    fam.advance(horizon);
    return fam.copies();
}

HitResult coupling_time(const Environment& env, int k, const EventSource& src, double cap) {
    auto [lo, hi] = extremal(env.n, k);
    ExclusionFamily fam(env, src, {lo, hi});
    if (fam.pair_diff() == 0) return {true, 0.0, 0};
    bool hit = fam.advance(cap, [&](const RingEvent&) { return fam.pair_diff() == 0; });
    return {hit, hit ? fam.time() : cap, fam.rings()};
}

HitResult hit_time_max(const Environment& env, int k, const EventSource& src, double cap) {
    auto [lo, hi] = extremal(env.n, k);
    const int edge = env.n - k;  // crossing from edge to edge+1 enters the block of xi_max
    ExclusionFamily fam(env, src, {lo});
    int inside = tail_count(lo, edge);
    if (inside == k) return {true, 0.0, 0};
    bool hit = fam.advance(cap, [&](const RingEvent&) {
        const Move& m = fam.last_moves()[0];
        if (m.from == edge && m.to == edge + 1) ++inside;
        if (m.from == edge + 1 && m.to == edge) --inside;
        return inside == k;
    });
    return {hit, hit ? fam.time() : cap, fam.rings()};
}

SweepPlan build_sweep_scheme(int n, int k, int q, double T) {
    if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
    if (4 * q >= n) throw Error(ErrorKind::WindowTooWide, "sweep needs 4q < n");
    if (!(T > 0)) throw Error(ErrorKind::InvalidArgument, "stage length must be positive");
    if (k < 1 || k > n - 1) throw Error(ErrorKind::BadK, "need 1 <= k <= n-1");
    auto keep = [n](std::vector<int> edges) {
        std::vector<int> out;
        for (int e : edges)
            if (e >= 1 && e <= n - 1) out.push_back(e);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    std::vector<double> bp;
    std::vector<std::vector<int>> sets;
    SweepPlan plan;
    if (k <= q) {
        const int stages = (n + 2 * q - 1) / (2 * q) - 1;
        for (int i = 0; i + 1 < stages; ++i) sets.push_back(keep({2 * i * q, 2 * (i + 2) * q}));
        sets.push_back(keep({n - 4 * q}));
        for (int i = 0; i <= stages; ++i) bp.push_back(i * T);
        plan.horizon = stages * T;
    } else {
        const int r = (n - k + q + 2 * q - 1) / (2 * q) - 1;
        if (r < 1) throw Error(ErrorKind::BadK, "sweep with k > q needs n - k > q");
        for (int j = 0; j <= k - q; ++j) {
            for (int i = 0; i + 2 <= r; ++i) {
                const int a = k - q - j + 2 * q * i;
                sets.push_back(keep({a, a + 4 * q, n - j}));
            }
            sets.push_back(keep({n - 4 * q - j, n - j}));
        }
        const int stages = r * (k - q + 1);
        for (int i = 0; i <= stages; ++i) bp.push_back(i * T);
        plan.horizon = stages * T;
        for (int j = 1; j <= k - q; ++j) {
            plan.displacements.times.push_back(static_cast<double>(r) * j * T);
            const int count = k - j;
            plan.displacements.maps.push_back([count](const Configuration& xi) { return pack_leftmost(xi, count); });
        }
    }
    plan.scheme = CensoringScheme(std::move(bp), std::move(sets));
    return plan;
}

}  // namespace sepmix
