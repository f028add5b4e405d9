#include "sepmix/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepmix/errors.hpp"
#include "sepmix/rng.hpp"

namespace sepmix {

Environment sample_env(const LawSpec& law, int n, std::uint64_t seed) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "environment needs n >= 2");
    Environment env;
    env.n = n;
    env.alpha = law.alpha();
    env.law = law;
    env.seed = seed;
    env.omega.resize(static_cast<std::size_t>(n));
    for (int x = 1; x <= n; ++x)
        env.omega[static_cast<std::size_t>(x - 1)] =
            law.sample(hash_uniform(seed, Stream::EnvSite, static_cast<std::uint64_t>(x)));
    return env;
}

Environment make_env(std::vector<double> omega, std::optional<double> alpha) {
    if (omega.size() < 2) throw Error(ErrorKind::InvalidArgument, "environment needs n >= 2");
    double lo = 0.5;
    for (double w : omega) {
        if (!(w > 0.0 && w < 1.0)) throw Error(ErrorKind::InvalidArgument, "omega values must lie in (0,1)");
        lo = std::min(lo, std::min(w, 1.0 - w));
    }
    Environment env;
    env.n = static_cast<int>(omega.size());
    env.alpha = alpha.value_or(lo);
    if (env.alpha > lo + 1e-15) throw Error(ErrorKind::InvalidArgument, "omega outside [alpha, 1-alpha]");
    env.omega = std::move(omega);
    return env;
}

PotentialProfile potential(const Environment& env) {
    PotentialProfile p;
    const auto n = static_cast<std::size_t>(env.n);
    p.v.assign(n, 0.0);
    p.v_bar.assign(n, 0.0);
    p.rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.rho[i] = (1.0 - env.omega[i]) / env.omega[i];
    for (std::size_t i = 1; i < n; ++i) {
        p.v[i] = p.v[i - 1] + std::log((1.0 - env.omega[i]) / env.omega[i - 1]);
        p.v_bar[i] = p.v_bar[i - 1] + std::log(p.rho[i]);
    }
    return p;
}

Trap deepest_trap(const PotentialProfile& profile, SiteRange range) {
    if (range.lo < 1 || range.hi > profile.n() || range.lo > range.hi)
        throw Error(ErrorKind::EmptyRange, "deepest_trap range is empty or out of bounds");
    Trap best{range.lo, range.lo, 0.0};
    int argmin = range.lo;
    double vmin = profile.V(range.lo);
    for (int y = range.lo; y <= range.hi; ++y) {
        double vy = profile.V(y);
        if (vy < vmin) {
            vmin = vy;
            argmin = y;
        }
        double d = vy - vmin;
        if (d > best.depth) best = Trap{argmin, y, d};
    }
    return best;
}

Trap deepest_trap(const PotentialProfile& profile) { return deepest_trap(profile, SiteRange{1, profile.n()}); }

double constrained_max_gain(const PotentialProfile& profile, int q) {
    const int n = profile.n();
    if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
    if (q >= n) throw Error(ErrorKind::EmptyRange, "no pair with y - x >= q");
    double best = -std::numeric_limits<double>::infinity();
    double prefix_min = std::numeric_limits<double>::infinity();
    for (int y = q + 1; y <= n; ++y) {
        prefix_min = std::min(prefix_min, profile.V(y - q));
        best = std::max(best, profile.V(y) - prefix_min);
    }
    return best;
}

bool check_event_A(const PotentialProfile& profile, int q) {
    return constrained_max_gain(profile, q) <= -3.0 * std::log(static_cast<double>(profile.n()));
}

bool check_event_A(const Environment& env, int q) { return check_event_A(potential(env), q); }

HalfFill half_fill_census(const PotentialProfile& profile, int x2, int y2) {
    if (x2 < 1 || y2 > profile.n() || x2 > y2) throw Error(ErrorKind::EmptyRange, "bad census window");
    double mid = 0.5 * (profile.V(y2) + profile.V(x2));
    HalfFill h{{}, 0};
    for (int x = x2; x <= y2; ++x)
        if (profile.V(x) <= mid) h.sites.push_back(x);
    h.k_prime = static_cast<int>(h.sites.size());
    return h;
}

namespace {

double quantile_of(std::vector<double> v, double p) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    auto i = static_cast<std::size_t>(std::floor(pos));
    double f = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + f * (v[i + 1] - v[i]);
}

}  // namespace

TrapStatsTable trap_depth_window_stats(const LawSpec& law, int n, const std::vector<std::uint64_t>& seeds,
                                       double eps) {
    TrapStatsTable t{};
    t.n = n;
    t.eps = eps;
    t.lambda = lambda_root(law);
    if (!std::isfinite(t.lambda)) throw Error(ErrorKind::NotTrapped, "lambda is infinite");
    t.q = q_n(law, n);
    const double ln = std::log(static_cast<double>(n));
    const double lnln = std::log(ln);
    std::vector<double> centered;
    int in_w = 0, in_sym = 0, short_t = 0, ev_a = 0;
    for (auto s : seeds) {
        auto env = sample_env(law, n, s);
        auto prof = potential(env);
        auto trap = deepest_trap(prof);
        TrapStatsRow r{};
        r.seed = s;
        r.dv_max = trap.depth;
        r.centered = trap.depth - ln / t.lambda;
        r.trap_length = trap.y - trap.x;
        // below n = 16 lnln n is not positive and the windows are degenerate
        r.in_window = lnln > 0 && r.centered >= -(1.0 + eps) / t.lambda * lnln && r.centered <= eps / t.lambda * lnln;
        r.in_sym_window = lnln > 0 && std::abs(r.centered) <= 2.0 / t.lambda * lnln;
        r.short_trap = r.trap_length <= t.q;
        r.event_A = t.q < n && check_event_A(prof, static_cast<int>(t.q));
        in_w += r.in_window;
        in_sym += r.in_sym_window;
        short_t += r.short_trap;
        ev_a += r.event_A;
        centered.push_back(r.centered);
        t.rows.push_back(r);
    }
    const double m = seeds.empty() ? 1.0 : static_cast<double>(seeds.size());
    t.median_centered = quantile_of(centered, 0.5);
    t.q10_centered = quantile_of(centered, 0.1);
    t.q90_centered = quantile_of(centered, 0.9);
    t.frac_in_window = in_w / m;
    t.frac_in_sym_window = in_sym / m;
    t.frac_short_trap = short_t / m;
    t.frac_event_A = ev_a / m;
    return t;
}

}  // namespace sepmix
