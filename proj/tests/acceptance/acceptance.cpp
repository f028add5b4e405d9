// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all of 1..12)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "sepmix/dynamics.hpp"
#include "sepmix/equilibrium.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/format.hpp"
#include "sepmix/law.hpp"
#include "sepmix/rng.hpp"

using namespace sepmix;

namespace {

constexpr std::uint64_t kMaster = 20240611;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- shared instance family for criteria 1, 2, 3, 4, 8

struct Instance {
    double alpha, p;
    int n, k;
    Environment env;
};

std::vector<Instance> instance_family() {
    static const double alphas[] = {0.2, 0.25};
    static const double ps[] = {0.2, 0.3, 0.4};
    std::vector<Instance> out;
    for (std::uint64_t i = 0; i < 200; ++i) {
        std::uint64_t h = hash_key(kMaster, Stream::Instance, i);
        Instance in;
        in.alpha = alphas[h % 2];
        in.p = ps[(h >> 8) % 3];
        in.n = 4 + static_cast<int>((h >> 16) % 9);
        in.k = 1 + static_cast<int>((h >> 24) % static_cast<std::uint64_t>(in.n / 2));
        in.env = sample_env(LawSpec::two_point(in.alpha, in.p), in.n, hash_key(kMaster, Stream::Instance, i, 1));
        out.push_back(std::move(in));
    }
    return out;
}

struct InstanceResult {
    double gap, B, closed, pi_min, db;
    double var_m;
};

const std::vector<Instance>& family() {
    static const auto f = instance_family();
    return f;
}

// gap and path congestion (criterion 1's timed part), plus cheap equilibrium data
const std::vector<InstanceResult>& family_results() {
    static std::vector<InstanceResult> res = [] {
        std::vector<InstanceResult> r;
        for (const auto& in : family()) {
            auto chain = ExactChain::build(in.env, in.k);
            auto pb = canonical_path_bound(chain, in.env);
            auto [mean, var] = EquilibriumTable::build(potential(in.env), in.k).mean_var_m();
            (void)mean;
            r.push_back({spectral_gap(chain), pb.B, pb.closed_form_bound, chain.pi_min(), chain.detailed_balance_residual(),
                         var});
        }
        return r;
    }();
    return res;
}

// t_mix(1/4), t_mix(1/10) per instance
const std::vector<std::pair<double, double>>& family_tmix() {
    static std::vector<std::pair<double, double>> res = [] {
        std::vector<std::pair<double, double>> r;
        for (const auto& in : family()) {
            auto chain = ExactChain::build(in.env, in.k);
            auto tm = t_mix_exact(chain, std::vector<double>{0.25, 0.1});
            r.push_back({tm[0], tm[1]});
        }
        return r;
    }();
    return res;
}

Outcome criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    const auto& r = family_results();
    int bad_gap = 0, bad_closed = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : r) {
        bad_gap += x.gap < 1.0 / x.B;
        bad_closed += x.B > x.closed;
        worst = std::min(worst, x.gap * x.B);
    }
    const double secs = seconds_since(t0);
    bool pass = bad_gap == 0 && bad_closed == 0 && secs < 180;
    return {pass, std::to_string(r.size()) + " instances, gap<1/B: " + std::to_string(bad_gap) +
                      ", B>closed form: " + std::to_string(bad_closed) + ", min gap*B " + fmt("%.4g", worst) + ", " +
                      fmt("%.1f s", secs)};
}

Outcome criterion2() {
    const auto& r = family_results();
    const auto& tms = family_tmix();
    int bad = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& x = r[i];
        for (auto [eps, tm] : {std::pair{0.25, tms[i].first}, std::pair{0.1, tms[i].second}}) {
            const double lo = std::log(1.0 / (2 * eps)) / x.gap;
            const double hi = std::log(1.0 / (eps * x.pi_min)) / x.gap;
            bad += !(tm >= lo && tm <= hi);
        }
    }
    return {bad == 0, std::to_string(2 * r.size()) + " (instance, eps) pairs, violations: " + std::to_string(bad)};
}

Outcome criterion3() {
    const auto& r = family_results();
    int bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.size(); ++i) {
        double ratio = family_tmix()[i].first / (family()[i].n / 16.0);
        worst = std::min(worst, ratio);
        bad += ratio < 1.0;
    }
    return {bad == 0, "violations: " + std::to_string(bad) + ", min t_mix/(n/16) " + fmt("%.3g", worst)};
}

// Plain enumeration oracle with long double sums.
Outcome criterion4() {
    double worst_db = 0;
    for (const auto& x : family_results()) worst_db = std::max(worst_db, x.db);
    double worst_z = 0, worst_marg = 0;
    int checked = 0;
    auto law = LawSpec::two_point(0.25, 0.3);
    for (std::uint64_t i = 0; checked < 40; ++i) {
        std::uint64_t h = hash_key(kMaster, Stream::Instance, i, 4);
        const int n = 4 + static_cast<int>(h % 15);
        const int k = 1 + static_cast<int>((h >> 8) % static_cast<std::uint64_t>(n - 1));
        double binom = 1;
        for (int j = 1; j <= k; ++j) binom = binom * (n - k + j) / j;
        if (binom > 1e5) continue;
        ++checked;
        auto prof = potential(sample_env(law, n, h));
        auto table = EquilibriumTable::build(prof, k);
        long double z = 0;
        std::vector<long double> marg(static_cast<std::size_t>(n), 0.0L);
        std::uint64_t m = (1ULL << k) - 1;
        while (m < (1ULL << n)) {
            long double s = 0;
            for (int x = 1; x <= n; ++x)
                if (m >> (x - 1) & 1) s += prof.V(x);
            long double w = std::exp(-s);
            z += w;
            for (int x = 1; x <= n; ++x)
                if (m >> (x - 1) & 1) marg[static_cast<std::size_t>(x - 1)] += w;
            std::uint64_t c = m & (~m + 1), r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
        const double zd = std::exp(table.log_z());
        worst_z = std::max(worst_z, static_cast<double>(std::fabs((zd - z) / z)));
        auto dp = table.marginals();
        for (int x = 0; x < n; ++x) {
            long double e = marg[static_cast<std::size_t>(x)] / z;
            worst_marg = std::max(worst_marg, static_cast<double>(std::fabs((dp[static_cast<std::size_t>(x)] - e) / e)));
        }
    }
    bool pass = worst_db < 1e-12 && worst_z < 1e-12 && worst_marg < 1e-12;
    return {pass, "max balance residual " + fmt("%.2e", worst_db) + ", Z rel err " + fmt("%.2e", worst_z) +
                      ", marginal rel err " + fmt("%.2e", worst_marg) + " over " + std::to_string(checked) +
                      " enumerated instances"};
}

Outcome criterion5() {
    const int n = 64, k = 16;
    auto law = LawSpec::two_point(0.25, 0.3);
    long long violations = 0, rings = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto env = sample_env(law, n, hash_key(kMaster, Stream::Instance, s, 5));
        auto [lo, hi] = extremal(n, k);
        SplitMix64 rng(hash_key(kMaster, Stream::Sampler, s, 5));
        auto mid = EquilibriumTable::build(potential(env), k).sample(rng);
        std::vector<Configuration> start{lo, pack_leftmost(mid, k / 2), mid, hi};
        ExclusionFamily fam(env, EventSource(hash_key(kMaster, Stream::Replica, s, 5)), start);
        fam.advance(std::numeric_limits<double>::infinity(), [&](const RingEvent&) {
            const auto& c = fam.copies();
            for (std::size_t a = 0; a < c.size(); ++a)
                for (std::size_t b = a + 1; b < c.size(); ++b) violations += !leq(c[a], c[b]);
            return fam.rings() >= 10000;
        });
        rings += fam.rings();
    }
    return {violations == 0, "100 seeds, " + std::to_string(rings) + " rings, 6 ordered pairs per ring, violations: " +
                                 std::to_string(violations)};
}

Outcome criterion6() {
    const int n = 8, q = 1;
    const double T = 5.0;
    int checks = 0, violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 3; ++k) {
        for (std::uint64_t s = 0; s < 4; ++s) {
            auto env = sample_env(LawSpec::two_point(0.25, 0.3), n, hash_key(kMaster, Stream::Instance, s, 6));
            auto chain = ExactChain::build(env, k);
            auto plan = build_sweep_scheme(n, k, q, T);
            DisplacementSchedule disp = plan.displacements;
            if (disp.empty()) {
                // k <= q: one displacement back to the packed state after the first stage
                disp.times = {T};
                disp.maps = {[k](const Configuration& xi) { return pack_leftmost(xi, k); }};
            }
            std::vector<double> grid;
            for (int i = 1; i <= 20; ++i) grid.push_back(plan.horizon * i / 20.0);
            auto rep = censoring_inequality_check(chain, plan.scheme, &disp, grid);
            checks += static_cast<int>(rep.rows.size());
            violations += rep.violations;
            min_slack = std::min(min_slack, rep.min_slack);
        }
    }
    return {violations == 0 && min_slack >= -1e-10,
            std::to_string(checks) + " (k, env, t) points, violations: " + std::to_string(violations) +
                ", min slack " + fmt("%.3e", min_slack)};
}

Outcome criterion7() {
    int checks = 0, violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    static const double ps[] = {0.2, 0.3, 0.4};
    for (std::uint64_t s = 0; s < 9; ++s) {
        auto env = sample_env(LawSpec::two_point(0.25, ps[s % 3]), 6, hash_key(kMaster, Stream::Instance, s, 7));
        auto chain = ExactChain::build(env, 2);
        auto [lo, hi] = extremal(6, 2);
        for (double t : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
            const double p = transient(chain, lo, t)(static_cast<Eigen::Index>(chain.index_of(hi)));
            for (int m = 1; m <= 3; ++m) {
                const double d = tv_of_kernel(chain, transition_matrix(chain, m * t));
                const double rhs = std::pow(1.0 - p, m);
                worst = std::max(worst, d - rhs);
                violations += d > rhs + 1e-12;
                ++checks;
            }
        }
    }
    return {violations == 0, std::to_string(checks) + " checks, violations: " + std::to_string(violations) +
                                 ", max d - bound " + fmt("%.3e", worst)};
}

Outcome criterion8() {
    const auto& r = family_results();
    int bad = 0;
    double worst = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& in = family()[i];
        double bound = static_cast<double>(in.n) * in.n * in.k;
        worst = std::max(worst, r[i].var_m / bound);
        bad += r[i].var_m > bound;
    }
    return {bad == 0, "violations: " + std::to_string(bad) + ", max Var/bound " + fmt("%.3g", worst)};
}

Outcome criterion9() {
    const int n = 64, k = 16, replicas = 50;
    auto law = LawSpec::two_point(0.25, 0.3);
    int windows = 0, bound_bad = 0, mc_bad = 0, dom_bad = 0;
    double worst_z = 0, max_ratio = 0, sum_z2 = 0;
    int over2 = 0;
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i) grid.push_back(50.0 * i);
    for (std::uint64_t s = 0; windows < 100; ++s) {
        auto env = sample_env(law, n, hash_key(kMaster, Stream::Instance, s, 9));
        auto prof = potential(env);
        auto trap = deepest_trap(prof, SiteRange{(n + 1) / 2, 3 * n / 4});
        const int x2 = trap.x, y2 = trap.y;
        if (y2 <= x2 || y2 - x2 + 1 > 12) continue;
        ++windows;
        auto st = flow_stationary_law(env, x2, y2);
        const double bound = flow_upper_bound(prof, x2, y2);
        bound_bad += st.flow > bound;
        max_ratio = std::max(max_ratio, st.flow / bound);

        const double horizon = std::min(100.0 / st.flow, 1e5);
        double sum = 0, sum2 = 0;
        for (int r = 0; r < replicas; ++r) {
            auto seed = hash_key(kMaster, Stream::Replica, s * 1000 + static_cast<std::uint64_t>(r), 9);
            SplitMix64 rng(hash_key(seed, Stream::Sampler, 0));
            double u = rng.uniform(), c = 0;
            std::size_t m = 0;
            for (; m + 1 < st.mu.size(); ++m) {
                c += st.mu[m];
                if (u < c) break;
            }
            auto init = FlowState::empty(x2, y2);
            for (int j = 0; j <= y2 - x2; ++j) init.occ[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>((m >> j) & 1U);
            auto end = flow_run(env, init, EventSource(seed), horizon);
            double v = static_cast<double>(end.absorbed) / horizon;
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / replicas;
        const double se = std::sqrt(std::max(0.0, (sum2 - sum * sum / replicas) / (replicas - 1)) / replicas);
        const double z = std::fabs(mean - st.flow) / se;
        worst_z = std::max(worst_z, z);
        sum_z2 += z * z;
        over2 += z > 2.0;
        mc_bad += !(z <= 3.0);

        auto dom = flow_domination_run(env, k, FlowState::empty(x2, y2),
                                       EventSource(hash_key(kMaster, Stream::Replica, s, 90)), grid);
        dom_bad += dom.total_violations;
    }
    bool pass = bound_bad == 0 && mc_bad == 0 && dom_bad == 0;
    return {pass, std::to_string(windows) + " windows, bound violations " + std::to_string(bound_bad) +
                      " (max flow/bound " + fmt("%.3g", max_ratio) + "), MC outside 3 sigma " +
                      std::to_string(mc_bad) + " (max |z| " + fmt("%.2f", worst_z) + ", |z|>2 in " +
                      std::to_string(over2) + ", sum z^2 " + fmt("%.1f", sum_z2) + "), domination violations " +
                      std::to_string(dom_bad)};
}

std::string scaling_rows(const ScalingTable& t) {
    std::string s;
    for (const auto& r : t.rows)
        s += "\n      n=" + std::to_string(r.n) + " k=" + std::to_string(r.k) + " t_hat=" + fmt("%.4g", r.t_hat) +
             " ci=[" + fmt("%.4g", r.ci_lo) + ", " + fmt("%.4g", r.ci_hi) + "] timeouts=" +
             std::to_string(r.timeouts) + (r.censored ? " censored" : "");
    return s;
}

Outcome criterion10() {
    auto t0 = std::chrono::steady_clock::now();
    auto law = LawSpec::two_point(0.25, 0.3);
    const double lam = lambda_root(law);
    auto t = scaling_run(law, 0.0, {128, 256, 512, 1024, 2048, 4096}, 0.25, 200, kMaster);
    const double secs = seconds_since(t0);
    const double lo = 1 / lam - 0.35, hi = 1 / lam + 0.35;
    bool pass = t.fit.slope >= lo && t.fit.slope <= hi && secs <= 1800;
    return {pass, "slope " + fmt("%.3f", t.fit.slope) + " +- " + fmt("%.3f", t.fit.slope_se) + " vs [" +
                      fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "], " + fmt("%.0f s", secs) + scaling_rows(t)};
}

Outcome criterion11() {
    auto t0 = std::chrono::steady_clock::now();
    auto law = LawSpec::finite_discrete(0.2, {0.6, 0.8}, {0.5, 0.5});
    auto t = scaling_run(law, 0.5, {128, 256, 512, 1024, 2048, 4096}, 0.25, 200, kMaster);
    const double secs = seconds_since(t0);
    bool pass = t.fit.slope >= 0.8 && t.fit.slope <= 1.2 && secs <= 1200;
    return {pass, "slope " + fmt("%.3f", t.fit.slope) + " +- " + fmt("%.3f", t.fit.slope_se) + " vs [0.8, 1.2], " +
                      fmt("%.0f s", secs) + scaling_rows(t)};
}

Outcome criterion12() {
    auto law = LawSpec::two_point(0.25, 0.3);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 200; ++i) seeds.push_back(hash_key(kMaster, Stream::Instance, i, 12));
    std::string curve;
    for (int n : {1 << 10, 1 << 11, 1 << 12, 1 << 13}) {
        auto t = trap_depth_window_stats(law, n, seeds);
        curve += "\n      n=" + std::to_string(n) + " in window " + fmt("%.3f", t.frac_in_sym_window) +
                 " short traps " + fmt("%.3f", t.frac_short_trap) + " median centered " +
                 fmt("%.3f", t.median_centered);
    }
    auto t = trap_depth_window_stats(law, 1 << 14, seeds);
    bool pass = t.frac_in_sym_window >= 0.9 && t.frac_short_trap >= 0.9;
    return {pass, "n=16384: in window " + fmt("%.3f", t.frac_in_sym_window) + ", short traps " +
                      fmt("%.3f", t.frac_short_trap) + ", median centered " + fmt("%.3f", t.median_centered) +
                      " (report only below)" + curve};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"flow-method gap bound", criterion1},
        {"gap-mixing sandwich", criterion2},
        {"linear lower bound t_mix(1/4) >= n/16", criterion3},
        {"detailed balance and equilibrium oracle", criterion4},
        {"monotone grand coupling", criterion5},
        {"censoring inequalities", criterion6},
        {"hitting reduction", criterion7},
        {"variance bound Var[m] <= n^2 k", criterion8},
        {"boundary-driven flow", criterion9},
        {"single-particle exponent trend", criterion10},
        {"ballistic trend", criterion11},
        {"trap statistics", criterion12},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!pick.empty() && !pick.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
