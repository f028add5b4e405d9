#include "sepmix/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepmix/dynamics.hpp"
#include "sepmix/equilibrium.hpp"
#include "sepmix/errors.hpp"
#include "sepmix/parallel.hpp"
#include "sepmix/rng.hpp"

namespace sepmix {

namespace {
constexpr double kZ = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

WilsonInterval wilson(long successes, long trials) {
    if (trials <= 0) throw Error(ErrorKind::InvalidArgument, "Wilson interval needs trials >= 1");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = kZ * kZ;
    const double den = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / den;
    const double half = kZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r) { return hash_key(seed, Stream::Replica, r); }

EstimateReport quantile_from_times(std::vector<double> times, double eps, double cap, std::uint64_t seed,
                                   const std::string& method) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
    const long R = static_cast<long>(times.size());
    std::sort(times.begin(), times.end());
    int timeouts = 0;
    for (double t : times) timeouts += !(t <= cap);
    // candidate t values: 0 and each finite coupling time; survivors = #{tau > t}
    auto first_where = [&](bool use_upper) -> double {
        long above = R;
        std::size_t i = 0;
        double t = 0.0;
        for (;;) {
            while (i < times.size() && times[i] <= t) {
                --above;
                ++i;
            }
            auto w = wilson(above, R);
            if ((use_upper ? w.hi : w.lo) <= eps) return t;
            if (i >= times.size() || !(times[i] <= cap)) return kInf;
            t = times[i];
        }
    };
    double hi = first_where(true);
    if (!std::isfinite(hi))
        throw Error(ErrorKind::CapExceeded, "coupling probability bound stays above eps at the cap");
    double lo = first_where(false);
    return EstimateReport{hi, std::min(lo, hi), hi, static_cast<int>(R), seed, method, timeouts};
}

std::vector<double> coupling_times(const Environment& env, int k, int replicas, std::uint64_t seed, double cap,
                                   int threads) {
    if (replicas < 1) throw Error(ErrorKind::InvalidArgument, "replicas must be >= 1");
    std::vector<double> times(static_cast<std::size_t>(replicas));
    parallel_for(times.size(), threads, [&](std::size_t r) {
        EventSource src(replica_seed(seed, r));
        auto res = coupling_time(env, k, src, cap);
        times[r] = res.reached ? res.time : kInf;
    });
    return times;
}

EstimateReport estimate_tmix_coupling(const Environment& env, int k, double eps, int replicas, std::uint64_t seed,
                                      double cap, int threads) {
    return quantile_from_times(coupling_times(env, k, replicas, seed, cap, threads), eps, cap, seed,
                               "grand-coupling");
}

static FrequencyReport frequency(long hits, int replicas, std::uint64_t seed) {
    auto w = wilson(hits, replicas);
    return FrequencyReport{static_cast<double>(hits) / replicas, w.lo, w.hi, replicas, seed};
}

LeftmostWitness witness_leftmost(const Environment& env, int k, double t, int replicas, std::uint64_t seed,
                                 int threads) {
    const int n = env.n;
    const auto xi_min = extremal(n, k).first;
    std::vector<char> hit(static_cast<std::size_t>(replicas), 0);
    parallel_for(hit.size(), threads, [&](std::size_t r) {
        EventSource src(replica_seed(seed, r));
        auto xi = evolve(xi_min, env, src, t);
        hit[r] = 4 * xi.positions().front() <= n;
    });
    long hits = 0;
    for (char h : hit) hits += h;
    LeftmostWitness w{frequency(hits, replicas, seed), {}, 0.0};
    auto prof = potential(env);
    w.trap = deepest_trap(prof, SiteRange{1, std::max(1, n / 4)});
    w.predicted_blocking_time = std::exp(w.trap.depth) / (2.0 * std::exp(1.0)) - 1.0;
    return w;
}

FlowWitness witness_flow(const Environment& env, int k, int y2, double t, int replicas, std::uint64_t seed,
                         std::optional<int> x2, int threads) {
    if (y2 < 0 || y2 > env.n) throw Error(ErrorKind::InvalidArgument, "y2 out of range");
    const auto xi_min = extremal(env.n, k).first;
    std::vector<double> J(static_cast<std::size_t>(replicas)), A(static_cast<std::size_t>(replicas), 0.0);
    parallel_for(J.size(), threads, [&](std::size_t r) {
        EventSource src(replica_seed(seed, r));
        if (x2) {
            auto rep = flow_domination_run(env, k, FlowState::empty(*x2, y2), src, {t});
            J[r] = rep.tail_counts.back();
            A[r] = static_cast<double>(rep.absorbed.back());
        } else {
            J[r] = tail_count(evolve(xi_min, env, src, t), y2);
        }
    });
    double s = 0.0, s2 = 0.0, sa = 0.0;
    int fail = 0;
    for (std::size_t r = 0; r < J.size(); ++r) {
        s += J[r];
        s2 += J[r] * J[r];
        sa += A[r];
        if (x2 && J[r] > A[r]) ++fail;
    }
    const double R = replicas;
    FlowWitness w{};
    w.replicas = replicas;
    w.mean_J = s / R;
    w.se_J = replicas > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / R) / (R - 1.0)) / R) : 0.0;
    w.bound = 1.0 - 4.0 * w.mean_J / k - 0.125;
    if (x2) w.mean_absorbed = sa / R;
    w.domination_failures = fail;
    return w;
}

MassWitness witness_mass(const Environment& env, int k, double t, int replicas, std::uint64_t seed, int threads) {
    const int n = env.n;
    const auto xi_min = extremal(n, k).first;
    auto table = EquilibriumTable::build(potential(env), k);
    const double med = table.median_m(seed);
    std::vector<double> m(static_cast<std::size_t>(replicas));
    parallel_for(m.size(), threads, [&](std::size_t r) {
        EventSource src(replica_seed(seed, r));
        m[r] = static_cast<double>(observable_m(evolve(xi_min, env, src, t)));
    });
    long hits = 0;
    double s = 0.0, s2 = 0.0;
    for (double v : m) {
        hits += v >= med;
        s += v;
        s2 += v * v;
    }
    const double R = replicas;
    MassWitness w{frequency(hits, replicas, seed), med, s / R, 0.0, 0.0, 0.0};
    w.se_m = replicas > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / R) / (R - 1.0)) / R) : 0.0;
    w.drift_bound = k * (k + 1) / 2.0 + k * t;
    w.markov_bound = 2.0 * t / (n - k);
    return w;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::InvalidArgument, "fit needs two or more points");
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        sx += lx.back();
        sy += ly.back();
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    SlopeFit f{};
    f.points = static_cast<int>(x.size());
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double e = ly[i] - f.intercept - f.slope * lx[i];
        rss += e * e;
    }
    f.slope_se = x.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
    return f;
}

double predicted_exponent(double lambda, double beta) {
    if (!std::isfinite(lambda)) return std::max(1.0, beta);
    return std::max({1.0, 1.0 / lambda, beta + 1.0 / (2.0 * lambda)});
}

ScalingTable scaling_run(const LawSpec& law, double beta, const std::vector<int>& ns, double eps, int replicas,
                         std::uint64_t seed, std::optional<double> cap, int threads) {
    ScalingTable table;
    const double lam = lambda_root(law);
    std::vector<double> xs, ys;
    for (int n : ns) {
        const int k = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(n), beta) - 1e-9)));
        if (2 * k > n) throw Error(ErrorKind::BadK, "k = ceil(n^beta) exceeds n/2");
        auto env = sample_env(law, n, seed);
        // 1e9 expected rings: the coupled pair keeps at most 2k clocks running
        const double c = cap.value_or(1e9 / (2.0 * k));
        ScalingRow row{n, k, beta, kInf, kInf, kInf, 0, lam, predicted_exponent(lam, beta), false};
        auto times = coupling_times(env, k, replicas, seed, c, threads);
        for (double t : times) row.timeouts += !std::isfinite(t);
        try {
            auto est = quantile_from_times(std::move(times), eps, c, seed, "grand-coupling");
            row.t_hat = est.estimate;
            row.ci_lo = est.ci_lo;
            row.ci_hi = est.ci_hi;
            row.timeouts = est.timeouts;
            xs.push_back(n);
            ys.push_back(est.estimate);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CapExceeded) throw;
            row.censored = true;
        }
        table.rows.push_back(row);
    }
    if (xs.size() >= 2)
        table.fit = fit_loglog(xs, ys);
    else
        table.fit = SlopeFit{std::nan(""), std::nan(""), std::nan(""), static_cast<int>(xs.size())};
    return table;
}

}  // namespace sepmix
