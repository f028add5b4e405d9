#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "sepmix/equilibrium.hpp"
#include "sepmix/exact.hpp"

using namespace sepmix;

namespace {

struct Enum {
    double z = 0;
    std::vector<double> marg;
    double mean = 0, m2 = 0;
    std::map<int, double> a_r;
};

Enum enumerate(const PotentialProfile& p, int k, int r_max) {
    const int n = p.n();
    Enum e;
    e.marg.assign(static_cast<std::size_t>(n), 0.0);
    for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
        if (std::popcount(m) != k) continue;
        auto c = Configuration::from_mask(n, m);
        double s = 0;
        for (int x : c.positions()) s += p.V(x);
        double w = std::exp(-s);
        e.z += w;
        for (int x : c.positions()) e.marg[static_cast<std::size_t>(x - 1)] += w;
        double mm = static_cast<double>(observable_m(c));
        e.mean += w * mm;
        e.m2 += w * mm * mm;
        for (int r = 0; r <= r_max; ++r)
            if (in_A_r(c, r)) e.a_r[r] += w;
    }
    for (auto& v : e.marg) v /= e.z;
    e.mean /= e.z;
    e.m2 /= e.z;
    for (auto& [r, v] : e.a_r) v /= e.z;
    return e;
}

}  // namespace

TEST_CASE("three-site partition function") {
    auto p = potential(make_env({0.3, 0.3, 0.7}));
    auto t = EquilibriumTable::build(p, 1);
    // exp(0) + 2 exp(-V(2)) with V(2)=V(3)=log(7/3)
    CHECK(std::exp(t.log_z()) == doctest::Approx(13.0 / 7.0).epsilon(1e-12));
    CHECK(t.prob(Configuration::from_string("100")) == doctest::Approx(7.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("DP matches enumeration") {
    auto law = LawSpec::two_point(0.25, 0.3);
    for (std::uint64_t s = 0; s < 12; ++s) {
        const int n = 6 + static_cast<int>(s % 7);
        const int k = 1 + static_cast<int>(s % 4);
        auto p = potential(sample_env(law, n, s));
        auto t = EquilibriumTable::build(p, k);
        auto e = enumerate(p, k, n);
        CHECK(std::exp(t.log_z()) == doctest::Approx(e.z).epsilon(1e-12));
        auto marg = t.marginals();
        for (int x = 0; x < n; ++x) CHECK(marg[static_cast<std::size_t>(x)] == doctest::Approx(e.marg[static_cast<std::size_t>(x)]).epsilon(1e-12));
        auto [mean, var] = t.mean_var_m();
        CHECK(mean == doctest::Approx(e.mean).epsilon(1e-10));
        CHECK(var == doctest::Approx(e.m2 - e.mean * e.mean).epsilon(1e-8));
        for (int r = 0; r <= n - k; ++r) {
            CHECK(t.prob_A_r_dp(r) == doctest::Approx(e.a_r[r]).epsilon(1e-10));
            CHECK(t.prob_A_r_enumerated(r) == doctest::Approx(e.a_r[r]).epsilon(1e-10));
        }
        auto dist = t.m_distribution();
        double tot = 0, mu = 0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            tot += dist[i];
            mu += dist[i] * static_cast<double>(k * (k + 1) / 2 + static_cast<int>(i));
        }
        CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mu == doctest::Approx(e.mean).epsilon(1e-10));
    }
}

TEST_CASE("exact sampler reproduces pi") {
    auto p = potential(make_env({0.4, 0.6, 0.3, 0.7, 0.5}));
    auto t = EquilibriumTable::build(p, 2);
    SplitMix64 rng(17);
    std::map<std::uint64_t, int> counts;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) counts[t.sample(rng).mask()]++;
    for (auto [m, c] : counts) {
        double pr = t.prob(Configuration::from_mask(5, m));
        CHECK(std::abs(c / double(draws) - pr) < 5 * std::sqrt(pr * (1 - pr) / draws) + 1e-4);
    }
}

TEST_CASE("leftmost and rightmost-empty laws sum to one") {
    auto p = potential(sample_env(LawSpec::two_point(0.2, 0.4), 30, 3));
    auto t = EquilibriumTable::build(p, 7);
    double a = 0, b = 0;
    for (double v : t.leftmost_law()) a += v;
    for (double v : t.rightmost_empty_law()) b += v;
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
}

namespace {
double binom(int n, int k) {
    double b = 1;
    for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
    return b;
}
}  // namespace

TEST_CASE("uniform weights") {
    const int n = 12, k = 5;
    auto t = EquilibriumTable::build(std::vector<double>(n, 0.0), k);
    CHECK(std::exp(t.log_z()) == doctest::Approx(binom(n, k)).epsilon(1e-12));
    CHECK(t.prob(extremal(n, k).first) == doctest::Approx(1 / binom(n, k)).epsilon(1e-12));
    for (double m : t.marginals()) CHECK(m == doctest::Approx(double(k) / n).epsilon(1e-12));
    CHECK(t.mean_var_m().first == doctest::Approx(k * (n + 1) / 2.0).epsilon(1e-12));
    auto p = potential(make_env(std::vector<double>(2 * k + 4, 0.5)));
    CHECK(prob_max_window(p, {3, 2 + 2 * k}, k) == doctest::Approx(1 / binom(2 * k, k)).epsilon(1e-10));
    CHECK(prob_max_window(p, {3, 2 + k}, k) == 1.0);
}

TEST_CASE("table structure") {
    auto p = potential(sample_env(LawSpec::two_point(0.25, 0.3), 10, 8));
    auto t = EquilibriumTable::build(p, 4);
    for (int m = 0; m <= 10; ++m) {
        CHECK(t.prefix(m, 0) == 0.0);
        for (int j = m + 1; j <= 4; ++j) CHECK(std::isinf(t.prefix(m, j)));
        for (int j = 1; j <= std::min(m, 4); ++j)
            CHECK(t.prefix(m, j) ==
                  doctest::Approx(log_add(t.prefix(m - 1, j), t.log_weight(m) + t.prefix(m - 1, j - 1))).epsilon(1e-12));
    }
    double total = 0;
    std::vector<double> left(10, 0.0);
    for (std::uint64_t m = 0; m < 1024; ++m) {
        if (std::popcount(m) != 4) continue;
        auto c = Configuration::from_mask(10, m);
        total += t.prob(c);
        left[static_cast<std::size_t>(c.positions().front() - 1)] += t.prob(c);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    auto ll = t.leftmost_law();
    for (int x = 0; x < 10; ++x) CHECK(ll[static_cast<std::size_t>(x)] == doctest::Approx(left[static_cast<std::size_t>(x)]).epsilon(1e-12));
    for (int x = 10 - 4 + 2; x <= 10; ++x) CHECK(ll[static_cast<std::size_t>(x - 1)] == 0.0);
    CHECK(t.prob_A_r(10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.prob_A_r(0) == doctest::Approx(t.prob(extremal(10, 4).second)).epsilon(1e-12));
}

TEST_CASE("sampler chi-square on n=8, k=3") {
    auto p = potential(sample_env(LawSpec::two_point(0.25, 0.3), 8, 21));
    auto t = EquilibriumTable::build(p, 3);
    SplitMix64 rng(5), rng2(5);
    CHECK(t.sample(rng) == t.sample(rng2));
    std::map<std::uint64_t, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[t.sample(rng).mask()]++;
    double chi2 = 0;
    int cells = 0;
    for (std::uint64_t m = 0; m < 256; ++m) {
        if (std::popcount(m) != 3) continue;
        double e = draws * t.prob(Configuration::from_mask(8, m));
        double o = counts.count(m) ? counts[m] : 0;
        chi2 += (o - e) * (o - e) / e;
        ++cells;
    }
    // 55 degrees of freedom: the 0.99 quantile is 82.3
    CHECK(cells == 56);
    CHECK(chi2 < 82.3);
}
