#include "sepmix/equilibrium.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "sepmix/errors.hpp"

namespace sepmix {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

EquilibriumTable EquilibriumTable::build(const PotentialProfile& profile, int k) { return build(profile.v, k); }

EquilibriumTable EquilibriumTable::build(const std::vector<double>& potential, int k) {
    const int n = static_cast<int>(potential.size());
    if (k < 1 || k > n - 1) throw Error(ErrorKind::BadK, "need 1 <= k <= n-1");
    EquilibriumTable t;
    t.n_ = n;
    t.k_ = k;
    t.w_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t.w_[static_cast<std::size_t>(i)] = -potential[static_cast<std::size_t>(i)];
    const auto K = static_cast<std::size_t>(k + 1);
    t.lz_.assign(static_cast<std::size_t>(n + 1) * K, kNegInf);
    t.ls_.assign(static_cast<std::size_t>(n + 2) * K, kNegInf);
    for (int m = 0; m <= n; ++m) t.lz_[static_cast<std::size_t>(m) * K] = 0.0;
    for (int m = 1; m <= n; ++m) {
        const double w = t.w_[static_cast<std::size_t>(m - 1)];
        for (int j = 1; j <= std::min(m, k); ++j) {
            auto idx = static_cast<std::size_t>(m) * K + static_cast<std::size_t>(j);
            t.lz_[idx] = log_add(t.lz_[idx - K], w + t.lz_[idx - K - 1]);
        }
    }
    for (int m = 1; m <= n + 1; ++m) t.ls_[static_cast<std::size_t>(m) * K] = 0.0;
    for (int m = n; m >= 1; --m) {
        const double w = t.w_[static_cast<std::size_t>(m - 1)];
        for (int j = 1; j <= std::min(n - m + 1, k); ++j) {
            auto idx = static_cast<std::size_t>(m) * K + static_cast<std::size_t>(j);
            t.ls_[idx] = log_add(t.ls_[idx + K], w + t.ls_[idx + K - 1]);
        }
    }
    return t;
}

double EquilibriumTable::prefix(int m, int j) const {
    if (j < 0 || j > k_ || m < 0 || m > n_) return kNegInf;
    return lz_[static_cast<std::size_t>(m) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(j)];
}

double EquilibriumTable::suffix(int m, int j) const {
    if (j < 0 || j > k_ || m < 1 || m > n_ + 1) return kNegInf;
    return ls_[static_cast<std::size_t>(m) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(j)];
}

double EquilibriumTable::log_prob(const Configuration& xi) const {
    if (xi.n() != n_ || xi.k() != k_) throw Error(ErrorKind::ShapeMismatch, "configuration does not match table");
    double s = 0.0;
    for (int x : xi.positions()) s += log_weight(x);
    return s - log_z();
}

double EquilibriumTable::prob(const Configuration& xi) const { return std::exp(log_prob(xi)); }

Configuration EquilibriumTable::sample(SplitMix64& rng) const {
    std::vector<int> pos;
    pos.reserve(static_cast<std::size_t>(k_));
    int j = k_;
    for (int m = n_; m >= 1 && j > 0; --m) {
        double p = std::exp(log_weight(m) + prefix(m - 1, j - 1) - prefix(m, j));
        if (rng.uniform() < p) {
            pos.push_back(m);
            --j;
        }
    }
    return Configuration(n_, std::move(pos));
}

std::vector<double> EquilibriumTable::marginals() const {
    std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
    const double lz = log_z();
    for (int x = 1; x <= n_; ++x) {
        double acc = kNegInf;
        for (int j = 0; j <= k_ - 1; ++j) acc = log_add(acc, prefix(x - 1, j) + suffix(x + 1, k_ - 1 - j));
        out[static_cast<std::size_t>(x - 1)] = std::exp(log_weight(x) + acc - lz);
    }
    return out;
}

std::vector<double> EquilibriumTable::leftmost_law() const {
    std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
    for (int x = 1; x <= n_; ++x)
        out[static_cast<std::size_t>(x - 1)] = std::exp(log_weight(x) + suffix(x + 1, k_ - 1) - log_z());
    return out;
}

std::vector<double> EquilibriumTable::rightmost_empty_law() const {
    std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
    double tail = 0.0;  // sum of log weights of sites x+1..n
    for (int x = n_; x >= 1; --x) {
        int right = n_ - x;
        if (right <= k_) out[static_cast<std::size_t>(x - 1)] = std::exp(prefix(x - 1, k_ - right) + tail - log_z());
        tail += log_weight(x);
    }
    return out;
}

double EquilibriumTable::prob_A_r(int r) const {
    if (r < 0) throw Error(ErrorKind::InvalidArgument, "r must be >= 0");
    return 2 * r <= 20 ? prob_A_r_enumerated(r) : prob_A_r_dp(r);
}

namespace {

struct ArWindow {
    int lo, hi;     // free sites
    int forced;     // occupied sites hi+1..n
    int need;       // particles inside [lo, hi]
};

ArWindow ar_window(int n, int k, int r) {
    ArWindow w{};
    w.lo = std::max(1, n - k - r + 1);
    w.hi = std::min(n, n - k + r);
    w.forced = n - w.hi;
    w.need = k - w.forced;
    return w;
}

}  // namespace

double EquilibriumTable::prob_A_r_enumerated(int r) const {
    auto win = ar_window(n_, k_, r);
    if (win.need < 0) return 0.0;
    double forced = 0.0;
    for (int x = win.hi + 1; x <= n_; ++x) forced += log_weight(x);
    const int len = win.hi - win.lo + 1;
    if (len > 30) throw Error(ErrorKind::TooLarge, "enumeration window too wide");
    double acc = kNegInf;
    for (std::uint64_t s = 0; s < (1ULL << len); ++s) {
        if (std::popcount(s) != win.need) continue;
        double lw = 0.0;
        for (int i = 0; i < len; ++i)
            if ((s >> i) & 1ULL) lw += log_weight(win.lo + i);
        acc = log_add(acc, lw);
    }
    return std::exp(acc + forced - log_z());
}

double EquilibriumTable::prob_A_r_dp(int r) const {
    auto win = ar_window(n_, k_, r);
    if (win.need < 0) return 0.0;
    double forced = 0.0;
    for (int x = win.hi + 1; x <= n_; ++x) forced += log_weight(x);
    std::vector<double> row(static_cast<std::size_t>(win.need + 1), kNegInf);
    row[0] = 0.0;
    for (int x = win.lo; x <= win.hi; ++x)
        for (int j = std::min(win.need, x - win.lo + 1); j >= 1; --j)
            row[static_cast<std::size_t>(j)] =
                log_add(row[static_cast<std::size_t>(j)], log_weight(x) + row[static_cast<std::size_t>(j - 1)]);
    return std::exp(row[static_cast<std::size_t>(win.need)] + forced - log_z());
}

std::pair<double, double> EquilibriumTable::mean_var_m() const {
    // conditional first and second moments of the prefix sum, rolling over sites
    const auto K = static_cast<std::size_t>(k_ + 1);
    std::vector<double> A(K, 0.0), B(K, 0.0), A2(K, 0.0), B2(K, 0.0);
    for (int m = 1; m <= n_; ++m) {
        const double x = m;
        for (int j = 0; j <= std::min(m, k_); ++j) {
            auto ju = static_cast<std::size_t>(j);
            if (j == 0) {
                A2[0] = 0.0;
                B2[0] = 0.0;
                continue;
            }
            double stay = (j <= m - 1) ? std::exp(prefix(m - 1, j) - prefix(m, j)) : 0.0;
            double occ = 1.0 - stay;
            double a_empty = (j <= m - 1) ? A[ju] : 0.0;
            double b_empty = (j <= m - 1) ? B[ju] : 0.0;
            A2[ju] = stay * a_empty + occ * (A[ju - 1] + x);
            B2[ju] = stay * b_empty + occ * (B[ju - 1] + 2.0 * x * A[ju - 1] + x * x);
        }
        std::swap(A, A2);
        std::swap(B, B2);
    }
    double mean = A[static_cast<std::size_t>(k_)];
    double var = B[static_cast<std::size_t>(k_)] - mean * mean;
    return {mean, std::max(var, 0.0)};
}

std::vector<double> EquilibriumTable::m_distribution() const {
    const long long mmin = static_cast<long long>(k_) * (k_ + 1) / 2;
    const long long mmax = static_cast<long long>(k_) * (2LL * n_ - k_ + 1) / 2;
    const double cells = static_cast<double>(n_) * n_ * k_ * k_;
    if (cells > 1e8) throw Error(ErrorKind::TooLarge, "m distribution table too large");
    const auto S = static_cast<std::size_t>(mmax + 1);
    const auto K = static_cast<std::size_t>(k_ + 1);
    // f[j][s]: log weight of prefixes with j particles and position sum s
    std::vector<double> f(K * S, kNegInf);
    f[0] = 0.0;
    for (int m = 1; m <= n_; ++m) {
        const double w = log_weight(m);
        for (int j = std::min(m, k_); j >= 1; --j) {
            long long smax = static_cast<long long>(j) * (2LL * m - j + 1) / 2;
            for (long long s = smax; s >= m; --s) {
                auto from = static_cast<std::size_t>(j - 1) * S + static_cast<std::size_t>(s - m);
                auto to = static_cast<std::size_t>(j) * S + static_cast<std::size_t>(s);
                if (f[from] != kNegInf) f[to] = log_add(f[to], w + f[from]);
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(mmax - mmin + 1));
    for (long long s = mmin; s <= mmax; ++s)
        out[static_cast<std::size_t>(s - mmin)] =
            std::exp(f[static_cast<std::size_t>(k_) * S + static_cast<std::size_t>(s)] - log_z());
    return out;
}

double EquilibriumTable::median_m(std::uint64_t seed) const {
    const long long mmin = static_cast<long long>(k_) * (k_ + 1) / 2;
    if (static_cast<double>(n_) * n_ * k_ * k_ <= 1e8) {
        auto d = m_distribution();
        double c = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            c += d[i];
            if (c >= 0.5) return static_cast<double>(mmin + static_cast<long long>(i));
        }
        return static_cast<double>(mmin + static_cast<long long>(d.size()) - 1);
    }
    // too large for the exact table: empirical median of exact samples
    SplitMix64 rng(hash_key(seed, Stream::Sampler, 0));
    std::vector<long long> ms(20001);
    for (auto& m : ms) m = observable_m(sample(rng));
    std::nth_element(ms.begin(), ms.begin() + 10000, ms.end());
    return static_cast<double>(ms[10000]);
}

double prob_max_window(const PotentialProfile& profile, SiteRange window, int k) {
    const int len = window.hi - window.lo + 1;
    if (window.lo < 1 || window.hi > profile.n() || len < 1) throw Error(ErrorKind::EmptyRange, "bad window");
    if (k < 1 || len < k) throw Error(ErrorKind::BadK, "window shorter than k");
    if (len == k) return 1.0;
    std::vector<double> pot(profile.v.begin() + (window.lo - 1), profile.v.begin() + window.hi);
    auto t = EquilibriumTable::build(pot, k);
    double lw = 0.0;
    for (int x = len - k + 1; x <= len; ++x) lw += t.log_weight(x);
    return std::exp(lw - t.log_z());
}

bool max_window_predicate(const PotentialProfile& profile, SiteRange window, int k, long q) {
    return prob_max_window(profile, window, k) >= 2.0 / static_cast<double>(q);
}

}  // namespace sepmix
