#include "sepmix/law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sepmix/errors.hpp"

namespace sepmix {

namespace {

constexpr double kRootTol = 1e-10;
constexpr double kUpperBracket = 64.0;
constexpr double kMaxBracket = 65536.0;
constexpr int kQuadPerSegment = 64;

double rho_of(double omega) { return (1.0 - omega) / omega; }

double interp_quantile(const QuantileTable& t, double u) {
    const auto& g = t.grid;
    if (u <= g.front().first) return g.front().second;
    if (u >= g.back().first) return g.back().second;
    auto it = std::upper_bound(g.begin(), g.end(), u,
                               [](double a, const std::pair<double, double>& b) { return a < b.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double w = (u - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
}

// E[g(omega)] by composite Simpson on each grid segment
template <class G>
double quantile_expect(const QuantileTable& t, G g) {
    double total = 0.0;
    const auto& grid = t.grid;
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        double a = grid[s].first, b = grid[s + 1].first;
        if (b <= a) continue;
        double h = (b - a) / kQuadPerSegment;
        double acc = 0.0;
        for (int i = 0; i <= kQuadPerSegment; ++i) {
            double u = a + i * h;
            double om = grid[s].second + (grid[s + 1].second - grid[s].second) * (u - a) / (b - a);
            double c = (i == 0 || i == kQuadPerSegment) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += c * g(om);
        }
        total += acc * h / 3.0;
    }
    return total;
}

}  // namespace

LawSpec::LawSpec(double alpha, Variant v) : alpha_(alpha), variant_(std::move(v)) { validate(); }

LawSpec LawSpec::two_point(double alpha, double p) { return LawSpec(alpha, TwoPoint{p}); }

LawSpec LawSpec::finite_discrete(double alpha, std::vector<double> values, std::vector<double> weights) {
    return LawSpec(alpha, FiniteDiscrete{std::move(values), std::move(weights)});
}

LawSpec LawSpec::quantile_table(double alpha, std::vector<std::pair<double, double>> grid) {
    return LawSpec(alpha, QuantileTable{std::move(grid)});
}

void LawSpec::validate() const {
    if (!(alpha_ > 0.0 && alpha_ < 0.5))
        throw Error(ErrorKind::InvalidLaw, "alpha must lie in (0, 1/2)");
    auto in_range = [&](double w) { return w >= alpha_ - 1e-15 && w <= 1.0 - alpha_ + 1e-15; };
    if (auto tp = std::get_if<TwoPoint>(&variant_)) {
        if (!(tp->p >= 0.0 && tp->p <= 1.0)) throw Error(ErrorKind::InvalidLaw, "p must lie in [0,1]");
    } else if (auto fd = std::get_if<FiniteDiscrete>(&variant_)) {
        if (fd->values.empty() || fd->values.size() != fd->weights.size())
            throw Error(ErrorKind::InvalidLaw, "values and weights must be non-empty and of equal length");
        double s = 0.0;
        for (std::size_t i = 0; i < fd->values.size(); ++i) {
            if (!in_range(fd->values[i])) throw Error(ErrorKind::InvalidLaw, "support value outside [alpha, 1-alpha]");
            if (!(fd->weights[i] >= 0.0)) throw Error(ErrorKind::InvalidLaw, "negative weight");
            s += fd->weights[i];
        }
        if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorKind::InvalidLaw, "weights must sum to 1");
    } else {
        const auto& g = std::get<QuantileTable>(variant_).grid;
        if (g.size() < 2) throw Error(ErrorKind::InvalidLaw, "quantile grid needs at least two points");
        if (g.front().first != 0.0 || g.back().first != 1.0)
            throw Error(ErrorKind::InvalidLaw, "quantile grid must span u in [0,1]");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!in_range(g[i].second)) throw Error(ErrorKind::InvalidLaw, "support value outside [alpha, 1-alpha]");
            if (i > 0 && (g[i].first < g[i - 1].first || g[i].second < g[i - 1].second))
                throw Error(ErrorKind::InvalidLaw, "quantile grid must be monotone");
        }
    }
}

std::vector<std::pair<double, double>> LawSpec::atoms() const {
    std::vector<std::pair<double, double>> out;
    if (auto tp = std::get_if<TwoPoint>(&variant_)) {
        out.push_back({alpha_, tp->p});
        out.push_back({1.0 - alpha_, 1.0 - tp->p});
    } else if (auto fd = std::get_if<FiniteDiscrete>(&variant_)) {
        for (std::size_t i = 0; i < fd->values.size(); ++i) out.push_back({fd->values[i], fd->weights[i]});
    }
    return out;
}

double LawSpec::min_support() const {
    if (auto q = std::get_if<QuantileTable>(&variant_)) return q->grid.front().second;
    double m = 1.0;
    for (auto [w, p] : atoms())
        if (p > 0.0) m = std::min(m, w);
    return m;
}

double LawSpec::max_support() const {
    if (auto q = std::get_if<QuantileTable>(&variant_)) return q->grid.back().second;
    double m = 0.0;
    for (auto [w, p] : atoms())
        if (p > 0.0) m = std::max(m, w);
    return m;
}

double LawSpec::sample(double u) const {
    if (auto tp = std::get_if<TwoPoint>(&variant_)) return u < tp->p ? alpha_ : 1.0 - alpha_;
    if (auto fd = std::get_if<FiniteDiscrete>(&variant_)) {
        double c = 0.0;
        for (std::size_t i = 0; i < fd->values.size(); ++i) {
            c += fd->weights[i];
            if (u < c) return fd->values[i];
        }
        return fd->values.back();
    }
    return interp_quantile(std::get<QuantileTable>(variant_), u);
}

double log_mgf(const LawSpec& law, double u) {
    if (u == 0.0) return 0.0;
    if (law.is_discrete()) {
        // log-sum-exp over atoms
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> terms;
        for (auto [w, p] : law.atoms()) {
            if (p <= 0.0) continue;
            terms.push_back(std::log(p) + u * std::log(rho_of(w)));
            mx = std::max(mx, terms.back());
        }
        double s = 0.0;
        for (double t : terms) s += std::exp(t - mx);
        return mx + std::log(s);
    }
    const auto& qt = std::get<QuantileTable>(law.variant());
    return std::log(quantile_expect(qt, [u](double om) { return std::pow(rho_of(om), u); }));
}

double mean_log_rho(const LawSpec& law) {
    if (law.is_discrete()) {
        double s = 0.0;
        for (auto [w, p] : law.atoms()) s += p * std::log(rho_of(w));
        return s;
    }
    return quantile_expect(std::get<QuantileTable>(law.variant()),
                           [](double om) { return std::log(rho_of(om)); });
}

double lambda_root(const LawSpec& law) {
    if (mean_log_rho(law) >= -1e-12) throw Error(ErrorKind::NotTransient, "E[log rho] >= 0");
    double hi = kUpperBracket;
    if (log_mgf(law, hi) < 0.0) {
        if (law.min_support() >= 0.5) return std::numeric_limits<double>::infinity();
        while (log_mgf(law, hi) < 0.0) {
            hi *= 2.0;
            if (hi > kMaxBracket) throw Error(ErrorKind::RootNotBracketed, "F stays negative up to u=65536");
        }
    }
    double lo = 1e-9;
    while (hi - lo > kRootTol) {
        double mid = 0.5 * (lo + hi);
        if (log_mgf(law, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// F'(u) = E[rho^u log rho] / E[rho^u]
double mgf_slope(const LawSpec& law, double u) {
    if (law.is_discrete()) {
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, double>> terms;  // (log weight, log rho)
        for (auto [w, p] : law.atoms()) {
            if (p <= 0.0) continue;
            double lr = std::log(rho_of(w));
            terms.push_back({std::log(p) + u * lr, lr});
            mx = std::max(mx, terms.back().first);
        }
        double num = 0.0, den = 0.0;
        for (auto [lw, lr] : terms) {
            double e = std::exp(lw - mx);
            num += e * lr;
            den += e;
        }
        return num / den;
    }
    const auto& qt = std::get<QuantileTable>(law.variant());
    double num = quantile_expect(qt, [u](double om) {
        double lr = std::log(rho_of(om));
        return std::exp(u * lr) * lr;
    });
    double den = quantile_expect(qt, [u](double om) { return std::pow(rho_of(om), u); });
    return num / den;
}

}  // namespace

std::pair<double, double> f_minimizer(const LawSpec& law) {
    double lam = lambda_root(law);
    if (!std::isfinite(lam)) throw Error(ErrorKind::NotTrapped, "lambda is infinite");
    // F' < 0 at 0 and > 0 at lambda
    double a = 0.0, b = lam;
    while (b - a > kRootTol) {
        double m = 0.5 * (a + b);
        (mgf_slope(law, m) < 0.0 ? a : b) = m;
    }
    double u0 = 0.5 * (a + b);
    return {u0, log_mgf(law, u0)};
}

long q_n(const LawSpec& law, long N) {
    if (N < 2) throw Error(ErrorKind::InvalidArgument, "q_n needs N >= 2");
    auto [u0, f0] = f_minimizer(law);
    return static_cast<long>(std::ceil((3.0 * u0 + 2.0) / std::abs(f0) * std::log(static_cast<double>(N))));
}

double kappa(const LawSpec& law) {
    double lam = lambda_root(law);
    if (!std::isfinite(lam)) throw Error(ErrorKind::NotTrapped, "lambda is infinite");
    return mgf_slope(law, lam);
}

LawAnalytics analyze(const LawSpec& law) {
    LawAnalytics a{};
    a.mean_log_rho = mean_log_rho(law);
    a.lambda = lambda_root(law);
    if (std::isfinite(a.lambda)) {
        auto [u0, f0] = f_minimizer(law);
        a.u0 = u0;
        a.F_at_u0 = f0;
        a.kappa = kappa(law);
    }
    return a;
}

}  // namespace sepmix
