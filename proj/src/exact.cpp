#include "sepmix/exact.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sepmix/equilibrium.hpp"
#include "sepmix/errors.hpp"

namespace sepmix {

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

std::uint64_t bit(int x) { return 1ULL << (x - 1); }

// right-jump or left-jump rate of the single move between masks a and b
double move_rate(const std::vector<double>& omega, std::uint64_t a, std::uint64_t b) {
    std::uint64_t d = a ^ b;
    int x = std::countr_zero(d) + 1;  // bond {x, x+1}
    if (a & bit(x)) return omega[static_cast<std::size_t>(x - 1)];
    return 1.0 - omega[static_cast<std::size_t>(x)];
}

// smallest J with P(Poisson(mu) > J) <= 1e-12 by the Chernoff bound
int poisson_cutoff(double mu) {
    const double target = std::log(1e-12);
    int a = static_cast<int>(std::ceil(mu)) + 1;
    for (;; ++a) {
        double lb = -mu + a * (1.0 + std::log(mu) - std::log(static_cast<double>(a)));
        if (lb <= target) return a - 1;
    }
}

std::vector<double> poisson_weights(double mu, int J) {
    std::vector<double> w(static_cast<std::size_t>(J + 1));
    for (int j = 0; j <= J; ++j) w[static_cast<std::size_t>(j)] = std::exp(-mu + j * std::log(mu) - std::lgamma(j + 1.0));
    return w;
}

}  // namespace

ExactChain ExactChain::build(const Environment& env, int k) {
    const int n = env.n;
    if (k < 1 || k > n - 1) throw Error(ErrorKind::BadK, "need 1 <= k <= n-1");
    if (n > 63 || binomial(n, k) > static_cast<double>(kMaxStates))
        throw Error(ErrorKind::TooLarge, "state space exceeds the enumeration cap");
    ExactChain c;
    c.n_ = n;
    c.k_ = k;
    c.omega_ = env.omega;
    // masks with k bits in increasing order
    std::uint64_t m = (1ULL << k) - 1, limit = 1ULL << n;
    while (m < limit) {
        c.masks_.push_back(m);
        std::uint64_t t = m | (m - 1);
        m = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(m) + 1));
    }
    const std::size_t N = c.masks_.size();

    auto table = EquilibriumTable::build(potential(env), k);
    c.pi_.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        double lw = 0.0;
        for (std::uint64_t b = c.masks_[i]; b; b &= b - 1) lw += table.log_weight(std::countr_zero(b) + 1);
        c.pi_[i] = std::exp(lw - table.log_z());
    }

    c.row_ptr_.assign(N + 1, 0);
    c.exit_.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const std::uint64_t s = c.masks_[i];
        for (int x = 1; x < n; ++x) {
            const bool a = s & bit(x), b = s & bit(x + 1);
            if (a == b) continue;
            double r = a ? env.at(x) : 1.0 - env.at(x + 1);
            c.col_.push_back(static_cast<std::uint32_t>(c.index_of(s ^ bit(x) ^ bit(x + 1))));
            c.rate_.push_back(r);
            c.edge_.push_back(x);
            c.exit_[i] += r;
        }
        c.row_ptr_[i + 1] = c.col_.size();
    }
    c.lambda_u_ = *std::max_element(c.exit_.begin(), c.exit_.end());

    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t e = c.row_ptr_[i]; e < c.row_ptr_[i + 1]; ++e) {
            std::size_t j = c.col_[e];
            double fwd = c.pi_[i] * c.rate_[e];
            double back = c.pi_[j] * move_rate(c.omega_, c.masks_[j], c.masks_[i]);
            worst = std::max(worst, std::abs(fwd - back) / std::max(fwd, back));
        }
    c.db_residual_ = worst;
    if (worst > 1e-12) throw Error(ErrorKind::PropertyViolation, "detailed balance fails for the DP equilibrium");
    return c;
}

std::size_t ExactChain::index_of(std::uint64_t mask) const {
    auto it = std::lower_bound(masks_.begin(), masks_.end(), mask);
    if (it == masks_.end() || *it != mask) throw Error(ErrorKind::ShapeMismatch, "state not in the chain");
    return static_cast<std::size_t>(it - masks_.begin());
}

double ExactChain::pi_min() const { return *std::min_element(pi_.begin(), pi_.end()); }

double ExactChain::max_row_sum_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double s = -exit_[i];
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) s += rate_[e];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

Eigen::MatrixXd ExactChain::dense_generator() const {
    const auto N = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < size(); ++i) {
        L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -exit_[i];
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
            L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_[e])) += rate_[e];
    }
    return L;
}

std::vector<double> stationary_by_solve(const ExactChain& chain) {
    const auto N = static_cast<int>(chain.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < N; ++i) {
        auto iu = static_cast<std::size_t>(i);
        if (i != N - 1) trip.emplace_back(i, i, -chain.exit_rates()[iu]);
        for (std::size_t e = chain.row_ptr()[iu]; e < chain.row_ptr()[iu + 1]; ++e) {
            int j = static_cast<int>(chain.cols()[e]);
            if (j != N - 1) trip.emplace_back(j, i, chain.rates()[e]);
        }
        trip.emplace_back(N - 1, i, 1.0);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    rhs(N - 1) = 1.0;
    Eigen::VectorXd x = lu.solve(rhs);
    return std::vector<double>(x.data(), x.data() + N);
}

std::vector<double> spectrum(const ExactChain& chain) {
    const auto N = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        auto ii = static_cast<Eigen::Index>(i);
        M(ii, ii) = chain.exit_rates()[i];
        for (std::size_t e = chain.row_ptr()[i]; e < chain.row_ptr()[i + 1]; ++e) {
            std::size_t j = chain.cols()[e];
            if (j < i) continue;
            double back = move_rate(chain.omega(), chain.mask(j), chain.mask(i));
            double s = -std::sqrt(chain.rates()[e] * back);
            M(ii, static_cast<Eigen::Index>(j)) = s;
            M(static_cast<Eigen::Index>(j), ii) = s;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + N);
}

double spectral_gap(const ExactChain& chain) { return spectrum(chain)[1]; }

Configuration max_probability_state(const PotentialProfile& profile, int k) {
    std::vector<int> sites(static_cast<std::size_t>(profile.n()));
    std::iota(sites.begin(), sites.end(), 1);
    std::stable_sort(sites.begin(), sites.end(), [&](int a, int b) { return profile.V(a) < profile.V(b); });
    sites.resize(static_cast<std::size_t>(k));
    return Configuration(profile.n(), sites);
}

std::vector<std::uint64_t> canonical_path_to(const Configuration& xi, const Configuration& xi_star) {
    auto [xs, ys] = discrepancy_pairs(xi, xi_star);
    std::uint64_t cur = xi.mask();
    std::vector<std::uint64_t> path{cur};
    auto hop = [&](int from, int to) {
        cur ^= bit(from) | bit(to);
        path.push_back(cur);
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const int x = xs[i], y = ys[i];
        std::vector<int> z;
        if (x < y) {
            for (int s = y; s >= x; --s)
                if (cur & bit(s)) z.push_back(s);
            int target = y;
            for (int zj : z) {
                for (int p = zj; p < target; ++p) hop(p, p + 1);
                target = zj;
            }
        } else {
            for (int s = y; s <= x; ++s)
                if (cur & bit(s)) z.push_back(s);
            int target = y;
            for (int zj : z) {
                for (int p = zj; p > target; --p) hop(p, p - 1);
                target = zj;
            }
        }
    }
    return path;
}

PathBoundReport canonical_path_bound(const ExactChain& chain, const Environment& env) {
    const auto prof = potential(env);
    Configuration star = max_probability_state(prof, chain.k());
    const std::size_t N = chain.size();
    struct Load {
        double m = 0.0;   // sum of pi(xi) * multiplicity
        double ml = 0.0;  // same weighted by path length
    };
    std::unordered_map<std::uint64_t, Load> load;
    double mean_len = 0.0;
    int max_len = 0;
    for (std::size_t i = 0; i < N; ++i) {
        auto path = canonical_path_to(chain.state(i), star);
        const int len = static_cast<int>(path.size()) - 1;
        max_len = std::max(max_len, len);
        const double p = chain.pi()[i];
        mean_len += p * len;
        for (std::size_t s = 0; s + 1 < path.size(); ++s) {
            std::size_t a = chain.index_of(path[s]), b = chain.index_of(path[s + 1]);
            if (a > b) std::swap(a, b);
            auto& l = load[static_cast<std::uint64_t>(a) * N + b];
            l.m += p;
            l.ml += p * len;
        }
    }
    double B = 0.0;
    for (const auto& [key, l] : load) {
        std::size_t a = key / N, b = key % N;
        double q = chain.pi()[a] * move_rate(chain.omega(), chain.mask(a), chain.mask(b));
        B = std::max(B, (l.ml + l.m * mean_len) / q);
    }
    const double alpha = env.alpha;
    const double n = chain.n();
    double closed = n * n / alpha * static_cast<double>(N) * std::pow((1.0 - alpha) / alpha, n / 2.0);
    return PathBoundReport{B, closed, 2 * max_len, star};
}

namespace {

// One uniformized step v <- v P for a row vector, with optional blocked bonds.
void step_row(const ExactChain& c, const Eigen::VectorXd& v, Eigen::VectorXd& out, const std::vector<char>* blocked) {
    const double lam = c.uniformization_rate();
    out.setZero();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double vi = v(static_cast<Eigen::Index>(i));
        double ex = 0.0;
        for (std::size_t e = c.row_ptr()[i]; e < c.row_ptr()[i + 1]; ++e) {
            if (blocked && (*blocked)[static_cast<std::size_t>(c.edges()[e])]) continue;
            ex += c.rates()[e];
            if (vi != 0.0) out(static_cast<Eigen::Index>(c.cols()[e])) += vi * c.rates()[e] / lam;
        }
        out(static_cast<Eigen::Index>(i)) += vi * (1.0 - ex / lam);
    }
}

void step_col(const ExactChain& c, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    const double lam = c.uniformization_rate();
    for (std::size_t i = 0; i < c.size(); ++i) {
        double s = v(static_cast<Eigen::Index>(i)) * (1.0 - c.exit_rates()[i] / lam);
        for (std::size_t e = c.row_ptr()[i]; e < c.row_ptr()[i + 1]; ++e)
            s += c.rates()[e] / lam * v(static_cast<Eigen::Index>(c.cols()[e]));
        out(static_cast<Eigen::Index>(i)) = s;
    }
}

Eigen::SparseMatrix<double, Eigen::RowMajor> uniformized_kernel(const ExactChain& c) {
    const auto N = static_cast<Eigen::Index>(c.size());
    const double lam = c.uniformization_rate();
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto ii = static_cast<Eigen::Index>(i);
        trip.emplace_back(ii, ii, 1.0 - c.exit_rates()[i] / lam);
        for (std::size_t e = c.row_ptr()[i]; e < c.row_ptr()[i + 1]; ++e)
            trip.emplace_back(ii, static_cast<Eigen::Index>(c.cols()[e]), c.rates()[e] / lam);
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> P(N, N);
    P.setFromTriplets(trip.begin(), trip.end());
    return P;
}

// e^{tL} by the Poisson series, meant for small Lambda*t
Eigen::MatrixXd kernel_series(const ExactChain& c, const Eigen::SparseMatrix<double, Eigen::RowMajor>& P, double t) {
    const auto N = static_cast<Eigen::Index>(c.size());
    const double mu = c.uniformization_rate() * t;
    if (mu <= 0.0) return Eigen::MatrixXd::Identity(N, N);
    const int J = poisson_cutoff(mu);
    auto w = poisson_weights(mu, J);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
    Eigen::MatrixXd K = w[0] * M;
    for (int j = 1; j <= J; ++j) {
        M = (M * P).eval();
        K += w[static_cast<std::size_t>(j)] * M;
    }
    return K;
}

}  // namespace

Eigen::VectorXd propagate(const ExactChain& chain, const Eigen::VectorXd& row, double t,
                          const std::vector<char>* blocked) {
    const double mu = chain.uniformization_rate() * t;
    if (mu <= 0.0) return row;
    const int J = poisson_cutoff(mu);
    auto w = poisson_weights(mu, J);
    Eigen::VectorXd v = row, next(row.size());
    Eigen::VectorXd acc = w[0] * v;
    for (int j = 1; j <= J; ++j) {
        step_row(chain, v, next, blocked);
        std::swap(v, next);
        acc += w[static_cast<std::size_t>(j)] * v;
    }
    return acc;
}

Eigen::VectorXd transient(const ExactChain& chain, const Configuration& xi0, double t) {
    if (t < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(chain.size()));
    v(static_cast<Eigen::Index>(chain.index_of(xi0))) = 1.0;
    return propagate(chain, v, t);
}

Eigen::VectorXd transient_to(const ExactChain& chain, const Configuration& target, double t) {
    if (t < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
    const auto N = static_cast<Eigen::Index>(chain.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    v(static_cast<Eigen::Index>(chain.index_of(target))) = 1.0;
    const double mu = chain.uniformization_rate() * t;
    if (mu <= 0.0) return v;
    const int J = poisson_cutoff(mu);
    auto w = poisson_weights(mu, J);
    Eigen::VectorXd acc = w[0] * v, next(N);
    for (int j = 1; j <= J; ++j) {
        step_col(chain, v, next);
        std::swap(v, next);
        acc += w[static_cast<std::size_t>(j)] * v;
    }
    return acc;
}

Eigen::MatrixXd transition_matrix(const ExactChain& chain, double t) {
    if (t < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
    auto P = uniformized_kernel(chain);
    const double mu = chain.uniformization_rate() * t;
    int s = 0;
    while (mu / std::ldexp(1.0, s) > 4.0) ++s;
    Eigen::MatrixXd K = kernel_series(chain, P, std::ldexp(t, -s));
    for (int i = 0; i < s; ++i) K = (K * K).eval();
    return K;
}

double tv_of_kernel(const ExactChain& chain, const Eigen::MatrixXd& K) {
    const Eigen::Map<const Eigen::RowVectorXd> pi(chain.pi().data(), static_cast<Eigen::Index>(chain.size()));
    return 0.5 * (K.rowwise() - pi).cwiseAbs().rowwise().sum().maxCoeff();
}

double tv_to_pi(const ExactChain& chain, double t) { return tv_of_kernel(chain, transition_matrix(chain, t)); }

double t_mix_exact(const ExactChain& chain, double eps) { return t_mix_exact(chain, std::vector<double>{eps})[0]; }

std::vector<double> t_mix_exact(const ExactChain& chain, const std::vector<double>& eps_list) {
    const auto N = static_cast<Eigen::Index>(chain.size());
    const double h = 1.0 / chain.uniformization_rate();
    auto P = uniformized_kernel(chain);
    // dyadic kernels K(2^j h) for j >= 0, and K(2^-j h) for j >= 1
    std::vector<Eigen::MatrixXd> up{kernel_series(chain, P, h)};
    std::vector<double> up_tv{tv_of_kernel(chain, up[0])};
    std::vector<Eigen::MatrixXd> down(1);
    auto up_kernel = [&](std::size_t j) -> const Eigen::MatrixXd& {
        while (up.size() <= j) {
            if (up.size() > 200) throw Error(ErrorKind::CapExceeded, "mixing time beyond 2^200 steps");
            up.push_back(up.back() * up.back());
            up_tv.push_back(tv_of_kernel(chain, up.back()));
        }
        return up[j];
    };
    auto down_kernel = [&](std::size_t j) -> const Eigen::MatrixXd& {
        while (down.size() <= j) down.push_back(kernel_series(chain, P, std::ldexp(h, -static_cast<int>(down.size()))));
        return down[j];
    };
    std::vector<double> out;
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
        if (1.0 - chain.pi_min() <= eps) {
            out.push_back(0.0);
            continue;
        }
        std::size_t J = 0;
        for (;; ++J) {
            up_kernel(J);
            if (up_tv[J] <= eps) break;
        }
        double lo = J > 0 ? std::ldexp(h, static_cast<int>(J) - 1) : 0.0;
        Eigen::MatrixXd cur = J > 0 ? up[J - 1] : Eigen::MatrixXd::Identity(N, N);
        int s = J > 0 ? static_cast<int>(J) - 2 : -1;
        for (;; --s) {
            const double step = std::ldexp(h, s);
            const Eigen::MatrixXd& Ks = s >= 0 ? up_kernel(static_cast<std::size_t>(s)) : down_kernel(static_cast<std::size_t>(-s));
            Eigen::MatrixXd cand = cur * Ks;
            if (tv_of_kernel(chain, cand) > eps) {
                cur = std::move(cand);
                lo += step;
            }
            if (lo > 0.0 && step <= 1e-6 * (lo + step)) {
                out.push_back(lo + step);
                break;
            }
            if (s < -60) {
                out.push_back(lo + step);
                break;
            }
        }
    }
    return out;
}

Eigen::VectorXd censored_transient(const ExactChain& chain, const CensoringScheme& scheme,
                                   const DisplacementSchedule* displacements, const Configuration& xi0, double t) {
    const auto N = static_cast<Eigen::Index>(chain.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    v(static_cast<Eigen::Index>(chain.index_of(xi0))) = 1.0;
    std::vector<char> blocked(static_cast<std::size_t>(chain.n() + 1), 0);
    double cur = 0.0;
    std::size_t di = 0;
    const auto& bp = scheme.breakpoints();
    for (;;) {
        while (displacements && di < displacements->times.size() && displacements->times[di] <= cur &&
               displacements->times[di] <= t) {
            Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
            for (std::size_t i = 0; i < chain.size(); ++i) {
                if (v(static_cast<Eigen::Index>(i)) == 0.0) continue;
                Configuration src = chain.state(i);
                Configuration dst = displacements->maps[di](src);
                if (!leq(dst, src)) throw Error(ErrorKind::PropertyViolation, "displacement map must move particles left");
                w(static_cast<Eigen::Index>(chain.index_of(dst))) += v(static_cast<Eigen::Index>(i));
            }
            v = std::move(w);
            ++di;
        }
        if (cur >= t) break;
        double next = t;
        auto it = std::upper_bound(bp.begin(), bp.end(), cur);
        if (it != bp.end()) next = std::min(next, *it);
        if (displacements && di < displacements->times.size()) next = std::min(next, displacements->times[di]);
        std::fill(blocked.begin(), blocked.end(), 0);
        for (int e : scheme.blocked_at(cur)) blocked[static_cast<std::size_t>(e)] = 1;
        v = propagate(chain, v, next - cur, &blocked);
        cur = next;
    }
    return v;
}

CensorCheckReport censoring_inequality_check(const ExactChain& chain, const CensoringScheme& scheme,
                                             const DisplacementSchedule* displacements,
                                             const std::vector<double>& grid, double tol) {
    auto [lo, hi] = extremal(chain.n(), chain.k());
    const auto target = static_cast<Eigen::Index>(chain.index_of(hi));
    CensorCheckReport rep{{}, std::numeric_limits<double>::infinity(), 0};
    for (double t : grid) {
        CensorCheckRow row{};
        row.t = t;
        row.min_uncensored = transient_to(chain, hi, t).minCoeff();
        row.censored = censored_transient(chain, scheme, nullptr, lo, t)(target);
        row.displaced = censored_transient(chain, scheme, displacements, lo, t)(target);
        double slack = std::min(row.min_uncensored - row.censored, row.censored - row.displaced);
        rep.min_slack = std::min(rep.min_slack, slack);
        if (slack < -tol) ++rep.violations;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace sepmix
