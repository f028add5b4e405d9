#pragma once

#include <cstdint>
#include <vector>

#include "sepmix/environment.hpp"
#include "sepmix/rng.hpp"
#include "sepmix/state.hpp"

namespace sepmix {

// Gibbs law pi(xi) proportional to exp(-sum of V over occupied sites), k particles on 1..n.
class EquilibriumTable {
public:
    static EquilibriumTable build(const PotentialProfile& profile, int k);
    // potential[i] is V at local site i+1
    static EquilibriumTable build(const std::vector<double>& potential, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    double log_z() const { return prefix(n_, k_); }
    double prefix(int m, int j) const;  // log_z[m][j]
    double suffix(int m, int j) const;  // same for sites m..n, m in 1..n+1
    double log_weight(int x) const { return w_[static_cast<std::size_t>(x - 1)]; }

    double log_prob(const Configuration& xi) const;
    double prob(const Configuration& xi) const;
    Configuration sample(SplitMix64& rng) const;

    std::vector<double> marginals() const;
    std::vector<double> leftmost_law() const;       // index x-1
    std::vector<double> rightmost_empty_law() const;  // index x-1
    double prob_A_r(int r) const;
    double prob_A_r_enumerated(int r) const;
    double prob_A_r_dp(int r) const;
    std::pair<double, double> mean_var_m() const;
    // Exact pi-distribution of m over its range [k(k+1)/2, k(2n-k+1)/2]; needs n^2 k^2 <= 1e8.
    std::vector<double> m_distribution() const;
    double median_m(std::uint64_t seed = 0) const;

private:
    int n_ = 0, k_ = 0;
    std::vector<double> w_;
    std::vector<double> lz_;  // (n+1) x (k+1)
    std::vector<double> ls_;  // (n+2) x (k+1)
};

double prob_max_window(const PotentialProfile& profile, SiteRange window, int k);
bool max_window_predicate(const PotentialProfile& profile, SiteRange window, int k, long q);

double log_add(double a, double b);

}  // namespace sepmix
