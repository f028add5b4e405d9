#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sepmix/dynamics.hpp"
#include "sepmix/environment.hpp"
#include "sepmix/state.hpp"

namespace sepmix {

// Full enumeration of the k-particle chain on n <= 63 sites.
class ExactChain {
public:
    static constexpr std::size_t kMaxStates = 200000;
    static ExactChain build(const Environment& env, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    std::size_t size() const { return masks_.size(); }
    std::uint64_t mask(std::size_t i) const { return masks_[i]; }
    Configuration state(std::size_t i) const { return Configuration::from_mask(n_, masks_[i]); }
    std::size_t index_of(std::uint64_t mask) const;
    std::size_t index_of(const Configuration& xi) const { return index_of(xi.mask()); }

    const std::vector<double>& pi() const { return pi_; }
    double pi_min() const;
    double uniformization_rate() const { return lambda_u_; }
    const std::vector<double>& exit_rates() const { return exit_; }
    double detailed_balance_residual() const { return db_residual_; }
    double max_row_sum_error() const;
    const std::vector<double>& omega() const { return omega_; }

    // CSR off-diagonal rates; edge_[e] is the bond x of the move {x, x+1}
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& cols() const { return col_; }
    const std::vector<double>& rates() const { return rate_; }
    const std::vector<int>& edges() const { return edge_; }

    Eigen::MatrixXd dense_generator() const;

private:
    int n_ = 0, k_ = 0;
    std::vector<double> omega_;
    std::vector<std::uint64_t> masks_;
    std::vector<double> pi_;
    std::vector<double> exit_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_;
    std::vector<double> rate_;
    std::vector<int> edge_;
    double lambda_u_ = 0.0;
    double db_residual_ = 0.0;
};

// pi by a direct null-space solve of the generator (cross-check for the DP route)
std::vector<double> stationary_by_solve(const ExactChain& chain);

std::vector<double> spectrum(const ExactChain& chain);  // eigenvalues of -L ascending
double spectral_gap(const ExactChain& chain);

struct PathBoundReport {
    double B;
    double closed_form_bound;  // alpha^-1 n^2 |Omega| ((1-alpha)/alpha)^(n/2)
    int max_path_length;
    Configuration xi_star;
};

PathBoundReport canonical_path_bound(const ExactChain& chain, const Environment& env);
// Path from xi to xi* as a list of state masks, xi first.
std::vector<std::uint64_t> canonical_path_to(const Configuration& xi, const Configuration& xi_star);
Configuration max_probability_state(const PotentialProfile& profile, int k);

// Row vector pushed forward by time t; blocked[x] != 0 cancels moves across {x, x+1}.
Eigen::VectorXd propagate(const ExactChain& chain, const Eigen::VectorXd& row, double t,
                          const std::vector<char>* blocked = nullptr);
Eigen::VectorXd transient(const ExactChain& chain, const Configuration& xi0, double t);
// Column e^{tL} 1_{target}: entry i is P_t(state i, target).
Eigen::VectorXd transient_to(const ExactChain& chain, const Configuration& target, double t);
Eigen::MatrixXd transition_matrix(const ExactChain& chain, double t);
double tv_of_kernel(const ExactChain& chain, const Eigen::MatrixXd& K);
double tv_to_pi(const ExactChain& chain, double t);
double t_mix_exact(const ExactChain& chain, double eps);
std::vector<double> t_mix_exact(const ExactChain& chain, const std::vector<double>& eps_list);

Eigen::VectorXd censored_transient(const ExactChain& chain, const CensoringScheme& scheme,
                                   const DisplacementSchedule* displacements, const Configuration& xi0, double t);

struct CensorCheckRow {
    double t;
    double min_uncensored;  // min over xi of P_t(xi, xi_max)
    double censored;        // P^C_t(xi_min, xi_max)
    double displaced;       // censored and displaced, from xi_min
};

struct CensorCheckReport {
    std::vector<CensorCheckRow> rows;
    double min_slack;
    int violations;
};

CensorCheckReport censoring_inequality_check(const ExactChain& chain, const CensoringScheme& scheme,
                                             const DisplacementSchedule* displacements,
                                             const std::vector<double>& grid, double tol = 1e-10);

}  // namespace sepmix
