#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepmix/environment.hpp"
#include "sepmix/law.hpp"

namespace sepmix {

struct WilsonInterval {
    double lo;
    double hi;
};

// Wilson score interval at level 0.95 for `successes` out of `trials`.
WilsonInterval wilson(long successes, long trials);

struct EstimateReport {
    double estimate;
    double ci_lo;
    double ci_hi;
    int replicas;
    std::uint64_t seed;
    std::string method;
    int timeouts;
};

// Seed of replica r under master seed s
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r);

// Smallest t whose Wilson upper bound on P(tau > t) is <= eps, given replica coupling
// times (timeouts passed as +inf). ci_lo uses the Wilson lower bound instead.
EstimateReport quantile_from_times(std::vector<double> times, double eps, double cap, std::uint64_t seed,
                                   const std::string& method);

// Coupling time of the extremal pair per replica, +inf on timeout.
std::vector<double> coupling_times(const Environment& env, int k, int replicas, std::uint64_t seed, double cap,
                                   int threads = 1);

EstimateReport estimate_tmix_coupling(const Environment& env, int k, double eps, int replicas, std::uint64_t seed,
                                      double cap, int threads = 1);

struct FrequencyReport {
    double frequency;
    double ci_lo;
    double ci_hi;
    int replicas;
    std::uint64_t seed;
};

struct LeftmostWitness {
    FrequencyReport freq;
    Trap trap;
    double predicted_blocking_time;  // exp(depth)/(2e) - 1
};

LeftmostWitness witness_leftmost(const Environment& env, int k, double t, int replicas, std::uint64_t seed,
                                 int threads = 1);

struct FlowWitness {
    double mean_J;
    double se_J;
    double bound;  // 1 - 4 E[J]/k - 1/8
    std::optional<double> mean_absorbed;
    int domination_failures;  // replicas with J > absorbed
    int replicas;
};

FlowWitness witness_flow(const Environment& env, int k, int y2, double t, int replicas, std::uint64_t seed,
                         std::optional<int> x2 = std::nullopt, int threads = 1);

struct MassWitness {
    FrequencyReport freq;
    double median_m;
    double mean_m;
    double se_m;
    double drift_bound;   // k(k+1)/2 + k t
    double markov_bound;  // 2t/(n-k)
};

MassWitness witness_mass(const Environment& env, int k, double t, int replicas, std::uint64_t seed,
                         int threads = 1);

struct ScalingRow {
    int n;
    int k;
    double beta;
    double t_hat;
    double ci_lo;
    double ci_hi;
    int timeouts;
    double lambda_ref;
    double predicted_exponent;
    bool censored;
};

struct SlopeFit {
    double slope;
    double intercept;
    double slope_se;
    int points;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    SlopeFit fit;
};

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);
double predicted_exponent(double lambda, double beta);

ScalingTable scaling_run(const LawSpec& law, double beta, const std::vector<int>& ns, double eps, int replicas,
                         std::uint64_t seed, std::optional<double> cap = std::nullopt, int threads = 1);

}  // namespace sepmix
