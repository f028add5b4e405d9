#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sepmix/law.hpp"

namespace sepmix {

// Sites are 1-indexed; vectors hold site x at index x-1.
struct Environment {
    int n = 0;
    std::vector<double> omega;
    double alpha = 0.0;
    std::optional<LawSpec> law;
    std::uint64_t seed = 0;

    double at(int x) const { return omega[static_cast<std::size_t>(x - 1)]; }
};

Environment sample_env(const LawSpec& law, int n, std::uint64_t seed);
// Hand-built environment; alpha defaults to the smallest ellipticity the values allow.
Environment make_env(std::vector<double> omega, std::optional<double> alpha = std::nullopt);

struct PotentialProfile {
    std::vector<double> v;
    std::vector<double> v_bar;
    std::vector<double> rho;

    int n() const { return static_cast<int>(v.size()); }
    double V(int x) const { return v[static_cast<std::size_t>(x - 1)]; }
};

PotentialProfile potential(const Environment& env);

struct SiteRange {
    int lo;
    int hi;
};

struct Trap {
    int x;
    int y;
    double depth;
};

Trap deepest_trap(const PotentialProfile& profile, SiteRange range);
Trap deepest_trap(const PotentialProfile& profile);
double constrained_max_gain(const PotentialProfile& profile, int q);
bool check_event_A(const PotentialProfile& profile, int q);
bool check_event_A(const Environment& env, int q);

struct HalfFill {
    std::vector<int> sites;
    int k_prime;
};

HalfFill half_fill_census(const PotentialProfile& profile, int x2, int y2);

struct TrapStatsRow {
    std::uint64_t seed;
    double dv_max;
    double centered;  // dv_max - ln(n)/lambda
    int trap_length;  // y - x of the argmax trap
    bool in_window;      // inside [-(1+eps)/lambda lnln n, eps/lambda lnln n]
    bool in_sym_window;  // inside +-(2/lambda) lnln n
    bool short_trap;     // trap_length <= q_n
    bool event_A;
};

struct TrapStatsTable {
    int n;
    double lambda;
    long q;
    double eps;
    std::vector<TrapStatsRow> rows;
    double median_centered;
    double q10_centered;
    double q90_centered;
    double frac_in_window;
    double frac_in_sym_window;
    double frac_short_trap;
    double frac_event_A;
};

TrapStatsTable trap_depth_window_stats(const LawSpec& law, int n, const std::vector<std::uint64_t>& seeds,
                                       double eps = 1.0);

}  // namespace sepmix
