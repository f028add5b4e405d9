#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace sepmix {

struct TwoPoint {
    double p;  // probability of omega = alpha; otherwise omega = 1 - alpha
};

struct FiniteDiscrete {
    std::vector<double> values;
    std::vector<double> weights;
};

// Inverse CDF given as a monotone grid of (u, value) pairs, u from 0 to 1.
struct QuantileTable {
    std::vector<std::pair<double, double>> grid;
};

class LawSpec {
public:
    using Variant = std::variant<TwoPoint, FiniteDiscrete, QuantileTable>;

    static LawSpec two_point(double alpha, double p);
    static LawSpec finite_discrete(double alpha, std::vector<double> values, std::vector<double> weights);
    static LawSpec quantile_table(double alpha, std::vector<std::pair<double, double>> grid);

    double alpha() const { return alpha_; }
    const Variant& variant() const { return variant_; }
    bool is_discrete() const { return !std::holds_alternative<QuantileTable>(variant_); }

    // Discrete support as (omega, weight); empty for quantile tables.
    std::vector<std::pair<double, double>> atoms() const;
    double min_support() const;
    double max_support() const;

    // omega for a uniform draw u in (0,1)
    double sample(double u) const;

private:
    LawSpec(double alpha, Variant v);
    void validate() const;

    double alpha_;
    Variant variant_;
};

struct LawAnalytics {
    double mean_log_rho;
    double lambda;  // +inf when rho <= 1 a.s.
    std::optional<double> u0;
    std::optional<double> F_at_u0;
    std::optional<double> kappa;
};

double log_mgf(const LawSpec& law, double u);
double mean_log_rho(const LawSpec& law);
double lambda_root(const LawSpec& law);
std::pair<double, double> f_minimizer(const LawSpec& law);
long q_n(const LawSpec& law, long N);
double kappa(const LawSpec& law);
LawAnalytics analyze(const LawSpec& law);

}  // namespace sepmix
