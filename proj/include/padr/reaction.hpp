#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "padr/errors.hpp"

namespace padr {

/// Real polynomial, coefficients in ascending order of degree.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    const std::vector<double>& coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    double operator()(double x) const;
    Polynomial derivative() const;
    /// Antiderivative with constant term c0.
    Polynomial antiderivative(double c0 = 0.0) const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    /// Polynomial long division; returns (quotient, remainder).
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const;

    /// Number of distinct real roots in (a, b] by Sturm's theorem. Infinite
    /// endpoints are allowed.
    int count_roots(double a, double b) const;
    /// Distinct real roots in [a, b], ascending, to about 1e-15 relative.
    std::vector<double> roots(double a, double b) const;
    /// Distinct real roots on the whole line.
    std::vector<double> real_roots() const;

    /// max of the polynomial on [a, b].
    double max_on(double a, double b) const;
    double min_on(double a, double b) const;

private:
    void trim();
    std::vector<double> c_;
};

struct CheckItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct HypothesisReport {
    std::vector<CheckItem> items;
    bool ok() const;
    /// First failing item, or nullptr.
    const CheckItem* first_failure() const;
    void add(std::string name, bool passed, std::string detail);
};

/// Checks that f has zeros exactly at -1, 0, 1, the slope signs at those
/// zeros, and (when lambda is given) that g(u) = u + lambda f(u) has three
/// monotonicity intervals and three zeros.
HypothesisReport check_hypotheses(const Polynomial& f, std::optional<double> lambda = {});

/// Smallest and largest zero of g(u) = u + lambda f(u). Throws
/// HypothesisError unless g has three zeros with the extreme ones in (-1, 0)
/// and (0, 1).
std::pair<double, double> extreme_roots(const Polynomial& f, double lambda);

/// Innermost (alpha_minus, alpha_plus) with f' >= delta on [-1, alpha_minus]
/// and [alpha_plus, 1].
std::pair<double, double> choose_constants(const Polynomial& f, double delta);

/// max{-alpha_minus / f(alpha_minus), (1 + alpha_plus) / -f(alpha_plus)}.
double lambda_min(const Polynomial& f, double alpha_minus, double alpha_plus);

/// 1 / (1 + lambda max f') with the max over [-1, alpha_minus] and [alpha_plus, 1].
double step_bound(const Polynomial& f, double lambda, double alpha_minus, double alpha_plus);

/// Bistable reaction term with its potential and the derived constants.
struct Reaction {
    Polynomial f;
    Polynomial df;
    Polynomial W;  ///< antiderivative of f with W(1) = 0
    double lambda = 6.0;
    double alpha_minus = -0.75;
    double alpha_plus = 0.75;
    double delta = 0.5;
    /// Extreme zeros of u + lambda f(u); empty when that function has fewer
    /// than three zeros.
    std::optional<double> u_minus;
    std::optional<double> u_plus;
    double h_max = 0.0;
    /// max |f'| on [-1, 1].
    double max_abs_df = 0.0;

    static Polynomial cubic();
    /// f(u) = u^3 - u with the canonical constants.
    static Reaction make_cubic(double lambda = 6.0, double alpha_minus = -0.75,
                               double alpha_plus = 0.75, double delta = 0.5);
    static Reaction make(Polynomial f, double lambda, double alpha_minus, double alpha_plus,
                         double delta);

    double f_at(double u) const { return f(u); }
    double df_at(double u) const { return df(u); }
    double W_at(double u) const { return W(u); }
};

/// Band, barrier and step-size conditions for a reaction; h is checked
/// against h_max when given.
HypothesisReport check_conditions(const Reaction& rx, std::optional<double> h = {});

}  // namespace padr
