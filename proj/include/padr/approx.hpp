#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "padr/dynamics.hpp"
#include "padr/kernel.hpp"
#include "padr/operator.hpp"

namespace padr {

/// A real function on Q_p^n with a finite description, evaluable at the
/// representatives of any grid.
class Profile {
public:
    enum class Kind { Constant, DigitRule, NormRule };

    /// A point of Q^n with p-power denominators: coordinate j is
    /// numerators[j] / p^exponent.
    struct Center {
        std::vector<std::int64_t> numerators;
        int exponent = 0;
    };

    static Profile constant(int p, int n, double value);
    /// Locally constant at scale p^-L on B_L: values[m] for the level-L
    /// canonical ordinal m of the digits a_{-L}, ..., a_{L-1}; `outside`
    /// beyond B_L.
    static Profile digit_rule(int p, int n, int L, std::vector<double> values, double outside);
    /// Value depends on ||x - c||_p: the first (r, v) with ||x - c|| <= p^r
    /// in ascending r gives v, otherwise `beyond`.
    static Profile norm_rule(int p, int n, Center center,
                             std::vector<std::pair<int, double>> thresholds, double beyond);

    Kind kind() const { return kind_; }
    int p() const { return p_; }
    int n() const { return n_; }
    /// Finest scale the profile resolves; 0 for constants.
    int scale() const;

    /// Value at the point whose digits are given (coordinate-major, slot
    /// order a_{-N}, ..., a_{N-1}).
    double eval_digits(int N, std::span<const int> digits) const;

    /// sup |phi| over Q_p^n.
    double sup_norm() const;

private:
    Profile() = default;

    Kind kind_ = Kind::Constant;
    int p_ = 2;
    int n_ = 1;
    double constant_ = 0.0;
    int L_ = 0;
    std::vector<double> values_;
    double outside_ = 0.0;
    Center center_;
    std::vector<std::pair<int, double>> thresholds_;
};

/// P_N phi: samples at the representatives of G_N^n.
State project(const Profile& profile, const GridParams& params);

/// X_N into X_N': a fine point in B_N takes the value of the coarse
/// representative with the same digits a_{-N}, ..., a_{N-1}; points outside
/// B_N get 0.
State embed(const State& u, const GridParams& coarse, int N_fine);

/// Samples a fine state at the coarse representatives (inverse of embed).
State restrict_to(const State& u_fine, int N_fine, const GridParams& coarse);

/// Fine ordinals lying in B_{N_coarse}, in canonical order.
std::vector<std::size_t> inner_ball_points(const GridParams& fine, int N_coarse);

/// sup over points x of B_N (sampled at resolution max(N_list) + 2) of
/// |phi(x) - P_N phi(x)|, one value per N.
std::vector<double> projection_error(const Profile& profile, const std::vector<int>& N_list);

/// Conjugate gradients for (A^(N) - shift) x = b with shift < 0.
State solve_shifted(const UltradiffOperator& op, double shift, const State& b,
                    double rel_tol = 1e-14, std::size_t max_iter = 0);

/// sup over B_{N_k} of |E x_{N_k} - x_{N_{k+1}}| for x_N = (A_N - lambda0)^{-1} P_N phi.
std::vector<double> resolvent_check(const RadialKernel& kernel, double lambda0,
                                    const Profile& profile, const std::vector<int>& N_list);

struct ConvergenceRow {
    int N_coarse = 0;
    int N_fine = 0;
    double sup_gap = 0.0;
    double semigroup_gap = 0.0;
    double runtime_ms = 0.0;
};

/// Runs the nonlinear problem and the linear semigroup at each N and compares
/// consecutive resolutions on the coarse domain at every recorded time.
std::vector<ConvergenceRow> convergence_study(const Profile& profile, const RadialKernel& kernel,
                                              const Reaction& rx, const IntegratorConfig& cfg,
                                              const std::vector<int>& N_list);

}  // namespace padr
