#pragma once

#include <map>
#include <string>

#include "padr/errors.hpp"
#include "padr/grid.hpp"

namespace padr {

class KernelError : public Error {
public:
    using Error::Error;
};

enum class KernelFamily { Table, UniformBall, ExpLandscape };

std::string to_string(KernelFamily family);

/// Result of a (possibly infinite) sum over p-adic levels.
struct LevelSum {
    double value = 0.0;
    /// Upper bound on the neglected tail; 0 for exact finite sums.
    double remainder_bound = 0.0;
    /// Last level included in the sum.
    int last_level = 0;
};

/// Radial transition kernel J(||x||_p) on Q_p^n, described by its values on
/// the radii p^r. Only those values enter any formula on the grid.
class RadialKernel {
public:
    static constexpr double kDefaultTailTol = 1e-14;

    /// Piecewise kernel: J(p^r) = levels[r], zero on unlisted radii.
    static RadialKernel table(int p, int n, std::map<int, double> levels);
    /// Indicator of the ball of radius p^radius_exponent.
    static RadialKernel uniform_ball(int p, int n, int radius_exponent);
    /// J(t) = t^gamma e^{-t}.
    static RadialKernel exp_landscape(int p, int n, double gamma);

    KernelFamily family() const { return family_; }
    int p() const { return p_; }
    int n() const { return n_; }
    double scale() const { return scale_; }
    double tail_tol() const { return tail_tol_; }
    double gamma() const { return gamma_; }
    int radius_exponent() const { return radius_exponent_; }
    const std::map<int, double>& levels() const { return levels_; }
    bool normalized() const { return normalized_; }

    RadialKernel with_scale(double c) const;
    RadialKernel with_tail_tol(double tol) const;

    /// J(p^r), including the scale.
    double value(int r) const;

    /// Integral of J over the sphere S_r = {||x|| = p^r}.
    double sphere_integral(int r) const;
    /// Integral of J over the ball B_r, with a tail bound when the sum is
    /// infinite.
    LevelSum ball_integral(int r) const;
    /// Integral of J over Q_p^n.
    LevelSum total_mass() const;

    /// Smallest R with supp J inside B_R; INT_MAX when the support is
    /// unbounded, INT_MIN for the zero kernel.
    int support_exponent() const;

private:
    friend RadialKernel normalize(const RadialKernel& J);

    RadialKernel() = default;

    // log of the unscaled sphere integral, -inf when zero.
    double log_sphere_term(int r) const;
    LevelSum sum_down_from(int r) const;
    LevelSum sum_up_from(int r) const;

    KernelFamily family_ = KernelFamily::Table;
    int p_ = 2;
    int n_ = 1;
    double scale_ = 1.0;
    double tail_tol_ = kDefaultTailTol;
    std::map<int, double> levels_;
    int radius_exponent_ = 0;
    double gamma_ = 0.0;
    bool normalized_ = false;
};

/// J_N = J restricted to B_N, together with the two masses the grid
/// operator needs.
struct TruncatedKernel {
    RadialKernel base;
    int N = 1;
    /// Integral of J over B_N.
    double j_N = 0.0;
    /// Integral of J over B_{-N} (the diagonal of the adjacency matrix).
    double diag_mass = 0.0;
};

double sphere_integral(const RadialKernel& J, int r, const GridParams& params);

/// Rescale so that the total mass is 1. Throws KernelError for zero or
/// divergent mass, naming the tail that failed.
RadialKernel normalize(const RadialKernel& J);

TruncatedKernel truncate(const RadialKernel& J, int N);
TruncatedKernel truncate(const RadialKernel& J, const GridParams& params);

}  // namespace padr
