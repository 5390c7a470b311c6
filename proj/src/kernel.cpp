#include "padr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace padr {

namespace {

constexpr int kMinTerms = 64;
constexpr int kRatioWindow = 8;
constexpr int kMaxTerms = 100000;

double ipow(double base, int exp) { return std::pow(base, static_cast<double>(exp)); }

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Table:
            return "table";
        case KernelFamily::UniformBall:
            return "uniform_ball";
        case KernelFamily::ExpLandscape:
            return "exp_landscape";
    }
    return "unknown";
}

RadialKernel RadialKernel::table(int p, int n, std::map<int, double> levels) {
    if (!is_prime(p)) throw KernelError("kernel: p = " + std::to_string(p) + " is not prime");
    if (n < 1) throw KernelError("kernel: dimension must be >= 1");
    for (const auto& [r, v] : levels) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw KernelError("kernel: level value at r = " + std::to_string(r) +
                              " must be finite and >= 0");
    }
    RadialKernel k;
    k.family_ = KernelFamily::Table;
    k.p_ = p;
    k.n_ = n;
    k.levels_ = std::move(levels);
    return k;
}

RadialKernel RadialKernel::uniform_ball(int p, int n, int radius_exponent) {
    RadialKernel k = table(p, n, {});
    k.family_ = KernelFamily::UniformBall;
    k.radius_exponent_ = radius_exponent;
    return k;
}

RadialKernel RadialKernel::exp_landscape(int p, int n, double gamma) {
    if (!std::isfinite(gamma)) throw KernelError("kernel: gamma must be finite");
    RadialKernel k = table(p, n, {});
    k.family_ = KernelFamily::ExpLandscape;
    k.gamma_ = gamma;
    return k;
}

RadialKernel RadialKernel::with_scale(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw KernelError("kernel: scale must be finite and > 0");
    RadialKernel k = *this;
    k.scale_ = c;
    k.normalized_ = false;
    return k;
}

RadialKernel RadialKernel::with_tail_tol(double tol) const {
    if (!(tol > 0.0)) throw KernelError("kernel: tail_tol must be > 0");
    RadialKernel k = *this;
    k.tail_tol_ = tol;
    return k;
}

double RadialKernel::value(int r) const {
    switch (family_) {
        case KernelFamily::Table: {
            const auto it = levels_.find(r);
            return it == levels_.end() ? 0.0 : scale_ * it->second;
        }
        case KernelFamily::UniformBall:
            return r <= radius_exponent_ ? scale_ : 0.0;
        case KernelFamily::ExpLandscape: {
            const double t = ipow(p_, r);
            return scale_ * std::exp(r * gamma_ * std::log(static_cast<double>(p_)) - t);
        }
    }
    return 0.0;
}

double RadialKernel::log_sphere_term(int r) const {
    const double lp = std::log(static_cast<double>(p_));
    const double shell = std::log1p(-ipow(p_, -n_));
    switch (family_) {
        case KernelFamily::Table:
        case KernelFamily::UniformBall: {
            const double v = value(r) / scale_;
            if (v <= 0.0) return -std::numeric_limits<double>::infinity();
            return std::log(v) + r * n_ * lp + shell;
        }
        case KernelFamily::ExpLandscape:
            return r * (gamma_ + n_) * lp - ipow(p_, r) + shell;
    }
    return -std::numeric_limits<double>::infinity();
}

double RadialKernel::sphere_integral(int r) const {
    if (family_ == KernelFamily::ExpLandscape) return scale_ * std::exp(log_sphere_term(r));
    return value(r) * ipow(p_, r * n_) * (1.0 - ipow(p_, -n_));
}

int RadialKernel::support_exponent() const {
    switch (family_) {
        case KernelFamily::Table: {
            for (auto it = levels_.rbegin(); it != levels_.rend(); ++it)
                if (it->second > 0.0) return it->first;
            return std::numeric_limits<int>::min();
        }
        case KernelFamily::UniformBall:
            return radius_exponent_;
        case KernelFamily::ExpLandscape:
            return std::numeric_limits<int>::max();
    }
    return std::numeric_limits<int>::max();
}

// Sum of sphere integrals for s = r, r-1, r-2, ...
LevelSum RadialKernel::sum_down_from(int r) const {
    LevelSum out;
    if (family_ == KernelFamily::Table) {
        for (const auto& [s, v] : levels_)
            if (s <= r) out.value += sphere_integral(s);
        out.last_level = levels_.empty() ? r : std::min(r, levels_.begin()->first);
        return out;
    }
    if (family_ == KernelFamily::UniformBall) {
        out.value = scale_ * ipow(p_, std::min(r, radius_exponent_) * n_);
        out.last_level = std::numeric_limits<int>::min();
        return out;
    }
    // ExpLandscape: downward ratios p^-(gamma+n) e^{(p-1) p^(s-1)} decrease
    // monotonically, so the geometric tail bound is rigorous once q < 1.
    double sum = 0.0, comp = 0.0;
    double prev = 0.0;
    int rising = 0;
    for (int k = 0; k < kMaxTerms; ++k) {
        const int s = r - k;
        const double term = sphere_integral(s);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.last_level = s;
        if (k > 0 && prev > 0.0) {
            const double q = term / prev;
            rising = q >= 1.0 ? rising + 1 : 0;
            if (k + 1 >= kMinTerms && rising >= kRatioWindow)
                throw KernelError("kernel: lower tail (r -> -infinity) diverges; level ratio " +
                                  std::to_string(q) + " >= 1 (exp_landscape needs gamma > -n)");
            if (q < 1.0) {
                const double bound = term * q / (1.0 - q);
                if (bound <= tail_tol_ * std::abs(sum)) {
                    out.value = sum;
                    out.remainder_bound = bound;
                    return out;
                }
            }
        }
        if (term == 0.0 && sum > 0.0) break;
        prev = term;
    }
    if (out.last_level <= r - kMaxTerms + 1)
        throw KernelError("kernel: lower tail (r -> -infinity) did not converge");
    out.value = sum;
    return out;
}

// Sum of sphere integrals for s = r, r+1, r+2, ...
LevelSum RadialKernel::sum_up_from(int r) const {
    LevelSum out;
    if (family_ == KernelFamily::Table) {
        for (const auto& [s, v] : levels_)
            if (s >= r) out.value += sphere_integral(s);
        out.last_level = levels_.empty() ? r : std::max(r, levels_.rbegin()->first);
        return out;
    }
    if (family_ == KernelFamily::UniformBall) {
        if (r <= radius_exponent_)
            out.value = scale_ * (ipow(p_, radius_exponent_ * n_) - ipow(p_, (r - 1) * n_));
        out.last_level = radius_exponent_;
        return out;
    }
    double sum = 0.0, comp = 0.0;
    double prev = 0.0;
    for (int k = 0; k < kMaxTerms; ++k) {
        const int s = r + k;
        const double term = sphere_integral(s);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.last_level = s;
        if (!std::isfinite(sum))
            throw KernelError("kernel: upper tail (r -> +infinity) overflowed");
        if (term == 0.0) break;
        if (k > 0 && prev > 0.0) {
            const double q = term / prev;
            if (q < 1.0) {
                const double bound = term * q / (1.0 - q);
                if (bound <= tail_tol_ * std::abs(sum)) {
                    out.value = sum;
                    out.remainder_bound = bound;
                    return out;
                }
            }
        }
        prev = term;
    }
    if (sum != 0.0 && prev != 0.0 && out.last_level >= r + kMaxTerms - 1)
        throw KernelError("kernel: upper tail (r -> +infinity) did not converge");
    out.value = sum;
    return out;
}

LevelSum RadialKernel::ball_integral(int r) const { return sum_down_from(r); }

LevelSum RadialKernel::total_mass() const {
    if (family_ == KernelFamily::UniformBall) {
        LevelSum out;
        out.value = scale_ * ipow(p_, radius_exponent_ * n_);
        out.last_level = radius_exponent_;
        return out;
    }
    if (family_ == KernelFamily::Table) return sum_down_from(std::numeric_limits<int>::max());
    const LevelSum low = sum_down_from(0);
    const LevelSum high = sum_up_from(1);
    LevelSum out;
    out.value = low.value + high.value;
    out.remainder_bound = low.remainder_bound + high.remainder_bound;
    out.last_level = high.last_level;
    return out;
}

double sphere_integral(const RadialKernel& J, int r, const GridParams& params) {
    if (J.p() != params.p || J.n() != params.n)
        throw KernelError("kernel: (p, n) of kernel and grid differ");
    return J.sphere_integral(r);
}

RadialKernel normalize(const RadialKernel& J) {
    const LevelSum mass = J.total_mass();
    if (!(mass.value > 0.0)) throw KernelError("kernel: total mass is zero, cannot normalize");
    if (!std::isfinite(mass.value)) throw KernelError("kernel: total mass is not finite");
    RadialKernel out = J.with_scale(J.scale() / mass.value);
    out.normalized_ = true;
    return out;
}

TruncatedKernel truncate(const RadialKernel& J, int N) {
    if (N < 1) throw KernelError("kernel: truncation level N must be >= 1");
    TruncatedKernel tk{J, N, 0.0, 0.0};
    tk.diag_mass = J.ball_integral(-N).value;
    double sum = tk.diag_mass;
    for (int r = -N + 1; r <= N; ++r) sum += J.sphere_integral(r);
    tk.j_N = sum;
    return tk;
}

TruncatedKernel truncate(const RadialKernel& J, const GridParams& params) {
    if (J.p() != params.p || J.n() != params.n)
        throw KernelError("kernel: (p, n) of kernel and grid differ");
    return truncate(J, params.N);
}

}  // namespace padr
