#include "padr/approx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "padr/parallel.hpp"

namespace padr {

namespace {

__extension__ typedef __int128 i128;

std::size_t upow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

i128 ipow128(int base, int exp) {
    i128 r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Per-coordinate split of an ordinal into its mixed-radix values m_j.
std::vector<std::size_t> split(std::size_t ordinal, std::size_t per_coord, int n) {
    std::vector<std::size_t> m(n);
    for (int j = n - 1; j >= 0; --j) {
        m[j] = ordinal % per_coord;
        ordinal /= per_coord;
    }
    return m;
}

std::size_t join(const std::vector<std::size_t>& m, std::size_t per_coord) {
    std::size_t o = 0;
    for (std::size_t v : m) o = o * per_coord + v;
    return o;
}

// Coarse ordinal of a fine point, and whether the point lies in B_{Nc}.
std::size_t coarse_of(std::size_t fine_ord, const GridParams& fine, int Nc, bool& inside) {
    const auto p = static_cast<std::size_t>(fine.p);
    const std::size_t shift = upow(p, fine.N - Nc);
    const std::size_t coarse_pc = upow(p, 2 * Nc);
    const std::size_t bound = upow(p, fine.N + Nc);
    auto m = split(fine_ord, fine.per_coordinate(), fine.n);
    inside = true;
    for (auto& v : m) {
        if (v >= bound) inside = false;
        v = (v / shift) % coarse_pc;
    }
    return join(m, coarse_pc);
}

void require_profile_grid(const Profile& profile, const GridParams& params) {
    if (profile.p() != params.p || profile.n() != params.n)
        throw std::invalid_argument("profile (p, n) does not match the grid");
}

double dot(const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// sup over fine points of B_{Nc} of |coarse value - fine value|.
double domain_gap(const State& coarse, const State& fine, const GridParams& fine_params, int Nc,
                  const std::vector<std::size_t>& inner) {
    double g = 0.0;
    for (std::size_t f : inner) {
        bool inside = false;
        const std::size_t c = coarse_of(f, fine_params, Nc, inside);
        g = std::max(g, std::abs(coarse[c] - fine[f]));
    }
    return g;
}

}  // namespace

// ------------------------------------------------------------------ Profile

Profile Profile::constant(int p, int n, double value) {
    if (!is_prime(p) || n < 1) throw std::invalid_argument("profile: invalid (p, n)");
    Profile pr;
    pr.kind_ = Kind::Constant;
    pr.p_ = p;
    pr.n_ = n;
    pr.constant_ = value;
    return pr;
}

Profile Profile::digit_rule(int p, int n, int L, std::vector<double> values, double outside) {
    Profile pr = constant(p, n, 0.0);
    if (L < 0) throw std::invalid_argument("digit rule scale L must be >= 0");
    if (values.size() != upow(static_cast<std::size_t>(p), 2 * L * n))
        throw std::invalid_argument("digit rule needs p^(2Ln) = " +
                                    std::to_string(upow(static_cast<std::size_t>(p), 2 * L * n)) +
                                    " values, got " + std::to_string(values.size()));
    pr.kind_ = Kind::DigitRule;
    pr.L_ = L;
    pr.values_ = std::move(values);
    pr.outside_ = outside;
    return pr;
}

Profile Profile::norm_rule(int p, int n, Center center,
                           std::vector<std::pair<int, double>> thresholds, double beyond) {
    Profile pr = constant(p, n, 0.0);
    if (center.numerators.empty()) center.numerators.assign(n, 0);
    if (center.numerators.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("norm rule center needs n coordinates");
    if (center.exponent < 0) throw std::invalid_argument("center exponent must be >= 0");
    std::sort(thresholds.begin(), thresholds.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    pr.kind_ = Kind::NormRule;
    pr.center_ = std::move(center);
    pr.thresholds_ = std::move(thresholds);
    pr.outside_ = beyond;
    return pr;
}

int Profile::scale() const {
    switch (kind_) {
        case Kind::Constant:
            return 0;
        case Kind::DigitRule:
            return L_;
        case Kind::NormRule: {
            int s = center_.exponent;
            if (!thresholds_.empty()) s = std::max(s, -thresholds_.front().first);
            return std::max(s, 0);
        }
    }
    return 0;
}

double Profile::eval_digits(int N, std::span<const int> digits) const {
    const int slots = 2 * N;
    if (digits.size() != static_cast<std::size_t>(slots * n_))
        throw std::invalid_argument("profile: digit count does not match N");
    switch (kind_) {
        case Kind::Constant:
            return constant_;
        case Kind::DigitRule: {
            const std::size_t per = upow(static_cast<std::size_t>(p_), 2 * L_);
            std::size_t ord = 0;
            for (int j = 0; j < n_; ++j) {
                const int* d = digits.data() + j * slots;
                for (int k = -N; k < -L_; ++k)
                    if (d[k + N] != 0) return outside_;
                std::size_t m = 0;
                for (int k = -L_; k < L_; ++k) {
                    const int a = (k >= -N && k < N) ? d[k + N] : 0;
                    m = m * static_cast<std::size_t>(p_) + static_cast<std::size_t>(a);
                }
                ord = ord * per + m;
            }
            return values_[ord];
        }
        case Kind::NormRule: {
            const int D = std::max(N, center_.exponent);
            bool any = false;
            int r = std::numeric_limits<int>::min();
            for (int j = 0; j < n_; ++j) {
                const int* d = digits.data() + j * slots;
                i128 X = 0;
                for (int s = slots - 1; s >= 0; --s) X = X * p_ + d[s];
                // X currently is sum a_k p^(k+N); rescale to denominator p^D.
                X *= ipow128(p_, D - N);
                const i128 C =
                    static_cast<i128>(center_.numerators[j]) * ipow128(p_, D - center_.exponent);
                i128 diff = X - C;
                if (diff == 0) continue;
                int v = 0;
                while (diff % p_ == 0) {
                    diff /= p_;
                    ++v;
                }
                r = std::max(r, D - v);
                any = true;
            }
            for (const auto& [radius, value] : thresholds_)
                if (!any || r <= radius) return value;
            return outside_;
        }
    }
    return 0.0;
}

double Profile::sup_norm() const {
    switch (kind_) {
        case Kind::Constant:
            return std::abs(constant_);
        case Kind::DigitRule: {
            double m = std::abs(outside_);
            for (double v : values_) m = std::max(m, std::abs(v));
            return m;
        }
        case Kind::NormRule: {
            double m = std::abs(outside_);
            for (const auto& t : thresholds_) m = std::max(m, std::abs(t.second));
            return m;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------- P_N, E_N, ...

State project(const Profile& profile, const GridParams& params) {
    require_profile_grid(profile, params);
    const Grid grid(params);
    State out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const GridIndex idx = grid.index(i);
        out[i] = profile.eval_digits(params.N, idx.digits());
    }
    return out;
}

State embed(const State& u, const GridParams& coarse, int N_fine) {
    if (N_fine <= coarse.N) throw std::invalid_argument("embed needs N' > N");
    if (u.size() != coarse.size()) throw std::invalid_argument("embed: state length mismatch");
    const GridParams fine{coarse.p, coarse.n, N_fine};
    fine.validate();
    State out(fine.size(), 0.0);
    for (std::size_t f = 0; f < out.size(); ++f) {
        bool inside = false;
        const std::size_t c = coarse_of(f, fine, coarse.N, inside);
        if (inside) out[f] = u[c];
    }
    return out;
}

State restrict_to(const State& u_fine, int N_fine, const GridParams& coarse) {
    const GridParams fine{coarse.p, coarse.n, N_fine};
    if (N_fine < coarse.N) throw std::invalid_argument("restrict needs N' >= N");
    if (u_fine.size() != fine.size()) throw std::invalid_argument("restrict: length mismatch");
    const std::size_t shift = upow(static_cast<std::size_t>(coarse.p), N_fine - coarse.N);
    State out(coarse.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        auto m = split(c, coarse.per_coordinate(), coarse.n);
        for (auto& v : m) v *= shift;
        out[c] = u_fine[join(m, fine.per_coordinate())];
    }
    return out;
}

std::vector<std::size_t> inner_ball_points(const GridParams& fine, int N_coarse) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < fine.size(); ++f) {
        bool inside = false;
        coarse_of(f, fine, N_coarse, inside);
        if (inside) out.push_back(f);
    }
    return out;
}

std::vector<double> projection_error(const Profile& profile, const std::vector<int>& N_list) {
    if (N_list.empty()) return {};
    const int Ns = *std::max_element(N_list.begin(), N_list.end()) + 2;
    const GridParams sample{profile.p(), profile.n(), Ns};
    const Grid grid(sample);
    std::vector<double> fine_values(grid.size());
    std::vector<std::vector<int>> fine_digits(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const GridIndex idx = grid.index(f);
        fine_digits[f].assign(idx.digits().begin(), idx.digits().end());
        fine_values[f] = profile.eval_digits(Ns, idx.digits());
    }
    std::vector<double> out;
    for (int N : N_list) {
        if (N < 1) throw std::invalid_argument("projection_error: N must be >= 1");
        double err = 0.0;
        std::vector<int> coarse(static_cast<std::size_t>(2 * N * profile.n()));
        for (std::size_t f = 0; f < grid.size(); ++f) {
            const auto& d = fine_digits[f];
            bool inside = true;
            for (int j = 0; j < profile.n() && inside; ++j)
                for (int k = -Ns; k < -N; ++k)
                    if (d[j * 2 * Ns + k + Ns] != 0) {
                        inside = false;
                        break;
                    }
            if (!inside) continue;
            for (int j = 0; j < profile.n(); ++j)
                for (int k = -N; k < N; ++k) coarse[j * 2 * N + k + N] = d[j * 2 * Ns + k + Ns];
            err = std::max(err, std::abs(fine_values[f] - profile.eval_digits(N, coarse)));
        }
        out.push_back(err);
    }
    return out;
}

State solve_shifted(const UltradiffOperator& op, double shift, const State& b, double rel_tol,
                    std::size_t max_iter) {
    if (!(shift < 0.0)) throw std::invalid_argument("resolvent shift must be < 0");
    if (b.size() != op.size()) throw std::invalid_argument("solve: length mismatch");
    if (max_iter == 0) max_iter = 10 * b.size() + 100;
    const auto apply = [&](const State& x) {
        State y = matvec_fast(op, x);
        for (std::size_t k = 0; k < x.size(); ++k) y[k] -= shift * x[k];
        return y;
    };
    State x(b.size(), 0.0);
    State r = b;
    State d = r;
    double rr = dot(r, r);
    const double target = rel_tol * std::sqrt(dot(b, b));
    if (std::sqrt(rr) <= target) return x;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const State Ad = apply(d);
        const double alpha = rr / dot(d, Ad);
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += alpha * d[k];
            r[k] -= alpha * Ad[k];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= target) return x;
        const double beta = rr_new / rr;
        for (std::size_t k = 0; k < x.size(); ++k) d[k] = r[k] + beta * d[k];
        rr = rr_new;
    }
    throw AbortError("conjugate gradients did not converge in " + std::to_string(max_iter) +
                     " iterations");
}

std::vector<double> resolvent_check(const RadialKernel& kernel, double lambda0,
                                    const Profile& profile, const std::vector<int>& N_list) {
    std::vector<State> sols;
    std::vector<GridParams> grids;
    for (int N : N_list) {
        const GridParams params{kernel.p(), kernel.n(), N};
        const auto op = UltradiffOperator::build(params, truncate(kernel, params));
        sols.push_back(solve_shifted(op, lambda0, project(profile, params)));
        grids.push_back(params);
    }
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
        const auto inner = inner_ball_points(grids[i + 1], grids[i].N);
        gaps.push_back(domain_gap(sols[i], sols[i + 1], grids[i + 1], grids[i].N, inner));
    }
    return gaps;
}

std::vector<ConvergenceRow> convergence_study(const Profile& profile, const RadialKernel& kernel,
                                              const Reaction& rx, const IntegratorConfig& cfg,
                                              const std::vector<int>& N_list) {
    for (std::size_t i = 1; i < N_list.size(); ++i)
        if (N_list[i] <= N_list[i - 1])
            throw ConfigError("convergence study needs an increasing N list");

    struct Run {
        GridParams params;
        std::vector<double> times;
        std::vector<State> nonlinear;
        std::vector<State> linear;
        double runtime_ms = 0.0;
    };

    const auto run_one = [&](int N) {
        const auto start = std::chrono::steady_clock::now();
        Run run;
        run.params = GridParams{kernel.p(), kernel.n(), N};
        const auto op = UltradiffOperator::build(run.params, truncate(kernel, run.params));
        const State u0 = project(profile, run.params);
        IntegratorConfig c = cfg;
        c.keep_snapshots = true;
        c.target.reset();
        Trajectory tr = integrate(u0, op, rx, c);
        run.times = tr.times;
        run.nonlinear = std::move(tr.snapshots);
        State lin = u0;
        double t_prev = 0.0;
        for (double t : run.times) {
            lin = semigroup_apply(op, lin, t - t_prev);
            run.linear.push_back(lin);
            t_prev = t;
        }
        run.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        return run;
    };

    const auto policy = thread_count() > 1 ? std::launch::async : std::launch::deferred;
    std::vector<std::future<Run>> futures;
    for (int N : N_list) futures.push_back(std::async(policy, run_one, N));
    std::vector<Run> runs;
    for (auto& f : futures) runs.push_back(f.get());

    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const Run& a = runs[i];
        const Run& b = runs[i + 1];
        const auto inner = inner_ball_points(b.params, a.params.N);
        ConvergenceRow row;
        row.N_coarse = a.params.N;
        row.N_fine = b.params.N;
        for (std::size_t s = 0; s < a.times.size(); ++s) {
            row.sup_gap =
                std::max(row.sup_gap, domain_gap(a.nonlinear[s], b.nonlinear[s], b.params,
                                                 a.params.N, inner));
            row.semigroup_gap = std::max(
                row.semigroup_gap, domain_gap(a.linear[s], b.linear[s], b.params, a.params.N, inner));
        }
        row.runtime_ms = b.runtime_ms;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace padr
