#include "padr/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace padr {

namespace {

constexpr double kBlowUp = 10.0;
constexpr int kMaxSweeps = 100;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// -A u - lambda f(u)
State rhs(const UltradiffOperator& op, const Reaction& rx, const State& u) {
    State out = matvec_fast(op, u);
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = -out[k] - rx.lambda * rx.f_at(u[k]);
    return out;
}

void axpy(State& y, double a, const State& x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

double sup_diff(const State& a, const State& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double sup_norm(const State& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

State euler_step(const UltradiffOperator& op, const Reaction& rx, const State& u, double dt) {
    State next = u;
    axpy(next, dt, rhs(op, rx, u));
    return next;
}

State rk4_step(const UltradiffOperator& op, const Reaction& rx, const State& u, double dt) {
    const State k1 = rhs(op, rx, u);
    State tmp = u;
    axpy(tmp, 0.5 * dt, k1);
    const State k2 = rhs(op, rx, tmp);
    tmp = u;
    axpy(tmp, 0.5 * dt, k2);
    const State k3 = rhs(op, rx, tmp);
    tmp = u;
    axpy(tmp, dt, k3);
    const State k4 = rhs(op, rx, tmp);
    State next = u;
    for (std::size_t k = 0; k < u.size(); ++k)
        next[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    return next;
}

// Collocation on equispaced nodes 0, dt/3, 2dt/3, dt; the reaction term is
// interpolated in time and each convolution integral uses 4-point
// Gauss-Legendre quadrature.
class PicardStepper {
public:
    PicardStepper(const UltradiffOperator& op, const Reaction& rx, double dt, double tol)
        : op_(op), rx_(rx), dt_(dt), tol_(tol) {
        for (int j = 0; j < kNodes; ++j) nodes_[j] = dt * j / (kNodes - 1);
    }

    State step(const State& u0, std::size_t step_index) {
        std::array<State, kNodes> U;
        std::array<State, kNodes> free;  // e^{-tau_j A} u0
        for (int j = 0; j < kNodes; ++j) {
            free[j] = j == 0 ? u0 : semigroup_apply(op_, u0, nodes_[j]);
            U[j] = u0;
        }
        double prev_change = 0.0;
        for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
            std::array<State, kNodes> g;
            for (int j = 0; j < kNodes; ++j) {
                g[j].resize(u0.size());
                for (std::size_t k = 0; k < u0.size(); ++k)
                    g[j][k] = -rx_.lambda * rx_.f_at(U[j][k]);
            }
            double change = 0.0;
            std::array<State, kNodes> next;
            next[0] = u0;
            for (int j = 1; j < kNodes; ++j) {
                next[j] = free[j];
                if (rx_.lambda != 0.0) axpy(next[j], 1.0, convolution(g, nodes_[j]));
                change = std::max(change, sup_diff(next[j], U[j]));
            }
            U = std::move(next);
            if (rx_.lambda == 0.0) break;
            double scale = 1.0;
            for (const auto& s : U) scale = std::max(scale, sup_norm(s));
            if (change <= tol_ * scale) break;
            if (sweep == kMaxSweeps)
                throw AbortError("Picard iteration did not converge in " +
                                 std::to_string(kMaxSweeps) + " sweeps at step " +
                                 std::to_string(step_index) + "; last change " + fmt(change) +
                                 ", contraction estimate " +
                                 fmt(prev_change > 0.0 ? change / prev_change : 0.0));
            prev_change = change;
        }
        return U[kNodes - 1];
    }

private:
    static constexpr int kNodes = 4;

    double lagrange(int j, double s) const {
        double v = 1.0;
        for (int m = 0; m < kNodes; ++m)
            if (m != j) v *= (s - nodes_[m]) / (nodes_[j] - nodes_[m]);
        return v;
    }

    // int_0^tau e^{-(tau - s)A} g(s) ds
    State convolution(const std::array<State, kNodes>& g, double tau) const {
        static constexpr std::array<double, 4> x = {-0.8611363115940526, -0.3399810435848563,
                                                    0.3399810435848563, 0.8611363115940526};
        static constexpr std::array<double, 4> w = {0.3478548451374538, 0.6521451548625461,
                                                    0.6521451548625461, 0.3478548451374538};
        State out(g[0].size(), 0.0);
        for (int q = 0; q < 4; ++q) {
            const double s = 0.5 * tau * (x[q] + 1.0);
            State gs(out.size(), 0.0);
            for (int j = 0; j < kNodes; ++j) axpy(gs, lagrange(j, s), g[j]);
            axpy(out, 0.5 * tau * w[q], semigroup_apply(op_, gs, tau - s));
        }
        return out;
    }

    const UltradiffOperator& op_;
    const Reaction& rx_;
    double dt_;
    double tol_;
    std::array<double, kNodes> nodes_{};
};

void record(Trajectory& tr, const IntegratorConfig& cfg, double t, const State& u,
            const EnergyBreakdown& e, const Observer& observer) {
    tr.times.push_back(t);
    tr.energy_trace.push_back(e);
    tr.min_value.push_back(*std::min_element(u.begin(), u.end()));
    tr.max_value.push_back(*std::max_element(u.begin(), u.end()));
    if (cfg.target) tr.sup_distance_to_target.push_back(sup_diff(u, *cfg.target));
    if (cfg.keep_snapshots) tr.snapshots.push_back(u);
    if (observer) observer(t, u);
}

void check_blow_up(const State& u, std::size_t step) {
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!std::isfinite(u[k]) || std::abs(u[k]) > kBlowUp)
            throw AbortError("blow-up at step " + std::to_string(step) + ": u[" +
                             std::to_string(k) + "] = " + fmt(u[k]));
    }
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::ExplicitEuler:
            return "euler";
        case Method::RK4:
            return "rk4";
        case Method::PicardMild:
            return "picard";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "euler" || name == "explicit_euler") return Method::ExplicitEuler;
    if (name == "rk4") return Method::RK4;
    if (name == "picard" || name == "picard_mild") return Method::PicardMild;
    throw ConfigError("unknown integrator method '" + name + "'");
}

std::pair<std::size_t, double> step_plan(double T, double dt) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("integration horizon T must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be > 0");
    const double ratio = T / dt;
    auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
    n = std::max<std::size_t>(n, 1);
    return {n, T / static_cast<double>(n)};
}

double stable_dt_limit(const UltradiffOperator& op, const Reaction& rx, Method m) {
    const double rate = 2.0 * op.j_N() + rx.lambda * rx.max_abs_df;
    if (m == Method::PicardMild || rate <= 0.0) return std::numeric_limits<double>::infinity();
    const double euler = 2.0 / rate;
    return m == Method::RK4 ? euler / 1.4 : euler;
}

Trajectory integrate(const State& u0, const UltradiffOperator& op, const Reaction& rx,
                     const IntegratorConfig& cfg, const Observer& observer) {
    if (u0.size() != op.size()) throw std::invalid_argument("initial state length mismatch");
    if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (cfg.target && cfg.target->size() != op.size())
        throw std::invalid_argument("target state length mismatch");
    for (double v : u0)
        if (!std::isfinite(v)) throw std::invalid_argument("initial state is not finite");
    const auto [steps, dt] = step_plan(cfg.T, cfg.dt);
    const double limit = stable_dt_limit(op, rx, cfg.method);
    if (!(dt < limit))
        throw ConfigError("dt = " + fmt(dt) + " violates the explicit stability limit " +
                          fmt(limit) + " for " + to_string(cfg.method));
    if (cfg.contractive && !(dt < rx.h_max))
        throw HypothesisError("contractive run needs dt < h_max = " + fmt(rx.h_max) +
                              ", got dt = " + fmt(dt));

    Trajectory tr;
    tr.steps = steps;
    tr.dt = dt;
    tr.max_energy_increase = -std::numeric_limits<double>::infinity();
    State u = u0;
    EnergyBreakdown e = energy(u, op, rx);
    record(tr, cfg, 0.0, u, e, observer);

    std::optional<PicardStepper> picard;
    if (cfg.method == Method::PicardMild) picard.emplace(op, rx, dt, cfg.picard_tol);

    for (std::size_t k = 1; k <= steps; ++k) {
        switch (cfg.method) {
            case Method::ExplicitEuler:
                u = euler_step(op, rx, u, dt);
                break;
            case Method::RK4:
                u = rk4_step(op, rx, u, dt);
                break;
            case Method::PicardMild:
                u = picard->step(u, k);
                break;
        }
        check_blow_up(u, k);
        const EnergyBreakdown en = energy(u, op, rx);
        const double inc = en.total - e.total;
        if (inc > tr.max_energy_increase) {
            tr.max_energy_increase = inc;
            tr.max_energy_increase_step = k;
        }
        e = en;
        if (k % static_cast<std::size_t>(cfg.record_every) == 0 || k == steps)
            record(tr, cfg, static_cast<double>(k) * dt, u, e, observer);
    }
    tr.final_state = std::move(u);
    return tr;
}

Trajectory picard_mild(const State& u0, const UltradiffOperator& op, const Reaction& rx,
                       const IntegratorConfig& cfg, const Observer& observer) {
    IntegratorConfig c = cfg;
    c.method = Method::PicardMild;
    return integrate(u0, op, rx, c, observer);
}

ComparisonReport comparison_check(const State& u0, const State& v0, const UltradiffOperator& op,
                                  const Reaction& rx, const IntegratorConfig& cfg, double tol) {
    if (u0.size() != v0.size()) throw std::invalid_argument("comparison: length mismatch");
    for (std::size_t k = 0; k < u0.size(); ++k)
        if (u0[k] < v0[k])
            throw std::invalid_argument("comparison: u0 < v0 at index " + std::to_string(k));
    IntegratorConfig c = cfg;
    c.keep_snapshots = true;
    c.target.reset();
    const Trajectory tu = integrate(u0, op, rx, c);
    const Trajectory tv = integrate(v0, op, rx, c);
    ComparisonReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < tu.times.size(); ++s) {
        for (std::size_t k = 0; k < u0.size(); ++k) {
            const double m = tu.snapshots[s][k] - tv.snapshots[s][k];
            if (m < rep.worst_margin) {
                rep.worst_margin = m;
                rep.worst_time = tu.times[s];
                rep.worst_index = k;
            }
        }
    }
    rep.ok = rep.worst_margin >= -tol;
    if (op.params().N < 2) rep.advisory = "grid resolution N < 2; ordering is not guaranteed";
    return rep;
}

std::pair<State, State> envelope_bounds(const State& u_tilde, double eps, double beta, double t) {
    const double shift = eps * std::exp(-beta * t);
    State up = u_tilde, low = u_tilde;
    for (std::size_t k = 0; k < up.size(); ++k) {
        up[k] += shift;
        low[k] -= shift;
    }
    return {up, low};
}

EnvelopeCertificate certify_envelope(const State& u_tilde, const UltradiffOperator& op,
                                     const Reaction& rx, double eps, double beta,
                                     const std::vector<double>& times, double tol) {
    if (!(eps > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("envelope needs eps > 0 and beta > 0");
    EnvelopeCertificate cert;
    cert.worst_defect = std::numeric_limits<double>::infinity();
    for (double t : times) {
        const double shift = eps * std::exp(-beta * t);
        const auto [up, low] = envelope_bounds(u_tilde, eps, beta, t);
        const State Aup = matvec_fast(op, up);
        const State Alow = matvec_fast(op, low);
        for (std::size_t k = 0; k < up.size(); ++k) {
            const double du = -beta * shift + Aup[k] + rx.lambda * rx.f_at(up[k]);
            const double dl = -(beta * shift + Alow[k] + rx.lambda * rx.f_at(low[k]));
            if (du < cert.worst_defect) {
                cert.worst_defect = du;
                cert.worst_time = t;
                cert.worst_index = k;
                cert.worst_is_upper = true;
            }
            if (dl < cert.worst_defect) {
                cert.worst_defect = dl;
                cert.worst_time = t;
                cert.worst_index = k;
                cert.worst_is_upper = false;
            }
        }
    }
    cert.ok = cert.worst_defect >= -tol;
    return cert;
}

}  // namespace padr
