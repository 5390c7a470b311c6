#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "padr/energy.hpp"
#include "padr/operator.hpp"
#include "padr/reaction.hpp"

namespace padr {

enum class Method { ExplicitEuler, RK4, PicardMild };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct IntegratorConfig {
    Method method = Method::RK4;
    double dt = 0.01;
    double T = 1.0;
    int record_every = 1;
    double picard_tol = 1e-13;
    /// Require dt < h_max of the reaction.
    bool contractive = false;
    /// Keep full snapshots at recorded times (times and energies are always kept).
    bool keep_snapshots = true;
    /// When set, the sup distance to this state is recorded.
    std::optional<State> target;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> snapshots;
    std::vector<EnergyBreakdown> energy_trace;
    std::vector<double> min_value;
    std::vector<double> max_value;
    std::vector<double> sup_distance_to_target;
    State final_state;
    std::size_t steps = 0;
    double dt = 0.0;
    /// Largest single-step increase of the total energy (<= 0 when every
    /// step decreased it).
    double max_energy_increase = 0.0;
    std::size_t max_energy_increase_step = 0;
};

/// Called at every recorded time with (t, u).
using Observer = std::function<void(double, const State&)>;

/// Step count and effective time step: n = ceil(T / dt), dt_eff = T / n.
std::pair<std::size_t, double> step_plan(double T, double dt);

/// Explicit stability limit: largest dt allowed for the method.
double stable_dt_limit(const UltradiffOperator& op, const Reaction& rx, Method m);

/// du/dt = -A^(N) u - lambda f(u) from u0 over [0, T].
Trajectory integrate(const State& u0, const UltradiffOperator& op, const Reaction& rx,
                     const IntegratorConfig& cfg, const Observer& observer = {});

/// Mild-solution integrator (collocation Picard sweeps on the variation of
/// constants formula); same output as integrate with method PicardMild.
Trajectory picard_mild(const State& u0, const UltradiffOperator& op, const Reaction& rx,
                       const IntegratorConfig& cfg, const Observer& observer = {});

struct ComparisonReport {
    bool ok = true;
    double worst_margin = 0.0;
    double worst_time = 0.0;
    std::size_t worst_index = 0;
    /// Set when the grid is smaller than the comparison statement requires.
    std::string advisory;
};

/// Runs u0 and v0 (u0 >= v0) with the same configuration and reports the
/// smallest value of min_k (u_k - v_k) over recorded times.
ComparisonReport comparison_check(const State& u0, const State& v0, const UltradiffOperator& op,
                                  const Reaction& rx, const IntegratorConfig& cfg,
                                  double tol = 1e-9);

/// (u_tilde + eps e^{-beta t}, u_tilde - eps e^{-beta t}).
std::pair<State, State> envelope_bounds(const State& u_tilde, double eps, double beta, double t);

struct EnvelopeCertificate {
    bool ok = true;
    double worst_defect = 0.0;
    double worst_time = 0.0;
    std::size_t worst_index = 0;
    bool worst_is_upper = true;
};

/// Samples the super/sub-solution defects of the envelopes at the given
/// times: d/dt u_up + A u_up + lambda f(u_up) >= -tol and the mirror
/// inequality for the lower envelope.
EnvelopeCertificate certify_envelope(const State& u_tilde, const UltradiffOperator& op,
                                     const Reaction& rx, double eps, double beta,
                                     const std::vector<double>& times, double tol = 1e-9);

}  // namespace padr
