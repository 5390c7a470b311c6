#pragma once

#include "padr/operator.hpp"
#include "padr/reaction.hpp"

namespace padr {

struct EnergyBreakdown {
    double interaction = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

/// E_N[u] = (p^-Nn / 2) <u, A^(N) u> + lambda p^-Nn sum_i W(u_i).
EnergyBreakdown energy(const State& u, const UltradiffOperator& op, const Reaction& rx);

/// Same value, with the quadratic form written as the explicit double sum
/// over pairs. O(M^2); for cross-checks.
EnergyBreakdown energy_pairwise(const State& u, const UltradiffOperator& op, const Reaction& rx);

/// p^-Nn (A^(N) u + lambda f(u)).
State gradient(const State& u, const UltradiffOperator& op, const Reaction& rx);

}  // namespace padr
