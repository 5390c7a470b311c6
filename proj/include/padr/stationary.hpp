#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "padr/operator.hpp"
#include "padr/reaction.hpp"

namespace padr {

/// Index set I_M of grid points where the pattern sits in the +1 phase.
class PatternSet {
public:
    PatternSet(GridParams params, std::vector<std::size_t> members);

    static PatternSet all(const GridParams& params);
    static PatternSet none(const GridParams& params);
    /// Points within distance p^r of `center`.
    static PatternSet ball(const Grid& grid, std::size_t center, int r);

    const GridParams& params() const { return params_; }
    const std::vector<std::size_t>& members() const { return members_; }
    bool contains(std::size_t ordinal) const { return mask_.at(ordinal) != 0; }
    std::size_t size() const { return mask_.size(); }

private:
    GridParams params_;
    std::vector<std::size_t> members_;
    std::vector<char> mask_;
};

struct StationaryResult {
    State u_tilde;
    std::size_t iterations = 0;
    /// sup-norm of A^(N) u + lambda f(u) at the returned state.
    double residual = 0.0;
    /// Largest observed ratio of consecutive step sizes.
    double contraction_rate = 0.0;
};

/// T(u) = u - h (A^(N) u + lambda f(u)).
State contraction_map(const State& u, const UltradiffOperator& op, const Reaction& rx, double h);

/// sup-norm of A^(N) u + lambda f(u).
double residual(const State& u, const UltradiffOperator& op, const Reaction& rx);

/// Fixed point of T started from u_plus on I_M and u_minus elsewhere.
StationaryResult solve(const PatternSet& pattern, const UltradiffOperator& op, const Reaction& rx,
                       double h = 0.0625, double tol = 1e-12, std::size_t max_iter = 1000000);

struct BandReport {
    bool ok = true;
    /// min over i of (u_i - alpha_plus) on I_M and (alpha_minus - u_i) off it.
    double min_margin = 0.0;
    std::size_t worst_index = 0;
    /// Indices outside their band or outside [-1, 1].
    std::vector<std::size_t> failures;
    std::string detail;
};

BandReport verify_bands(const State& u, const PatternSet& pattern, const Reaction& rx,
                        double slack = 1e-12);

}  // namespace padr
