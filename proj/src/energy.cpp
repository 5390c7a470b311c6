#include "padr/energy.hpp"

#include <stdexcept>

namespace padr {

namespace {

double potential_sum(const State& u, const Reaction& rx) {
    double s = 0.0;
    for (double v : u) s += rx.W_at(v);
    return s;
}

}  // namespace

EnergyBreakdown energy(const State& u, const UltradiffOperator& op, const Reaction& rx) {
    if (u.size() != op.size()) throw std::invalid_argument("energy: state length mismatch");
    const double vol = op.grid().cell_volume();
    const State Au = matvec_fast(op, u);
    double q = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) q += u[k] * Au[k];
    EnergyBreakdown e;
    e.interaction = 0.5 * vol * q;
    e.potential = rx.lambda * vol * potential_sum(u, rx);
    e.total = e.interaction + e.potential;
    return e;
}

EnergyBreakdown energy_pairwise(const State& u, const UltradiffOperator& op, const Reaction& rx) {
    if (u.size() != op.size()) throw std::invalid_argument("energy: state length mismatch");
    const double vol = op.grid().cell_volume();
    double sq = 0.0, pair = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sq += u[i] * u[i];
        for (std::size_t j = 0; j < u.size(); ++j) pair += op.adjacency(i, j) * u[i] * u[j];
    }
    EnergyBreakdown e;
    e.interaction = 0.5 * op.j_N() * vol * sq - 0.5 * vol * pair;
    e.potential = rx.lambda * vol * potential_sum(u, rx);
    e.total = e.interaction + e.potential;
    return e;
}

State gradient(const State& u, const UltradiffOperator& op, const Reaction& rx) {
    if (u.size() != op.size()) throw std::invalid_argument("gradient: state length mismatch");
    const double vol = op.grid().cell_volume();
    State g = matvec_fast(op, u);
    for (std::size_t k = 0; k < u.size(); ++k) g[k] = vol * (g[k] + rx.lambda * rx.f_at(u[k]));
    return g;
}

}  // namespace padr
