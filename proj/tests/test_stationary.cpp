#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "padr/dynamics.hpp"
#include "padr/stationary.hpp"

using namespace padr;

namespace {

RadialKernel table_kernel() { return normalize(RadialKernel::table(2, 1, {{0, 1.0}, {1, 0.5}})); }

UltradiffOperator table_op() { return UltradiffOperator::build({2, 1, 1}, truncate(table_kernel(), 1)); }

}  // namespace

TEST_SUITE("stationary") {

TEST_CASE("pattern sets") {
    const GridParams g{2, 1, 2};
    CHECK(PatternSet::all(g).members().size() == 16);
    CHECK(PatternSet::none(g).members().empty());
    const PatternSet b = PatternSet::ball(Grid(g), 0, 0);
    CHECK(b.members().size() == 4);
    for (std::size_t k : b.members()) CHECK(Grid(g).valuation(0, k) >= Valuation(0));
    CHECK_THROWS(PatternSet(g, {16}));
}

TEST_CASE("whole grid and empty pattern") {
    const UltradiffOperator op = table_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    const StationaryResult all = solve(PatternSet::all(op.params()), op, rx);
    for (double v : all.u_tilde) CHECK(std::abs(v - 1.0) <= 1e-11);
    const StationaryResult none = solve(PatternSet::none(op.params()), op, rx);
    for (double v : none.u_tilde) CHECK(std::abs(v + 1.0) <= 1e-11);
}

TEST_CASE("canonical patterned solution") {
    const UltradiffOperator op = table_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    const PatternSet pattern(op.params(), {0, 1});
    const StationaryResult res = solve(pattern, op, rx, 0.0625, 1e-12);
    CHECK(res.residual <= 1e-11);
    CHECK(res.u_tilde[0] >= 0.75);
    CHECK(res.u_tilde[1] <= 1.0);
    CHECK(res.u_tilde[2] <= -0.75);
    CHECK(res.u_tilde[3] >= -1.0);
    CHECK(verify_bands(res.u_tilde, pattern, rx).ok);
    const auto newton = oracle::newton_stationary(oracle::generator(op.params(), table_kernel()), rx.f, 6.0,
                                                  {0.9, 0.9, -0.9, -0.9});
    CHECK(oracle::sup_diff(newton, res.u_tilde) <= 1e-8);
    CHECK(res.u_tilde[0] == doctest::Approx(std::sqrt(5.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("every pattern on the 4-point grid") {
    const UltradiffOperator op = table_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    const Eigen::MatrixXd A = oracle::generator(op.params(), table_kernel());
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<std::size_t> members;
        State guess(4);
        for (std::size_t k = 0; k < 4; ++k) {
            if (mask & (1u << k)) members.push_back(k);
            guess[k] = (mask & (1u << k)) ? 0.9 : -0.9;
        }
        const PatternSet pattern(op.params(), members);
        const StationaryResult res = solve(pattern, op, rx);
        CHECK(res.residual <= 1e-10);
        CHECK(verify_bands(res.u_tilde, pattern, rx).ok);
        CHECK(res.contraction_rate < 1.0 - 0.0625 * 6.0 * 0.5 + 1e-12);
        CHECK(oracle::sup_diff(oracle::newton_stationary(A, rx.f, 6.0, guess), res.u_tilde) <= 1e-8);
        const State Tu = contraction_map(res.u_tilde, op, rx, 0.0625);
        CHECK(oracle::sup_diff(Tu, res.u_tilde) <= 10 * 1e-12);
    }
}

TEST_CASE("larger grid pattern") {
    const GridParams g{2, 1, 3};
    const UltradiffOperator op = UltradiffOperator::build(g, truncate(normalize(RadialKernel::exp_landscape(2, 1, 1.0)), g));
    const Reaction rx = Reaction::make_cubic(6.0);
    const PatternSet pattern = PatternSet::ball(op.grid(), 5, 1);
    const StationaryResult res = solve(pattern, op, rx);
    CHECK(res.residual <= 1e-11);
    CHECK(verify_bands(res.u_tilde, pattern, rx).ok);
    // The pattern is an equilibrium of the dynamics.
    IntegratorConfig c;
    c.dt = 0.02;
    c.T = 100.0;
    c.record_every = 500;
    c.target = res.u_tilde;
    const Trajectory tr = integrate(res.u_tilde, op, rx, c);
    for (double d : tr.sup_distance_to_target) CHECK(d <= 1e-8);
}

TEST_CASE("residual examples") {
    const UltradiffOperator op = table_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    CHECK(residual(State(4, 1.0), op, rx) == 0.0);
    CHECK(residual(State(4, 0.0), op, rx) == 0.0);
    CHECK(residual({1, 1, -1, -1}, op, rx) == 1.0);
}

TEST_CASE("band verification") {
    const GridParams g{2, 1, 1};
    const Reaction rx = Reaction::make_cubic(6.0);
    const BandReport one = verify_bands(State(4, 1.0), PatternSet::all(g), rx);
    CHECK(one.ok);
    CHECK(one.min_margin == 0.25);
    const BandReport zero = verify_bands(State(4, 0.0), PatternSet(g, {1}), rx);
    CHECK_FALSE(zero.ok);
    CHECK(zero.failures.size() == 4);
    CHECK_FALSE(zero.detail.empty());
    const BandReport big = verify_bands(State(4, 1.5), PatternSet::all(g), rx);
    CHECK_FALSE(big.ok);
}

TEST_CASE("preconditions") {
    const UltradiffOperator op = table_op();
    const PatternSet pattern(op.params(), {0});
    CHECK_THROWS_AS(solve(pattern, op, Reaction::make_cubic(6.0), 0.08), HypothesisError);
    CHECK_THROWS_AS(solve(pattern, op, Reaction::make_cubic(2.0)), HypothesisError);
    CHECK_THROWS_AS(solve(pattern, op, Reaction::make_cubic(6.0), 0.0625, 1e-12, 3), AbortError);
    CHECK_THROWS_AS(solve(PatternSet({2, 1, 2}, {0}), op, Reaction::make_cubic(6.0)), std::invalid_argument);
}

}
