#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "padr/approx.hpp"

using namespace padr;

namespace {

Profile indicator_unit_ball() { return Profile::norm_rule(2, 1, {}, {{0, 1.0}}, -1.0); }

double sup(const State& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

// Values depend on the digits a_{-2}, ..., a_1 (scale p^-2 on B_2).
Profile digit_profile() {
    std::vector<double> values(16);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::sin(1.0 + 0.7 * double(i));
    return Profile::digit_rule(2, 1, 2, values, -0.25);
}

}  // namespace

TEST_SUITE("approx") {

TEST_CASE("projection examples") {
    const State c = project(Profile::constant(3, 2, 0.4), {3, 2, 1});
    CHECK(c.size() == 81);
    for (double v : c) CHECK(v == 0.4);
    CHECK(project(indicator_unit_ball(), {2, 1, 1}) == State{1, 1, -1, -1});
    const State d = project(digit_profile(), {2, 1, 3});
    CHECK(sup(d) <= digit_profile().sup_norm());
    CHECK_THROWS(project(Profile::constant(3, 1, 0.0), {2, 1, 1}));
}

TEST_CASE("off-center norm rule") {
    // Center 1/2: the radius-1/2 ball around 1/2 at N = 1 is the single point 1/2.
    Profile::Center c;
    c.numerators = {1};
    c.exponent = 1;
    const Profile pr = Profile::norm_rule(2, 1, c, {{-1, 1.0}, {0, 0.5}}, -1.0);
    CHECK(project(pr, {2, 1, 1}) == State{-1, -1, 1, 0.5});
}

TEST_CASE("embedding") {
    const GridParams coarse{2, 1, 1};
    const State u{0.1, 0.2, 0.3, 0.4};
    const State e = embed(u, coarse, 2);
    REQUIRE(e.size() == 16);
    const GridParams fine{2, 1, 2};
    const Grid grid(fine);
    const auto inner = inner_ball_points(fine, 1);
    CHECK(inner.size() == 8);
    for (double v : u) CHECK(std::count(e.begin(), e.end(), v) == 2);
    for (std::size_t f = 0; f < e.size(); ++f) {
        const bool in = std::find(inner.begin(), inner.end(), f) != inner.end();
        // Points of norm 4 are exactly the ones with a_{-2} != 0.
        CHECK(in == (grid.digit_of(f, 0, -2) == 0));
        if (!in) CHECK(e[f] == 0.0);
        else CHECK(e[f] == u[Grid(coarse).ordinal_of(std::vector<int>{grid.digit_of(f, 0, -1), grid.digit_of(f, 0, 0)})]);
    }
    CHECK(sup(e) == sup(u));
    CHECK(restrict_to(e, 2, coarse) == u);
    CHECK_THROWS(embed(u, coarse, 1));
}

TEST_CASE("embedding in two dimensions") {
    const GridParams coarse{3, 2, 1};
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    State u(coarse.size());
    for (double& v : u) v = val(rng);
    const State e = embed(u, coarse, 2);
    CHECK(inner_ball_points({3, 2, 2}, 1).size() == 729);
    CHECK(restrict_to(e, 2, coarse) == u);
    CHECK(sup(e) == sup(u));
}

TEST_CASE("project, embed, project is the identity for locally constant profiles") {
    const Profile pr = digit_profile();
    for (int N : {2, 3}) {
        const GridParams g{2, 1, N};
        const State u = project(pr, g);
        const State fine = project(pr, {2, 1, N + 1});
        const State e = embed(u, g, N + 1);
        for (std::size_t f : inner_ball_points({2, 1, N + 1}, N)) CHECK(e[f] == fine[f]);
        CHECK(restrict_to(e, N + 1, g) == u);
    }
}

TEST_CASE("projection error") {
    const auto d = projection_error(digit_profile(), {1, 2, 3});
    REQUIRE(d.size() == 3);
    CHECK(d[0] > 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
    for (double v : projection_error(Profile::constant(2, 1, 0.3), {1, 2, 3})) CHECK(v == 0.0);
    const Profile radial = Profile::norm_rule(2, 1, {}, {{-3, 1.0}, {-2, 0.5}, {-1, 0.0}, {0, -0.5}, {3, 0.25}}, -1.0);
    const auto r = projection_error(radial, {1, 2, 3});
    CHECK(r[0] > r[1]);
    CHECK(r[1] > r[2]);
    CHECK(r[2] == 0.0);
}

TEST_CASE("shifted solve") {
    const GridParams g{2, 1, 3};
    const RadialKernel J = normalize(RadialKernel::exp_landscape(2, 1, 1.0));
    const UltradiffOperator op = UltradiffOperator::build(g, truncate(J, g));
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    State b(op.size());
    for (double& v : b) v = val(rng);
    const State x = solve_shifted(op, -0.5, b);
    const Eigen::MatrixXd A = oracle::generator(g, J) + 0.5 * Eigen::MatrixXd::Identity(op.size(), op.size());
    const State ref = oracle::to_std(A.ldlt().solve(oracle::to_eigen(b)));
    CHECK(oracle::sup_diff(x, ref) <= 1e-12);
    CHECK_THROWS(solve_shifted(op, 0.5, b));
}

TEST_CASE("resolvent consistency") {
    for (double v : resolvent_check(normalize(RadialKernel::exp_landscape(2, 1, 1.0)), -1.0,
                                    Profile::constant(2, 1, 0.7), {1, 2, 3}))
        CHECK(v <= 1e-14);
    // Kernel supported in B_1, profile at level 1: resolution independent.
    const RadialKernel compact = normalize(RadialKernel::table(2, 1, {{-1, 0.5}, {0, 1.0}, {1, 0.5}}));
    const Profile level = Profile::digit_rule(2, 1, 1, {0.9, -0.3, 0.2, -0.8}, 0.0);
    for (double v : resolvent_check(compact, -0.5, level, {1, 2, 3, 4})) CHECK(v <= 1e-12);
    const auto gaps = resolvent_check(normalize(RadialKernel::exp_landscape(2, 1, 1.0)), -1.0,
                                      Profile::norm_rule(2, 1, {}, {{-1, 1.0}, {1, -0.5}}, 0.25), {2, 3, 4});
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[1] <= gaps[0]);
}

TEST_CASE("level-N0 exactness of the operator") {
    const RadialKernel compact = normalize(RadialKernel::table(2, 1, {{-1, 0.5}, {0, 1.0}, {1, 0.5}}));
    const Profile level = Profile::digit_rule(2, 1, 1, {0.9, -0.3, 0.2, -0.8}, 0.0);
    const GridParams g0{2, 1, 1};
    const State base = matvec_fast(UltradiffOperator::build(g0, truncate(compact, g0)), project(level, g0));
    for (int N : {2, 3, 4}) {
        const GridParams g{2, 1, N};
        const State fine = matvec_fast(UltradiffOperator::build(g, truncate(compact, g)), project(level, g));
        const State e = embed(base, g0, N);
        for (std::size_t f : inner_ball_points(g, 1)) CHECK(std::abs(fine[f] - e[f]) <= 1e-14);
    }
}

TEST_CASE("semigroup contraction transfers through the embedding") {
    const RadialKernel J = normalize(RadialKernel::exp_landscape(2, 1, 1.0));
    const Profile pr = Profile::norm_rule(2, 1, {}, {{-2, 1.0}, {0, -0.5}, {1, 0.75}}, -1.0);
    for (int N : {1, 2, 3, 4}) {
        const GridParams g{2, 1, N};
        const UltradiffOperator op = UltradiffOperator::build(g, truncate(J, g));
        for (double t : {0.5, 2.0, 10.0})
            CHECK(sup(embed(semigroup_apply(op, project(pr, g), t), g, N + 1)) <= pr.sup_norm() + 1e-14);
    }
}

TEST_CASE("convergence study") {
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 1.0;
    cfg.record_every = 10;
    const RadialKernel J = normalize(RadialKernel::exp_landscape(2, 1, 1.0));
    for (const auto& row : convergence_study(Profile::constant(2, 1, 0.5), J, Reaction::make_cubic(0.0), cfg, {2, 3, 4})) {
        CHECK(row.sup_gap == 0.0);
        CHECK(row.semigroup_gap <= 1e-14);
    }
    const RadialKernel compact = normalize(RadialKernel::table(2, 1, {{-1, 0.5}, {0, 1.0}, {1, 0.5}}));
    const Profile level = Profile::digit_rule(2, 1, 1, {0.9, -0.3, 0.2, -0.8}, 0.0);
    const auto rows = convergence_study(level, compact, Reaction::make_cubic(6.0), cfg, {1, 2, 3});
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.sup_gap <= 1e-12);
        CHECK(row.semigroup_gap <= 1e-12);
        CHECK(row.runtime_ms >= 0.0);
    }
    CHECK_THROWS_AS(convergence_study(level, compact, Reaction::make_cubic(6.0), cfg, {3, 2}), ConfigError);
}

}
