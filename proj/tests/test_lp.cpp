#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "conemkt/errors.hpp"
#include "conemkt/lp.hpp"

using namespace conemkt;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("vertex optimum of a two-variable program") {
    // min -x - y s.t. x + 2y <= 4, 3x + y <= 6; optimum at the row
    // intersection x = 8/5, y = 6/5.
    LinearProgram lp(2);
    lp.setObjective(v2(-1.0, -1.0));
    lp.addConstraint(v2(1.0, 2.0), '<', 4.0);
    lp.addConstraint(v2(3.0, 1.0), '<', 6.0);
    LpResult res = lp.solve();
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-2.8).epsilon(1e-10));
    CHECK(res.x(0) == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(res.x(1) == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(res.infeasibility <= 1e-9);
    // Strong duality through the reported row multipliers.
    Eigen::VectorXd b(2);
    b << 4.0, 6.0;
    CHECK(res.rowDual.dot(b) == doctest::Approx(res.objective).epsilon(1e-9));
}

TEST_CASE("equality rows pin the solution") {
    LinearProgram lp(2);
    lp.setObjective(v2(1.0, 1.0));
    lp.addConstraint(v2(1.0, 1.0), '=', 3.0);
    lp.addConstraint(v2(1.0, -1.0), '=', 1.0);
    LpResult res = lp.solve();
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(res.x(0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("maximization orientation is reported in caller terms") {
    LinearProgram lp(2);
    lp.setObjective(v2(1.0, 2.0), false);
    lp.addConstraint(v2(1.0, 1.0), '<', 3.0);
    LpResult res = lp.solve();
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(res.x(1) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("unbounded ray is detected") {
    LinearProgram lp(2);
    lp.setObjective(v2(-1.0, 0.0));
    lp.addConstraint(v2(0.0, 1.0), '<', 1.0);  // leaves x free to grow
    LpResult res = lp.solve();
    CHECK(res.status == LpStatus::Unbounded);
}

TEST_CASE("infeasible system carries a certificate") {
    LinearProgram lp(1);
    Eigen::VectorXd one(1), c(1);
    one << 1.0;
    c << 0.0;
    lp.setObjective(c);
    lp.addConstraint(one, '<', 1.0);
    lp.addConstraint(one, '>', 2.0);
    LpResult res = lp.solve();
    REQUIRE(res.status == LpStatus::Infeasible);
    REQUIRE(res.farkas.size() == 2);
    // y'b > 0 while y'a <= 0 for the structural column, y <= 0 on the <= row
    // and y >= 0 on the >= row: an explicit empty-set certificate.
    Eigen::VectorXd b(2);
    b << 1.0, 2.0;
    CHECK(res.farkas.dot(b) > 1e-10);
    CHECK(res.farkas(0) + res.farkas(1) <= 1e-9);  // y'a for a = (1, 1)
    CHECK(res.farkas(0) <= 1e-12);
    CHECK(res.farkas(1) >= -1e-12);
    CHECK(res.infeasibility > 1e-3);  // phase-1 optimum stays positive
}

TEST_CASE("cycling-prone instance terminates at its optimum") {
    // Beale's example: Dantzig pricing cycles without an anti-cycling rule.
    LinearProgram lp(4);
    Eigen::VectorXd c(4), r1(4), r2(4), r3(4);
    c << -0.75, 150.0, -0.02, 6.0;
    r1 << 0.25, -60.0, -0.04, 9.0;
    r2 << 0.5, -90.0, -0.02, 3.0;
    r3 << 0.0, 0.0, 1.0, 0.0;
    lp.setObjective(c);
    lp.addConstraint(r1, '<', 0.0);
    lp.addConstraint(r2, '<', 0.0);
    lp.addConstraint(r3, '<', 1.0);
    LpResult res = lp.solve();
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-0.05).epsilon(1e-9));
    CHECK(res.x(2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("row scaling does not move the vertex") {
    for (double s : {1e-6, 1.0, 1e6}) {
        LinearProgram lp(2);
        lp.setObjective(v2(-1.0, -1.0));
        lp.addConstraint(s * v2(1.0, 2.0), '<', s * 4.0);
        lp.addConstraint(s * v2(3.0, 1.0), '<', s * 6.0);
        LpResult res = lp.solve();
        REQUIRE(res.status == LpStatus::Optimal);
        CHECK(res.x(0) == doctest::Approx(1.6).epsilon(1e-8));
        CHECK(res.x(1) == doctest::Approx(1.2).epsilon(1e-8));
    }
}

TEST_CASE("strong duality holds on random bounded programs") {
    std::mt19937_64 rng(515);
    std::uniform_real_distribution<double> aDraw(0.2, 1.5);
    std::uniform_real_distribution<double> bDraw(0.5, 2.0);
    std::uniform_real_distribution<double> cDraw(0.1, 1.0);
    const int n = 4, m = 6;
    for (int trial = 0; trial < 25; ++trial) {
        LinearProgram lp(n);
        Eigen::VectorXd c(n);
        for (int j = 0; j < n; ++j) c(j) = cDraw(rng);
        lp.setObjective(c);
        Eigen::MatrixXd A(m, n);
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) = aDraw(rng);
            b(i) = bDraw(rng);
            lp.addConstraint(A.row(i), '>', b(i));
        }
        LpResult res = lp.solve();
        REQUIRE(res.status == LpStatus::Optimal);
        // Primal feasibility of the claimed point.
        for (int i = 0; i < m; ++i) CHECK(A.row(i).dot(res.x) >= b(i) - 1e-7);
        CHECK(res.x.minCoeff() >= -1e-9);
        // Dual feasibility and matching objective.
        CHECK(res.rowDual.minCoeff() >= -1e-8);
        Eigen::VectorXd reduced = c - A.transpose() * res.rowDual;
        CHECK(reduced.minCoeff() >= -1e-7);
        CHECK(res.rowDual.dot(b) == doctest::Approx(res.objective).epsilon(1e-7));
    }
}

TEST_CASE("size mismatches throw") {
    LinearProgram lp(2);
    Eigen::VectorXd bad(3);
    bad << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(lp.setObjective(bad), StructuralError);
    CHECK_THROWS_AS(lp.addConstraint(bad, '<', 1.0), StructuralError);
}
