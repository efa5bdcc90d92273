#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "conemkt/errors.hpp"
#include "conemkt/utility.hpp"
#include "support/builders.hpp"

using namespace conemkt;
using testsupport::vec;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("family names") {
    CHECK(familyName(UtilityFamily::AdditiveLog) == "additive-log");
    CHECK(familyName(UtilityFamily::AdditivePower) == "additive-power");
    CHECK(familyName(UtilityFamily::MixedAdditive) == "mixed-additive");
    CHECK(familyName(UtilityFamily::CobbDouglas) == "cobb-douglas");
}

TEST_CASE("spec validation rejects bad parameters") {
    CHECK_THROWS_AS(UtilitySpec::additivePower(vec({1.0}), vec({1.0})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::additivePower(vec({1.0}), vec({1.2})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::additivePower(vec({1.0}), vec({0.0})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::additivePower(vec({-1.0}), vec({0.5})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::additiveLog(2, vec({1.0, 0.0})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::additiveLog(2, vec({1.0})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::cobbDouglas(vec({0.6, 0.5})), StructuralError);
    CHECK_THROWS_AS(UtilitySpec::mixedAdditive(vec({1.0, 1.0}), vec({0.0, 1.0})),
                    StructuralError);
    // Mixed allows zero exponents (log coordinates) alongside powers.
    CHECK_NOTHROW(UtilitySpec::mixedAdditive(vec({1.0, 1.0}), vec({0.0, -1.0})));
}

TEST_CASE("log utility values and derivatives") {
    Utility u(UtilitySpec::additiveLog(2, vec({1.0, 1.0})));
    CHECK(u.value(vec({1.0, 2.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(u.value(vec({1.0, 1.0})) == 0.0);
    CHECK(u.value(vec({0.0, 1.0})) == -kInf);
    CHECK(u.value(vec({-1.0, 1.0})) == -kInf);
    Eigen::VectorXd g = u.gradient(vec({1.0, 2.0}));
    CHECK(g(0) == doctest::Approx(1.0));
    CHECK(g(1) == doctest::Approx(0.5));
    Eigen::MatrixXd h = u.hessian(vec({1.0, 2.0}));
    CHECK(h(0, 0) == doctest::Approx(-1.0));
    CHECK(h(1, 1) == doctest::Approx(-0.25));
    CHECK(h(0, 1) == 0.0);
    CHECK_THROWS_AS(u.gradient(vec({0.0, 1.0})), DomainError);

    // Weighted with an offset: 2 ln x1 + 3 ln x2 + 1 at (e, e^2).
    Utility w(UtilitySpec::additiveLog(2, vec({2.0, 3.0}), 1.0));
    double e1 = std::exp(1.0);
    CHECK(w.value(vec({e1, e1 * e1})) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("power utility values and derivatives") {
    // 2 x^(1/2) / (1/2) at x = 4: value 8, slope 1, curvature -1/8.
    Utility u(UtilitySpec::additivePower(vec({2.0}), vec({0.5})));
    CHECK(u.value(vec({4.0})) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(u.gradient(vec({4.0}))(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.hessian(vec({4.0}))(0, 0) == doctest::Approx(-0.125).epsilon(1e-12));
    CHECK(u.inverseMarginal(vec({1.0}))(0) == doctest::Approx(4.0).epsilon(1e-12));

    // Negative exponent: -1/x is bounded above by zero.
    Utility n(UtilitySpec::additivePower(vec({1.0}), vec({-1.0})));
    CHECK(n.value(vec({2.0})) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(n.value(vec({0.0})) == -kInf);
    CHECK(n.boundedAbove());
    CHECK_FALSE(u.boundedAbove());
    CHECK_FALSE(Utility(UtilitySpec::additiveLog(1, vec({1.0}))).boundedAbove());
}

TEST_CASE("inverse marginal inverts the gradient map") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> draw(0.1, 4.0);
    std::vector<UtilitySpec> specs = {
        UtilitySpec::additiveLog(2, vec({1.0, 2.0})),
        UtilitySpec::additivePower(vec({1.0, 0.7}), vec({0.5, -1.2})),
        UtilitySpec::mixedAdditive(vec({1.5, 1.0}), vec({0.0, -0.5})),
        UtilitySpec::cobbDouglas(vec({0.3, 0.4})),
    };
    for (const auto& spec : specs) {
        Utility u(spec);
        for (int t = 0; t < 20; ++t) {
            Eigen::VectorXd y = vec({draw(rng), draw(rng)});
            Eigen::VectorXd x = u.inverseMarginal(y);
            REQUIRE(x.minCoeff() > 0.0);
            Eigen::VectorXd back = u.gradient(x);
            CHECK((back - y).lpNorm<Eigen::Infinity>() <=
                  1e-9 * (1.0 + y.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("closed-form conjugates") {
    SUBCASE("log") {
        Utility u(UtilitySpec::additiveLog(1, vec({1.0})));
        CHECK(u.conjugate(vec({1.0})) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(u.conjugate(vec({0.5})) == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-12));
        CHECK(u.conjugate(vec({0.0})) == kInf);
        CHECK(u.conjugate(vec({-1.0})) == kInf);
    }
    SUBCASE("positive exponent") {
        // (2 sqrt(x))* = 1/y for y > 0, +infinity at zero.
        Utility u(UtilitySpec::additivePower(vec({1.0}), vec({0.5})));
        CHECK(u.conjugate(vec({0.5})) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(u.conjugate(vec({2.0})) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(u.conjugate(vec({0.0})) == kInf);
    }
    SUBCASE("negative exponent") {
        // (-1/x)* = -2 sqrt(y), finite down to y = 0 where the sup is 0.
        Utility u(UtilitySpec::additivePower(vec({1.0}), vec({-1.0})));
        CHECK(u.conjugate(vec({0.25})) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(u.conjugate(vec({0.0})) == 0.0);
        CHECK(u.conjugate(vec({-0.1})) == kInf);
    }
    SUBCASE("offset carries through") {
        Utility u(UtilitySpec::additiveLog(1, vec({1.0}), 5.0));
        CHECK(u.conjugate(vec({1.0})) == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("numeric conjugate agrees with the closed forms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> draw(0.2, 4.0);
    std::vector<UtilitySpec> specs = {
        UtilitySpec::additiveLog(2, vec({1.0, 2.0}), 0.3),
        UtilitySpec::additivePower(vec({1.0, 0.7}), vec({0.5, -1.2})),
        UtilitySpec::mixedAdditive(vec({1.5, 1.0}), vec({0.0, -0.5}), -1.0),
    };
    for (const auto& spec : specs) {
        Utility u(spec);
        for (int t = 0; t < 25; ++t) {
            Eigen::VectorXd y = vec({draw(rng), draw(rng)});
            double closed = u.conjugate(y);
            double numeric = u.conjugateNumeric(y);
            CHECK(std::abs(closed - numeric) <= 1e-7 * (1.0 + std::abs(closed)));
        }
    }
}

TEST_CASE("numeric conjugate flags escaping maximizers") {
    // Cobb-Douglas maximizers blow up like y^(-1/(1-s)); far below machine
    // scale they leave the search box and the search reports it.
    Utility u(UtilitySpec::cobbDouglas(vec({0.3, 0.4})));
    CHECK_THROWS_AS(u.conjugateNumeric(vec({1e-7, 1e-7})), SolverError);
    CHECK(u.conjugate(vec({-1.0, 1.0})) == kInf);
}

TEST_CASE("cobb-douglas values, derivatives, and Fenchel consistency") {
    Utility u(UtilitySpec::cobbDouglas(vec({0.3, 0.4})));
    CHECK(u.value(vec({1.0, 1.0})) == doctest::Approx(1.0));
    Eigen::VectorXd g = u.gradient(vec({1.0, 1.0}));
    CHECK(g(0) == doctest::Approx(0.3));
    CHECK(g(1) == doctest::Approx(0.4));
    CHECK(u.value(vec({0.0, 1.0})) == 0.0);  // continuous down to the boundary
    CHECK(u.value(vec({-0.1, 1.0})) == -kInf);

    // conjugateDerivatives evaluates through the first-order point; the
    // numeric search should land on the same value where both work.
    Eigen::VectorXd y = vec({0.8, 0.9});
    double val;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    u.conjugateDerivatives(y, val, grad, hess);
    CHECK(std::abs(val - u.conjugateNumeric(y)) <= 1e-8 * (1.0 + std::abs(val)));
    Eigen::VectorXd x = u.inverseMarginal(y);
    CHECK((grad + x).lpNorm<Eigen::Infinity>() <= 1e-12);
    // Fenchel-Young holds with equality at the first-order point.
    CHECK(u.value(x) - x.dot(y) == doctest::Approx(val).epsilon(1e-12));
}

TEST_CASE("conjugate derivatives match finite differences") {
    std::vector<UtilitySpec> specs = {
        UtilitySpec::additiveLog(2, vec({1.0, 2.0})),
        UtilitySpec::additivePower(vec({1.0, 0.7}), vec({0.5, -1.2})),
        UtilitySpec::cobbDouglas(vec({0.3, 0.4})),
    };
    for (const auto& spec : specs) {
        Utility u(spec);
        Eigen::VectorXd y = vec({0.7, 1.3});
        double val;
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        u.conjugateDerivatives(y, val, grad, hess);
        const double h = 1e-5;
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd yp = y, ym = y;
            yp(i) += h;
            ym(i) -= h;
            double vp, vm;
            Eigen::VectorXd gp, gm;
            Eigen::MatrixXd hp, hm;
            u.conjugateDerivatives(yp, vp, gp, hp);
            u.conjugateDerivatives(ym, vm, gm, hm);
            CHECK(grad(i) == doctest::Approx((vp - vm) / (2.0 * h)).epsilon(1e-5));
            for (int j = 0; j < 2; ++j)
                CHECK(hess(j, i) == doctest::Approx((gp(j) - gm(j)) / (2.0 * h)).epsilon(1e-4));
        }
    }
}

TEST_CASE("extension to more assets") {
    ExtendedUtility eu(Utility(UtilitySpec::additiveLog(1, vec({1.0}))), 2);
    CHECK(eu.assets() == 2);
    CHECK(eu.consumptionDim() == 1);
    // Consumption reads the first coordinate; the second must stay nonnegative.
    CHECK(eu.value(vec({2.0, 0.0})) == doctest::Approx(std::log(2.0)));
    CHECK(eu.value(vec({2.0, 1.0})) == doctest::Approx(std::log(2.0)));
    CHECK(eu.value(vec({2.0, -0.1})) == -kInf);

    // Conjugate: free disposal of the extra coordinate needs y >= 0 there.
    CHECK(eu.conjugate(vec({1.0, 0.5})) == doctest::Approx(-1.0));
    CHECK(eu.conjugate(vec({1.0, -0.1})) == kInf);

    Eigen::VectorXd xi = eu.inverseMarginalTilde(vec({0.5, 3.0}));
    CHECK(xi(0) == doctest::Approx(2.0));
    CHECK(xi(1) == 0.0);

    double val;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    eu.conjugateDerivatives(vec({1.0, 0.5}), val, grad, hess);
    CHECK(val == doctest::Approx(-1.0));
    CHECK(grad(0) == doctest::Approx(-1.0));
    CHECK(grad(1) == 0.0);
    CHECK(hess(1, 1) == 0.0);
}

TEST_CASE("dimension mismatches throw") {
    Utility u(UtilitySpec::additiveLog(2, vec({1.0, 1.0})));
    CHECK_THROWS_AS(u.value(vec({1.0})), StructuralError);
    CHECK_THROWS_AS(u.conjugate(vec({1.0})), StructuralError);
    CHECK_THROWS_AS(u.inverseMarginal(vec({1.0, -1.0})), DomainError);
}
