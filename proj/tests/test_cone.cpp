#include <doctest.h>

#include <Eigen/Dense>

#include "conemkt/cone.hpp"
#include "conemkt/errors.hpp"
#include "support/builders.hpp"

using namespace conemkt;
using testsupport::kinkMatrix;
using testsupport::vec;

TEST_CASE("bid-ask validation accepts the kink matrix") {
    auto val = BidAskMatrix::validate(kinkMatrix());
    REQUIRE(val.ok());
    CHECK(val.violations.empty());
    CHECK(val.matrix->dim() == 2);
    CHECK(val.matrix->at(0, 1) == 2.0);
}

TEST_CASE("bid-ask validation reports each failed condition") {
    SUBCASE("nonpositive entry") {
        Eigen::MatrixXd pi(2, 2);
        pi << 1.0, -2.0, 2.0, 1.0;
        auto val = BidAskMatrix::validate(pi);
        REQUIRE_FALSE(val.ok());
        REQUIRE_FALSE(val.violations.empty());
        CHECK(val.violations[0].condition == 1);
    }
    SUBCASE("diagonal off one") {
        Eigen::MatrixXd pi(2, 2);
        pi << 1.0, 2.0, 2.0, 1.5;
        auto val = BidAskMatrix::validate(pi);
        REQUIRE_FALSE(val.ok());
        bool sawDiag = false;
        for (const auto& v : val.violations) sawDiag = sawDiag || v.condition == 2;
        CHECK(sawDiag);
    }
    SUBCASE("two-step exchange beats the direct rate") {
        // pi(0,2) = 9 > pi(0,1) * pi(1,2) = 4 violates the chain bound.
        Eigen::MatrixXd pi(3, 3);
        pi << 1.0, 2.0, 9.0,
              2.0, 1.0, 2.0,
              2.0, 2.0, 1.0;
        auto val = BidAskMatrix::validate(pi);
        REQUIRE_FALSE(val.ok());
        bool sawChain = false;
        for (const auto& v : val.violations)
            if (v.condition == 3 && v.i == 0 && v.j == 2) sawChain = true;
        CHECK(sawChain);
    }
    SUBCASE("non-square input throws") {
        Eigen::MatrixXd pi(2, 3);
        pi.setOnes();
        CHECK_THROWS_AS(BidAskMatrix::validate(pi), StructuralError);
    }
}

TEST_CASE("frictionless matrix from a price vector") {
    auto pi = BidAskMatrix::frictionless(vec({2.0, 0.5}));
    CHECK(pi.at(0, 1) == doctest::Approx(0.25));
    CHECK(pi.at(1, 0) == doctest::Approx(4.0));
    CHECK(BidAskMatrix::validate(pi.entries()).ok());
}

TEST_CASE("solvency cone generators for the kink matrix") {
    SolvencyCone cone(*BidAskMatrix::validate(kinkMatrix()).matrix);
    // Units e1, e2 plus exchanges (2,-1) and (-1,2): four directions.
    CHECK(cone.generators().cols() == 4);
    CHECK(cone.dim() == 2);
    CHECK(coneContains(cone, vec({2.0, -1.0})).inside);
    CHECK(coneContains(cone, vec({-1.0, 2.0})).inside);
    CHECK(coneContains(cone, vec({1.0, 0.0})).inside);
}

TEST_CASE("duplicate generators collapse") {
    // Frictionless rates make the exchange directions negatives of each other
    // but no duplicates; a one-asset market keeps only the unit.
    SolvencyCone tiny(BidAskMatrix::frictionless(vec({1.0})));
    CHECK(tiny.generators().cols() == 1);

    Eigen::MatrixXd pi(2, 2);
    pi << 1.0, 1.0, 1.0, 1.0;
    SolvencyCone flat(*BidAskMatrix::validate(pi).matrix);
    // e1, e2, (1,-1), (-1,1): all distinct up to positive scaling.
    CHECK(flat.generators().cols() == 4);
}

TEST_CASE("membership splits inside and outside with certificates") {
    SolvencyCone cone(*BidAskMatrix::validate(kinkMatrix()).matrix);

    auto in = coneContains(cone, vec({1.0, 1.0}));
    REQUIRE(in.inside);
    CHECK(in.residual <= 1e-9);
    // Reported weights rebuild the point.
    Eigen::VectorXd rebuilt = cone.generators() * in.coefficients;
    CHECK((rebuilt - vec({1.0, 1.0})).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(in.coefficients.minCoeff() >= -1e-12);

    auto out = coneContains(cone, vec({-1.0, -1.0}));
    REQUIRE_FALSE(out.inside);
    REQUIRE(out.separator.size() == 2);
    // Separator: nonpositive on every generator, positive on the point.
    Eigen::VectorXd prods = cone.generators().transpose() * out.separator;
    CHECK(prods.maxCoeff() <= 1e-9);
    CHECK(out.separator.dot(vec({-1.0, -1.0})) > 1e-10);

    // (3, -2) needs rate 2/3 < 1/2 available: outside.
    CHECK_FALSE(coneContains(cone, vec({3.0, -2.0})).inside);
    // (4, -2) sells 4 units at rate 1/2: on the boundary, inside.
    CHECK(coneContains(cone, vec({4.0, -2.0})).inside);
}

TEST_CASE("polar cone and strict interior") {
    SolvencyCone cone(*BidAskMatrix::validate(kinkMatrix()).matrix);
    PolarCone polar = polarCone(cone);
    CHECK(polar.halfspaces.cols() == cone.generators().cols());
    CHECK(polar.dim() == 2);

    // Strict points keep every generator product positive.
    CHECK(interiorContains(polar, vec({1.0, 1.0})));
    CHECK(interiorContains(polar, vec({1.0, 1.9})));
    // Boundary rays of the polar: products vanish.
    CHECK_FALSE(interiorContains(polar, vec({2.0, 1.0})));
    CHECK_FALSE(interiorContains(polar, vec({1.0, 2.0})));
    // Outside entirely.
    CHECK_FALSE(interiorContains(polar, vec({3.0, 1.0})));
    CHECK_FALSE(interiorContains(polar, vec({-1.0, 1.0})));
    CHECK_FALSE(interiorContains(polar, vec({0.0, 0.0})));
}

TEST_CASE("interior test is scale invariant") {
    SolvencyCone cone(*BidAskMatrix::validate(kinkMatrix()).matrix);
    PolarCone polar = polarCone(cone);
    Eigen::VectorXd w = vec({1.0, 1.3});
    CHECK(interiorContains(polar, w, 1e-4));
    CHECK(interiorContains(polar, 1e6 * w, 1e-4));
    CHECK(interiorContains(polar, 1e-6 * w, 1e-4));
    // A demanding margin rejects points a loose one accepts.
    Eigen::VectorXd near = vec({1.99, 1.0});
    CHECK(interiorContains(polar, near, 1e-6));
    CHECK_FALSE(interiorContains(polar, near, 0.1));
}
