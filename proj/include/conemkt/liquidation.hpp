#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "conemkt/barrier.hpp"
#include "conemkt/cone.hpp"
#include "conemkt/market.hpp"
#include "conemkt/solver.hpp"
#include "conemkt/utility.hpp"

namespace conemkt {

// Single-date liquidation: best utility over consumption bundles reachable
// from the position W through one trade in the cone.
struct LiquidationResult {
    bool inCone = false;        // W can be traded into the nonnegative orthant
    double value = 0.0;         // sup U(xi); minus infinity when W is not solvent
    Eigen::VectorXd xi;         // maximizing bundle, consumption dimension
    double coneResidual = 0.0;  // membership residual of the solvency pre-test
    int newtonSteps = 0;
    std::string message;
};

LiquidationResult liquidationUtility(const SolvencyCone& cone, const Utility& u,
                                     const Eigen::VectorXd& W, const BarrierOptions& opt = {});

// Largest cash amount extractable from W through one trade (consumption in the
// first coordinate), by linear programming; minus infinity when W is not
// solvent. For d = 1 utilities, U(liquidationValueD1(W)) is the liquidation
// utility whenever the amount is positive.
double liquidationValueD1(const SolvencyCone& cone, const Eigen::VectorXd& W);

// Trade freely up to the last period, then liquidate through the leaf cones.
// With leaf-time trades enabled this is an equivalent reformulation of the
// terminal-consumption problem, and the composed optimizer matches it.
struct LiquidationSolve {
    bool feasible = false;
    bool boundary = false;
    double value = 0.0;
    std::vector<Eigen::VectorXd> xi;              // per leaf, consumption dimension
    std::vector<Eigen::VectorXd> preliquidation;  // holdings entering each leaf
    int newtonSteps = 0;
    std::string message;
};

LiquidationSolve solveLiquidationFormulation(const ScenarioTree& tree, const Utility& base,
                                             const Eigen::VectorXd& x,
                                             const SolveOptions& opt = {});

}  // namespace conemkt
