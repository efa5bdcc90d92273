#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "conemkt/barrier.hpp"

namespace conemkt {

// Conic utility-maximization pair
//     primal:  sup  f(y)      over y in C = cone(generator columns)
//     dual:    inf  f*(m)     over m in D = { m : <g, m> <= 0 for all g in C }
// where f*(m) = sup_y { f(y) - <y, m> }. The program carries both objectives
// with derivatives; negConjugate(m) must equal -f*(m) so the dual solve runs
// as a barrier maximization too.
struct ConicProgram {
    Eigen::MatrixXd generators;
    std::shared_ptr<const SmoothConcave> objective;
    std::shared_ptr<const SmoothConcave> negConjugate;
    // Optional strict-start hints; solvers search for their own when empty.
    Eigen::VectorXd primalStartLambda;
    Eigen::VectorXd dualStart;
};

struct EngineReport {
    bool primalFinite = false;
    bool dualFinite = false;
    bool degenerate = false;  // both sides minus infinity
    double primalValue = 0.0;
    double dualValue = 0.0;
    double gap = 0.0;  // relative gap once both sides are finite
    Eigen::VectorXd primalPoint;  // y in ambient coordinates
    Eigen::VectorXd dualPoint;
    double primalResidual = 0.0;  // cone-membership residual of primalPoint
    double dualResidual = 0.0;    // max violation of <g, m> <= 0
    int newtonSteps = 0;
    std::string message;
    std::string serialize() const;  // deterministic fixed-precision rendering
};

// Primal side only: reports value -infinity (primalFinite false) when no
// strictly feasible point with finite objective exists; throws SolverError
// when the objective runs away (unbounded supremum).
EngineReport maximizeOverCone(const ConicProgram& prog, const BarrierOptions& opt = {});

// Dual side only: detects unboundedness below and reports it as dualValue
// -infinity rather than claiming a minimum.
EngineReport minimizeDual(const ConicProgram& prog, const BarrierOptions& opt = {});

// Runs both sides and combines: zero-gap verification in the regular case,
// degenerate report when both sides collapse to -infinity.
EngineReport verifyGap(const ConicProgram& prog, double tol = 1e-7,
                       const BarrierOptions& opt = {});

}  // namespace conemkt
