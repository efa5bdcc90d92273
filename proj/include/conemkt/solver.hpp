#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "conemkt/barrier.hpp"
#include "conemkt/market.hpp"
#include "conemkt/utility.hpp"

namespace conemkt {

struct SolveOptions {
    double scpsMargin = 1e-6;   // strictness margin used when hunting dual starts
    double interiorEps = 1e-6;  // relative shrink for the endowment interiority test
    BarrierOptions barrier;
    unsigned long long seed = 2026;
    double perturbStart = 0.0;  // relative jitter of the primal start, for restart studies
};

// Leaf-atomic nonnegative vector measure; the finite Yosida-Hewitt form keeps
// an explicit (normally zero) purely-finitely-additive slot that truncation
// sweeps use to report escaping mass.
struct DualMeasure {
    std::vector<Eigen::VectorXd> atoms;  // per leaf, tree leaf order: p_leaf * Z(leaf)
    Eigen::VectorXd singularMass;        // zero on any finite model
    Eigen::VectorXd total() const;       // m(Omega) = sum of atoms + singular mass
    Eigen::VectorXd density(const ScenarioTree& tree, int leafOrdinal) const;
};

struct PrimalSolution {
    bool feasible = false;  // a finite-utility plan exists and was found
    bool boundary = false;  // endowment failed the interiority probe
    double value = 0.0;     // minus infinity is reported via feasible = false
    std::vector<Eigen::VectorXd> consumption;  // per leaf, tree leaf order
    PortfolioProcess transfers;
    double selfFinancingResidual = 0.0;
    int newtonSteps = 0;
    std::string message;
};

struct DualSolution {
    bool finite = false;
    bool unboundedBelow = false;
    double value = 0.0;
    DualMeasure measure;
    PriceSystem prices;  // Z at every node, from conditional sums of the leaf values
    double coneResidual = 0.0;
    double martingaleResidual = 0.0;
    // When the infimum is minus infinity: dual objective values along a
    // diverging feasible ray, demonstrating the decrease instead of claiming
    // a minimum.
    std::vector<double> divergenceSequence;
    int newtonSteps = 0;
    std::string message;
};

struct RecoveryResult {
    std::vector<Eigen::VectorXd> consumption;  // inverse marginal of the densities
    double value = 0.0;                        // expected utility of the recovered plan
    bool attainable = false;
    double attainabilityGap = 0.0;
};

struct ValueFunctionProbe {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd candidate;    // m(Omega) of the dual minimizer
    Eigen::VectorXd probeValues;  // u at x + h e_i (first D) then x - h e_i (next D)
    double worstViolation = 0.0;  // max of u(z) - u(x) - <z - x, candidate>
    bool holds = false;
};

struct VariationalReport {
    int samples = 0;
    double primalValue = 0.0;
    double worstInequalityViolation = 0.0;  // max over sampled m of m(X) - m(x)
    double equalityGapAtOptimum = 0.0;      // |m(X) - m(x)| at the dual minimizer
    bool holds = false;
};

struct SweepRow {
    int N = 0;
    double theta = 0.0;  // stock weight after the root trade
    double value = 0.0;  // u_N(1, 0)
    double mass1 = 0.0, mass2 = 0.0;  // coordinates of m(Omega)
    double headMass5 = 0.0;  // first-coordinate mass on atoms n <= 5
    double deficit = 0.0;    // mass1 - headMass5, the finite shadow of escaping mass
    double fd1 = 0.0;  // centered difference of u_N in x1
    double fd2 = 0.0;  // upper one-sided difference in x2 (lower side leaves the 1-D family)
    double transferNorm = 0.0;          // largest |transfer|_1 over nodes
    std::vector<double> headDensity;    // first-coordinate density at atoms n = 0..5
};

// Expected-utility maximization over self-financing transfer processes.
PrimalSolution solvePrimal(const ScenarioTree& tree, const ExtendedUtility& u,
                           const Eigen::VectorXd& x, const SolveOptions& opt = {});

// Entropy-type minimization over consistent price systems (no normalization):
// min over consistent Z of sum_leaf p Utilde*(Z(leaf)) + <x, Z(root)>.
DualSolution solveDual(const ScenarioTree& tree, const ExtendedUtility& u,
                       const Eigen::VectorXd& x, const SolveOptions& opt = {});

// X(leaf) = Itilde(density at leaf), with an attainability certificate from x.
RecoveryResult recoverPrimal(const ScenarioTree& tree, const ExtendedUtility& u,
                             const DualMeasure& m, const Eigen::VectorXd& x, double tol = 1e-7);

// Tests the supergradient inequality of the value function at x against the
// dual minimizer's total mass, via 2D finite-difference probes of size h.
ValueFunctionProbe supergradientProbe(const ScenarioTree& tree, const ExtendedUtility& u,
                                      const Eigen::VectorXd& x, double h,
                                      const SolveOptions& opt = {});

// u*(xstar) = min { sum_leaf p Utilde*(Z(leaf)) : Z consistent, E[Z_T] = xstar },
// plus infinity when the constraint set is empty or carries no finite value.
double valueConjugate(const ScenarioTree& tree, const ExtendedUtility& u,
                      const Eigen::VectorXd& xstar, const SolveOptions& opt = {});

// Samples consistent price systems and checks m(X) <= m(x) for the solved
// optimizer X, with equality at the dual minimizer.
VariationalReport variationalCheck(const ScenarioTree& tree, const ExtendedUtility& u,
                                   const Eigen::VectorXd& x, int samples = 20,
                                   const SolveOptions& opt = {});

// Two-asset truncated model behind the escaping-mass demonstration: root
// matrix [[1,1],[2,1]], leaf matrices [[1,2s],[1/s,1]] with s0 = 2, sn = 1/n,
// probabilities (1-alpha, alpha 2^-n) renormalized after dropping n > N.
ScenarioTree buildSingularTree(int N, double alpha);

// Sweep of the truncated model at x = (1, 0) over the given horizon list; the
// per-N solve runs a dedicated 1-D reduction (exact for this model) so that
// boundary-pinned optima near theta = N/(N-1) stay accurate at large N.
std::vector<SweepRow> singularSweep(double alpha, const std::vector<int>& Ns);

}  // namespace conemkt
