#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "conemkt/utility.hpp"

namespace conemkt {

enum class Verdict { Pass, Fail, Inconclusive };

std::string verdictName(Verdict v);

struct PropertyWitness {
    std::string label;
    Eigen::VectorXd point;
    double value = 0.0;
};

// Outcome of one sampled property check. Witnesses carry the points behind
// the verdict (a satiation point, a violated triple, a diverging ray).
struct PropertyReport {
    std::string property;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
    std::vector<PropertyWitness> witnesses;
    std::vector<std::pair<double, double>> zeta;  // (eps, estimate) rows, growth check only
    std::string summary() const;
};

// Sampled sanity of the utility shape: increasing w.r.t. the componentwise
// order, midpoint concave, -infinity off the positive orthant.
PropertyReport checkBasicShape(const UtilityFunction& u, int samples = 200,
                               unsigned long long seed = 101);

// Asymptotic satiability: a point whose marginal utilities all lie in [0, eps).
// Tries the inverse marginal at eps/2 first, then an expanding ray scan.
PropertyReport checkAsymptoticSatiability(const UtilityFunction& u, double eps,
                                          int maxDecades = 14);

// Multivariate risk aversion: U(x) + U(x+z+z') <= U(x+z) + U(x+z') on sampled
// nonnegative triples, plus targeted axis-aligned pairs that expose positive
// cross effects.
PropertyReport checkMultivariateRiskAversion(const UtilityFunction& u, int samples = 400,
                                             unsigned long long seed = 202);

// Growth bound U*(eps y) <= zeta(eps) (U*(y)^+ + 1): estimates zeta(eps) as a
// sampled sup over rays at widening log ranges and reports divergence when the
// estimates explode along a recorded ray.
PropertyReport checkGrowthCondition(const UtilityFunction& u,
                                    const std::vector<double>& epsGrid = {0.5, 0.2, 0.1, 0.05,
                                                                          0.01},
                                    int raySamples = 1200, unsigned long long seed = 303);

// Asymptotic elasticity estimate sup_c liminf (U(x)+c) / <x, grad U(x)> over
// expanding radii, with boundary-hugging candidates. Inconclusive when U is
// unbounded below near the boundary and d >= 2 (the ratio is then senseless).
PropertyReport estimateAsymptoticElasticity(const UtilityFunction& u,
                                            const std::vector<double>& cGrid = {0.0, 1.0, 10.0,
                                                                                100.0},
                                            const std::vector<double>& radii = {1e2, 1e4, 1e6,
                                                                                1e8},
                                            int directionSamples = 160,
                                            unsigned long long seed = 404);

}  // namespace conemkt
