#include "conemkt/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "conemkt/errors.hpp"

namespace conemkt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd logUniform(std::mt19937_64& rng, int d, double lo10, double hi10) {
    std::uniform_real_distribution<double> u(lo10, hi10);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = std::pow(10.0, u(rng));
    return x;
}

}  // namespace

std::string verdictName(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::string PropertyReport::summary() const {
    std::ostringstream os;
    os << property << ": " << verdictName(verdict);
    if (!note.empty()) os << " (" << note << ")";
    return os.str();
}

PropertyReport checkBasicShape(const UtilityFunction& u, int samples, unsigned long long seed) {
    PropertyReport rep;
    rep.property = "basic-shape";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = u.dim();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x = logUniform(rng, d, -3.0, 3.0);
        Eigen::VectorXd bump(d);
        for (int i = 0; i < d; ++i) bump(i) = unit(rng) * x(i);
        double vx = u.value(x), vb = u.value(x + bump);
        double scale = 1.0 + std::abs(vx) + std::abs(vb);
        if (vb < vx - 1e-10 * scale) {
            rep.verdict = Verdict::Fail;
            rep.note = "monotonicity violated";
            rep.witnesses.push_back({"x", x, vx});
            rep.witnesses.push_back({"x+bump", x + bump, vb});
            return rep;
        }
        Eigen::VectorXd y = logUniform(rng, d, -3.0, 3.0);
        double vy = u.value(y), vm = u.value(0.5 * (x + y));
        scale = 1.0 + std::abs(vx) + std::abs(vy);
        if (vm < 0.5 * (vx + vy) - 1e-10 * scale) {
            rep.verdict = Verdict::Fail;
            rep.note = "midpoint concavity violated";
            rep.witnesses.push_back({"x", x, vx});
            rep.witnesses.push_back({"y", y, vy});
            rep.witnesses.push_back({"midpoint", 0.5 * (x + y), vm});
            return rep;
        }
        Eigen::VectorXd neg = x;
        neg(static_cast<int>(rng() % static_cast<unsigned>(d))) = -unit(rng) - 1e-6;
        if (std::isfinite(u.value(neg))) {
            rep.verdict = Verdict::Fail;
            rep.note = "finite value off the positive orthant";
            rep.witnesses.push_back({"point", neg, u.value(neg)});
            return rep;
        }
    }
    rep.verdict = Verdict::Pass;
    std::ostringstream os;
    os << samples << " samples, no violation";
    rep.note = os.str();
    return rep;
}

PropertyReport checkAsymptoticSatiability(const UtilityFunction& u, double eps, int maxDecades) {
    PropertyReport rep;
    rep.property = "asymptotic-satiability";
    if (!(eps > 0.0)) throw StructuralError("satiability: eps must be positive");
    const int d = u.dim();

    auto satiated = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = u.gradient(x);
        for (int i = 0; i < d; ++i)
            if (!(g(i) >= 0.0 && g(i) < eps)) return false;
        return true;
    };

    try {
        Eigen::VectorXd x = u.inverseMarginal(Eigen::VectorXd::Constant(d, eps / 2.0));
        if (x.allFinite() && x.minCoeff() > 0.0 && satiated(x)) {
            rep.verdict = Verdict::Pass;
            rep.note = "witness from the inverse marginal at eps/2";
            rep.witnesses.push_back({"x", x, u.value(x)});
            return rep;
        }
    } catch (const std::exception&) {
        // Fall through to the ray scan.
    }

    std::vector<double> worst;
    for (int k = 0; k <= maxDecades; ++k) {
        Eigen::VectorXd x = Eigen::VectorXd::Constant(d, std::pow(10.0, k));
        Eigen::VectorXd g = u.gradient(x);
        if (satiated(x)) {
            rep.verdict = Verdict::Pass;
            std::ostringstream os;
            os << "witness on the diagonal ray at 1e" << k;
            rep.note = os.str();
            rep.witnesses.push_back({"x", x, u.value(x)});
            return rep;
        }
        worst.push_back(g.maxCoeff());
    }
    size_t n = worst.size();
    bool stalled = n >= 3 && worst[n - 1] >= eps &&
                   worst[n - 1] > 0.99 * worst[n - 3];
    rep.verdict = stalled ? Verdict::Fail : Verdict::Inconclusive;
    rep.note = stalled ? "marginal utilities stall above eps along the scanned rays"
                       : "no satiation point found within the scan budget";
    Eigen::VectorXd last = Eigen::VectorXd::Constant(d, std::pow(10.0, maxDecades));
    rep.witnesses.push_back({"largest scanned point", last, worst.back()});
    return rep;
}

PropertyReport checkMultivariateRiskAversion(const UtilityFunction& u, int samples,
                                             unsigned long long seed) {
    PropertyReport rep;
    rep.property = "multivariate-risk-aversion";
    std::mt19937_64 rng(seed);
    const int d = u.dim();

    auto violated = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& zp) {
        double a = u.value(x), bsum = u.value(x + z + zp);
        double c = u.value(x + z), e = u.value(x + zp);
        if (!std::isfinite(a) || !std::isfinite(bsum) || !std::isfinite(c) || !std::isfinite(e))
            return false;
        double scale = 1.0 + std::abs(a) + std::abs(bsum) + std::abs(c) + std::abs(e);
        return a + bsum > c + e + 1e-9 * scale;
    };
    auto record = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& zp) {
        rep.verdict = Verdict::Fail;
        rep.note = "positive cross effect: U(x) + U(x+z+z') > U(x+z) + U(x+z')";
        rep.witnesses.push_back({"x", x, u.value(x)});
        rep.witnesses.push_back({"z", z, 0.0});
        rep.witnesses.push_back({"z'", zp, 0.0});
    };

    // Axis-aligned pairs first: they expose a positive mixed second derivative
    // directly, since z and z' then probe different coordinates.
    const double grid[] = {0.25, 1.0, 4.0};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            for (double s : grid)
                for (double t : grid) {
                    Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
                    Eigen::VectorXd z = s * Eigen::VectorXd::Unit(d, i);
                    Eigen::VectorXd zp = t * Eigen::VectorXd::Unit(d, j);
                    if (violated(x, z, zp)) {
                        record(x, z, zp);
                        return rep;
                    }
                }
        }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x = logUniform(rng, d, -2.0, 2.0);
        Eigen::VectorXd z(d), zp(d);
        for (int i = 0; i < d; ++i) {
            z(i) = unit(rng) < 0.3 ? 0.0 : unit(rng) * x(i) * 2.0;
            zp(i) = unit(rng) < 0.3 ? 0.0 : unit(rng) * x(i) * 2.0;
        }
        if (violated(x, z, zp)) {
            record(x, z, zp);
            return rep;
        }
    }
    rep.verdict = Verdict::Pass;
    std::ostringstream os;
    os << samples << " sampled triples plus axis pairs, no violation";
    rep.note = os.str();
    return rep;
}

PropertyReport checkGrowthCondition(const UtilityFunction& u, const std::vector<double>& epsGrid,
                                    int raySamples, unsigned long long seed) {
    PropertyReport rep;
    rep.property = "growth-condition";
    const int d = u.dim();
    const std::vector<double> ranges = {4.0, 8.0, 12.0};

    // Numeric conjugates can run off their search box at extreme arguments;
    // treat such samples as unevaluable instead of aborting the whole check.
    auto conjSafe = [&](const Eigen::VectorXd& y) -> double {
        try {
            return u.conjugate(y);
        } catch (const SolverError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    // Monotone in t, so a sign change brackets the root of U*(t y) = 0.
    auto zeroCrossing = [&](const Eigen::VectorXd& y) -> double {
        double loT = -14.0, hiT = 14.0;
        double flo = conjSafe(std::pow(10.0, loT) * y);
        double fhi = conjSafe(std::pow(10.0, hiT) * y);
        if (!std::isfinite(flo) || !std::isfinite(fhi) || flo <= 0.0 || fhi >= 0.0) return -1.0;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (loT + hiT);
            double fm = conjSafe(std::pow(10.0, mid) * y);
            if (std::isnan(fm)) return -1.0;
            (fm > 0.0 ? loT : hiT) = mid;
        }
        return std::pow(10.0, 0.5 * (loT + hiT));
    };

    bool anyFail = false, anyInconclusive = false;
    for (double eps : epsGrid) {
        if (!(eps > 0.0 && eps < 1.0)) throw StructuralError("growth: eps must lie in (0,1)");
        std::mt19937_64 rng(seed);  // same rays per eps for comparability
        std::vector<double> est(ranges.size(), -kInf);
        Eigen::VectorXd worstRay = Eigen::VectorXd::Zero(d);
        for (size_t ri = 0; ri < ranges.size(); ++ri) {
            double r = ranges[ri];
            double best = -kInf;
            int refinements = std::min(raySamples / 4, 250);
            for (int s = 0; s < raySamples; ++s) {
                Eigen::VectorXd y = logUniform(rng, d, -r, r);
                std::vector<Eigen::VectorXd> cands = {y};
                if (s < refinements) {
                    double t = zeroCrossing(y);
                    if (t > 0.0) cands.push_back(t * y);
                }
                for (const auto& cand : cands) {
                    double cy = conjSafe(cand);
                    if (!std::isfinite(cy)) continue;
                    double ce = conjSafe(eps * cand);
                    if (!std::isfinite(ce)) continue;
                    double ratio = ce / (std::max(cy, 0.0) + 1.0);
                    if (ratio > best) {
                        best = ratio;
                        worstRay = cand;
                    }
                }
            }
            est[ri] = best;
        }
        rep.zeta.push_back({eps, est.back()});
        double last = est[est.size() - 1], prev = est[est.size() - 2];
        bool diverging = std::isfinite(prev) && std::isfinite(last) && last > 5.0 * std::abs(prev) &&
                         last > 1e3;
        bool stable = std::isfinite(last) &&
                      std::abs(last - prev) <= 0.25 * std::abs(prev) + 1e-6;
        if (diverging) {
            anyFail = true;
            std::ostringstream os;
            os << "zeta(" << eps << ") ray";
            rep.witnesses.push_back({os.str(), worstRay, last});
        } else if (!stable) {
            anyInconclusive = true;
        }
    }
    if (anyFail) {
        rep.verdict = Verdict::Fail;
        rep.note = "estimates diverge with the sample range along the recorded rays";
    } else if (anyInconclusive) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "estimates did not stabilize under range doubling";
    } else {
        rep.verdict = Verdict::Pass;
        rep.note = "zeta estimates finite and stable under range doubling";
    }
    return rep;
}

PropertyReport estimateAsymptoticElasticity(const UtilityFunction& u,
                                            const std::vector<double>& cGrid,
                                            const std::vector<double>& radii,
                                            int directionSamples, unsigned long long seed) {
    PropertyReport rep;
    rep.property = "asymptotic-elasticity";
    const int d = u.dim();

    // Boundedness probe near the orthant boundary: diverging decrements mean
    // the ratio in the definition is senseless for d >= 2.
    double prevDrop = 0.0, lastDrop = 0.0, f = 0.0;
    {
        double f4 = u.value(Eigen::VectorXd::Constant(d, 1e-4));
        double f6 = u.value(Eigen::VectorXd::Constant(d, 1e-6));
        double f8 = u.value(Eigen::VectorXd::Constant(d, 1e-8));
        prevDrop = f6 - f4;
        lastDrop = f8 - f6;
        f = f8;
    }
    bool boundedBelow = std::isfinite(f) &&
                        std::abs(lastDrop) <= std::max(0.5 * std::abs(prevDrop),
                                                       1e-6 * (1.0 + std::abs(f)));
    if (!boundedBelow && d >= 2) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "utility unbounded below near the boundary; the elasticity ratio is senseless";
        return rep;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto ratio = [&](const Eigen::VectorXd& x, double c) {
        double v = u.value(x);
        if (!std::isfinite(v)) return -kInf;
        double den = x.dot(u.gradient(x));
        if (!(den > 0.0)) return kInf;
        return (v + c) / den;
    };

    double bestOverC = -kInf;
    const size_t firstRadius = radii.size() > 2 ? radii.size() - 2 : 0;
    for (double c : cGrid) {
        double liminfEst = kInf;
        for (size_t ri = firstRadius; ri < radii.size(); ++ri) {
            double R = radii[ri];
            double worst = kInf;
            for (int s = 0; s < directionSamples; ++s) {
                Eigen::VectorXd w(d);
                for (int i = 0; i < d; ++i) w(i) = -std::log(unit(rng) + 1e-300);
                w /= w.maxCoeff();
                worst = std::min(worst, ratio(R * w, c));
            }
            // Boundary-hugging candidates: one coordinate collapses while the
            // radius stays at R through the others.
            if (d >= 2) {
                for (int j = 0; j < d; ++j)
                    for (double t : {1e-280, 1e-120, 1e-30, 1e-8, 1e-3, 1.0}) {
                        Eigen::VectorXd x = Eigen::VectorXd::Constant(d, R);
                        x(j) = t;
                        worst = std::min(worst, ratio(x, c));
                    }
            }
            liminfEst = std::min(liminfEst, worst);
        }
        bestOverC = std::max(bestOverC, liminfEst);
    }
    std::ostringstream os;
    os << "estimate " << bestOverC << " over c grid";
    rep.note = os.str();
    if (bestOverC > 1.0 + 1e-3)
        rep.verdict = Verdict::Pass;
    else if (bestOverC <= 1.0)
        rep.verdict = Verdict::Fail;
    else
        rep.verdict = Verdict::Inconclusive;
    return rep;
}

}  // namespace conemkt
