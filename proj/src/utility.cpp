#include "conemkt/utility.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conemkt/errors.hpp"

namespace conemkt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Conjugate exponent gamma / (gamma - 1); log terms (gamma 0) map to 0.
double conjExponent(double gamma) { return gamma / (gamma - 1.0); }
}  // namespace

std::string familyName(UtilityFamily f) {
    switch (f) {
        case UtilityFamily::AdditivePower: return "additive-power";
        case UtilityFamily::AdditiveLog: return "additive-log";
        case UtilityFamily::MixedAdditive: return "mixed-additive";
        case UtilityFamily::CobbDouglas: return "cobb-douglas";
    }
    return "unknown";
}

UtilitySpec UtilitySpec::additiveLog(int d, const Eigen::VectorXd& alpha, double c0) {
    UtilitySpec s;
    s.family = UtilityFamily::AdditiveLog;
    s.d = d;
    s.alpha = alpha;
    s.gamma = Eigen::VectorXd::Zero(d);
    s.c0 = c0;
    s.validateOrThrow();
    return s;
}

UtilitySpec UtilitySpec::additivePower(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma,
                                       double c0) {
    UtilitySpec s;
    s.family = UtilityFamily::AdditivePower;
    s.d = static_cast<int>(alpha.size());
    s.alpha = alpha;
    s.gamma = gamma;
    s.c0 = c0;
    s.validateOrThrow();
    return s;
}

UtilitySpec UtilitySpec::mixedAdditive(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma,
                                       double c0) {
    UtilitySpec s;
    s.family = UtilityFamily::MixedAdditive;
    s.d = static_cast<int>(alpha.size());
    s.alpha = alpha;
    s.gamma = gamma;
    s.c0 = c0;
    s.validateOrThrow();
    return s;
}

UtilitySpec UtilitySpec::cobbDouglas(const Eigen::VectorXd& alpha, double c0) {
    UtilitySpec s;
    s.family = UtilityFamily::CobbDouglas;
    s.d = static_cast<int>(alpha.size());
    s.alpha = alpha;
    s.gamma = Eigen::VectorXd::Zero(s.d);
    s.c0 = c0;
    s.validateOrThrow();
    return s;
}

void UtilitySpec::validateOrThrow() const {
    if (d < 1) throw StructuralError("utility: dimension must be at least 1");
    if (alpha.size() != d || gamma.size() != d)
        throw StructuralError("utility: alpha and gamma must have length d");
    if (!alpha.allFinite() || !gamma.allFinite() || !std::isfinite(c0))
        throw StructuralError("utility: non-finite parameters");
    for (int i = 0; i < d; ++i)
        if (!(alpha(i) > 0.0)) throw StructuralError("utility: weights must be positive");
    switch (family) {
        case UtilityFamily::AdditiveLog:
            for (int i = 0; i < d; ++i)
                if (gamma(i) != 0.0) throw StructuralError("additive-log: gamma must be zero");
            break;
        case UtilityFamily::AdditivePower:
            for (int i = 0; i < d; ++i)
                if (gamma(i) == 0.0 || gamma(i) >= 1.0)
                    throw StructuralError("additive-power: need gamma < 1, gamma != 0");
            break;
        case UtilityFamily::MixedAdditive:
            for (int i = 0; i < d; ++i)
                if (gamma(i) >= 1.0)
                    throw StructuralError("mixed-additive: need gamma < 1");
            break;
        case UtilityFamily::CobbDouglas:
            if (alpha.sum() >= 1.0)
                throw StructuralError("cobb-douglas: exponents must sum below 1");
            break;
    }
}

Utility::Utility(UtilitySpec spec) : spec_(std::move(spec)) { spec_.validateOrThrow(); }

double Utility::value(const Eigen::VectorXd& x) const {
    if (x.size() != spec_.d) throw StructuralError("utility value: dimension mismatch");
    if (!x.allFinite()) throw StructuralError("utility value: non-finite point");
    if (spec_.family == UtilityFamily::CobbDouglas) {
        double p = 1.0;
        for (int i = 0; i < spec_.d; ++i) {
            if (x(i) < 0.0) return -kInf;
            p *= std::pow(x(i), spec_.alpha(i));
        }
        return p + spec_.c0;
    }
    double v = spec_.c0;
    for (int i = 0; i < spec_.d; ++i) {
        double g = spec_.gamma(i);
        if (g == 0.0) {
            if (x(i) <= 0.0) return -kInf;
            v += spec_.alpha(i) * std::log(x(i));
        } else if (g < 0.0) {
            if (x(i) <= 0.0) return -kInf;
            v += spec_.alpha(i) * std::pow(x(i), g) / g;
        } else {
            if (x(i) < 0.0) return -kInf;
            v += spec_.alpha(i) * std::pow(x(i), g) / g;
        }
    }
    return v;
}

Eigen::VectorXd Utility::gradient(const Eigen::VectorXd& x) const {
    if (x.size() != spec_.d) throw StructuralError("utility gradient: dimension mismatch");
    for (int i = 0; i < spec_.d; ++i)
        if (!(x(i) > 0.0)) throw DomainError("utility gradient: point not interior");
    Eigen::VectorXd g(spec_.d);
    if (spec_.family == UtilityFamily::CobbDouglas) {
        double p = 1.0;
        for (int i = 0; i < spec_.d; ++i) p *= std::pow(x(i), spec_.alpha(i));
        for (int i = 0; i < spec_.d; ++i) g(i) = p * spec_.alpha(i) / x(i);
        return g;
    }
    for (int i = 0; i < spec_.d; ++i) {
        double ga = spec_.gamma(i);
        g(i) = (ga == 0.0) ? spec_.alpha(i) / x(i) : spec_.alpha(i) * std::pow(x(i), ga - 1.0);
    }
    return g;
}

Eigen::MatrixXd Utility::hessian(const Eigen::VectorXd& x) const {
    if (x.size() != spec_.d) throw StructuralError("utility hessian: dimension mismatch");
    for (int i = 0; i < spec_.d; ++i)
        if (!(x(i) > 0.0)) throw DomainError("utility hessian: point not interior");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(spec_.d, spec_.d);
    if (spec_.family == UtilityFamily::CobbDouglas) {
        double p = 1.0;
        for (int i = 0; i < spec_.d; ++i) p *= std::pow(x(i), spec_.alpha(i));
        for (int i = 0; i < spec_.d; ++i)
            for (int j = 0; j < spec_.d; ++j) {
                double aij = spec_.alpha(i) * (i == j ? spec_.alpha(i) - 1.0 : spec_.alpha(j));
                h(i, j) = p * aij / (x(i) * x(j));
            }
        return h;
    }
    for (int i = 0; i < spec_.d; ++i) {
        double ga = spec_.gamma(i);
        h(i, i) = (ga == 0.0) ? -spec_.alpha(i) / (x(i) * x(i))
                              : spec_.alpha(i) * (ga - 1.0) * std::pow(x(i), ga - 2.0);
    }
    return h;
}

double Utility::conjugate(const Eigen::VectorXd& y) const {
    if (y.size() != spec_.d) throw StructuralError("utility conjugate: dimension mismatch");
    if (!y.allFinite()) throw StructuralError("utility conjugate: non-finite point");
    if (spec_.family == UtilityFamily::CobbDouglas) return conjugateNumeric(y);
    double v = spec_.c0;
    for (int i = 0; i < spec_.d; ++i) {
        double a = spec_.alpha(i), ga = spec_.gamma(i);
        if (ga == 0.0) {
            if (y(i) <= 0.0) return kInf;
            v += a * std::log(a / y(i)) - a;
        } else if (ga > 0.0) {
            if (y(i) <= 0.0) return kInf;
            double gs = conjExponent(ga);
            v += -(a / gs) * std::pow(y(i) / a, gs);
        } else {
            if (y(i) < 0.0) return kInf;
            if (y(i) > 0.0) {
                double gs = conjExponent(ga);
                v += -(a / gs) * std::pow(y(i) / a, gs);
            }
            // at y(i) == 0 the bounded component contributes its supremum, 0
        }
    }
    return v;
}

Eigen::VectorXd Utility::inverseMarginal(const Eigen::VectorXd& y) const {
    if (y.size() != spec_.d) throw StructuralError("utility inverseMarginal: dimension mismatch");
    for (int i = 0; i < spec_.d; ++i)
        if (!(y(i) > 0.0)) throw DomainError("utility inverseMarginal: need y > 0");
    Eigen::VectorXd x(spec_.d);
    if (spec_.family == UtilityFamily::CobbDouglas) {
        // Solve the first-order system grad U(x) = y: with P = prod x_i^alpha_i
        // the equations x_i = alpha_i P / y_i give P in closed form.
        double s = spec_.alpha.sum();
        double logP = 0.0;
        for (int i = 0; i < spec_.d; ++i)
            logP += spec_.alpha(i) * std::log(spec_.alpha(i) / y(i));
        logP /= (1.0 - s);
        double P = std::exp(logP);
        for (int i = 0; i < spec_.d; ++i) x(i) = spec_.alpha(i) * P / y(i);
        return x;
    }
    for (int i = 0; i < spec_.d; ++i) {
        double a = spec_.alpha(i), ga = spec_.gamma(i);
        x(i) = (ga == 0.0) ? a / y(i) : std::pow(y(i) / a, 1.0 / (ga - 1.0));
    }
    return x;
}

void Utility::conjugateDerivatives(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad,
                                   Eigen::MatrixXd& hess) const {
    if (y.size() != spec_.d) throw StructuralError("utility conjugateDerivatives: dimension mismatch");
    for (int i = 0; i < spec_.d; ++i)
        if (!(y(i) > 0.0)) throw DomainError("utility conjugateDerivatives: need y > 0");
    Eigen::VectorXd x = inverseMarginal(y);
    grad = -x;
    hess = Eigen::MatrixXd::Zero(spec_.d, spec_.d);
    if (spec_.family == UtilityFamily::CobbDouglas) {
        val = value(x) - x.dot(y);
        double s = spec_.alpha.sum();
        for (int i = 0; i < spec_.d; ++i) {
            for (int j = 0; j < spec_.d; ++j) {
                hess(i, j) = x(i) * spec_.alpha(j) / ((1.0 - s) * y(j));
                if (i == j) hess(i, j) += x(i) / y(i);
            }
        }
        return;
    }
    val = conjugate(y);
    for (int i = 0; i < spec_.d; ++i) hess(i, i) = x(i) / ((1.0 - spec_.gamma(i)) * y(i));
}

double Utility::conjugateNumeric(const Eigen::VectorXd& y) const {
    if (y.size() != spec_.d) throw StructuralError("utility conjugate: dimension mismatch");
    const double lo = -8.0, hi = 8.0;  // log10 bounds of the search box
    const double tol = 1e-12;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;

    Eigen::VectorXd t = Eigen::VectorXd::Zero(spec_.d);  // log10 coordinates
    auto point = [&](const Eigen::VectorXd& logc) {
        Eigen::VectorXd x(spec_.d);
        for (int i = 0; i < spec_.d; ++i) x(i) = std::pow(10.0, logc(i));
        return x;
    };
    auto eval = [&](const Eigen::VectorXd& logc) { return value(point(logc)) - point(logc).dot(y); };

    // Directions along which the objective grows without bound make the
    // conjugate +infinity; catch them before searching.
    for (int i = 0; i < spec_.d; ++i) {
        if (y(i) < 0.0) return kInf;
        if (y(i) == 0.0 &&
            (spec_.family == UtilityFamily::CobbDouglas || spec_.gamma(i) >= 0.0))
            return kInf;
    }

    double cur = eval(t);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double before = cur;
        for (int i = 0; i < spec_.d; ++i) {
            double a = lo, b = hi;
            double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
            Eigen::VectorXd tc = t;
            tc(i) = c1;
            double f1 = eval(tc);
            tc(i) = c2;
            double f2 = eval(tc);
            while (b - a > tol) {
                if (f1 < f2) {
                    a = c1; c1 = c2; f1 = f2;
                    c2 = a + gr * (b - a);
                    tc(i) = c2; f2 = eval(tc);
                } else {
                    b = c2; c2 = c1; f2 = f1;
                    c1 = b - gr * (b - a);
                    tc(i) = c1; f1 = eval(tc);
                }
            }
            t(i) = 0.5 * (a + b);
            cur = eval(t);
        }
        if (std::abs(cur - before) <= 1e-14 * (1.0 + std::abs(cur)) && sweep > 1) break;
    }
    for (int i = 0; i < spec_.d; ++i)
        if (t(i) > hi - 0.05 || t(i) < lo + 0.05)
            throw SolverError("conjugateNumeric: maximizer escaped the search box", cur);
    return cur;
}

bool Utility::boundedAbove() const {
    if (spec_.family == UtilityFamily::CobbDouglas) return false;
    for (int i = 0; i < spec_.d; ++i)
        if (spec_.gamma(i) >= 0.0) return false;
    return true;
}

ExtendedUtility::ExtendedUtility(Utility base, int assets)
    : base_(std::move(base)), assets_(assets) {
    if (assets_ < base_.dim())
        throw StructuralError("extended utility: need at least d assets");
}

double ExtendedUtility::value(const Eigen::VectorXd& x) const {
    if (x.size() != assets_) throw StructuralError("extended utility value: dimension mismatch");
    for (int i = base_.dim(); i < assets_; ++i)
        if (x(i) < 0.0) return -kInf;
    for (int i = 0; i < base_.dim(); ++i)
        if (x(i) < 0.0) return -kInf;
    return base_.value(x.head(base_.dim()));
}

double ExtendedUtility::conjugate(const Eigen::VectorXd& y) const {
    if (y.size() != assets_) throw StructuralError("extended conjugate: dimension mismatch");
    for (int i = 0; i < assets_; ++i)
        if (y(i) < 0.0) return kInf;
    return base_.conjugate(y.head(base_.dim()));
}

Eigen::VectorXd ExtendedUtility::inverseMarginalTilde(const Eigen::VectorXd& y) const {
    if (y.size() != assets_) throw StructuralError("extended inverseMarginal: dimension mismatch");
    for (int i = base_.dim(); i < assets_; ++i)
        if (y(i) < 0.0) throw DomainError("extended inverseMarginal: negative non-consumption price");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(assets_);
    x.head(base_.dim()) = base_.inverseMarginal(y.head(base_.dim()));
    return x;
}

void ExtendedUtility::conjugateDerivatives(const Eigen::VectorXd& y, double& val,
                                           Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    if (y.size() != assets_) throw StructuralError("extended conjugateDerivatives: dimension mismatch");
    const int d = base_.dim();
    double v;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    base_.conjugateDerivatives(y.head(d), v, g, h);
    val = v;
    grad = Eigen::VectorXd::Zero(assets_);
    grad.head(d) = g;
    hess = Eigen::MatrixXd::Zero(assets_, assets_);
    hess.topLeftCorner(d, d) = h;
}

}  // namespace conemkt
