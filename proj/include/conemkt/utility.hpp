#pragma once

#include <Eigen/Dense>
#include <string>

namespace conemkt {

enum class UtilityFamily { AdditivePower, AdditiveLog, MixedAdditive, CobbDouglas };

std::string familyName(UtilityFamily f);

// Parameters of a concave, increasing utility on the positive orthant of R^d.
// Additive families sum per-coordinate terms
//     alpha_i * x_i^gamma_i / gamma_i + c0     (gamma_i < 1, nonzero)
//     alpha_i * ln(x_i) + c0                   (gamma_i == 0 marks a log term)
// Cobb-Douglas is prod x_i^alpha_i + c0 with alpha_i > 0, sum alpha_i < 1.
struct UtilitySpec {
    UtilityFamily family = UtilityFamily::AdditiveLog;
    int d = 1;
    Eigen::VectorXd alpha;
    Eigen::VectorXd gamma;
    double c0 = 0.0;

    static UtilitySpec additiveLog(int d, const Eigen::VectorXd& alpha, double c0 = 0.0);
    static UtilitySpec additivePower(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma,
                                     double c0 = 0.0);
    static UtilitySpec mixedAdditive(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma,
                                     double c0 = 0.0);
    static UtilitySpec cobbDouglas(const Eigen::VectorXd& alpha, double c0 = 0.0);

    // Throws StructuralError when sizes or parameter ranges are off.
    void validateOrThrow() const;
};

// Interface the property checkers and solvers work against. value() returns
// -infinity off the domain; conjugate() returns +infinity where the sup
// diverges; gradient() and hessian() are only defined on the interior.
class UtilityFunction {
public:
    virtual ~UtilityFunction() = default;
    virtual int dim() const = 0;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
    virtual double conjugate(const Eigen::VectorXd& y) const = 0;
    // Inverse of the gradient map: the x with grad U(x) = y, for y > 0.
    virtual Eigen::VectorXd inverseMarginal(const Eigen::VectorXd& y) const = 0;
};

// Closed-form implementation of a UtilitySpec. The Cobb-Douglas conjugate has
// no closed form here and always goes through the numeric search (documented
// log-spaced box with golden-section refinement).
class Utility : public UtilityFunction {
public:
    explicit Utility(UtilitySpec spec);

    const UtilitySpec& spec() const { return spec_; }
    int dim() const override { return spec_.d; }
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
    double conjugate(const Eigen::VectorXd& y) const override;
    Eigen::VectorXd inverseMarginal(const Eigen::VectorXd& y) const override;

    // sup_x { U(x) - <x, y> } searched over the box [1e-8, 1e8]^d in log
    // coordinates, coordinate-wise golden section with cyclic sweeps. Throws
    // SolverError when the maximizer runs into the box edge.
    double conjugateNumeric(const Eigen::VectorXd& y) const;

    // Value, gradient and hessian of the conjugate at interior y > 0, for the
    // dual solvers. Gradient is -I(y); Cobb-Douglas value goes through the
    // equality case of Fenchel-Young at the closed-form maximizer.
    void conjugateDerivatives(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad,
                              Eigen::MatrixXd& hess) const;

    // True when sup U < +infinity (every power coordinate has gamma < 0).
    bool boundedAbove() const;

private:
    UtilitySpec spec_;
};

// Extension to a market with `assets` >= d assets: consumption happens in the
// first d coordinates, the rest only need to stay nonnegative.
class ExtendedUtility {
public:
    ExtendedUtility(Utility base, int assets);

    int assets() const { return assets_; }
    int consumptionDim() const { return base_.dim(); }
    const Utility& base() const { return base_; }

    double value(const Eigen::VectorXd& x) const;      // -inf outside R^assets_+
    double conjugate(const Eigen::VectorXd& y) const;  // +inf outside R^assets_+
    // (inverseMarginal of the first d coordinates, zeros elsewhere).
    Eigen::VectorXd inverseMarginalTilde(const Eigen::VectorXd& y) const;
    // Conjugate derivatives; non-consumption coordinates contribute zero.
    void conjugateDerivatives(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad,
                              Eigen::MatrixXd& hess) const;

private:
    Utility base_;
    int assets_;
};

}  // namespace conemkt
