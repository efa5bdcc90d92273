#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace conemkt {

// One failed bid-ask inequality. condition 1 is positivity, 2 the unit
// diagonal, 3 the two-step exchange bound pi(i,j) <= pi(i,k) * pi(k,j).
struct BidAskViolation {
    int condition;
    int i, j, k;  // k is only meaningful for condition 3
    double lhs, rhs;
    std::string describe() const;
};

struct BidAskValidation;

// Matrix of exchange rates: pi(i, j) units of asset i buy one unit of asset j.
// Instances are validated; use validate() to construct from raw entries.
class BidAskMatrix {
public:
    using ValidationResult = BidAskValidation;

    // Checks positivity, the unit diagonal and the two-step exchange bound.
    // Throws StructuralError for non-square or non-finite input; inequality
    // failures are reported in the result, not thrown.
    static BidAskValidation validate(const Eigen::MatrixXd& entries);

    // Frictionless rates pi(i, j) = price(j) / price(i) from a positive price vector.
    static BidAskMatrix frictionless(const Eigen::VectorXd& price);

    int dim() const { return static_cast<int>(pi_.rows()); }
    double at(int i, int j) const { return pi_(i, j); }
    const Eigen::MatrixXd& entries() const { return pi_; }

private:
    explicit BidAskMatrix(Eigen::MatrixXd pi) : pi_(std::move(pi)) {}
    Eigen::MatrixXd pi_;
};

struct BidAskValidation {
    std::optional<BidAskMatrix> matrix;  // set when the entries pass
    std::vector<BidAskViolation> violations;
    bool ok() const { return matrix.has_value(); }
};

// Solvency cone of a bid-ask matrix: the conic hull of the unit vectors e_i
// and the exchange vectors pi(i,j) e_i - e_j. Positions in the cone can be
// traded to the nonnegative orthant.
class SolvencyCone {
public:
    explicit SolvencyCone(const BidAskMatrix& pi);

    // Columns are the generators, duplicates removed up to positive scaling.
    const Eigen::MatrixXd& generators() const { return gen_; }
    int dim() const { return static_cast<int>(gen_.rows()); }

private:
    Eigen::MatrixXd gen_;
};

// Polar (positive dual) cone { w : <g, w> >= 0 for every generator g }.
// The generators of the primal cone serve directly as halfspace normals.
struct PolarCone {
    Eigen::MatrixXd halfspaces;  // one normal per column
    int dim() const { return static_cast<int>(halfspaces.rows()); }
};

PolarCone polarCone(const SolvencyCone& cone);

struct MembershipResult {
    bool inside = false;
    double residual = 0.0;            // sup-norm distance of the best conic fit
    Eigen::VectorXd coefficients;     // nonnegative generator weights when inside
    Eigen::VectorXd separator;        // when outside: <g, s> <= 0 for all g, <x, s> > 0
};

// LP test of x against the conic hull of the given generator columns.
MembershipResult coneContains(const Eigen::MatrixXd& generators, const Eigen::VectorXd& x,
                              double tol = 1e-9);

inline MembershipResult coneContains(const SolvencyCone& cone, const Eigen::VectorXd& x,
                                     double tol = 1e-9) {
    return coneContains(cone.generators(), x, tol);
}

// Strict polar membership: <g, w> >= margin * |w|_1 for every halfspace normal.
// The margin is relative, so the test is scale invariant; w = 0 is rejected.
bool interiorContains(const PolarCone& polar, const Eigen::VectorXd& w, double margin = 1e-6);

}  // namespace conemkt
