#include "conemkt/cone.hpp"

#include <cmath>
#include <sstream>

#include "conemkt/errors.hpp"
#include "conemkt/lp.hpp"

namespace conemkt {

std::string BidAskViolation::describe() const {
    std::ostringstream os;
    switch (condition) {
        case 1:
            os << "entry (" << i << "," << j << ") = " << lhs << " is not positive";
            break;
        case 2:
            os << "diagonal entry (" << i << "," << i << ") = " << lhs << " differs from 1";
            break;
        default:
            os << "pi(" << i << "," << j << ") = " << lhs << " exceeds pi(" << i << "," << k
               << ") * pi(" << k << "," << j << ") = " << rhs;
            break;
    }
    return os.str();
}

BidAskMatrix::ValidationResult BidAskMatrix::validate(const Eigen::MatrixXd& entries) {
    if (entries.rows() != entries.cols())
        throw StructuralError("bid-ask matrix must be square");
    if (entries.rows() < 1) throw StructuralError("bid-ask matrix must be nonempty");
    if (!entries.allFinite()) throw StructuralError("bid-ask matrix has non-finite entries");

    const int d = static_cast<int>(entries.rows());
    ValidationResult res;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!(entries(i, j) > 0.0))
                res.violations.push_back({1, i, j, -1, entries(i, j), 0.0});
    for (int i = 0; i < d; ++i)
        if (entries(i, i) != 1.0)
            res.violations.push_back({2, i, i, -1, entries(i, i), 1.0});
    // Tiny slack so that rates computed from products of doubles validate.
    const double slack = 1e-12;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double rhs = entries(i, k) * entries(k, j);
                if (entries(i, j) > rhs * (1.0 + slack))
                    res.violations.push_back({3, i, j, k, entries(i, j), rhs});
            }
    if (res.violations.empty()) res.matrix = BidAskMatrix(entries);
    return res;
}

BidAskMatrix BidAskMatrix::frictionless(const Eigen::VectorXd& price) {
    const int d = static_cast<int>(price.size());
    if (d < 1) throw StructuralError("frictionless: empty price vector");
    for (int i = 0; i < d; ++i)
        if (!(price(i) > 0.0) || !std::isfinite(price(i)))
            throw StructuralError("frictionless: prices must be positive and finite");
    Eigen::MatrixXd pi(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) pi(i, j) = (i == j) ? 1.0 : price(j) / price(i);
    auto res = validate(pi);
    if (!res.ok()) {
        // Rounding in the quotients can nudge a product below an entry; retry
        // with the entries snapped to satisfy the two-step bound exactly.
        for (auto& v : res.violations)
            if (v.condition == 3) pi(v.i, v.j) = v.rhs;
        res = validate(pi);
        if (!res.ok()) throw StructuralError("frictionless: construction failed to validate");
    }
    return *res.matrix;
}

namespace {

// Scale to unit sup norm so positive multiples compare equal.
Eigen::VectorXd supNormalize(const Eigen::VectorXd& v) {
    double s = v.cwiseAbs().maxCoeff();
    return s > 0 ? Eigen::VectorXd(v / s) : v;
}

}  // namespace

SolvencyCone::SolvencyCone(const BidAskMatrix& pi) {
    const int d = pi.dim();
    std::vector<Eigen::VectorXd> cols;
    cols.reserve(d * d);
    for (int i = 0; i < d; ++i) cols.push_back(Eigen::VectorXd::Unit(d, i));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            Eigen::VectorXd g = pi.at(i, j) * Eigen::VectorXd::Unit(d, i) - Eigen::VectorXd::Unit(d, j);
            bool dup = false;
            Eigen::VectorXd gn = supNormalize(g);
            for (const auto& c : cols)
                if ((supNormalize(c) - gn).cwiseAbs().maxCoeff() < 1e-12) { dup = true; break; }
            if (!dup) cols.push_back(std::move(g));
        }
    gen_.resize(d, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index k = 0; k < gen_.cols(); ++k) gen_.col(k) = cols[static_cast<size_t>(k)];
}

PolarCone polarCone(const SolvencyCone& cone) { return PolarCone{cone.generators()}; }

MembershipResult coneContains(const Eigen::MatrixXd& generators, const Eigen::VectorXd& x,
                              double tol) {
    const int d = static_cast<int>(generators.rows());
    const int m = static_cast<int>(generators.cols());
    if (x.size() != d) throw StructuralError("coneContains: dimension mismatch");

    // min t  s.t.  -t <= (G lam - x)_i <= t,  lam >= 0, t >= 0.
    LinearProgram lp(m + 1);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m + 1);
    c(m) = 1.0;
    lp.setObjective(c);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd row(m + 1);
        row.head(m) = generators.row(i).transpose();
        row(m) = 1.0;
        lp.addConstraint(row, '>', x(i));  // G lam + t >= x
        row(m) = -1.0;
        lp.addConstraint(row, '<', x(i));  // G lam - t <= x
    }
    LpResult sol = lp.solve();
    if (sol.status != LpStatus::Optimal)
        throw SolverError("coneContains: membership LP did not solve");

    MembershipResult res;
    res.residual = std::max(0.0, sol.objective);
    res.inside = res.residual <= tol;
    if (res.inside) {
        res.coefficients = sol.x.head(m);
    } else {
        // Row duals of the paired inequalities produce the separating
        // functional: s = y_lower - y_upper satisfies <g, s> <= 0, <x, s> = t*.
        Eigen::VectorXd s(d);
        for (int i = 0; i < d; ++i) s(i) = sol.rowDual(2 * i) + sol.rowDual(2 * i + 1);
        res.separator = s;
    }
    return res;
}

bool interiorContains(const PolarCone& polar, const Eigen::VectorXd& w, double margin) {
    if (w.size() != polar.dim()) throw StructuralError("interiorContains: dimension mismatch");
    double l1 = w.cwiseAbs().sum();
    if (!(l1 > 0.0)) return false;
    for (Eigen::Index k = 0; k < polar.halfspaces.cols(); ++k)
        if (polar.halfspaces.col(k).dot(w) < margin * l1) return false;
    return true;
}

}  // namespace conemkt
