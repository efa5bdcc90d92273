#include "conemkt/liquidation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conemkt/errors.hpp"
#include "conemkt/lp.hpp"

namespace conemkt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// U(xi) over y = (xi, lambda); lambda only enters the constraint rows.
class SingleLiquidationObjective : public SmoothConcave {
public:
    SingleLiquidationObjective(const Utility& u, int lambdaDim)
        : u_(u), d_(u.dim()), m_(lambdaDim) {}
    int dim() const override { return d_ + m_; }
    double value(const Eigen::VectorXd& y) const override { return u_.value(y.head(d_)); }
    void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const override {
        grad = Eigen::VectorXd::Zero(d_ + m_);
        hess = Eigen::MatrixXd::Zero(d_ + m_, d_ + m_);
        grad.head(d_) = u_.gradient(y.head(d_));
        hess.topLeftCorner(d_, d_) = u_.hessian(y.head(d_));
    }

private:
    const Utility& u_;
    int d_, m_;
};

// sum_leaf p U(xi_leaf) over y = (c_internal, xi_0, lambda_0, xi_1, ...).
class JointLiquidationObjective : public SmoothConcave {
public:
    JointLiquidationObjective(const Utility& u, std::vector<double> prob,
                              std::vector<int> xiOffset, int total)
        : u_(u), d_(u.dim()), prob_(std::move(prob)), xiOffset_(std::move(xiOffset)),
          total_(total) {}
    int dim() const override { return total_; }
    double value(const Eigen::VectorXd& y) const override {
        double v = 0.0;
        for (size_t li = 0; li < prob_.size(); ++li) {
            double term = u_.value(y.segment(xiOffset_[li], d_));
            if (!std::isfinite(term)) return -kInf;
            v += prob_[li] * term;
        }
        return v;
    }
    void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const override {
        grad = Eigen::VectorXd::Zero(total_);
        hess = Eigen::MatrixXd::Zero(total_, total_);
        for (size_t li = 0; li < prob_.size(); ++li) {
            const int off = xiOffset_[li];
            grad.segment(off, d_) = prob_[li] * u_.gradient(y.segment(off, d_));
            hess.block(off, off, d_, d_) = prob_[li] * u_.hessian(y.segment(off, d_));
        }
    }

private:
    const Utility& u_;
    int d_;
    std::vector<double> prob_;
    std::vector<int> xiOffset_;
    int total_;
};

}  // namespace

LiquidationResult liquidationUtility(const SolvencyCone& cone, const Utility& u,
                                     const Eigen::VectorXd& W, const BarrierOptions& opt) {
    const int D = cone.dim();
    const int d = u.dim();
    if (W.size() != D) throw StructuralError("liquidationUtility: position dimension mismatch");
    if (d > D) throw StructuralError("liquidationUtility: more consumption goods than assets");

    LiquidationResult out;
    MembershipResult member = coneContains(cone, W);
    out.coneResidual = member.residual;
    if (!member.inside) {
        out.inCone = false;
        out.value = -kInf;
        out.message = "position cannot be traded into the nonnegative orthant";
        return out;
    }
    out.inCone = true;

    const Eigen::MatrixXd& G = cone.generators();
    const int m = static_cast<int>(G.cols());
    const int n = d + m;
    const double cap = 1e6 * std::max(1.0, W.cwiseAbs().sum());

    // Rows: xi >= 0, lambda >= 0, lambda <= cap, W - (xi, 0) - G lambda >= 0.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m + D, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m + D);
    A.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    A.middleRows(n, m).rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
    b.segment(n, m).setConstant(-cap);
    for (int j = 0; j < D; ++j) {
        if (j < d) A(n + m + j, j) = -1.0;
        A.row(n + m + j).tail(m) = -G.row(j);
        b(n + m + j) = -W(j);
    }

    LinearProgram lp(n + 1);
    {
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(n + 1);
        obj(n) = 1.0;
        lp.setObjective(obj, false);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row(i) = 1.0;
            row(n) = -1.0;
            lp.addConstraint(row, '>', 0.0);
        }
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row(d + i) = 1.0;
            lp.addConstraint(row, '<', 0.5 * cap);
        }
        for (int j = 0; j < D; ++j) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row.head(n) = A.row(n + m + j).transpose();
            row(n) = -1.0;
            lp.addConstraint(row, '>', -W(j));
        }
        Eigen::VectorXd capRow = Eigen::VectorXd::Zero(n + 1);
        capRow(n) = 1.0;
        lp.addConstraint(capRow, '<', 1.0);
    }
    LpResult start = lp.solve();
    if (start.status != LpStatus::Optimal)
        throw SolverError("liquidationUtility: start search did not terminate", -kInf);

    if (start.x(n) <= 1e-9) {
        Eigen::VectorXd xi = start.x.head(d).cwiseMax(0.0);
        double v = u.value(xi);
        out.value = std::isfinite(v) ? v : -kInf;
        out.xi = xi;
        out.message = "position on the boundary: no bundle with uniform slack exists; "
                      "value taken at a feasible bundle";
        return out;
    }

    SingleLiquidationObjective f(u, m);
    BarrierResult res = maximizeWithBarrier(f, A, b, start.x.head(n), opt);
    if (res.diverged)
        throw SolverError("liquidationUtility: objective ran away", res.value);
    out.value = res.value;
    out.xi = res.y.head(d);
    out.newtonSteps = res.newtonSteps;
    out.message = res.message;
    return out;
}

double liquidationValueD1(const SolvencyCone& cone, const Eigen::VectorXd& W) {
    const int D = cone.dim();
    if (W.size() != D) throw StructuralError("liquidationValueD1: position dimension mismatch");
    const Eigen::MatrixXd& G = cone.generators();
    const int m = static_cast<int>(G.cols());

    // max xi subject to xi e_1 + G lambda <= W, xi and lambda nonnegative.
    LinearProgram lp(1 + m);
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(1 + m);
    obj(0) = 1.0;
    lp.setObjective(obj, false);
    for (int j = 0; j < D; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(1 + m);
        if (j == 0) row(0) = 1.0;
        row.tail(m) = G.row(j);
        lp.addConstraint(row, '<', W(j));
    }
    LpResult sol = lp.solve();
    if (sol.status == LpStatus::Infeasible) return -kInf;
    if (sol.status != LpStatus::Optimal)
        throw SolverError("liquidationValueD1: LP did not terminate", -kInf);
    return sol.objective;
}

LiquidationSolve solveLiquidationFormulation(const ScenarioTree& tree, const Utility& base,
                                             const Eigen::VectorXd& x, const SolveOptions& opt) {
    const int D = tree.assets();
    const int d = base.dim();
    if (x.size() != D) throw StructuralError("solveLiquidationFormulation: endowment mismatch");
    if (d > D)
        throw StructuralError("solveLiquidationFormulation: more consumption goods than assets");

    const auto& leaves = tree.leaves();
    const int L = static_cast<int>(leaves.size());

    // Internal transfer blocks.
    std::vector<int> blockNode, blockOffset;
    int nInt = 0;
    std::vector<int> blockOfNode(tree.nodeCount(), -1);
    for (int k = 0; k < tree.nodeCount(); ++k) {
        if (tree.isLeaf(k)) continue;
        blockOfNode[k] = static_cast<int>(blockNode.size());
        blockNode.push_back(k);
        blockOffset.push_back(nInt);
        nInt += static_cast<int>(tree.coneAt(k).generators().cols());
    }

    // Variable layout: (c, xi_0, lambda_0, xi_1, lambda_1, ...).
    std::vector<int> xiOffset(L), lamOffset(L), lamDim(L);
    int total = nInt;
    for (int li = 0; li < L; ++li) {
        xiOffset[li] = total;
        total += d;
        lamOffset[li] = total;
        lamDim[li] = static_cast<int>(tree.coneAt(leaves[li]).generators().cols());
        total += lamDim[li];
    }

    // Pre-liquidation holdings W(leaf) = x + Bint_leaf c.
    std::vector<Eigen::MatrixXd> Bint(L);
    std::vector<double> prob(L);
    for (int li = 0; li < L; ++li) {
        Bint[li] = Eigen::MatrixXd::Zero(D, std::max(nInt, 1));
        for (int k : tree.pathTo(leaves[li])) {
            int bIdx = blockOfNode[k];
            if (bIdx < 0) continue;
            const Eigen::MatrixXd& G = tree.coneAt(k).generators();
            Bint[li].middleCols(blockOffset[bIdx], G.cols()) = -G;
        }
        prob[li] = tree.probOf(leaves[li]);
    }

    const double cap = 1e6 * std::max(1.0, x.cwiseAbs().sum());

    // Rows: c >= 0, c <= cap, xi >= 0, lambda >= 0, lambda <= cap,
    //       W(leaf) - (xi, 0) - G_leaf lambda >= 0.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    std::vector<bool> wantSlack;  // rows the start LP pushes off the bound
    auto addRow = [&](const Eigen::VectorXd& r, double v, bool slack) {
        rows.push_back(r);
        rhs.push_back(v);
        wantSlack.push_back(slack);
    };
    for (int i = 0; i < nInt; ++i) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(total);
        r(i) = 1.0;
        addRow(r, 0.0, true);
        addRow(-r, -cap, false);
    }
    for (int li = 0; li < L; ++li) {
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(total);
            r(xiOffset[li] + i) = 1.0;
            addRow(r, 0.0, true);
        }
        for (int i = 0; i < lamDim[li]; ++i) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(total);
            r(lamOffset[li] + i) = 1.0;
            addRow(r, 0.0, true);
            addRow(-r, -cap, false);
        }
        const Eigen::MatrixXd& G = tree.coneAt(leaves[li]).generators();
        for (int j = 0; j < D; ++j) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(total);
            if (nInt > 0) r.head(nInt) = Bint[li].row(j);
            if (j < d) r(xiOffset[li] + j) = -1.0;
            r.segment(lamOffset[li], lamDim[li]) = -G.row(j);
            addRow(r, -x(j), true);
        }
    }

    const int R = static_cast<int>(rows.size());
    Eigen::MatrixXd A(R, total);
    Eigen::VectorXd b(R);
    for (int r = 0; r < R; ++r) {
        A.row(r) = rows[r];
        b(r) = rhs[r];
    }

    LiquidationSolve out;
    LinearProgram lp(total + 1);
    {
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(total + 1);
        obj(total) = 1.0;
        lp.setObjective(obj, false);
        for (int r = 0; r < R; ++r) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(total + 1);
            row.head(total) = rows[r];
            if (wantSlack[r]) {
                row(total) = -1.0;
                lp.addConstraint(row, '>', rhs[r]);
            } else {
                // cap rows: start at half range so they keep slack
                lp.addConstraint(row, '>', 0.5 * rhs[r]);
            }
        }
        Eigen::VectorXd capRow = Eigen::VectorXd::Zero(total + 1);
        capRow(total) = 1.0;
        lp.addConstraint(capRow, '<', 1.0);
    }
    LpResult start = lp.solve();
    if (start.status == LpStatus::Infeasible) {
        out.feasible = false;
        out.boundary = true;
        out.value = -kInf;
        out.message = "no plan liquidates into the nonnegative orthant from x";
        return out;
    }
    if (start.status != LpStatus::Optimal)
        throw SolverError("solveLiquidationFormulation: start search did not terminate", -kInf);

    JointLiquidationObjective f(base, prob, xiOffset, total);
    if (start.x(total) <= 1e-9) {
        Eigen::VectorXd y = start.x.head(total).cwiseMax(0.0);
        double v = f.value(y);
        out.boundary = true;
        out.feasible = std::isfinite(v);
        out.value = out.feasible ? v : -kInf;
        out.message = "endowment on the boundary of the solvable region; value taken at a "
                      "feasible plan without an optimality certificate";
        return out;
    }

    BarrierResult res = maximizeWithBarrier(f, A, b, start.x.head(total), opt.barrier);
    if (res.diverged)
        throw SolverError("solveLiquidationFormulation: utility grows without bound",
                          res.value);

    out.feasible = true;
    out.value = res.value;
    out.newtonSteps = res.newtonSteps;
    out.message = res.message;
    for (int li = 0; li < L; ++li) {
        out.xi.push_back(res.y.segment(xiOffset[li], d));
        Eigen::VectorXd W = x;
        if (nInt > 0) W += Bint[li] * res.y.head(nInt);
        out.preliquidation.push_back(std::move(W));
    }
    return out;
}

}  // namespace conemkt
