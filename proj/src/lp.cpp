#include "conemkt/lp.hpp"

#include <cmath>
#include <limits>

#include "conemkt/errors.hpp"

namespace conemkt {
namespace {

constexpr double kPivotTol = 1e-9;  // smallest pivot element the ratio test accepts
constexpr double kRedTol = 1e-10;   // entering threshold on reduced costs

struct Tableau {
    Eigen::MatrixXd T;       // m x (ncols + 1), last column is the rhs
    Eigen::RowVectorXd red;  // reduced costs, ncols entries
    double obj = 0.0;        // minus the cost of the current basis
    std::vector<int> basis;  // basic column per row
    int m = 0, ncols = 0;

    void pivot(int row, int col) {
        T.row(row) /= T(row, col);
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = T(i, col);
            if (f != 0.0) T.row(i) -= f * T.row(row);
        }
        double rf = red(col);
        if (rf != 0.0) {
            red -= rf * T.row(row).head(ncols);
            obj -= rf * T(row, ncols);
        }
        basis[row] = col;
    }

    // Rebuilds reduced costs and the objective from the cost vector, clearing
    // the drift the incremental updates accumulate over many pivots.
    void recompute(const Eigen::RowVectorXd& cost) {
        red = cost;
        obj = 0.0;
        for (int i = 0; i < m; ++i) {
            double cb = cost(basis[i]);
            if (cb != 0.0) {
                red -= cb * T.row(i).head(ncols);
                obj -= cb * T(i, ncols);
            }
        }
        for (int i = 0; i < m; ++i) red(basis[i]) = 0.0;
    }
};

// Simplex loop on the current tableau. allowed(j) gates entering columns.
// Among leaving rows whose ratios tie, the largest pivot element wins, which
// keeps the tableau from blowing up; under Bland's rule the smallest basis
// index wins instead, which guarantees termination.
template <typename Allowed>
LpStatus iterate(Tableau& tab, const Allowed& allowed, bool blandFromStart) {
    const int cap = 500 * (tab.m + tab.ncols) + 2000;
    const int blandAfter = blandFromStart ? 0 : 20 * (tab.m + tab.ncols) + 50;
    int iters = 0;
    while (true) {
        if (++iters > cap) return LpStatus::IterationLimit;
        bool bland = iters > blandAfter;
        int enter = -1;
        double best = -kRedTol;
        for (int j = 0; j < tab.ncols; ++j) {
            if (!allowed(j)) continue;
            double r = tab.red(j);
            if (r < -kRedTol) {
                if (bland) { enter = j; break; }
                if (r < best) { best = r; enter = j; }
            }
        }
        if (enter < 0) return LpStatus::Optimal;
        int leave = -1;
        double bestRatio = 0.0;
        for (int i = 0; i < tab.m; ++i) {
            double a = tab.T(i, enter);
            if (a <= kPivotTol) continue;
            double ratio = std::max(0.0, tab.T(i, tab.ncols)) / a;
            if (leave < 0) {
                bestRatio = ratio;
                leave = i;
                continue;
            }
            double window = 1e-9 * (1.0 + bestRatio);
            if (ratio < bestRatio - window) {
                bestRatio = ratio;
                leave = i;
            } else if (ratio <= bestRatio + window) {
                bool take = bland ? tab.basis[i] < tab.basis[leave]
                                  : std::abs(a) > std::abs(tab.T(leave, enter));
                if (take) leave = i;
            }
        }
        if (leave < 0) return LpStatus::Unbounded;
        tab.pivot(leave, enter);
    }
}

// Runs iterate, then recomputes the costs and re-enters while the cleanup
// exposes further negative reduced costs.
template <typename Allowed>
LpStatus iterateStable(Tableau& tab, const Eigen::RowVectorXd& cost, const Allowed& allowed,
                       bool blandFromStart) {
    tab.recompute(cost);
    for (int round = 0; round < 30; ++round) {
        LpStatus st = iterate(tab, allowed, blandFromStart);
        if (st != LpStatus::Optimal) return st;
        tab.recompute(cost);
        bool clean = true;
        for (int j = 0; j < tab.ncols && clean; ++j)
            if (allowed(j) && tab.red(j) < -10 * kRedTol) clean = false;
        if (clean) return LpStatus::Optimal;
    }
    return LpStatus::IterationLimit;
}

}  // namespace

LinearProgram::LinearProgram(int numVars) : n_(numVars), c_(Eigen::VectorXd::Zero(numVars)) {
    if (numVars <= 0) throw StructuralError("LinearProgram: need at least one variable");
}

void LinearProgram::setObjective(const Eigen::VectorXd& c, bool minimize) {
    if (c.size() != n_) throw StructuralError("LinearProgram: objective size mismatch");
    c_ = c;
    minimize_ = minimize;
}

void LinearProgram::addConstraint(const Eigen::VectorXd& a, char sense, double rhs) {
    if (a.size() != n_) throw StructuralError("LinearProgram: constraint size mismatch");
    if (sense != '<' && sense != '=' && sense != '>')
        throw StructuralError("LinearProgram: sense must be one of '<', '=', '>'");
    if (!a.allFinite() || !std::isfinite(rhs))
        throw StructuralError("LinearProgram: non-finite constraint data");
    rows_.push_back({a, sense, rhs});
}

LpResult LinearProgram::solveOnce(bool blandFromStart) const {
    const int m = static_cast<int>(rows_.size());
    Eigen::VectorXd cmin = minimize_ ? c_ : Eigen::VectorXd(-c_);

    // Normalize every row to unit inf-norm and nonnegative rhs; remember the
    // scale and the flip to undo them on the duals.
    std::vector<Eigen::VectorXd> a(m);
    std::vector<double> b(m);
    std::vector<char> sense(m);
    std::vector<bool> flipped(m, false);
    std::vector<double> scale(m, 1.0);
    for (int i = 0; i < m; ++i) {
        a[i] = rows_[i].a;
        b[i] = rows_[i].rhs;
        sense[i] = rows_[i].sense;
        double s = a[i].cwiseAbs().maxCoeff();
        if (s > 0.0) {
            a[i] /= s;
            b[i] /= s;
            scale[i] = s;
        }
        if (b[i] < 0.0) {
            a[i] = -a[i];
            b[i] = -b[i];
            sense[i] = (sense[i] == '<') ? '>' : (sense[i] == '>') ? '<' : '=';
            flipped[i] = true;
        }
    }

    int numSlack = 0, numArt = 0;
    for (int i = 0; i < m; ++i) {
        if (sense[i] != '=') ++numSlack;
        if (sense[i] != '<') ++numArt;
    }
    const int ncols = n_ + numSlack + numArt;

    Tableau tab;
    tab.m = m;
    tab.ncols = ncols;
    tab.T = Eigen::MatrixXd::Zero(m, ncols + 1);
    tab.basis.assign(m, -1);

    // unitCol[i]: a column whose original content is +e_i, used to read duals.
    std::vector<int> unitCol(m, -1);
    std::vector<bool> isArt(ncols, false);
    int slackAt = n_, artAt = n_ + numSlack;
    for (int i = 0; i < m; ++i) {
        tab.T.block(i, 0, 1, n_) = a[i].transpose();
        tab.T(i, ncols) = b[i];
        if (sense[i] == '<') {
            tab.T(i, slackAt) = 1.0;
            tab.basis[i] = slackAt;
            unitCol[i] = slackAt;
            ++slackAt;
        } else if (sense[i] == '>') {
            tab.T(i, slackAt) = -1.0;
            ++slackAt;
        }
        if (sense[i] != '<') {
            tab.T(i, artAt) = 1.0;
            tab.basis[i] = artAt;
            unitCol[i] = artAt;
            isArt[artAt] = true;
            ++artAt;
        }
    }

    LpResult res;
    res.x = Eigen::VectorXd::Zero(n_);
    res.rowDual = Eigen::VectorXd::Zero(m);

    // Phase 1: minimize the artificial total.
    Eigen::RowVectorXd cost1 = Eigen::RowVectorXd::Zero(ncols);
    for (int j = 0; j < ncols; ++j)
        if (isArt[j]) cost1(j) = 1.0;
    LpStatus st = iterateStable(tab, cost1, [](int) { return true; }, blandFromStart);
    if (st != LpStatus::Optimal) {
        res.status = st == LpStatus::Unbounded ? LpStatus::IterationLimit : st;
        return res;
    }
    double phase1 = -tab.obj;  // freshly recomputed by iterateStable
    if (phase1 > tol_) {
        res.status = LpStatus::Infeasible;
        res.infeasibility = phase1;
        res.farkas = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) {
            double cj = isArt[unitCol[i]] ? 1.0 : 0.0;
            double y = cj - tab.red(unitCol[i]);
            if (flipped[i]) y = -y;
            res.farkas(i) = y / scale[i];
        }
        return res;
    }

    // Drive leftover artificials out of the basis. After a clean phase 1 they
    // all sit at (numerically) zero, so a pivot in any usable column is safe.
    for (int i = 0; i < m; ++i) {
        if (!isArt[tab.basis[i]]) continue;
        int col = -1;
        double best = 1e-8;
        for (int j = 0; j < ncols; ++j)
            if (!isArt[j] && std::abs(tab.T(i, j)) > best) {
                best = std::abs(tab.T(i, j));
                col = j;
            }
        if (col >= 0) tab.pivot(i, col);
        // Otherwise the row is redundant; the artificial stays basic at zero.
    }

    // Phase 2.
    Eigen::RowVectorXd cost2 = Eigen::RowVectorXd::Zero(ncols);
    for (int j = 0; j < n_; ++j) cost2(j) = cmin(j);
    st = iterateStable(tab, cost2, [&](int j) { return !isArt[j]; }, blandFromStart);
    if (st != LpStatus::Optimal) {
        res.status = st;
        return res;
    }

    for (int i = 0; i < m; ++i) {
        int bj = tab.basis[i];
        if (bj < n_) res.x(bj) = tab.T(i, ncols);
    }
    for (int i = 0; i < n_; ++i)
        if (std::abs(res.x(i)) < 1e-13) res.x(i) = 0.0;
    double objMin = -tab.obj;
    res.objective = minimize_ ? objMin : -objMin;
    for (int i = 0; i < m; ++i) {
        double y = -tab.red(unitCol[i]);  // phase-2 cost of the unit column is zero
        if (flipped[i]) y = -y;
        if (!minimize_) y = -y;
        res.rowDual(i) = y / scale[i];
    }
    res.status = LpStatus::Optimal;

    // Certify the claimed solution against the original rows.
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        double v = rows_[i].a.dot(res.x);
        double norm = std::max(1.0, std::abs(rows_[i].rhs));
        double viol = 0.0;
        if (rows_[i].sense == '=') viol = std::abs(v - rows_[i].rhs);
        else if (rows_[i].sense == '>') viol = rows_[i].rhs - v;
        else viol = v - rows_[i].rhs;
        worst = std::max(worst, viol / norm);
    }
    res.infeasibility = std::max(worst, 0.0);
    return res;
}

LpResult LinearProgram::solve() const {
    LpResult res = solveOnce(false);
    bool suspect = (res.status == LpStatus::Optimal && res.infeasibility > 1e-7) ||
                   res.status == LpStatus::IterationLimit;
    if (suspect) {
        // Deterministic fallback on a different pivot path.
        LpResult retry = solveOnce(true);
        bool retryOk = retry.status != LpStatus::IterationLimit &&
                       !(retry.status == LpStatus::Optimal && retry.infeasibility > 1e-7);
        if (retryOk) return retry;
        if (res.status == LpStatus::Optimal) res.status = LpStatus::IterationLimit;
    }
    return res;
}

}  // namespace conemkt
