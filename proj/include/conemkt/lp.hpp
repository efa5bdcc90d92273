#pragma once

#include <Eigen/Dense>
#include <vector>

namespace conemkt {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    Eigen::VectorXd x;        // structural variables at the optimum
    Eigen::VectorXd rowDual;  // y with y'b = objective for a minimization
    // When infeasible: farkas'b > 0 while farkas'a_j <= 0 for every structural
    // column and every feasible slack direction, certifying an empty feasible set.
    Eigen::VectorXd farkas;
    // When infeasible: the phase-1 optimum. When optimal: the largest relative
    // violation of the claimed solution against the original rows.
    double infeasibility = 0.0;
};

// Small dense linear program
//     min c'x   s.t.  a_i'x  {<=, =, >=}  b_i,   x >= 0
// solved by two-phase primal simplex on a dense tableau. Dantzig pricing with
// a Bland fallback once degenerate pivots accumulate, so cycling terminates.
// Intended for the small systems arising here (tens to a few hundred rows).
class LinearProgram {
public:
    explicit LinearProgram(int numVars);

    void setObjective(const Eigen::VectorXd& c, bool minimize = true);
    // sense is one of '<', '=', '>' meaning <=, ==, >=.
    void addConstraint(const Eigen::VectorXd& a, char sense, double rhs);

    LpResult solve() const;

    int numVars() const { return n_; }
    int numRows() const { return static_cast<int>(rows_.size()); }

    // Feasibility tolerance used for status decisions (default 1e-9).
    void setTolerance(double tol) { tol_ = tol; }

private:
    struct Row {
        Eigen::VectorXd a;
        char sense;
        double rhs;
    };
    LpResult solveOnce(bool blandFromStart) const;

    int n_;
    bool minimize_ = true;
    Eigen::VectorXd c_;
    std::vector<Row> rows_;
    double tol_ = 1e-9;
};

}  // namespace conemkt
