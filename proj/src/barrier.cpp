#include "conemkt/barrier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conemkt/errors.hpp"

namespace conemkt {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BarrierResult maximizeWithBarrier(const SmoothConcave& f, const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& b, const Eigen::VectorXd& start,
                                  const BarrierOptions& opt, const Eigen::MatrixXd* E,
                                  const Eigen::VectorXd* e) {
    const int n = f.dim();
    const int m = static_cast<int>(A.rows());
    const int p = E ? static_cast<int>(E->rows()) : 0;
    if (A.cols() != n || b.size() != m)
        throw StructuralError("barrier: constraint shape mismatch");
    if (E && (E->cols() != n || e->size() != p))
        throw StructuralError("barrier: equality shape mismatch");

    BarrierResult res;
    Eigen::VectorXd y = start;
    {
        Eigen::VectorXd s = A * y - b;
        if (m > 0 && s.minCoeff() <= 0.0)
            throw SolverError("barrier: start is not strictly feasible");
        if (!std::isfinite(f.value(y)))
            throw SolverError("barrier: objective not finite at the start");
        if (E && (*E * y - *e).cwiseAbs().maxCoeff() > 1e-8)
            throw SolverError("barrier: start violates the equality rows");
    }

    auto phi = [&](const Eigen::VectorXd& yy, double mu) {
        double v = f.value(yy);
        if (!std::isfinite(v)) return -kInf;
        for (int i = 0; i < m; ++i) {
            double s = A.row(i) * yy - b(i);
            if (s <= 0.0) return -kInf;
            v += mu * std::log(s);
        }
        return v;
    };

    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    double mu = opt.muInitial;
    while (true) {
        for (int it = 0; it < opt.maxNewtonPerStage; ++it) {
            double fval = f.value(y);
            if (std::abs(fval) > opt.divergenceValue || y.cwiseAbs().maxCoeff() > opt.divergenceNorm) {
                res.diverged = true;
                res.y = y;
                res.value = fval;
                res.message = "objective or iterate ran away; the problem looks unbounded";
                return res;
            }
            f.derivatives(y, grad, hess);
            Eigen::VectorXd s = A * y - b;
            Eigen::VectorXd g = grad;
            Eigen::MatrixXd H = hess;
            for (int i = 0; i < m; ++i) {
                double inv = 1.0 / s(i);
                g += mu * inv * A.row(i).transpose();
                H -= mu * inv * inv * A.row(i).transpose() * A.row(i);
            }

            // Solve the (possibly equality-constrained) Newton system.
            Eigen::VectorXd dy;
            bool solved = false;
            double ridge = 0.0;
            for (int attempt = 0; attempt < 6 && !solved; ++attempt) {
                if (p == 0) {
                    Eigen::MatrixXd M = -H;
                    if (ridge > 0.0) M.diagonal().array() += ridge;
                    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
                    if (ldlt.info() == Eigen::Success) {
                        dy = ldlt.solve(g);
                        solved = (M * dy - g).cwiseAbs().maxCoeff() <=
                                 1e-6 * (1.0 + g.cwiseAbs().maxCoeff());
                    }
                } else {
                    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + p, n + p);
                    K.topLeftCorner(n, n) = -H;
                    if (ridge > 0.0) K.topLeftCorner(n, n).diagonal().array() += ridge;
                    K.topRightCorner(n, p) = E->transpose();
                    K.bottomLeftCorner(p, n) = *E;
                    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p);
                    rhs.head(n) = g;
                    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
                    if (lu.isInvertible()) {
                        Eigen::VectorXd sol = lu.solve(rhs);
                        dy = sol.head(n);
                        solved = true;
                    }
                }
                if (!solved)
                    ridge = (ridge == 0.0) ? 1e-10 * (1.0 + H.cwiseAbs().maxCoeff()) : ridge * 100.0;
            }
            if (!solved)
                throw SolverError("barrier: Newton system could not be solved", f.value(y));

            double decrement = g.dot(dy);
            if (decrement <= 2.0 * opt.newtonTol * (1.0 + std::abs(fval))) break;

            // Fraction to the boundary, then backtracking on the barrier value.
            double t = 1.0;
            for (int i = 0; i < m; ++i) {
                double ady = A.row(i) * dy;
                if (ady < 0.0) t = std::min(t, -0.99 * s(i) / ady);
            }
            double base = phi(y, mu);
            int halvings = 0;
            while (halvings < 70) {
                double cand = phi(y + t * dy, mu);
                if (cand > base + 0.25 * t * decrement) break;
                t *= 0.5;
                ++halvings;
            }
            if (halvings >= 70) break;  // no progress at this stage
            y += t * dy;
            ++res.newtonSteps;
        }
        if (mu <= opt.muMin) break;
        mu = std::max(opt.muMin, mu * opt.muFactor);
    }

    res.converged = true;
    res.y = y;
    res.value = f.value(y);
    res.gapEstimate = mu * std::max(1, m);
    std::ostringstream os;
    os << "central path finished at mu " << mu << " after " << res.newtonSteps << " Newton steps";
    res.message = os.str();
    return res;
}

}  // namespace conemkt
