#include "conemkt/conic_duality.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "conemkt/errors.hpp"
#include "conemkt/lp.hpp"

namespace conemkt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f(G lambda) as a function of the cone coefficients.
class ConeRestriction final : public SmoothConcave {
  public:
    ConeRestriction(std::shared_ptr<const SmoothConcave> f, Eigen::MatrixXd gens)
        : f_(std::move(f)), G_(std::move(gens)) {}
    int dim() const override { return static_cast<int>(G_.cols()); }
    double value(const Eigen::VectorXd& lam) const override { return f_->value(G_ * lam); }
    void derivatives(const Eigen::VectorXd& lam, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const override {
        Eigen::VectorXd g;
        Eigen::MatrixXd H;
        f_->derivatives(G_ * lam, g, H);
        grad = G_.transpose() * g;
        hess = G_.transpose() * H * G_;
    }

  private:
    std::shared_ptr<const SmoothConcave> f_;
    Eigen::MatrixXd G_;
};

bool finiteValue(const SmoothConcave& f, const Eigen::VectorXd& p) {
    const double v = f.value(p);
    return std::isfinite(v);
}

// Scans t * direction over a log grid for a point with finite objective.
bool scaleSearch(const SmoothConcave& f, const Eigen::VectorXd& direction,
                 Eigen::VectorXd* out) {
    for (int k = 0; k <= 28; ++k) {
        const double t = std::pow(10.0, 4.0 - 0.5 * k);  // 1e4 down to 1e-10
        Eigen::VectorXd p = t * direction;
        if (finiteValue(f, p)) {
            *out = std::move(p);
            return true;
        }
    }
    return false;
}

void renderVector(std::ostringstream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        os << v(i);
    }
}

}  // namespace

std::string EngineReport::serialize() const {
    std::ostringstream os;
    os << std::scientific << std::setprecision(15);
    os << "primal_finite=" << (primalFinite ? 1 : 0) << '\n';
    os << "dual_finite=" << (dualFinite ? 1 : 0) << '\n';
    os << "degenerate=" << (degenerate ? 1 : 0) << '\n';
    os << "primal_value=";
    if (primalFinite) os << primalValue; else os << "-inf";
    os << '\n';
    os << "dual_value=";
    if (dualFinite) os << dualValue; else os << "-inf";
    os << '\n';
    os << "gap=" << gap << '\n';
    os << "primal_point=";
    renderVector(os, primalPoint);
    os << '\n';
    os << "dual_point=";
    renderVector(os, dualPoint);
    os << '\n';
    os << "primal_residual=" << primalResidual << '\n';
    os << "dual_residual=" << dualResidual << '\n';
    os << "newton_steps=" << newtonSteps << '\n';
    return os.str();
}

EngineReport maximizeOverCone(const ConicProgram& prog, const BarrierOptions& opt) {
    if (!prog.objective) throw StructuralError("conic program has no objective");
    const Eigen::MatrixXd& G = prog.generators;
    const int n = prog.objective->dim();
    if (G.rows() != n) throw StructuralError("generator rows do not match objective dimension");
    const int m = static_cast<int>(G.cols());

    EngineReport rep;
    rep.primalPoint = Eigen::VectorXd::Zero(n);
    if (m == 0) {
        // C = {0}: the supremum is just f(0).
        const double v = prog.objective->value(Eigen::VectorXd::Zero(n));
        rep.primalFinite = std::isfinite(v);
        rep.primalValue = rep.primalFinite ? v : -kInf;
        rep.message = rep.primalFinite ? "trivial cone" : "objective minus infinity at origin";
        return rep;
    }

    ConeRestriction h(prog.objective, G);

    Eigen::VectorXd lam0;
    bool haveStart = false;
    if (prog.primalStartLambda.size() == m && prog.primalStartLambda.minCoeff() > 0.0 &&
        finiteValue(h, prog.primalStartLambda)) {
        lam0 = prog.primalStartLambda;
        haveStart = true;
    }
    if (!haveStart) {
        // The finite region of f need not face the all-ones ray, so probe the
        // diagonal, each generator alone and seeded random mixtures. Single
        // directions are nudged off the boundary to keep the start strict.
        std::vector<Eigen::VectorXd> dirs;
        dirs.push_back(Eigen::VectorXd::Ones(m));
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd d = Eigen::VectorXd::Constant(m, 1e-8);
            d(j) = 1.0;
            dirs.push_back(d);
        }
        std::mt19937_64 rng(9173ull);
        std::uniform_real_distribution<double> unif(1e-6, 1.0);
        for (int k = 0; k < 64; ++k) {
            Eigen::VectorXd d(m);
            for (int j = 0; j < m; ++j) d(j) = unif(rng);
            dirs.push_back(d);
        }
        for (const auto& d : dirs) {
            if (scaleSearch(h, d, &lam0)) {
                haveStart = true;
                break;
            }
        }
    }
    if (!haveStart) {
        rep.primalFinite = false;
        rep.primalValue = -kInf;
        rep.message = "no strictly positive coefficient vector gives a finite objective";
        return rep;
    }

    // lambda >= 0 as barrier rows A lambda >= b with A = I, b = 0.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    BarrierResult res = maximizeWithBarrier(h, A, b, lam0, opt);
    rep.newtonSteps = res.newtonSteps;
    if (res.diverged) {
        throw SolverError("primal objective is unbounded over the cone", res.value);
    }
    rep.primalFinite = true;
    rep.primalValue = res.value;
    rep.primalPoint = G * res.y;
    rep.primalResidual = std::max(0.0, -res.y.minCoeff());
    rep.message = res.message;
    return rep;
}

EngineReport minimizeDual(const ConicProgram& prog, const BarrierOptions& opt) {
    if (!prog.negConjugate) throw StructuralError("conic program has no conjugate objective");
    const Eigen::MatrixXd& G = prog.generators;
    const int n = prog.negConjugate->dim();
    if (G.rows() != n) throw StructuralError("generator rows do not match conjugate dimension");
    const int m = static_cast<int>(G.cols());

    EngineReport rep;
    rep.dualPoint = Eigen::VectorXd::Zero(n);

    // Constraint rows <g_j, m> <= 0, written for the barrier as -G^T m >= 0.
    Eigen::MatrixXd A = -G.transpose();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);

    Eigen::VectorXd start;
    bool haveStart = false;
    if (prog.dualStart.size() == n && finiteValue(*prog.negConjugate, prog.dualStart)) {
        if (m == 0 || (G.transpose() * prog.dualStart).maxCoeff() < 0.0) {
            start = prog.dualStart;
            haveStart = true;
        }
    }
    if (!haveStart) {
        // Max-margin interior direction: maximize s subject to
        // <g_j, mp - mm> + s <= 0, all variables in [0, 1].
        LinearProgram lp(2 * n + 1);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n + 1);
        c(2 * n) = 1.0;
        lp.setObjective(c, /*minimize=*/false);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * n + 1);
            row.head(n) = G.col(j);
            row.segment(n, n) = -G.col(j);
            row(2 * n) = 1.0;
            lp.addConstraint(row, '<', 0.0);
        }
        for (int i = 0; i < 2 * n + 1; ++i) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * n + 1);
            row(i) = 1.0;
            lp.addConstraint(row, '<', 1.0);
        }
        LpResult sol = lp.solve();
        if (sol.status != LpStatus::Optimal || sol.objective <= 1e-9) {
            rep.dualFinite = false;
            rep.dualValue = kInf;
            rep.message = "dual cone has empty interior";
            return rep;
        }
        Eigen::VectorXd dir = sol.x.head(n) - sol.x.segment(n, n);
        haveStart = scaleSearch(*prog.negConjugate, dir, &start);
        if (!haveStart && m > 0) {
            // Conjugates of monotone objectives often need strictly positive
            // coordinates; blend the margin direction with the interior ray.
            Eigen::VectorXd mixed = dir - 0.5 * sol.objective * Eigen::VectorXd::Ones(n);
            if ((G.transpose() * mixed).maxCoeff() < 0.0)
                haveStart = scaleSearch(*prog.negConjugate, mixed, &start);
        }
    }
    if (!haveStart) {
        rep.dualFinite = false;
        rep.dualValue = kInf;
        rep.message = "no strictly feasible dual point with finite conjugate";
        return rep;
    }

    BarrierResult res = maximizeWithBarrier(*prog.negConjugate, A, b, start, opt);
    rep.newtonSteps = res.newtonSteps;
    if (res.diverged) {
        // Conjugate decreases without bound along a feasible ray, so the dual
        // infimum is minus infinity and the pair is degenerate.
        rep.dualFinite = false;
        rep.dualValue = -kInf;
        rep.dualPoint = res.y;
        rep.message = "dual objective unbounded below";
        return rep;
    }
    rep.dualFinite = true;
    rep.dualValue = -res.value;
    rep.dualPoint = res.y;
    rep.dualResidual = (m == 0) ? 0.0 : std::max(0.0, (G.transpose() * res.y).maxCoeff());
    rep.message = res.message;
    return rep;
}

EngineReport verifyGap(const ConicProgram& prog, double tol, const BarrierOptions& opt) {
    EngineReport primal = maximizeOverCone(prog, opt);
    EngineReport dual = minimizeDual(prog, opt);

    EngineReport rep;
    rep.primalFinite = primal.primalFinite;
    rep.dualFinite = dual.dualFinite;
    rep.primalValue = primal.primalValue;
    rep.dualValue = dual.dualValue;
    rep.primalPoint = primal.primalPoint;
    rep.dualPoint = dual.dualPoint;
    rep.primalResidual = primal.primalResidual;
    rep.dualResidual = dual.dualResidual;
    rep.newtonSteps = primal.newtonSteps + dual.newtonSteps;

    if (!primal.primalFinite && !dual.dualFinite && dual.dualValue == -kInf) {
        rep.degenerate = true;
        rep.gap = 0.0;
        rep.message = "degenerate pair: both values are minus infinity";
        return rep;
    }
    if (primal.primalFinite && dual.dualFinite) {
        const double scale = std::max({1.0, std::abs(rep.primalValue), std::abs(rep.dualValue)});
        rep.gap = std::abs(rep.primalValue - rep.dualValue) / scale;
        rep.message = (rep.gap <= tol) ? "zero duality gap verified"
                                       : "duality gap above tolerance";
        return rep;
    }
    rep.gap = kInf;
    rep.message = primal.primalFinite ? "dual side failed: " + dual.message
                                      : "primal side failed: " + primal.message;
    return rep;
}

}  // namespace conemkt
