#include "conemkt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "conemkt/errors.hpp"
#include "conemkt/lp.hpp"

namespace conemkt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> leafOrdinals(const ScenarioTree& tree) {
    std::vector<int> ord(tree.nodeCount(), -1);
    const auto& ls = tree.leaves();
    for (size_t i = 0; i < ls.size(); ++i) ord[ls[i]] = static_cast<int>(i);
    return ord;
}

// Expected utility of X(leaf) = x + B_leaf c as a function of the transfer
// coefficients c >= 0 from the terminal-cone representation.
class TransferObjective : public SmoothConcave {
public:
    TransferObjective(const ScenarioTree& tree, const ExtendedUtility& u,
                      const Eigen::VectorXd& x, const TerminalConeMap& map)
        : tree_(tree), u_(u), x_(x), n_(map.coefCount) {
        const int D = tree.assets();
        const auto& leaves = tree.leaves();
        for (size_t li = 0; li < leaves.size(); ++li) {
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(D, n_);
            for (int b : map.blocksOnPath[li])
                B.middleCols(map.blockOffset[b], map.gens[b].cols()) = -map.gens[b];
            prob_.push_back(tree.probOf(leaves[li]));
            maps_.push_back(std::move(B));
        }
    }

    int dim() const override { return n_; }
    int leafCount() const { return static_cast<int>(maps_.size()); }
    const Eigen::MatrixXd& mapAt(int li) const { return maps_[li]; }
    Eigen::VectorXd consumptionAt(const Eigen::VectorXd& c, int li) const {
        return x_ + maps_[li] * c;
    }

    double value(const Eigen::VectorXd& c) const override {
        double v = 0.0;
        for (size_t li = 0; li < maps_.size(); ++li) {
            double term = u_.value(consumptionAt(c, static_cast<int>(li)));
            if (!std::isfinite(term)) return -kInf;
            v += prob_[li] * term;
        }
        return v;
    }

    void derivatives(const Eigen::VectorXd& c, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const override {
        const int d = u_.consumptionDim();
        grad = Eigen::VectorXd::Zero(n_);
        hess = Eigen::MatrixXd::Zero(n_, n_);
        for (size_t li = 0; li < maps_.size(); ++li) {
            Eigen::VectorXd head = consumptionAt(c, static_cast<int>(li)).head(d);
            Eigen::MatrixXd Bh = maps_[li].topRows(d);
            grad.noalias() += prob_[li] * (Bh.transpose() * u_.base().gradient(head));
            hess.noalias() += prob_[li] * (Bh.transpose() * u_.base().hessian(head) * Bh);
        }
    }

private:
    const ScenarioTree& tree_;
    const ExtendedUtility& u_;
    Eigen::VectorXd x_;
    int n_;
    std::vector<double> prob_;
    std::vector<Eigen::MatrixXd> maps_;
};

// Negated dual objective over the stacked leaf prices z:
//   f(z) = - sum_leaf p * ( Utilde*(z_leaf) + <linear, z_leaf> ).
// With linear = x this is minus the dual objective; with linear = 0 it is the
// entropy part alone, used by the conjugate of the value function.
class LeafPriceObjective : public SmoothConcave {
public:
    LeafPriceObjective(const ScenarioTree& tree, const ExtendedUtility& u,
                       const Eigen::VectorXd& linear)
        : u_(u), linear_(linear), D_(tree.assets()) {
        for (int leaf : tree.leaves()) prob_.push_back(tree.probOf(leaf));
    }

    int dim() const override { return static_cast<int>(prob_.size()) * D_; }

    double value(const Eigen::VectorXd& z) const override {
        double s = 0.0;
        for (size_t li = 0; li < prob_.size(); ++li) {
            Eigen::VectorXd zl = z.segment(static_cast<int>(li) * D_, D_);
            double cj = u_.conjugate(zl);
            if (!std::isfinite(cj)) return -kInf;
            s += prob_[li] * (cj + linear_.dot(zl));
        }
        return -s;
    }

    void derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const override {
        grad = Eigen::VectorXd::Zero(dim());
        hess = Eigen::MatrixXd::Zero(dim(), dim());
        for (size_t li = 0; li < prob_.size(); ++li) {
            const int off = static_cast<int>(li) * D_;
            double val;
            Eigen::VectorXd g;
            Eigen::MatrixXd H;
            u_.conjugateDerivatives(z.segment(off, D_), val, g, H);
            grad.segment(off, D_) = -prob_[li] * (g + linear_);
            hess.block(off, off, D_, D_) = -prob_[li] * H;
        }
    }

private:
    const ExtendedUtility& u_;
    Eigen::VectorXd linear_;
    int D_;
    std::vector<double> prob_;
};

// One inequality row per (node, cone generator) over the stacked leaf prices:
//   <g, Z(k)> >= 0  with  Z(k) = sum over subtree leaves of (p_leaf/p_k) z_leaf.
// When leaf-time trades are disabled the leaf rows reduce to z >= 0.
struct DualRows {
    Eigen::MatrixXd A;          // rows scaled to unit inf-norm
    std::vector<int> rowNode;   // node index behind each row
    int vars = 0;
};

DualRows buildDualRows(const ScenarioTree& tree) {
    const int D = tree.assets();
    const auto& leaves = tree.leaves();
    std::vector<int> ord = leafOrdinals(tree);
    DualRows out;
    out.vars = static_cast<int>(leaves.size()) * D;

    std::vector<Eigen::VectorXd> rows;
    for (int k = 0; k < tree.nodeCount(); ++k) {
        Eigen::MatrixXd G;
        if (tree.isLeaf(k) && !tree.terminalTradesAllowed())
            G = Eigen::MatrixXd::Identity(D, D);
        else
            G = tree.coneAt(k).generators();
        for (Eigen::Index c = 0; c < G.cols(); ++c) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(out.vars);
            for (int leaf : tree.subtreeLeaves(k)) {
                double w = tree.probOf(leaf) / tree.probOf(k);
                row.segment(ord[leaf] * D, D) += w * G.col(c);
            }
            double scale = row.cwiseAbs().maxCoeff();
            if (scale > 0) row /= scale;
            rows.push_back(row);
            out.rowNode.push_back(k);
        }
    }
    out.A.resize(static_cast<Eigen::Index>(rows.size()), out.vars);
    for (size_t r = 0; r < rows.size(); ++r) out.A.row(static_cast<Eigen::Index>(r)) = rows[r];
    return out;
}

// Maximizes phi(exp(t)) over t in [-14, 14] by golden section; phi is assumed
// unimodal along the ray, which holds for concave objectives.
double bestRayScale(const std::function<double(double)>& phi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -14.0, b = 14.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = phi(std::exp(c)), fd = phi(std::exp(d));
    for (int it = 0; it < 80; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = phi(std::exp(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = phi(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

Eigen::VectorXd stackLeafPrices(const ScenarioTree& tree, const PriceSystem& ps) {
    const int D = tree.assets();
    const auto& leaves = tree.leaves();
    Eigen::VectorXd z(static_cast<int>(leaves.size()) * D);
    for (size_t li = 0; li < leaves.size(); ++li)
        z.segment(static_cast<int>(li) * D, D) = ps.z[leaves[li]];
    return z;
}

// Conditional expectations of the leaf prices at every node.
PriceSystem pricesFromLeafStack(const ScenarioTree& tree, const Eigen::VectorXd& z) {
    const int D = tree.assets();
    std::vector<int> ord = leafOrdinals(tree);
    PriceSystem ps;
    ps.z.assign(tree.nodeCount(), Eigen::VectorXd::Zero(D));
    for (int k = 0; k < tree.nodeCount(); ++k) {
        for (int leaf : tree.subtreeLeaves(k))
            ps.z[k] += (tree.probOf(leaf) / tree.probOf(k)) * z.segment(ord[leaf] * D, D);
    }
    return ps;
}

double priceConeResidual(const ScenarioTree& tree, const PriceSystem& ps) {
    double worst = 0.0;
    for (int k = 0; k < tree.nodeCount(); ++k) {
        if (tree.isLeaf(k) && !tree.terminalTradesAllowed()) {
            worst = std::max(worst, -std::min(0.0, ps.z[k].minCoeff()));
            continue;
        }
        const Eigen::MatrixXd& G = tree.coneAt(k).generators();
        for (Eigen::Index c = 0; c < G.cols(); ++c)
            worst = std::max(worst, std::max(0.0, -G.col(c).dot(ps.z[k])));
    }
    return worst;
}

void composeDualSolution(const ScenarioTree& tree, DualSolution& out, const Eigen::VectorXd& z,
                         double dualValue) {
    const int D = tree.assets();
    const auto& leaves = tree.leaves();
    out.finite = true;
    out.value = dualValue;
    out.measure.atoms.clear();
    for (size_t li = 0; li < leaves.size(); ++li)
        out.measure.atoms.push_back(tree.probOf(leaves[li]) *
                                    z.segment(static_cast<int>(li) * D, D));
    out.measure.singularMass = Eigen::VectorXd::Zero(D);
    out.prices = pricesFromLeafStack(tree, z);
    out.coneResidual = priceConeResidual(tree, out.prices);
    out.martingaleResidual = out.prices.martingaleResidual(tree);
}

}  // namespace

Eigen::VectorXd DualMeasure::total() const {
    if (atoms.empty()) return singularMass;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(atoms.front().size());
    for (const auto& a : atoms) t += a;
    if (singularMass.size() == t.size()) t += singularMass;
    return t;
}

Eigen::VectorXd DualMeasure::density(const ScenarioTree& tree, int leafOrdinal) const {
    const auto& leaves = tree.leaves();
    if (leafOrdinal < 0 || leafOrdinal >= static_cast<int>(leaves.size()))
        throw StructuralError("DualMeasure::density: leaf ordinal out of range");
    return atoms[leafOrdinal] / tree.probOf(leaves[leafOrdinal]);
}

PrimalSolution solvePrimal(const ScenarioTree& tree, const ExtendedUtility& u,
                           const Eigen::VectorXd& x, const SolveOptions& opt) {
    const int D = tree.assets();
    if (x.size() != D) throw StructuralError("solvePrimal: endowment dimension mismatch");
    if (u.assets() != D) throw StructuralError("solvePrimal: utility asset count mismatch");

    PrimalSolution out;
    TerminalConeMap map = terminalConeRepresentation(tree);
    const auto& leaves = tree.leaves();
    const int n = map.coefCount;

    if (n == 0) {
        double v = u.value(x);
        out.feasible = std::isfinite(v);
        out.value = out.feasible ? v : -kInf;
        out.consumption.assign(leaves.size(), x);
        out.transfers.initial = x;
        out.transfers.transfers.assign(tree.nodeCount(), Eigen::VectorXd::Zero(D));
        out.message = "no transfer opportunities; endowment is consumed as is";
        return out;
    }

    TransferObjective f(tree, u, x, map);
    const double cCap = 1e6 * std::max(1.0, x.cwiseAbs().sum());

    // Inequality rows for the barrier: c >= 0, c <= cap, X(leaf) >= 0.
    const int rowCount = 2 * n + static_cast<int>(leaves.size()) * D;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rowCount, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rowCount);
    A.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    A.middleRows(n, n) = -Eigen::MatrixXd::Identity(n, n);
    b.segment(n, n).setConstant(-cCap);
    for (int li = 0; li < f.leafCount(); ++li) {
        A.middleRows(2 * n + li * D, D) = f.mapAt(li);
        b.segment(2 * n + li * D, D) = -x;
    }

    // Strictly feasible start: push every row uniformly off its bound.
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
            row(n) = 0.0;
            // stay away from the cap so the cap rows keep slack at the start
            lp.addConstraint(row, '<', 0.5 * cCap);
        }
        for (int li = 0; li < f.leafCount(); ++li)
            for (int j = 0; j < D; ++j) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
                row.head(n) = f.mapAt(li).row(j);
                row(n) = -1.0;
                lp.addConstraint(row, '>', -x(j));
            }
        Eigen::VectorXd cap = Eigen::VectorXd::Zero(n + 1);
        cap(n) = 1.0;
        lp.addConstraint(cap, '<', 1.0);
    }
    LpResult start = lp.solve();

    if (start.status == LpStatus::Infeasible) {
        out.feasible = false;
        out.boundary = true;
        out.value = -kInf;
        out.message = "no self-financing plan reaches the nonnegative orthant from x";
        return out;
    }
    if (start.status != LpStatus::Optimal)
        throw SolverError("solvePrimal: start search did not terminate", -kInf);

    const double slack = start.x(n);
    const double interiorThreshold = 1e-3 * opt.interiorEps;
    if (slack <= interiorThreshold) {
        // Boundary endowment: report a feasible (not certified optimal) value.
        Eigen::VectorXd c = start.x.head(n).cwiseMax(0.0);
        double v = f.value(c);
        out.boundary = true;
        out.feasible = std::isfinite(v);
        out.value = out.feasible ? v : -kInf;
        out.consumption.clear();
        for (int li = 0; li < f.leafCount(); ++li)
            out.consumption.push_back(f.consumptionAt(c, li).cwiseMax(0.0));
        out.transfers.initial = x;
        out.transfers.transfers.assign(tree.nodeCount(), Eigen::VectorXd::Zero(D));
        for (size_t bidx = 0; bidx < map.gens.size(); ++bidx)
            out.transfers.transfers[map.blockNode[bidx]] =
                -map.gens[bidx] * c.segment(map.blockOffset[bidx], map.gens[bidx].cols());
        std::ostringstream msg;
        msg << "endowment sits on the boundary of the solvable region (slack " << slack
            << "); value taken at a feasible plan without an optimality certificate";
        out.message = msg.str();
        return out;
    }

    Eigen::VectorXd c0 = start.x.head(n);
    if (opt.perturbStart > 0.0) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> unif(-0.5, 0.5);
        double jitter = opt.perturbStart;
        for (int attempt = 0; attempt < 10; ++attempt) {
            Eigen::VectorXd trial = c0;
            for (int i = 0; i < n; ++i) trial(i) *= 1.0 + jitter * unif(rng);
            if (((A * trial - b).minCoeff()) > 0.25 * slack) {
                c0 = trial;
                break;
            }
            jitter *= 0.5;
        }
    }

    BarrierResult res = maximizeWithBarrier(f, A, b, c0, opt.barrier);
    if (res.diverged)
        throw SolverError("solvePrimal: utility grows without bound (the market admits "
                          "positions of arbitrarily high expected utility)",
                          res.value);

    Eigen::VectorXd c = res.y;
    out.feasible = true;
    out.boundary = false;
    out.value = res.value;
    out.newtonSteps = res.newtonSteps;
    out.message = res.message;
    out.consumption.clear();
    for (int li = 0; li < f.leafCount(); ++li) out.consumption.push_back(f.consumptionAt(c, li));
    out.transfers.initial = x;
    out.transfers.transfers.assign(tree.nodeCount(), Eigen::VectorXd::Zero(D));
    for (size_t bidx = 0; bidx < map.gens.size(); ++bidx)
        out.transfers.transfers[map.blockNode[bidx]] =
            -map.gens[bidx] * c.segment(map.blockOffset[bidx], map.gens[bidx].cols());
    out.selfFinancingResidual = std::max(0.0, -c.minCoeff());
    return out;
}

DualSolution solveDual(const ScenarioTree& tree, const ExtendedUtility& u,
                       const Eigen::VectorXd& x, const SolveOptions& opt) {
    const int D = tree.assets();
    if (x.size() != D) throw StructuralError("solveDual: endowment dimension mismatch");
    if (u.assets() != D) throw StructuralError("solveDual: utility asset count mismatch");

    DualSolution out;
    DualRows rows = buildDualRows(tree);
    const auto& leaves = tree.leaves();
    const int L = static_cast<int>(leaves.size());
    const int n = rows.vars;
    LeafPriceObjective f(tree, u, x);

    Eigen::VectorXd massRow(n);  // sum_leaf p <1, z_leaf>
    Eigen::VectorXd costRow(n);  // sum_leaf p <x, z_leaf>
    for (int li = 0; li < L; ++li) {
        massRow.segment(li * D, D).setConstant(tree.probOf(leaves[li]));
        costRow.segment(li * D, D) = tree.probOf(leaves[li]) * x;
    }

    // Normalized linear relaxation: detects an empty consistent set and
    // directions along which the dual objective falls without bound.
    LinearProgram pre(n);
    pre.setObjective(costRow, true);
    for (Eigen::Index r = 0; r < rows.A.rows(); ++r) pre.addConstraint(rows.A.row(r), '>', 0.0);
    pre.addConstraint(massRow, '=', 1.0);
    LpResult preSol = pre.solve();

    if (preSol.status == LpStatus::Infeasible) {
        out.finite = false;
        out.value = kInf;
        out.message = "only the zero price system is consistent with this market";
        return out;
    }
    if (preSol.status != LpStatus::Optimal)
        throw SolverError("solveDual: screening program did not terminate", kInf);

    ScpsResult scps;
    for (double m : {100.0 * opt.scpsMargin, opt.scpsMargin, 0.01 * opt.scpsMargin}) {
        scps = findScps(tree, m);
        if (scps.found) break;
    }

    if (preSol.objective < -1e-9) {
        // The endowment is priced negatively by some consistent system; the
        // objective decreases forever along that ray.
        Eigen::VectorXd ray = preSol.x;
        Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
        if (scps.found) base = stackLeafPrices(tree, scps.prices);
        out.finite = false;
        out.unboundedBelow = true;
        out.value = -kInf;
        for (double t : {1.0, 10.0, 100.0, 1e3, 1e4}) {
            double v = -f.value(base + t * ray);
            if (std::isfinite(v)) out.divergenceSequence.push_back(v);
        }
        out.message = "dual objective unbounded below: a consistent price system assigns "
                      "the endowment negative value";
        return out;
    }

    if (scps.found) {
        Eigen::VectorXd z0 = stackLeafPrices(tree, scps.prices);
        double t = bestRayScale([&](double s) { return f.value(s * z0); });
        BarrierResult res = maximizeWithBarrier(f, rows.A, Eigen::VectorXd::Zero(rows.A.rows()),
                                                t * z0, opt.barrier);
        if (res.diverged) {
            // Boundary endowment: the infimum is approached, not attained.
            out.finite = false;
            out.unboundedBelow = true;
            out.value = -kInf;
            Eigen::VectorXd dir = res.y - t * z0;
            double last = kInf;
            for (int k = 0; k <= 40; ++k) {
                double v = -f.value(t * z0 + std::ldexp(1.0, k - 8) * dir);
                if (!std::isfinite(v) || v >= last) break;
                out.divergenceSequence.push_back(v);
                last = v;
            }
            out.message = "dual objective decreases without bound along a feasible direction";
            return out;
        }
        composeDualSolution(tree, out, res.y, -res.value);
        out.newtonSteps = res.newtonSteps;
        out.message = res.message;
        return out;
    }

    // No strictly consistent system. Split rows into implicit equalities and
    // the rest, then center on the relative interior of the consistent face.
    const Eigen::Index R = rows.A.rows();
    std::vector<bool> pinnedRow(R, false);
    for (Eigen::Index r = 0; r < R; ++r) {
        LinearProgram probe(n);
        probe.setObjective(rows.A.row(r), false);
        for (Eigen::Index q = 0; q < R; ++q) probe.addConstraint(rows.A.row(q), '>', 0.0);
        probe.addConstraint(massRow, '=', 1.0);
        probe.addConstraint(rows.A.row(r), '<', 1.0);
        LpResult sol = probe.solve();
        pinnedRow[r] = (sol.status == LpStatus::Optimal && sol.objective <= 1e-9);
    }
    std::vector<bool> pinnedVar(n, false);
    for (int q = 0; q < n; ++q) {
        LinearProgram probe(n);
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(n);
        obj(q) = 1.0;
        probe.setObjective(obj, false);
        for (Eigen::Index r = 0; r < R; ++r) probe.addConstraint(rows.A.row(r), '>', 0.0);
        probe.addConstraint(massRow, '=', 1.0);
        probe.addConstraint(obj, '<', 1.0);
        LpResult sol = probe.solve();
        pinnedVar[q] = (sol.status == LpStatus::Optimal && sol.objective <= 1e-9);
        if (pinnedVar[q] && (q % D) < u.consumptionDim()) {
            out.finite = false;
            out.value = kInf;
            out.message = "dual objective is infinite: a consumption coordinate vanishes "
                          "in every consistent price system";
            return out;
        }
    }

    std::vector<Eigen::VectorXd> eqRows, ineqRows;
    for (Eigen::Index r = 0; r < R; ++r)
        (pinnedRow[r] ? eqRows : ineqRows).push_back(rows.A.row(r));
    for (int q = 0; q < n; ++q)
        if (pinnedVar[q]) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e(q) = 1.0;
            eqRows.push_back(e);
        }

    LinearProgram center(n + 1);
    {
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(n + 1);
        obj(n) = 1.0;
        center.setObjective(obj, false);
        for (const auto& r : ineqRows) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row.head(n) = r;
            row(n) = -1.0;
            center.addConstraint(row, '>', 0.0);
        }
        for (const auto& r : eqRows) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row.head(n) = r;
            center.addConstraint(row, '=', 0.0);
        }
        Eigen::VectorXd mass = Eigen::VectorXd::Zero(n + 1);
        mass.head(n) = massRow;
        center.addConstraint(mass, '=', 1.0);
        Eigen::VectorXd cap = Eigen::VectorXd::Zero(n + 1);
        cap(n) = 1.0;
        center.addConstraint(cap, '<', 1.0);
    }
    LpResult centered = center.solve();
    if (centered.status != LpStatus::Optimal || centered.x(n) <= 1e-9) {
        out.finite = false;
        out.value = kInf;
        out.message = "consistent price systems form a degenerate face the interior "
                      "method cannot center on";
        return out;
    }

    Eigen::VectorXd z0 = centered.x.head(n);
    if (!std::isfinite(f.value(z0))) {
        out.finite = false;
        out.value = kInf;
        out.message = "dual objective is infinite on the consistent face";
        return out;
    }
    double t = bestRayScale([&](double s) { return f.value(s * z0); });

    Eigen::MatrixXd Aineq(static_cast<Eigen::Index>(ineqRows.size()), n);
    for (size_t r = 0; r < ineqRows.size(); ++r)
        Aineq.row(static_cast<Eigen::Index>(r)) = ineqRows[r];
    Eigen::MatrixXd E(static_cast<Eigen::Index>(eqRows.size()), n);
    for (size_t r = 0; r < eqRows.size(); ++r) E.row(static_cast<Eigen::Index>(r)) = eqRows[r];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(E.rows());

    BarrierResult res = maximizeWithBarrier(f, Aineq, Eigen::VectorXd::Zero(Aineq.rows()),
                                            t * z0, opt.barrier, &E, &e);
    if (res.diverged) {
        out.finite = false;
        out.unboundedBelow = true;
        out.value = -kInf;
        out.message = "dual objective decreases without bound on the consistent face";
        return out;
    }
    composeDualSolution(tree, out, res.y, -res.value);
    out.newtonSteps = res.newtonSteps;
    out.message = "solved on the relative interior of the consistent face; " + res.message;
    return out;
}

RecoveryResult recoverPrimal(const ScenarioTree& tree, const ExtendedUtility& u,
                             const DualMeasure& m, const Eigen::VectorXd& x, double tol) {
    const auto& leaves = tree.leaves();
    if (m.atoms.size() != leaves.size())
        throw StructuralError("recoverPrimal: measure atom count does not match the leaves");
    RecoveryResult out;
    double v = 0.0;
    for (size_t li = 0; li < leaves.size(); ++li) {
        Eigen::VectorXd X = u.inverseMarginalTilde(m.density(tree, static_cast<int>(li)));
        v += tree.probOf(leaves[li]) * u.value(X);
        out.consumption.push_back(std::move(X));
    }
    out.value = v;
    AttainabilityResult att = attainableCheck(tree, x, out.consumption, tol);
    out.attainable = att.attainable;
    out.attainabilityGap = att.superReplicationGap;
    return out;
}

ValueFunctionProbe supergradientProbe(const ScenarioTree& tree, const ExtendedUtility& u,
                                      const Eigen::VectorXd& x, double h,
                                      const SolveOptions& opt) {
    const int D = tree.assets();
    PrimalSolution center = solvePrimal(tree, u, x, opt);
    if (!center.feasible)
        throw DomainError("supergradientProbe: the value function is infinite at x");
    DualSolution dual = solveDual(tree, u, x, opt);
    if (!dual.finite)
        throw SolverError("supergradientProbe: dual minimizer unavailable at x", center.value);

    ValueFunctionProbe out;
    out.x = x;
    out.value = center.value;
    out.candidate = dual.measure.total();
    out.probeValues = Eigen::VectorXd::Constant(2 * D, -kInf);
    out.worstViolation = -kInf;
    for (int i = 0; i < D; ++i) {
        for (int s = 0; s < 2; ++s) {
            double sign = (s == 0) ? 1.0 : -1.0;
            Eigen::VectorXd z = x;
            z(i) += sign * h;
            PrimalSolution probe = solvePrimal(tree, u, z, opt);
            double pv = probe.feasible ? probe.value : -kInf;
            out.probeValues(s * D + i) = pv;
            if (std::isfinite(pv)) {
                double viol = pv - out.value - sign * h * out.candidate(i);
                out.worstViolation = std::max(out.worstViolation, viol);
            }
        }
    }
    out.holds = out.worstViolation <= 1e-6;
    return out;
}

double valueConjugate(const ScenarioTree& tree, const ExtendedUtility& u,
                      const Eigen::VectorXd& xstar, const SolveOptions& opt) {
    const int D = tree.assets();
    if (xstar.size() != D) throw StructuralError("valueConjugate: argument dimension mismatch");

    DualRows rows = buildDualRows(tree);
    const auto& leaves = tree.leaves();
    const int L = static_cast<int>(leaves.size());
    const int n = rows.vars;
    LeafPriceObjective f(tree, u, Eigen::VectorXd::Zero(D));

    // Moment rows: sum_leaf p z_leaf = xstar.
    std::vector<Eigen::VectorXd> moments;
    for (int j = 0; j < D; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
        for (int li = 0; li < L; ++li) row(li * D + j) = tree.probOf(leaves[li]);
        moments.push_back(row);
    }

    LinearProgram feas(n + 1);
    {
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(n + 1);
        obj(n) = 1.0;
        feas.setObjective(obj, false);
        for (Eigen::Index r = 0; r < rows.A.rows(); ++r) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row.head(n) = rows.A.row(r);
            row(n) = -1.0;
            feas.addConstraint(row, '>', 0.0);
        }
        for (int j = 0; j < D; ++j) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            row.head(n) = moments[j];
            feas.addConstraint(row, '=', xstar(j));
        }
        Eigen::VectorXd cap = Eigen::VectorXd::Zero(n + 1);
        cap(n) = 1.0;
        feas.addConstraint(cap, '<', 1.0);
    }
    LpResult sol = feas.solve();
    if (sol.status == LpStatus::Infeasible) return kInf;
    if (sol.status != LpStatus::Optimal)
        throw SolverError("valueConjugate: feasibility search did not terminate", kInf);

    Eigen::MatrixXd E(D, n);
    for (int j = 0; j < D; ++j) E.row(j) = moments[j];

    if (sol.x(n) > 1e-9) {
        Eigen::VectorXd z0 = sol.x.head(n);
        BarrierResult res = maximizeWithBarrier(f, rows.A, Eigen::VectorXd::Zero(rows.A.rows()),
                                                z0, opt.barrier, &E, &xstar);
        if (res.diverged)
            throw SolverError("valueConjugate: entropy term unbounded below", -res.value);
        return -res.value;
    }

    // Degenerate target: the consistent systems hitting xstar form a face with
    // no interior. Sample its points and report the smallest entropy found;
    // exact whenever the face is a single point (for example xstar = 0).
    std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<Eigen::VectorXd> points;
    points.push_back(sol.x.head(n));
    for (int trial = 0; trial < 16; ++trial) {
        LinearProgram vert(n);
        Eigen::VectorXd obj(n);
        for (int q = 0; q < n; ++q) obj(q) = unif(rng);
        vert.setObjective(obj, false);
        for (Eigen::Index r = 0; r < rows.A.rows(); ++r)
            vert.addConstraint(rows.A.row(r), '>', 0.0);
        for (int j = 0; j < D; ++j) vert.addConstraint(moments[j], '=', xstar(j));
        LpResult v = vert.solve();
        if (v.status == LpStatus::Optimal) points.push_back(v.x);
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    points.push_back(centroid);

    double best = kInf;
    for (const auto& p : points) {
        double v = f.value(p);
        if (std::isfinite(v)) best = std::min(best, -v);
    }
    return best;
}

VariationalReport variationalCheck(const ScenarioTree& tree, const ExtendedUtility& u,
                                   const Eigen::VectorXd& x, int samples,
                                   const SolveOptions& opt) {
    const int D = tree.assets();
    PrimalSolution primal = solvePrimal(tree, u, x, opt);
    if (!primal.feasible)
        throw DomainError("variationalCheck: the value function is infinite at x");
    DualSolution dual = solveDual(tree, u, x, opt);
    if (!dual.finite)
        throw SolverError("variationalCheck: dual minimizer unavailable at x", primal.value);

    DualRows rows = buildDualRows(tree);
    const auto& leaves = tree.leaves();
    const int L = static_cast<int>(leaves.size());
    const int n = rows.vars;
    Eigen::VectorXd massRow(n);
    for (int li = 0; li < L; ++li)
        massRow.segment(li * D, D).setConstant(tree.probOf(leaves[li]));

    VariationalReport out;
    out.primalValue = primal.value;
    out.worstInequalityViolation = -kInf;

    std::mt19937_64 rng(opt.seed ^ 0xda3e39cb94b95bdbull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        LinearProgram vert(n);
        Eigen::VectorXd obj(n);
        for (int q = 0; q < n; ++q) obj(q) = gauss(rng);
        vert.setObjective(obj, false);
        for (Eigen::Index r = 0; r < rows.A.rows(); ++r)
            vert.addConstraint(rows.A.row(r), '>', 0.0);
        vert.addConstraint(massRow, '=', 1.0);
        LpResult v = vert.solve();
        if (v.status != LpStatus::Optimal) continue;
        double mX = 0.0, mx = 0.0;
        for (int li = 0; li < L; ++li) {
            Eigen::VectorXd atom = tree.probOf(leaves[li]) * v.x.segment(li * D, D);
            mX += primal.consumption[li].dot(atom);
            mx += x.dot(atom);
        }
        out.worstInequalityViolation = std::max(out.worstInequalityViolation, mX - mx);
        ++out.samples;
    }

    double mXhat = 0.0;
    for (int li = 0; li < L; ++li) mXhat += primal.consumption[li].dot(dual.measure.atoms[li]);
    out.equalityGapAtOptimum = std::abs(mXhat - x.dot(dual.measure.total()));
    out.holds = out.worstInequalityViolation <= 1e-6 && out.equalityGapAtOptimum <= 1e-5;
    return out;
}

ScenarioTree buildSingularTree(int N, double alpha) {
    if (N < 1) throw StructuralError("buildSingularTree: need at least one risky branch");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw StructuralError("buildSingularTree: alpha must lie in (0, 1)");
    const double total = 1.0 - alpha * std::pow(2.0, -N);
    std::vector<ScenarioTree::NodeSpec> specs;
    ScenarioTree::NodeSpec root;
    root.id = 0;
    root.parent = -1;
    root.prob = 1.0;
    root.pi = (Eigen::MatrixXd(2, 2) << 1.0, 1.0, 2.0, 1.0).finished();
    specs.push_back(root);
    for (int nIdx = 0; nIdx <= N; ++nIdx) {
        ScenarioTree::NodeSpec leaf;
        leaf.id = nIdx + 1;
        leaf.parent = 0;
        leaf.prob = (nIdx == 0 ? 1.0 - alpha : alpha * std::pow(2.0, -nIdx)) / total;
        double s = (nIdx == 0) ? 2.0 : 1.0 / nIdx;
        leaf.pi = (Eigen::MatrixXd(2, 2) << 1.0, 2.0 * s, 1.0 / s, 1.0).finished();
        specs.push_back(leaf);
    }
    return ScenarioTree::build(2, specs, true);
}

namespace {

struct SingularModel {
    std::vector<double> prob, s;
};

SingularModel singularModel(int N, double alpha) {
    SingularModel m;
    const double total = 1.0 - alpha * std::pow(2.0, -N);
    for (int nIdx = 0; nIdx <= N; ++nIdx) {
        m.prob.push_back((nIdx == 0 ? 1.0 - alpha : alpha * std::pow(2.0, -nIdx)) / total);
        m.s.push_back(nIdx == 0 ? 2.0 : 1.0 / nIdx);
    }
    return m;
}

// Optimal root trade for the two-asset model with bond-only consumption:
// delta units of bond become stock, leaf wealth (x1 - delta) + (x2 + delta) s.
// Exact for x2 >= 0, where netting both exchange directions never pays.
struct SingularSolve {
    double delta = 0.0;
    double value = -kInf;
};

SingularSolve solveSingular1d(const SingularModel& m, double x1, double x2) {
    const int last = static_cast<int>(m.s.size()) - 1;
    auto wealth = [&](double delta, int k) { return (x1 - delta) + (x2 + delta) * m.s[k]; };
    auto foc = [&](double delta) {
        double g = 0.0;
        for (size_t k = 0; k < m.s.size(); ++k)
            g += m.prob[k] * (m.s[k] - 1.0) / wealth(delta, k);
        return g;
    };
    auto val = [&](double delta) {
        double v = 0.0;
        for (size_t k = 0; k < m.s.size(); ++k) {
            double w = wealth(delta, k);
            if (!(w > 0.0)) return -kInf;
            v += m.prob[k] * std::log(w);
        }
        return v;
    };

    SingularSolve out;
    double lo = std::max(0.0, -x2);
    double hi = (static_cast<double>(last) * x1 + x2) / (static_cast<double>(last) - 1.0);
    if (!(hi > lo)) return out;
    while (!(wealth(hi, last) > 0.0) && hi > lo) hi = std::nextafter(hi, lo);
    if (!(foc(lo) > 0.0)) {
        out.delta = lo;
        out.value = val(lo);
        return out;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (foc(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.delta = 0.5 * (lo + hi);
    out.value = val(out.delta);
    return out;
}

}  // namespace

std::vector<SweepRow> singularSweep(double alpha, const std::vector<int>& Ns) {
    std::vector<SweepRow> table;
    const double h = 1e-5;
    for (int N : Ns) {
        SingularModel m = singularModel(N, alpha);
        SingularSolve base = solveSingular1d(m, 1.0, 0.0);
        if (!std::isfinite(base.value))
            throw SolverError("singularSweep: base solve failed", base.value);

        SweepRow row;
        row.N = N;
        row.theta = base.delta;
        row.value = base.value;
        double mass1 = 0.0, mass2 = 0.0, head = 0.0;
        for (size_t k = 0; k < m.s.size(); ++k) {
            double w = (1.0 - base.delta) + base.delta * m.s[k];
            double z1 = 1.0 / w;
            mass1 += m.prob[k] * z1;
            mass2 += m.prob[k] * m.s[k] * z1;
            if (k <= 5) {
                head += m.prob[k] * z1;
                row.headDensity.push_back(z1);
            }
        }
        row.mass1 = mass1;
        row.mass2 = mass2;
        row.headMass5 = head;
        row.deficit = mass1 - head;
        row.fd1 = (solveSingular1d(m, 1.0 + h, 0.0).value -
                   solveSingular1d(m, 1.0 - h, 0.0).value) / (2.0 * h);
        row.fd2 = (solveSingular1d(m, 1.0, h).value - base.value) / h;
        double norm = 2.0 * base.delta;  // root transfer (-delta, delta)
        for (double s : m.s) norm = std::max(norm, base.delta * (1.0 + s));
        row.transferNorm = norm;
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace conemkt
