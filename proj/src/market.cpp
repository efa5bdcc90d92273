#include "conemkt/market.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "conemkt/lp.hpp"

namespace conemkt {

ScenarioTree ScenarioTree::build(int assets, const std::vector<NodeSpec>& specs,
                                 bool terminalTrades) {
    if (assets < 1) throw TreeError("tree: need at least one asset", -1);
    if (specs.empty()) throw TreeError("tree: no nodes", -1);

    std::map<int, int> index;
    for (size_t k = 0; k < specs.size(); ++k) {
        if (index.count(specs[k].id)) throw TreeError("tree: duplicate node id", specs[k].id);
        index[specs[k].id] = static_cast<int>(k);
    }

    ScenarioTree t;
    t.assets_ = assets;
    t.terminal_trades_ = terminalTrades;
    const int n = static_cast<int>(specs.size());
    t.id_.resize(n);
    t.parent_.assign(n, -1);
    t.depth_.assign(n, -1);
    t.prob_.resize(n);
    t.children_.assign(n, {});
    t.root_ = -1;

    for (int k = 0; k < n; ++k) {
        const auto& s = specs[k];
        t.id_[k] = s.id;
        t.prob_[k] = s.prob;
        if (!(s.prob > 0.0) || !std::isfinite(s.prob))
            throw TreeError("tree: node probability must be positive", s.id);
        if (s.parent < 0) {
            if (t.root_ >= 0) throw TreeError("tree: more than one root", s.id);
            t.root_ = k;
        } else {
            auto it = index.find(s.parent);
            if (it == index.end())
                throw TreeError("tree: node references a missing parent", s.id);
            t.parent_[k] = it->second;
            t.children_[it->second].push_back(k);
        }
        if (s.pi.rows() != assets || s.pi.cols() != assets)
            throw TreeError("tree: bid-ask matrix has the wrong shape", s.id);
        auto vr = BidAskMatrix::validate(s.pi);
        if (!vr.ok()) {
            std::ostringstream os;
            os << "tree: invalid bid-ask matrix: " << vr.violations.front().describe();
            throw TreeError(os.str(), s.id);
        }
        t.bidask_.push_back(*vr.matrix);
        t.cone_.emplace_back(*vr.matrix);
    }
    if (t.root_ < 0) throw TreeError("tree: no root node", -1);
    if (std::abs(t.prob_[t.root_] - 1.0) > 1e-9)
        throw TreeError("tree: root probability must be 1", t.id_[t.root_]);

    // Depths and cycle detection via traversal from the root.
    std::vector<int> stack = {t.root_};
    t.depth_[t.root_] = 0;
    int seen = 0;
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        ++seen;
        for (int c : t.children_[k]) {
            t.depth_[c] = t.depth_[k] + 1;
            stack.push_back(c);
        }
    }
    if (seen != n) throw TreeError("tree: nodes unreachable from the root", -1);

    for (int k = 0; k < n; ++k) {
        if (!t.children_[k].empty()) {
            double sum = 0.0;
            for (int c : t.children_[k]) sum += t.prob_[c];
            if (std::abs(sum - t.prob_[k]) > 1e-9 * std::max(1.0, t.prob_[k]))
                throw TreeError("tree: children probabilities do not sum to the parent's",
                                t.id_[k]);
        } else {
            t.leaves_.push_back(k);
        }
    }
    t.horizon_ = t.depth_[t.leaves_.front()];
    for (int l : t.leaves_)
        if (t.depth_[l] != t.horizon_)
            throw TreeError("tree: leaves are not all at the same horizon", t.id_[l]);

    t.subtree_leaves_.assign(n, {});
    for (int l : t.leaves_) {
        int k = l;
        while (k >= 0) {
            t.subtree_leaves_[k].push_back(l);
            k = t.parent_[k];
        }
    }
    return t;
}

int ScenarioTree::indexOf(int id) const {
    for (int k = 0; k < nodeCount(); ++k)
        if (id_[k] == id) return k;
    throw TreeError("tree: unknown node id", id);
}

std::vector<int> ScenarioTree::pathTo(int k) const {
    std::vector<int> path;
    for (int c = k; c >= 0; c = parent_[c]) path.push_back(c);
    std::reverse(path.begin(), path.end());
    return path;
}

double PriceSystem::martingaleResidual(const ScenarioTree& tree) const {
    double worst = 0.0;
    for (int k = 0; k < tree.nodeCount(); ++k) {
        if (tree.isLeaf(k)) continue;
        Eigen::VectorXd e = z[k];
        for (int c : tree.childrenOf(k)) e -= (tree.probOf(c) / tree.probOf(k)) * z[c];
        worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
    return worst;
}

ScpsResult findScps(const ScenarioTree& tree, double margin) {
    const int D = tree.assets();
    const int n = tree.nodeCount();
    ScpsResult res;
    res.margin = margin;

    LinearProgram lp(n * D);
    auto var = [D](int node, int i) { return node * D + i; };

    for (int k = 0; k < n; ++k) {
        if (tree.isLeaf(k)) continue;
        for (int i = 0; i < D; ++i) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n * D);
            row(var(k, i)) = 1.0;
            for (int c : tree.childrenOf(k))
                row(var(c, i)) = -tree.probOf(c) / tree.probOf(k);
            lp.addConstraint(row, '=', 0.0);
        }
    }
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd G;
        if (tree.isLeaf(k) && !tree.terminalTradesAllowed())
            G = Eigen::MatrixXd::Identity(D, D);
        else
            G = tree.coneAt(k).generators();
        // With the root normalized below, the margin is an absolute floor on
        // every generator product; in particular no node value can vanish.
        for (Eigen::Index g = 0; g < G.cols(); ++g) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n * D);
            for (int i = 0; i < D; ++i) row(var(k, i)) = G(i, g);
            lp.addConstraint(row, '>', margin);
        }
    }
    Eigen::VectorXd norm = Eigen::VectorXd::Zero(n * D);
    for (int i = 0; i < D; ++i) norm(var(tree.root(), i)) = 1.0;
    lp.addConstraint(norm, '=', 1.0);

    LpResult sol = lp.solve();
    if (sol.status == LpStatus::Optimal) {
        res.found = true;
        res.prices.z.resize(n);
        for (int k = 0; k < n; ++k) res.prices.z[k] = sol.x.segment(var(k, 0), D);
        res.diagnostic = "consistent price system found";
    } else if (sol.status == LpStatus::Infeasible) {
        res.found = false;
        res.certificate = sol.farkas;
        std::ostringstream os;
        os << "no consistent price system at margin " << margin
           << " (the certificate multipliers expose the incompatible cones)";
        res.diagnostic = os.str();
    } else {
        throw SolverError("findScps: LP did not terminate");
    }
    return res;
}

Eigen::VectorXd PortfolioProcess::holdingsAfter(const ScenarioTree& tree, int k) const {
    Eigen::VectorXd v = initial;
    for (int node : tree.pathTo(k)) v += transfers[node];
    return v;
}

double PortfolioProcess::selfFinancingResidual(const ScenarioTree& tree) const {
    double worst = 0.0;
    for (int k = 0; k < tree.nodeCount(); ++k) {
        MembershipResult m = coneContains(tree.coneAt(k), -transfers[k]);
        worst = std::max(worst, m.residual);
    }
    return worst;
}

AttainabilityResult attainableCheck(const ScenarioTree& tree, const Eigen::VectorXd& x,
                                    const std::vector<Eigen::VectorXd>& claim, double tol) {
    const int D = tree.assets();
    const auto& leaves = tree.leaves();
    if (x.size() != D) throw StructuralError("attainableCheck: endowment dimension mismatch");
    if (claim.size() != leaves.size())
        throw StructuralError("attainableCheck: one payoff per leaf required");
    for (const auto& c : claim)
        if (c.size() != D) throw StructuralError("attainableCheck: payoff dimension mismatch");

    AttainabilityResult res;
    TerminalConeMap map = terminalConeRepresentation(tree);

    // Transfer route: find nonnegative coefficients with
    //   sum over path blocks of G_k c_k = x - X(leaf)  at every leaf.
    {
        LinearProgram lp(std::max(map.coefCount, 1));
        for (size_t li = 0; li < leaves.size(); ++li) {
            for (int i = 0; i < D; ++i) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(std::max(map.coefCount, 1));
                for (int b : map.blocksOnPath[li]) {
                    const Eigen::MatrixXd& G = map.gens[b];
                    for (Eigen::Index c = 0; c < G.cols(); ++c)
                        row(map.blockOffset[b] + c) = G(i, c);
                }
                lp.addConstraint(row, '=', x(i) - claim[li](i));
            }
        }
        LpResult sol = lp.solve();
        if (sol.status == LpStatus::Optimal) {
            res.primalFeasible = true;
            res.transfers.assign(tree.nodeCount(), Eigen::VectorXd::Zero(D));
            for (size_t b = 0; b < map.gens.size(); ++b) {
                Eigen::VectorXd coef =
                    sol.x.segment(map.blockOffset[b], map.gens[b].cols());
                res.transfers[map.blockNode[b]] -= map.gens[b] * coef;
            }
        } else if (sol.status == LpStatus::Infeasible) {
            res.primalFeasible = false;
        } else {
            throw SolverError("attainableCheck: transfer LP did not terminate");
        }
    }

    // Pricing route: the claim is attainable exactly when no consistent price
    // system values it above the endowment.
    {
        const int n = tree.nodeCount();
        LinearProgram lp(n * D);
        auto var = [D](int node, int i) { return node * D + i; };
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(n * D);
        for (size_t li = 0; li < leaves.size(); ++li)
            for (int i = 0; i < D; ++i)
                obj(var(leaves[li], i)) += tree.probOf(leaves[li]) * claim[li](i);
        for (int i = 0; i < D; ++i) obj(var(tree.root(), i)) -= x(i);
        lp.setObjective(obj, false);

        for (int k = 0; k < n; ++k) {
            if (tree.isLeaf(k)) continue;
            for (int i = 0; i < D; ++i) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(n * D);
                row(var(k, i)) = 1.0;
                for (int c : tree.childrenOf(k))
                    row(var(c, i)) = -tree.probOf(c) / tree.probOf(k);
                lp.addConstraint(row, '=', 0.0);
            }
        }
        for (int k = 0; k < n; ++k) {
            const Eigen::MatrixXd& G = tree.coneAt(k).generators();
            for (Eigen::Index g = 0; g < G.cols(); ++g) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(n * D);
                for (int i = 0; i < D; ++i) row(var(k, i)) = G(i, g);
                lp.addConstraint(row, '>', 0.0);
            }
        }
        Eigen::VectorXd norm = Eigen::VectorXd::Zero(n * D);
        for (int i = 0; i < D; ++i) norm(var(tree.root(), i)) = 1.0;
        lp.addConstraint(norm, '=', 1.0);

        LpResult sol = lp.solve();
        if (sol.status != LpStatus::Optimal)
            throw SolverError("attainableCheck: pricing LP did not terminate");
        res.superReplicationGap = sol.objective;
        if (sol.objective > tol) {
            res.separating.z.resize(n);
            for (int k = 0; k < n; ++k) res.separating.z[k] = sol.x.segment(var(k, 0), D);
        }
    }

    bool pricedIn = res.superReplicationGap <= tol;
    res.routesAgree = (pricedIn == res.primalFeasible);
    res.attainable = res.primalFeasible;
    return res;
}

TerminalConeMap terminalConeRepresentation(const ScenarioTree& tree) {
    TerminalConeMap map;
    const auto& leaves = tree.leaves();
    std::vector<int> blockOfNode(tree.nodeCount(), -1);
    for (int k = 0; k < tree.nodeCount(); ++k) {
        if (tree.isLeaf(k) && !tree.terminalTradesAllowed()) continue;
        blockOfNode[k] = static_cast<int>(map.gens.size());
        map.blockNode.push_back(k);
        map.gens.push_back(tree.coneAt(k).generators());
        map.blockOffset.push_back(map.coefCount);
        map.coefCount += static_cast<int>(tree.coneAt(k).generators().cols());
    }
    map.blocksOnPath.resize(leaves.size());
    for (size_t li = 0; li < leaves.size(); ++li)
        for (int k : tree.pathTo(leaves[li]))
            if (blockOfNode[k] >= 0) map.blocksOnPath[li].push_back(blockOfNode[k]);
    return map;
}

std::vector<Eigen::VectorXd> TerminalConeMap::apply(const ScenarioTree& tree,
                                                    const Eigen::VectorXd& c) const {
    std::vector<Eigen::VectorXd> out(blocksOnPath.size(),
                                     Eigen::VectorXd::Zero(tree.assets()));
    for (size_t li = 0; li < blocksOnPath.size(); ++li)
        for (int b : blocksOnPath[li])
            out[li] -= gens[b] * c.segment(blockOffset[b], gens[b].cols());
    return out;
}

}  // namespace conemkt
