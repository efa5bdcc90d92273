#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "conemkt/cone.hpp"
#include "conemkt/errors.hpp"

namespace conemkt {

// Structural problem in a scenario tree definition, tagged with the node id
// closest to the fault (-1 when no single node is responsible).
class TreeError : public StructuralError {
public:
    TreeError(const std::string& what, int nodeId) : StructuralError(what), node_id(nodeId) {}
    int node_id;
};

// Event tree of a market with proportional transaction costs: every node
// carries a bid-ask matrix over the same asset set, probabilities are strictly
// positive, children probabilities sum to the parent's, and all leaves sit at
// the common horizon.
class ScenarioTree {
public:
    struct NodeSpec {
        int id = 0;
        int parent = -1;  // id of the parent, -1 for the root
        double prob = 1.0;
        Eigen::MatrixXd pi;
    };

    // Validates and indexes the specs; throws TreeError on structural faults.
    // terminalTrades controls whether the leaf-time cones admit transfers.
    static ScenarioTree build(int assets, const std::vector<NodeSpec>& specs,
                              bool terminalTrades = true);

    int assets() const { return assets_; }
    int nodeCount() const { return static_cast<int>(prob_.size()); }
    int horizon() const { return horizon_; }
    bool terminalTradesAllowed() const { return terminal_trades_; }

    int root() const { return root_; }
    int idOf(int k) const { return id_[k]; }
    int indexOf(int id) const;  // throws TreeError for unknown ids
    int parentOf(int k) const { return parent_[k]; }
    int depthOf(int k) const { return depth_[k]; }
    double probOf(int k) const { return prob_[k]; }
    const BidAskMatrix& bidAskAt(int k) const { return bidask_[k]; }
    const SolvencyCone& coneAt(int k) const { return cone_[k]; }
    const std::vector<int>& childrenOf(int k) const { return children_[k]; }
    const std::vector<int>& leaves() const { return leaves_; }
    const std::vector<int>& subtreeLeaves(int k) const { return subtree_leaves_[k]; }
    std::vector<int> pathTo(int k) const;  // node indices, root first, k last
    bool isLeaf(int k) const { return children_[k].empty(); }

private:
    ScenarioTree() = default;
    int assets_ = 0, horizon_ = 0, root_ = 0;
    bool terminal_trades_ = true;
    std::vector<int> id_, parent_, depth_;
    std::vector<double> prob_;
    std::vector<BidAskMatrix> bidask_;
    std::vector<SolvencyCone> cone_;
    std::vector<std::vector<int>> children_;
    std::vector<int> leaves_;
    std::vector<std::vector<int>> subtree_leaves_;
};

// Adapted price process, one vector per node index.
struct PriceSystem {
    std::vector<Eigen::VectorXd> z;
    // max over internal nodes of |z(k) - sum (p_c/p_k) z(c)|_inf
    double martingaleResidual(const ScenarioTree& tree) const;
};

struct ScpsResult {
    bool found = false;
    PriceSystem prices;
    double margin = 0.0;
    // Row multipliers certifying infeasibility of the consistency system
    // (arbitrage reading: no price system fits all cones at this margin).
    Eigen::VectorXd certificate;
    std::string diagnostic;
};

// Searches for a strictly consistent price system: the root is normalized to
// <1, z(root)> = 1 and every generator product at every node must reach the
// margin, so no node value can degenerate to zero.
ScpsResult findScps(const ScenarioTree& tree, double margin = 1e-6);

// Self-financing portfolio: endowment plus one transfer per node, each
// transfer drawn from the negative of that node's solvency cone.
struct PortfolioProcess {
    Eigen::VectorXd initial;
    std::vector<Eigen::VectorXd> transfers;  // per node index
    Eigen::VectorXd holdingsAfter(const ScenarioTree& tree, int k) const;
    // Largest cone-membership residual of -transfer over all nodes.
    double selfFinancingResidual(const ScenarioTree& tree) const;
};

struct AttainabilityResult {
    bool attainable = false;      // verdict of the transfer-feasibility route
    bool primalFeasible = false;
    double superReplicationGap = 0.0;  // max over price systems of E<X,Z_T> - <x,Z_0>
    bool routesAgree = false;
    std::vector<Eigen::VectorXd> transfers;  // witness when attainable
    PriceSystem separating;                  // witness when priced out
};

// Tests whether the claim (one nonnegative payoff per leaf, in leaf order) is
// attainable from x, through the transfer LP and through pricing by all
// consistent price systems; both verdicts are reported.
AttainabilityResult attainableCheck(const ScenarioTree& tree, const Eigen::VectorXd& x,
                                    const std::vector<Eigen::VectorXd>& claim, double tol = 1e-7);

// Generator representation of the cone of claims attainable from zero: leaf
// payoffs are Y(leaf) = - sum over path nodes of G_node c_node with c >= 0.
struct TerminalConeMap {
    std::vector<int> blockNode;         // node index per block
    std::vector<Eigen::MatrixXd> gens;  // generators per block
    std::vector<int> blockOffset;       // first coefficient index per block
    int coefCount = 0;
    std::vector<std::vector<int>> blocksOnPath;  // per leaf (leaf order)
    std::vector<Eigen::VectorXd> apply(const ScenarioTree& tree, const Eigen::VectorXd& c) const;
};

TerminalConeMap terminalConeRepresentation(const ScenarioTree& tree);

}  // namespace conemkt
