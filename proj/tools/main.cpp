// Command-line front end: config ingestion, solver dispatch, reports and CSV.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conemkt/config.hpp"
#include "conemkt/errors.hpp"
#include "conemkt/liquidation.hpp"
#include "conemkt/properties.hpp"
#include "conemkt/solver.hpp"

namespace {

using namespace conemkt;

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd parseVectorArg(const std::string& csv, const std::string& flag) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string piece;
    while (std::getline(ss, piece, ',')) vals.push_back(parseDecimal(piece));
    if (vals.empty()) throw ConfigError(flag + ": expected a comma-separated list");
    Eigen::VectorXd v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
    return v;
}

std::vector<int> parseIntListArg(const std::string& csv, const std::string& flag) {
    Eigen::VectorXd v = parseVectorArg(csv, flag);
    std::vector<int> out;
    for (int i = 0; i < v.size(); ++i) {
        if (v(i) != std::floor(v(i))) throw ConfigError(flag + ": expected integers");
        out.push_back(static_cast<int>(v(i)));
    }
    return out;
}

std::string vecText(const Eigen::VectorXd& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += formatDecimal(v(i));
    }
    return s + ")";
}

void printHeader(const std::string& command, const RunConfig& cfg) {
    std::cout << "artifact: conemkt " << kArtifactVersion << "\n"
              << "command: " << command << "\n"
              << "seed: " << cfg.seed << "\n";
}

RunConfig configFor(const std::string& path, const std::optional<unsigned long long>& seed) {
    if (path.empty()) throw ConfigError("this command needs --config");
    RunConfig cfg = loadConfig(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

SolveOptions optionsOf(const RunConfig& cfg) {
    SolveOptions opt;
    opt.scpsMargin = cfg.tol.scpsMargin;
    opt.interiorEps = cfg.tol.interiorEps;
    opt.seed = cfg.seed;
    return opt;
}

ExtendedUtility utilityOf(const RunConfig& cfg) {
    if (!cfg.utility) throw ConfigError("this command needs a utility section in the config");
    return ExtendedUtility(Utility(*cfg.utility), cfg.assets);
}

Eigen::VectorXd endowmentOf(const RunConfig& cfg, const std::string& xFlag) {
    Eigen::VectorXd x;
    if (!xFlag.empty())
        x = parseVectorArg(xFlag, "--x");
    else if (cfg.endowment)
        x = *cfg.endowment;
    else
        throw ConfigError("no endowment: give --x or an endowment in the config");
    if (x.size() != cfg.assets)
        throw ConfigError("endowment has " + std::to_string(x.size()) + " entries, tree has " +
                          std::to_string(cfg.assets) + " assets");
    return x;
}

void maybeWriteCsv(const std::string& out, const CsvTable& table, const RunConfig& cfg) {
    if (out.empty()) return;
    writeFileAtomic(out, renderCsv(table, cfg.seed, cfg.tol));
    std::cout << "csv: " << out << "\n";
}

// ---------------------------------------------------------------- commands

int cmdValidate(const RunConfig& cfg) {
    ScenarioTree tree = buildTree(cfg);
    printHeader("validate", cfg);
    std::cout << "config valid: " << cfg.assets << " assets, " << tree.nodeCount()
              << " nodes, horizon " << tree.horizon() << ", " << tree.leaves().size()
              << " leaves, terminal trades "
              << (tree.terminalTradesAllowed() ? "enabled" : "disabled") << "\n";
    if (cfg.utility)
        std::cout << "utility: " << familyName(cfg.utility->family) << " d=" << cfg.utility->d
                  << " alpha=" << vecText(cfg.utility->alpha)
                  << " gamma=" << vecText(cfg.utility->gamma)
                  << " c0=" << formatDecimal(cfg.utility->c0) << "\n";
    if (cfg.endowment) std::cout << "endowment: " << vecText(*cfg.endowment) << "\n";
    std::cout << "tolerances: scps_margin " << formatDecimal(cfg.tol.scpsMargin)
              << ", interior_eps " << formatDecimal(cfg.tol.interiorEps) << ", gap_tol "
              << formatDecimal(cfg.tol.gapTol) << "\n";
    return 0;
}

int cmdCone(const RunConfig& cfg, std::optional<int> nodeId, const std::string& xFlag) {
    ScenarioTree tree = buildTree(cfg);
    int k = nodeId ? tree.indexOf(*nodeId) : tree.root();
    printHeader("cone", cfg);
    std::cout << "node: " << tree.idOf(k) << "\n";
    const SolvencyCone& cone = tree.coneAt(k);
    const Eigen::MatrixXd& G = cone.generators();
    for (int c = 0; c < G.cols(); ++c)
        std::cout << "generator[" << c << "]: " << vecText(G.col(c)) << "\n";
    PolarCone polar = polarCone(cone);
    for (int c = 0; c < polar.halfspaces.cols(); ++c)
        std::cout << "polar_halfspace[" << c << "]: " << vecText(polar.halfspaces.col(c)) << "\n";
    if (!xFlag.empty()) {
        Eigen::VectorXd x = parseVectorArg(xFlag, "--x");
        if (x.size() != cone.dim()) throw ConfigError("--x: dimension mismatch with the cone");
        MembershipResult m = coneContains(cone, x);
        std::cout << "point: " << vecText(x) << "\n"
                  << "inside: " << (m.inside ? "yes" : "no") << "\n"
                  << "residual: " << formatDecimal(m.residual) << "\n";
        if (m.inside)
            std::cout << "coefficients: " << vecText(m.coefficients) << "\n";
        else
            std::cout << "separator: " << vecText(m.separator) << "\n";
    }
    return 0;
}

int cmdScps(const RunConfig& cfg, std::optional<double> marginFlag, const std::string& out) {
    ScenarioTree tree = buildTree(cfg);
    double margin = marginFlag ? *marginFlag : cfg.tol.scpsMargin;
    if (!(margin > 0)) throw ConfigError("--margin must be positive");
    ScpsResult r = findScps(tree, margin);
    printHeader("scps", cfg);
    std::cout << "margin: " << formatDecimal(margin) << "\n";
    if (!r.found) {
        std::cout << "found: no\n"
                  << "diagnostic: " << r.diagnostic << "\n"
                  << "certificate: " << vecText(r.certificate) << "\n";
        return 1;
    }
    std::cout << "found: yes\n"
              << "report: strictly consistent price system at margin " << formatDecimal(margin)
              << "\n";
    CsvTable table;
    table.columns = {"node"};
    for (int i = 0; i < cfg.assets; ++i) table.columns.push_back("z_" + std::to_string(i + 1));
    for (int k = 0; k < tree.nodeCount(); ++k) {
        std::cout << "z[" << tree.idOf(k) << "]: " << vecText(r.prices.z[k]) << "\n";
        std::vector<std::string> row{std::to_string(tree.idOf(k))};
        for (int i = 0; i < cfg.assets; ++i) row.push_back(formatDecimal(r.prices.z[k](i)));
        table.rows.push_back(std::move(row));
    }
    std::cout << "martingale_residual: " << formatDecimal(r.prices.martingaleResidual(tree))
              << "\n";
    maybeWriteCsv(out, table, cfg);
    return 0;
}

int cmdSolve(const RunConfig& cfg, const std::string& xFlag, const std::string& out) {
    ScenarioTree tree = buildTree(cfg);
    ExtendedUtility u = utilityOf(cfg);
    Eigen::VectorXd x = endowmentOf(cfg, xFlag);
    PrimalSolution ps = solvePrimal(tree, u, x, optionsOf(cfg));
    printHeader("solve", cfg);
    std::cout << "endowment: " << vecText(x) << "\n"
              << "feasible: " << (ps.feasible ? "yes" : "no") << "\n"
              << "boundary: " << (ps.boundary ? "yes" : "no") << "\n"
              << "value: " << formatDecimal(ps.feasible ? ps.value : -kInf) << "\n";
    if (!ps.message.empty()) std::cout << "note: " << ps.message << "\n";
    if (!ps.feasible) return 1;
    CsvTable table;
    table.columns = {"leaf", "p"};
    const int d = u.consumptionDim();
    for (int i = 0; i < d; ++i) table.columns.push_back("c_" + std::to_string(i + 1));
    const auto& leaves = tree.leaves();
    for (size_t li = 0; li < leaves.size(); ++li) {
        std::cout << "consumption[" << tree.idOf(leaves[li]) << "]: "
                  << vecText(ps.consumption[li]) << "\n";
        std::vector<std::string> row{std::to_string(tree.idOf(leaves[li])),
                                     formatDecimal(tree.probOf(leaves[li]))};
        for (int i = 0; i < d; ++i) row.push_back(formatDecimal(ps.consumption[li](i)));
        table.rows.push_back(std::move(row));
    }
    std::cout << "self_financing_residual: " << formatDecimal(ps.selfFinancingResidual) << "\n"
              << "newton_steps: " << ps.newtonSteps << "\n";
    maybeWriteCsv(out, table, cfg);
    return 0;
}

int cmdDual(const RunConfig& cfg, const std::string& xFlag, const std::string& out) {
    ScenarioTree tree = buildTree(cfg);
    ExtendedUtility u = utilityOf(cfg);
    Eigen::VectorXd x = endowmentOf(cfg, xFlag);
    SolveOptions opt = optionsOf(cfg);
    PrimalSolution ps = solvePrimal(tree, u, x, opt);
    DualSolution ds = solveDual(tree, u, x, opt);
    printHeader("dual", cfg);
    std::cout << "endowment: " << vecText(x) << "\n"
              << "primal_value: " << formatDecimal(ps.feasible ? ps.value : -kInf) << "\n";
    if (ds.unboundedBelow) {
        std::cout << "dual_value: -inf\n"
                  << "note: " << ds.message << "\n";
        std::cout << "divergence_sequence:";
        for (double v : ds.divergenceSequence) std::cout << " " << formatDecimal(v);
        std::cout << "\n";
        return 1;
    }
    if (!ds.finite) {
        std::cout << "dual_value: inf\n"
                  << "note: " << ds.message << "\n";
        return 1;
    }
    std::cout << "dual_value: " << formatDecimal(ds.value) << "\n";
    if (!ps.feasible) {
        std::cout << "note: primal infeasible while the dual stayed finite\n";
        return 3;
    }
    double gap = std::abs(ps.value - ds.value) /
                 std::max({1.0, std::abs(ps.value), std::abs(ds.value)});
    std::cout << "relative_gap: " << formatDecimal(gap) << "\n"
              << "gap_within_tolerance: " << (gap <= cfg.tol.gapTol ? "yes" : "no") << "\n"
              << "total_mass: " << vecText(ds.measure.total()) << "\n"
              << "singular_mass: " << vecText(ds.measure.singularMass) << "\n";
    CsvTable table;
    table.columns = {"leaf", "p"};
    for (int i = 0; i < cfg.assets; ++i) table.columns.push_back("atom_" + std::to_string(i + 1));
    for (int i = 0; i < cfg.assets; ++i)
        table.columns.push_back("density_" + std::to_string(i + 1));
    const auto& leaves = tree.leaves();
    for (size_t li = 0; li < leaves.size(); ++li) {
        Eigen::VectorXd dens = ds.measure.density(tree, static_cast<int>(li));
        std::cout << "atom[" << tree.idOf(leaves[li]) << "]: " << vecText(ds.measure.atoms[li])
                  << "  density: " << vecText(dens) << "\n";
        std::vector<std::string> row{std::to_string(tree.idOf(leaves[li])),
                                     formatDecimal(tree.probOf(leaves[li]))};
        for (int i = 0; i < cfg.assets; ++i) row.push_back(formatDecimal(ds.measure.atoms[li](i)));
        for (int i = 0; i < cfg.assets; ++i) row.push_back(formatDecimal(dens(i)));
        table.rows.push_back(std::move(row));
    }
    std::cout << "cone_residual: " << formatDecimal(ds.coneResidual) << "\n"
              << "martingale_residual: " << formatDecimal(ds.martingaleResidual) << "\n"
              << "newton_steps: " << ds.newtonSteps << "\n";
    maybeWriteCsv(out, table, cfg);
    return gap <= cfg.tol.gapTol ? 0 : 3;
}

int cmdProbe(const RunConfig& cfg, const std::string& xFlag, double h) {
    ScenarioTree tree = buildTree(cfg);
    ExtendedUtility u = utilityOf(cfg);
    Eigen::VectorXd x = endowmentOf(cfg, xFlag);
    if (!(h > 0)) throw ConfigError("--step must be positive");
    ValueFunctionProbe probe = supergradientProbe(tree, u, x, h, optionsOf(cfg));
    printHeader("probe", cfg);
    std::cout << "endowment: " << vecText(x) << "\n"
              << "value: " << formatDecimal(probe.value) << "\n"
              << "candidate: " << vecText(probe.candidate) << "\n"
              << "step: " << formatDecimal(h) << "\n";
    for (int i = 0; i < x.size(); ++i)
        std::cout << "u(x + h e_" << i + 1 << "): " << formatDecimal(probe.probeValues(i))
                  << "  u(x - h e_" << i + 1
                  << "): " << formatDecimal(probe.probeValues(x.size() + i)) << "\n";
    std::cout << "worst_violation: " << formatDecimal(probe.worstViolation) << "\n"
              << "supergradient_inequality: " << (probe.holds ? "holds" : "violated") << "\n";
    return probe.holds ? 0 : 3;
}

int cmdLiquidate(const RunConfig& cfg, const std::string& xFlag, const std::string& wFlag,
                 std::optional<int> nodeId) {
    ScenarioTree tree = buildTree(cfg);
    if (!cfg.utility) throw ConfigError("this command needs a utility section in the config");
    Utility base(*cfg.utility);
    printHeader("liquidate", cfg);
    if (!wFlag.empty()) {
        Eigen::VectorXd W = parseVectorArg(wFlag, "--W");
        if (W.size() != cfg.assets) throw ConfigError("--W: dimension mismatch with the tree");
        int k = nodeId ? tree.indexOf(*nodeId) : tree.root();
        std::cout << "node: " << tree.idOf(k) << "\n"
                  << "position: " << vecText(W) << "\n";
        const SolvencyCone& cone = tree.coneAt(k);
        if (base.dim() == 1)
            std::cout << "liquidation_amount: " << formatDecimal(liquidationValueD1(cone, W))
                      << "\n";
        LiquidationResult r = liquidationUtility(cone, base, W);
        if (!r.inCone) {
            std::cout << "solvent: no\n"
                      << "value: -inf\n"
                      << "note: " << r.message << "\n";
            return 1;
        }
        std::cout << "solvent: yes\n"
                  << "value: " << formatDecimal(r.value) << "\n"
                  << "bundle: " << vecText(r.xi) << "\n";
        if (!r.message.empty()) std::cout << "note: " << r.message << "\n";
        return 0;
    }
    Eigen::VectorXd x = endowmentOf(cfg, xFlag);
    LiquidationSolve ls = solveLiquidationFormulation(tree, base, x, optionsOf(cfg));
    ExtendedUtility u(base, cfg.assets);
    PrimalSolution ps = solvePrimal(tree, u, x, optionsOf(cfg));
    std::cout << "endowment: " << vecText(x) << "\n"
              << "liquidation_value: " << formatDecimal(ls.feasible ? ls.value : -kInf) << "\n"
              << "direct_value: " << formatDecimal(ps.feasible ? ps.value : -kInf) << "\n";
    if (!ls.message.empty()) std::cout << "note: " << ls.message << "\n";
    if (!ls.feasible && !ps.feasible) return 1;
    if (ls.feasible != ps.feasible) {
        std::cout << "formulations_agree: no\n";
        return 3;
    }
    const auto& leaves = tree.leaves();
    for (size_t li = 0; li < ls.xi.size(); ++li)
        std::cout << "leaf[" << tree.idOf(leaves[li]) << "]: entering "
                  << vecText(ls.preliquidation[li]) << "  bundle " << vecText(ls.xi[li]) << "\n";
    if (!tree.terminalTradesAllowed()) {
        std::cout << "note: terminal trades disabled, the two formulations need not agree\n";
        return 0;
    }
    double diff = std::abs(ls.value - ps.value);
    bool agree = diff <= 1e-5 * std::max(1.0, std::abs(ps.value));
    std::cout << "difference: " << formatDecimal(diff) << "\n"
              << "formulations_agree: " << (agree ? "yes" : "no") << "\n";
    return agree ? 0 : 3;
}

int cmdSweep(double alpha, const std::string& nList, const std::string& out,
             std::optional<unsigned long long> seedFlag) {
    RunConfig cfg;  // built-in model: config only carries seed and tolerances
    if (seedFlag) cfg.seed = *seedFlag;
    std::vector<int> Ns = parseIntListArg(nList.empty() ? "10,20,40" : nList, "--N");
    std::vector<SweepRow> rows = singularSweep(alpha, Ns);
    printHeader("sweep-singular", cfg);
    std::cout << "alpha: " << formatDecimal(alpha) << "\n";
    CsvTable table;
    table.columns = {"N", "theta", "u_N", "mass_total_1", "head_mass_M5", "deficit"};
    for (const SweepRow& r : rows) {
        std::cout << "N=" << r.N << " theta=" << formatDecimal(r.theta)
                  << " u_N=" << formatDecimal(r.value)
                  << " mass_total_1=" << formatDecimal(r.mass1)
                  << " head_mass_M5=" << formatDecimal(r.headMass5)
                  << " deficit=" << formatDecimal(r.deficit) << " fd1=" << formatDecimal(r.fd1)
                  << " fd2=" << formatDecimal(r.fd2)
                  << " transfer_norm=" << formatDecimal(r.transferNorm) << "\n";
        table.rows.push_back({std::to_string(r.N), formatDecimal(r.theta),
                              formatDecimal(r.value), formatDecimal(r.mass1),
                              formatDecimal(r.headMass5), formatDecimal(r.deficit)});
    }
    maybeWriteCsv(out, table, cfg);
    return 0;
}

// Embedded closed forms of the two worked one-period examples with
// pi = [[1,2],[2,1]] at both dates.
double closedFormCase1(double x1, double x2) {
    const double l2 = std::log(2.0);
    if (x2 > 2 * std::abs(x1)) return 2 * std::log(2 * x1 + x2) - 3 * l2;
    if (x1 > 0 && x1 <= 2 * x2 && 2 * x2 <= 4 * x1) return std::log(x1) + std::log(x2);
    if (x1 > 0 && -x1 < 2 * x2 && 2 * x2 < x1) return 2 * std::log(x1 + 2 * x2) - 3 * l2;
    return -kInf;
}

double closedFormCase2(double x1, double x2) {
    if (x2 > std::max(0.0, -2 * x1)) return std::log(x1 + 0.5 * x2);
    if (x1 > 0 && -x1 < 2 * x2 && x2 <= 0) return std::log(x1 + 2 * x2);
    return -kInf;
}

ScenarioTree oneStepTree() {
    Eigen::MatrixXd pi(2, 2);
    pi << 1, 2, 2, 1;
    std::vector<ScenarioTree::NodeSpec> specs(2);
    specs[0] = {0, -1, 1.0, pi};
    specs[1] = {1, 0, 1.0, pi};
    return ScenarioTree::build(2, specs, true);
}

int cmdReproduce(const std::string& name, std::optional<unsigned long long> seedFlag) {
    RunConfig cfg;
    if (seedFlag) cfg.seed = *seedFlag;
    printHeader("reproduce", cfg);
    std::cout << "example: " << name << "\n";
    int failures = 0;
    auto check = [&](const std::string& label, bool ok) {
        std::cout << "check " << label << ": " << (ok ? "pass" : "FAIL") << "\n";
        if (!ok) ++failures;
    };

    if (name == "nonstrict") {
        ScenarioTree tree = oneStepTree();
        ExtendedUtility u2(Utility(UtilitySpec::additiveLog(2, Eigen::VectorXd::Ones(2))), 2);
        ExtendedUtility u1(Utility(UtilitySpec::additiveLog(1, Eigen::VectorXd::Ones(1))), 2);
        SolveOptions opt = optionsOf(cfg);
        struct Probe {
            double x1, x2;
        };
        // interior points of each region of each case
        const std::vector<Probe> grid1 = {{0.3, 1.0},  {-0.2, 0.9}, {0.0, 1.3},  {0.5, 2.2},
                                          {-0.4, 1.7}, {1.0, 1.0},  {0.8, 0.6},  {1.4, 2.0},
                                          {0.6, 1.1},  {2.0, 3.5},  {1.0, 0.2},  {1.6, 0.1},
                                          {0.9, -0.2}, {2.4, -0.7}, {1.2, -0.35}};
        const std::vector<Probe> grid2 = {{0.4, 1.0}, {-0.3, 1.4}, {0.0, 0.7},   {1.1, 2.5},
                                          {-1.0, 2.6}, {2.0, 0.4}, {1.0, -0.2},  {0.8, -0.3},
                                          {2.2, -1.0}, {1.5, -0.6}, {3.0, -1.2}, {0.6, -0.1}};
        for (const Probe& p : grid1) {
            Eigen::VectorXd x(2);
            x << p.x1, p.x2;
            double want = closedFormCase1(p.x1, p.x2);
            PrimalSolution ps = solvePrimal(tree, u2, x, opt);
            std::ostringstream label;
            label << "case1 (" << p.x1 << ", " << p.x2 << ")";
            check(label.str(), ps.feasible && std::abs(ps.value - want) <= 1e-5);
        }
        for (const Probe& p : grid2) {
            Eigen::VectorXd x(2);
            x << p.x1, p.x2;
            double want = closedFormCase2(p.x1, p.x2);
            PrimalSolution ps = solvePrimal(tree, u1, x, opt);
            std::ostringstream label;
            label << "case2 (" << p.x1 << ", " << p.x2 << ")";
            check(label.str(), ps.feasible && std::abs(ps.value - want) <= 1e-5);
        }
        // insolvent endowments are rejected on both cases
        {
            Eigen::VectorXd x(2);
            x << -1.0, 0.5;
            check("case1 insolvent", !solvePrimal(tree, u2, x, opt).feasible);
            check("case2 insolvent", !solvePrimal(tree, u1, x, opt).feasible);
        }
    } else if (name == "singular") {
        std::vector<SweepRow> rows = singularSweep(0.1, {10, 20, 40});
        struct Frozen {
            int N;
            double theta, value;
        };
        const std::vector<Frozen> frozen = {{10, 1.110733082585700, 0.6077594543},
                                            {20, 1.052631278187411, 0.5906626565},
                                            {40, 1.025641025640754, 0.5818432070}};
        for (size_t i = 0; i < rows.size(); ++i) {
            const SweepRow& r = rows[i];
            std::ostringstream a, b, c, d;
            a << "N=" << r.N << " theta matches stored value";
            check(a.str(), std::abs(r.theta - frozen[i].theta) <= 1e-9);
            b << "N=" << r.N << " value matches stored value";
            check(b.str(), std::abs(r.value - frozen[i].value) <= 1e-8);
            c << "N=" << r.N << " theta exceeds 1";
            check(c.str(), r.theta > 1.0);
            d << "N=" << r.N << " mass tracks the marginal value";
            check(d.str(), std::abs(r.mass1 - r.fd1) <= 0.02);
        }
        check("theta decreasing in N", rows[0].theta > rows[1].theta &&
                                           rows[1].theta > rows[2].theta);
        // head-5 atom mass in the limit: (1-alpha)/2 + alpha * sum_{n<=5} n 2^-n
        const double headLimit = 0.45 + 0.1 * 57.0 / 32.0;
        check("head mass decreasing toward its limit",
              rows[0].headMass5 > rows[1].headMass5 && rows[1].headMass5 > rows[2].headMass5 &&
                  rows[2].headMass5 > headLimit);
        check("deficit near the escaping mass", std::abs(rows[2].deficit - 0.35) <= 0.05);
    } else {
        throw ConfigError("reproduce: unknown example '" + name +
                          "' (expected nonstrict or singular)");
    }

    if (failures == 0) {
        std::cout << "result: match\n";
        return 0;
    }
    std::cout << "result: differs (" << failures << " checks failed)\n";
    return 3;
}

int cmdCheckUtility(const RunConfig& cfg) {
    if (!cfg.utility) throw ConfigError("this command needs a utility section in the config");
    Utility u(*cfg.utility);
    printHeader("check-utility", cfg);
    std::cout << "utility: " << familyName(cfg.utility->family) << " d=" << cfg.utility->d
              << "\n";
    const unsigned long long s = cfg.seed;
    std::vector<PropertyReport> reports;
    reports.push_back(checkBasicShape(u, 200, s ^ 101));
    reports.push_back(checkAsymptoticSatiability(u, 1e-4));
    reports.push_back(checkMultivariateRiskAversion(u, 400, s ^ 202));
    reports.push_back(checkGrowthCondition(u, {0.5, 0.2, 0.1, 0.05, 0.01}, 1200, s ^ 303));
    reports.push_back(estimateAsymptoticElasticity(u, {0.0, 1.0, 10.0, 100.0},
                                                   {1e2, 1e4, 1e6, 1e8}, 160, s ^ 404));
    for (const PropertyReport& r : reports) std::cout << r.summary() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conemkt: utility maximization on solvency-cone scenario trees"};
    app.require_subcommand(1);

    std::string configPath, xFlag, wFlag, outPath, nList = "10,20,40", reproduceName;
    std::optional<unsigned long long> seedFlag;
    std::optional<double> marginFlag;
    std::optional<int> nodeFlag;
    double hFlag = 1e-4, alphaFlag = 0.1;
    unsigned long long seedRaw = 0;
    double marginRaw = 0;
    int nodeRaw = 0;

    auto addConfig = [&](CLI::App* sub) {
        sub->add_option("--config", configPath, "config file (JSON)");
        sub->add_option("--seed", seedRaw, "override the config seed");
    };

    CLI::App* vCmd = app.add_subcommand("validate", "parse and structurally check a config");
    addConfig(vCmd);

    CLI::App* cCmd = app.add_subcommand("cone", "print a node's solvency cone and polar");
    addConfig(cCmd);
    cCmd->add_option("--node", nodeRaw, "node id (default: root)");
    cCmd->add_option("--x", xFlag, "test membership of this point (comma separated)");

    CLI::App* sCmd = app.add_subcommand("scps", "search for a strictly consistent price system");
    addConfig(sCmd);
    sCmd->add_option("--margin", marginRaw, "strictness margin");
    sCmd->add_option("--out", outPath, "write the price system as CSV");

    CLI::App* solveCmd = app.add_subcommand("solve", "maximize expected utility from x");
    addConfig(solveCmd);
    solveCmd->add_option("--x", xFlag, "endowment override (comma separated)");
    solveCmd->add_option("--out", outPath, "write the consumption plan as CSV");

    CLI::App* dCmd = app.add_subcommand("dual", "minimize the dual and report the gap");
    addConfig(dCmd);
    dCmd->add_option("--x", xFlag, "endowment override (comma separated)");
    dCmd->add_option("--out", outPath, "write atoms and densities as CSV");

    CLI::App* pCmd = app.add_subcommand("probe", "test the value-function supergradient at x");
    addConfig(pCmd);
    pCmd->add_option("--x", xFlag, "endowment override (comma separated)");
    pCmd->add_option("--step", hFlag, "finite-difference step");

    CLI::App* lCmd = app.add_subcommand("liquidate", "liquidation values and formulations");
    addConfig(lCmd);
    lCmd->add_option("--x", xFlag, "endowment for the tree formulation");
    lCmd->add_option("--W", wFlag, "single position to liquidate through one cone");
    lCmd->add_option("--node", nodeRaw, "cone node id for --W (default: root)");

    CLI::App* swCmd = app.add_subcommand("sweep-singular", "truncation sweep of the built-in "
                                                           "escaping-mass model");
    swCmd->add_option("--alpha", alphaFlag, "branch weight of the singular part");
    swCmd->add_option("--N", nList, "comma-separated horizon list");
    swCmd->add_option("--out", outPath, "write the sweep as CSV");
    swCmd->add_option("--seed", seedRaw, "seed recorded in outputs");

    CLI::App* rCmd = app.add_subcommand("reproduce", "re-run a built-in worked example");
    rCmd->add_option("name", reproduceName, "nonstrict or singular")->required();
    rCmd->add_option("--seed", seedRaw, "seed recorded in outputs");

    CLI::App* uCmd = app.add_subcommand("check-utility", "run the utility property checkers");
    addConfig(uCmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    // lift optional flags off whichever subcommand ran
    for (CLI::App* sub : {vCmd, cCmd, sCmd, solveCmd, dCmd, pCmd, lCmd, swCmd, rCmd, uCmd}) {
        if (!app.got_subcommand(sub)) continue;
        auto has = [&](const std::string& name) {
            return sub->get_option_no_throw(name) != nullptr &&
                   sub->count(name) > 0;
        };
        if (has("--seed")) seedFlag = seedRaw;
        if (has("--node")) nodeFlag = nodeRaw;
        if (has("--margin")) marginFlag = marginRaw;
    }

    try {
        if (app.got_subcommand(vCmd)) return cmdValidate(configFor(configPath, seedFlag));
        if (app.got_subcommand(cCmd))
            return cmdCone(configFor(configPath, seedFlag), nodeFlag, xFlag);
        if (app.got_subcommand(sCmd))
            return cmdScps(configFor(configPath, seedFlag), marginFlag, outPath);
        if (app.got_subcommand(solveCmd))
            return cmdSolve(configFor(configPath, seedFlag), xFlag, outPath);
        if (app.got_subcommand(dCmd))
            return cmdDual(configFor(configPath, seedFlag), xFlag, outPath);
        if (app.got_subcommand(pCmd))
            return cmdProbe(configFor(configPath, seedFlag), xFlag, hFlag);
        if (app.got_subcommand(lCmd))
            return cmdLiquidate(configFor(configPath, seedFlag), xFlag, wFlag, nodeFlag);
        if (app.got_subcommand(swCmd)) return cmdSweep(alphaFlag, nList, outPath, seedFlag);
        if (app.got_subcommand(rCmd)) return cmdReproduce(reproduceName, seedFlag);
        if (app.got_subcommand(uCmd)) return cmdCheckUtility(configFor(configPath, seedFlag));
        std::cerr << "error: no command\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TreeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
