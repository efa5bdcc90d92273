#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "conemkt/market.hpp"
#include "conemkt/utility.hpp"

namespace conemkt {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

// Tolerances threaded from the config into solvers and reports.
struct ToleranceSet {
    double scpsMargin = 1e-6;   // strict-interior floor in the price search
    double interiorEps = 1e-6;  // slack threshold separating interior from boundary starts
    double gapTol = 1e-7;       // relative primal-dual gap accepted as zero
};

// One run: a tree, optionally a utility and an endowment, tolerances, a seed.
// Numeric fields travel as decimal strings in the file; in memory they are
// plain doubles and the emitter writes shortest-round-trip text.
struct RunConfig {
    int schemaVersion = kSchemaVersion;
    unsigned long long seed = 2026;
    int assets = 0;
    bool terminalTrades = true;
    std::vector<ScenarioTree::NodeSpec> nodes;
    std::optional<UtilitySpec> utility;
    std::optional<Eigen::VectorXd> endowment;
    ToleranceSet tol;
};

RunConfig parseConfig(const std::string& text);  // throws ConfigError
RunConfig loadConfig(const std::string& path);   // throws ConfigError
std::string emitConfig(const RunConfig& cfg);    // canonical form

// Field-by-field equality, doubles compared bit-exactly. parse(emit(parse(f)))
// equals parse(f) under this predicate.
bool sameConfig(const RunConfig& a, const RunConfig& b);

ScenarioTree buildTree(const RunConfig& cfg);  // throws TreeError on bad structure

// Locale-independent decimal text. formatDecimal emits the shortest string
// that parses back to the same double; parseDecimal accepts what it emits.
std::string formatDecimal(double v);
double parseDecimal(const std::string& text);  // throws ConfigError on junk

// Write-then-rename so readers never observe a half-written file.
void writeFileAtomic(const std::string& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

// One metadata comment line (artifact version, seed, tolerances), then the
// header row, then the data rows.
std::string renderCsv(const CsvTable& t, unsigned long long seed, const ToleranceSet& tol);

}  // namespace conemkt
