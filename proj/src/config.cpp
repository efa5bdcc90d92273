#include "conemkt/config.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "conemkt/errors.hpp"

namespace conemkt {
namespace {

using nlohmann::json;

double numberField(const json& j, const std::string& where) {
    if (j.is_string()) return parseDecimal(j.get<std::string>());
    if (j.is_number()) return j.get<double>();
    throw ConfigError(where + ": expected a decimal string");
}

double numberField(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    return numberField(obj.at(key), where + "." + key);
}

Eigen::VectorXd vectorField(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = numberField(arr[i], where + "[" + std::to_string(i) + "]");
    return v;
}

json vectorToJson(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(formatDecimal(v(i)));
    return arr;
}

UtilityFamily familyFromName(const std::string& name) {
    if (name == "additive_power") return UtilityFamily::AdditivePower;
    if (name == "additive_log") return UtilityFamily::AdditiveLog;
    if (name == "mixed_additive") return UtilityFamily::MixedAdditive;
    if (name == "cobb_douglas") return UtilityFamily::CobbDouglas;
    throw ConfigError("utility.family: unknown family '" + name + "'");
}

std::string familyToName(UtilityFamily f) {
    switch (f) {
        case UtilityFamily::AdditivePower: return "additive_power";
        case UtilityFamily::AdditiveLog: return "additive_log";
        case UtilityFamily::MixedAdditive: return "mixed_additive";
        case UtilityFamily::CobbDouglas: return "cobb_douglas";
    }
    throw ConfigError("utility.family: unrepresentable value");
}

}  // namespace

std::string formatDecimal(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parseDecimal(const std::string& text) {
    if (text.empty()) throw ConfigError("empty decimal string");
    const char* b = text.data();
    const char* e = b + text.size();
    double v = 0.0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw ConfigError("not a decimal number: '" + text + "'");
    return v;
}

RunConfig parseConfig(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    RunConfig cfg;
    if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
    cfg.schemaVersion = static_cast<int>(numberField(j.at("schema_version"), "schema_version"));
    if (cfg.schemaVersion != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " +
                          std::to_string(cfg.schemaVersion));
    if (j.contains("seed"))
        cfg.seed = static_cast<unsigned long long>(numberField(j.at("seed"), "seed"));

    if (!j.contains("tree")) throw ConfigError("config: missing tree");
    const json& t = j.at("tree");
    if (!t.is_object()) throw ConfigError("tree: expected an object");
    cfg.assets = static_cast<int>(numberField(t, "assets", "tree"));
    if (cfg.assets < 1) throw ConfigError("tree.assets: need at least one asset");
    if (t.contains("terminal_trades")) {
        if (!t.at("terminal_trades").is_boolean())
            throw ConfigError("tree.terminal_trades: expected true or false");
        cfg.terminalTrades = t.at("terminal_trades").get<bool>();
    }
    if (!t.contains("nodes") || !t.at("nodes").is_array() || t.at("nodes").empty())
        throw ConfigError("tree.nodes: expected a non-empty array");
    for (const json& n : t.at("nodes")) {
        const std::string where = "tree.nodes[" + std::to_string(cfg.nodes.size()) + "]";
        if (!n.is_object()) throw ConfigError(where + ": expected an object");
        ScenarioTree::NodeSpec spec;
        spec.id = static_cast<int>(numberField(n, "id", where));
        spec.parent = static_cast<int>(numberField(n, "parent", where));
        spec.prob = numberField(n, "p", where);
        if (!n.contains("pi")) throw ConfigError(where + ": missing field 'pi'");
        Eigen::VectorXd flat = vectorField(n.at("pi"), where + ".pi");
        if (flat.size() != static_cast<Eigen::Index>(cfg.assets) * cfg.assets)
            throw ConfigError(where + ".pi: expected " + std::to_string(cfg.assets) + "x" +
                              std::to_string(cfg.assets) + " row-major entries");
        spec.pi = Eigen::MatrixXd(cfg.assets, cfg.assets);
        for (int r = 0; r < cfg.assets; ++r)
            for (int c = 0; c < cfg.assets; ++c) spec.pi(r, c) = flat(r * cfg.assets + c);
        cfg.nodes.push_back(std::move(spec));
    }

    if (j.contains("utility")) {
        const json& u = j.at("utility");
        if (!u.is_object()) throw ConfigError("utility: expected an object");
        UtilitySpec spec;
        if (!u.contains("family") || !u.at("family").is_string())
            throw ConfigError("utility.family: expected a string");
        spec.family = familyFromName(u.at("family").get<std::string>());
        spec.d = static_cast<int>(numberField(u, "d", "utility"));
        if (!u.contains("alpha")) throw ConfigError("utility: missing field 'alpha'");
        spec.alpha = vectorField(u.at("alpha"), "utility.alpha");
        spec.gamma = u.contains("gamma") ? vectorField(u.at("gamma"), "utility.gamma")
                                         : Eigen::VectorXd::Zero(spec.d).eval();
        spec.c0 = u.contains("c0") ? numberField(u.at("c0"), "utility.c0") : 0.0;
        try {
            spec.validateOrThrow();
        } catch (const StructuralError& ex) {
            std::string what = ex.what();
            if (what.rfind("utility", 0) != 0) what = "utility: " + what;
            throw ConfigError(what);
        }
        cfg.utility = std::move(spec);
    }

    if (cfg.utility && cfg.utility->d > cfg.assets)
        throw ConfigError("utility.d: more consumption goods than assets in the tree");

    if (j.contains("endowment")) {
        cfg.endowment = vectorField(j.at("endowment"), "endowment");
        if (cfg.endowment->size() != cfg.assets)
            throw ConfigError("endowment: expected " + std::to_string(cfg.assets) + " entries");
    }

    if (j.contains("tolerances")) {
        const json& tl = j.at("tolerances");
        if (!tl.is_object()) throw ConfigError("tolerances: expected an object");
        if (tl.contains("scps_margin"))
            cfg.tol.scpsMargin = numberField(tl.at("scps_margin"), "tolerances.scps_margin");
        if (tl.contains("interior_eps"))
            cfg.tol.interiorEps = numberField(tl.at("interior_eps"), "tolerances.interior_eps");
        if (tl.contains("gap_tol"))
            cfg.tol.gapTol = numberField(tl.at("gap_tol"), "tolerances.gap_tol");
    }
    if (!(cfg.tol.scpsMargin > 0) || !(cfg.tol.interiorEps > 0) || !(cfg.tol.gapTol > 0))
        throw ConfigError("tolerances: all tolerances must be positive");
    return cfg;
}

RunConfig loadConfig(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseConfig(buf.str());
}

std::string emitConfig(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schemaVersion;
    j["seed"] = cfg.seed;
    json nodes = json::array();
    for (const auto& n : cfg.nodes) {
        json spec;
        spec["id"] = n.id;
        spec["parent"] = n.parent;
        spec["p"] = formatDecimal(n.prob);
        json pi = json::array();
        for (int r = 0; r < n.pi.rows(); ++r)
            for (int c = 0; c < n.pi.cols(); ++c) pi.push_back(formatDecimal(n.pi(r, c)));
        spec["pi"] = pi;
        nodes.push_back(std::move(spec));
    }
    j["tree"] = {{"assets", cfg.assets},
                 {"terminal_trades", cfg.terminalTrades},
                 {"nodes", std::move(nodes)}};
    if (cfg.utility) {
        j["utility"] = {{"family", familyToName(cfg.utility->family)},
                        {"d", cfg.utility->d},
                        {"alpha", vectorToJson(cfg.utility->alpha)},
                        {"gamma", vectorToJson(cfg.utility->gamma)},
                        {"c0", formatDecimal(cfg.utility->c0)}};
    }
    if (cfg.endowment) j["endowment"] = vectorToJson(*cfg.endowment);
    j["tolerances"] = {{"scps_margin", formatDecimal(cfg.tol.scpsMargin)},
                       {"interior_eps", formatDecimal(cfg.tol.interiorEps)},
                       {"gap_tol", formatDecimal(cfg.tol.gapTol)}};
    return j.dump(2) + "\n";
}

namespace {

bool sameVector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a(i), &b(i), sizeof(double)) != 0) return false;
    }
    return true;
}

bool sameDouble(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

bool sameConfig(const RunConfig& a, const RunConfig& b) {
    if (a.schemaVersion != b.schemaVersion || a.seed != b.seed || a.assets != b.assets ||
        a.terminalTrades != b.terminalTrades || a.nodes.size() != b.nodes.size())
        return false;
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        const auto& x = a.nodes[i];
        const auto& y = b.nodes[i];
        if (x.id != y.id || x.parent != y.parent || !sameDouble(x.prob, y.prob)) return false;
        if (x.pi.rows() != y.pi.rows() || x.pi.cols() != y.pi.cols()) return false;
        for (int r = 0; r < x.pi.rows(); ++r)
            for (int c = 0; c < x.pi.cols(); ++c)
                if (!sameDouble(x.pi(r, c), y.pi(r, c))) return false;
    }
    if (a.utility.has_value() != b.utility.has_value()) return false;
    if (a.utility) {
        if (a.utility->family != b.utility->family || a.utility->d != b.utility->d ||
            !sameVector(a.utility->alpha, b.utility->alpha) ||
            !sameVector(a.utility->gamma, b.utility->gamma) ||
            !sameDouble(a.utility->c0, b.utility->c0))
            return false;
    }
    if (a.endowment.has_value() != b.endowment.has_value()) return false;
    if (a.endowment && !sameVector(*a.endowment, *b.endowment)) return false;
    return sameDouble(a.tol.scpsMargin, b.tol.scpsMargin) &&
           sameDouble(a.tol.interiorEps, b.tol.interiorEps) &&
           sameDouble(a.tol.gapTol, b.tol.gapTol);
}

ScenarioTree buildTree(const RunConfig& cfg) {
    return ScenarioTree::build(cfg.assets, cfg.nodes, cfg.terminalTrades);
}

void writeFileAtomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string renderCsv(const CsvTable& t, unsigned long long seed, const ToleranceSet& tol) {
    std::ostringstream os;
    os << "# artifact " << kArtifactVersion << "; seed " << seed << "; scps_margin "
       << formatDecimal(tol.scpsMargin) << "; interior_eps " << formatDecimal(tol.interiorEps)
       << "; gap_tol " << formatDecimal(tol.gapTol) << "\n";
    for (size_t c = 0; c < t.columns.size(); ++c) {
        if (c) os << ",";
        os << t.columns[c];
    }
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) os << ",";
            os << row[c];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace conemkt
