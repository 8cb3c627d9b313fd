#include "traplab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace traplab {

bool ConfigData::has(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigData::get(const std::string& sec, const std::string& key,
                            const std::string& fallback) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

std::string ConfigData::require(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw config_error("config: missing required key " + sec + "." + key);
    return sections.at(sec).at(key);
}

double ConfigData::get_num(const std::string& sec, const std::string& key,
                           double fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string& s = sections.at(sec).at(key);
    if (s == "inf") return kInf;
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw config_error("config: " + sec + "." + key + " is not a number: '" + s + "'");
    }
}

long ConfigData::get_int(const std::string& sec, const std::string& key, long fallback) const {
    if (!has(sec, key)) return fallback;
    double v = get_num(sec, key, 0.0);
    long l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
        throw config_error("config: " + sec + "." + key + " must be an integer");
    return l;
}

bool ConfigData::get_bool(const std::string& sec, const std::string& key, bool fallback) const {
    if (!has(sec, key)) return fallback;
    std::string s = sections.at(sec).at(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("config: " + sec + "." + key + " must be a boolean");
}

std::vector<double> ConfigData::get_list(const std::string& sec, const std::string& key) const {
    std::vector<double> out;
    if (!has(sec, key)) return out;
    std::stringstream ss(sections.at(sec).at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::string ConfigData::canonical_text() const {
    std::ostringstream os;
    for (const auto& [sec, kv] : sections) {
        os << "[" << sec << "]\n";
        for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    }
    return os.str();
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

ConfigData parse_config_text(const std::string& text) {
    ConfigData cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty section name");
            cfg.sections[section];
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw config_error("config line " + std::to_string(lineno) + ": key outside a section");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.sections[section].count(key))
            throw config_error("config: duplicate key " + section + "." + key);
        cfg.sections[section][key] = val;
    }
    return cfg;
}

ConfigData parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(ss.str());
        } catch (const std::exception& e) {
            throw config_error(std::string("config json: ") + e.what());
        }
        if (!j.is_object()) throw config_error("config json: top level must be an object");
        ConfigData cfg;
        for (auto& [sec, body] : j.items()) {
            if (!body.is_object())
                throw config_error("config json: section '" + sec + "' must be an object");
            for (auto& [k, v] : body.items()) {
                std::string sv;
                if (v.is_string()) sv = v.get<std::string>();
                else if (v.is_boolean()) sv = v.get<bool>() ? "true" : "false";
                else if (v.is_number_integer()) sv = std::to_string(v.get<long long>());
                else if (v.is_number()) {
                    std::ostringstream os;
                    os.precision(17);
                    os << v.get<double>();
                    sv = os.str();
                } else if (v.is_array()) {
                    std::ostringstream os;
                    os.precision(17);
                    bool first = true;
                    for (auto& e : v) {
                        if (!first) os << ",";
                        os << e.get<double>();
                        first = false;
                    }
                    sv = os.str();
                } else {
                    throw config_error("config json: unsupported value at " + sec + "." + k);
                }
                cfg.sections[sec][k] = sv;
            }
        }
        return cfg;
    }
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

namespace {

struct SchemaKey {
    const char* section;
    const char* key;
};

// every key the parser understands; anything else is rejected
const SchemaKey kSchema[] = {
    {"run", "problem"},     {"run", "seed"},          {"run", "threads"},
    {"grid", "d"},          {"grid", "R"},            {"grid", "n"},
    {"grid", "bc"},
    {"trap", "kind"},       {"trap", "p"},            {"trap", "R_wall"},
    {"trap", "offset"},     {"trap", "cap"},          {"trap", "table_r"},
    {"trap", "table_w"},
    {"pair", "kind"},       {"pair", "c"},            {"pair", "sigma"},
    {"pair", "R0"},         {"pair", "gamma"},        {"pair", "M"},
    {"pair", "a"},          {"pair", "cap"},
    {"gp", "alpha"},        {"gp", "tol"},            {"gp", "max_iter"},
    {"hartree", "N"},       {"hartree", "mode"},      {"hartree", "lambda"},
    {"hartree", "tol"},     {"hartree", "max_sweeps"},{"hartree", "multistarts"},
    {"canonical", "N"},     {"canonical", "tol"},     {"canonical", "max_dims"},
    {"scattering", "d"},    {"scattering", "R_max"},  {"scattering", "R_star"},
    {"scattering", "R"},    {"scattering", "run_inequality"},
    {"mc", "beta"},         {"mc", "dt"},             {"mc", "dt_max"},
    {"mc", "steps"},        {"mc", "chains"},         {"mc", "model"},
    {"mc", "thermo"},       {"mc", "gauss_order"},    {"mc", "start"},
    {"mc", "start_half_width"}, {"mc", "N"},
    {"dirac", "p"},         {"dirac", "lambda"},      {"dirac", "beta"},
    {"dirac", "N"},         {"dirac", "steps"},       {"dirac", "chains"},
    {"sweep", "N_list"},    {"sweep", "beta_list"},   {"sweep", "lambda_list"},
    {"sweep", "model"},     {"sweep", "thermo"},      {"sweep", "steps"},
    {"sweep", "chains"},    {"sweep", "dt"},
    {"inequalities", "energies"}, {"inequalities", "scattering"},
};

bool schema_has(const std::string& sec, const std::string& key) {
    for (const auto& e : kSchema)
        if (sec == e.section && key == e.key) return true;
    return false;
}

}  // namespace

const std::vector<std::string>& known_problems() {
    static const std::vector<std::string> p = {
        "gp",           "hartree",      "canonical",    "scattering",
        "mc-canonical", "mc-hartree",   "rw-dirac",     "sweep-large-n",
        "sweep-beta",   "sweep-lambda", "report-inequalities"};
    return p;
}

std::vector<Diagnostic> validate_config(const ConfigData& cfg, const std::string& problem) {
    std::vector<Diagnostic> diags;
    auto bad = [&](const std::string& where, const std::string& msg) {
        diags.push_back({where, msg});
    };

    if (std::find(known_problems().begin(), known_problems().end(), problem) ==
        known_problems().end())
        bad("problem", "unknown problem '" + problem + "'");

    for (const auto& [sec, kv] : cfg.sections)
        for (const auto& [k, v] : kv)
            if (!schema_has(sec, k)) bad(sec + "." + k, "unknown key (schema is closed)");

    if (cfg.has("run", "problem") && cfg.get("run", "problem", "") != problem)
        bad("run.problem", "config problem does not match the subcommand");

    auto need_section = [&](const std::string& sec) {
        if (!cfg.sections.count(sec)) bad(sec, "missing section required by '" + problem + "'");
    };

    bool needs_grid = problem != "scattering" && problem != "rw-dirac";
    if (needs_grid) need_section("grid");
    if (problem != "scattering" && problem != "rw-dirac" && problem != "sweep-lambda")
        need_section("trap");
    if (problem == "scattering" || problem == "canonical" || problem == "sweep-large-n" ||
        problem == "report-inequalities")
        need_section("pair");
    if (problem == "gp") need_section("gp");
    if (problem == "hartree") need_section("hartree");
    if (problem == "rw-dirac" || problem == "sweep-lambda") need_section("dirac");
    if (problem == "mc-canonical" || problem == "mc-hartree") need_section("mc");
    if (problem.rfind("sweep-", 0) == 0) need_section("sweep");

    if (!diags.empty()) return diags;

    // value-level checks
    try {
        if (needs_grid) grid_from_config(cfg);
    } catch (const Error& e) {
        bad("grid", e.what());
    }
    try {
        if (cfg.sections.count("trap")) trap_from_config(cfg);
    } catch (const Error& e) {
        bad("trap", e.what());
    }
    try {
        if (cfg.sections.count("pair")) pair_from_config(cfg);
    } catch (const Error& e) {
        bad("pair", e.what());
    }

    if (problem == "rw-dirac" || problem == "sweep-lambda") {
        double p = cfg.get_num("dirac", "p", 2.0);
        long d = cfg.get_int("grid", "d", 2);
        if (!(p > d - 2))
            bad("dirac.p", "Theorem 1.12 hypothesis requires p > d - 2 (got p = " +
                               std::to_string(p) + ", d = " + std::to_string(d) + ")");
    }
    if (problem == "mc-canonical" || problem == "mc-hartree") {
        double dt = cfg.get_num("mc", "dt", 0.02);
        double dt_max = cfg.get_num("mc", "dt_max", 0.05);
        if (dt > dt_max) bad("mc.dt", "dt exceeds dt_max; the potentials are unresolved");
        double beta = cfg.get_num("mc", "beta", 1.0);
        if (std::abs(std::llround(beta / dt) * dt - beta) > 1e-9 * beta)
            bad("mc.dt", "dt must divide beta");
    }
    if (cfg.has("grid", "bc")) {
        std::string bc = cfg.get("grid", "bc", "dirichlet");
        if (bc != "dirichlet" && bc != "periodic") bad("grid.bc", "bc must be dirichlet|periodic");
    }
    return diags;
}

Grid grid_from_config(const ConfigData& cfg) {
    int d = static_cast<int>(cfg.get_int("grid", "d", 2));
    double R = cfg.get_num("grid", "R", 8.0);
    int n = static_cast<int>(cfg.get_int("grid", "n", 64));
    Bc bc = cfg.get("grid", "bc", "dirichlet") == "periodic" ? Bc::periodic : Bc::dirichlet;
    return Grid(d, R, n, bc);
}

TrapPotential trap_from_config(const ConfigData& cfg) {
    std::string kind = cfg.get("trap", "kind", "power");
    double offset = cfg.get_num("trap", "offset", 0.0);
    TrapPotential W = TrapPotential::power(2.0);
    if (kind == "power") {
        W = TrapPotential::power(cfg.get_num("trap", "p", 2.0), offset);
    } else if (kind == "hard-box") {
        W = TrapPotential::hard_box(cfg.get_num("trap", "R_wall", 1.0), offset);
    } else if (kind == "tabulated") {
        W = TrapPotential::tabulated(cfg.get_list("trap", "table_r"),
                                     cfg.get_list("trap", "table_w"), offset);
    } else {
        throw config_error("trap.kind must be power|hard-box|tabulated");
    }
    double cap = cfg.get_num("trap", "cap", kInf);
    if (cap < kInf) W = W.capped(cap);
    W.validate();
    return W;
}

PairPotential pair_from_config(const ConfigData& cfg) {
    std::string kind = cfg.get("pair", "kind", "zero");
    PairPotential v = PairPotential::zero();
    if (kind == "zero") {
        v = PairPotential::zero();
    } else if (kind == "gaussian") {
        v = PairPotential::gaussian(cfg.get_num("pair", "c", 1.0),
                                    cfg.get_num("pair", "sigma", 1.0));
    } else if (kind == "square-well") {
        v = PairPotential::square_well(cfg.get_num("pair", "c", 1.0),
                                       cfg.get_num("pair", "R0", 1.0));
    } else if (kind == "inverse-power") {
        v = PairPotential::inverse_power(cfg.get_num("pair", "c", 1.0),
                                         cfg.get_num("pair", "gamma", 1.0));
    } else if (kind == "capped-hard-core") {
        v = PairPotential::capped_hard_core(cfg.get_num("pair", "M", kInf),
                                            cfg.get_num("pair", "a", 0.5));
    } else {
        throw config_error("pair.kind must be zero|gaussian|square-well|inverse-power|capped-hard-core");
    }
    double cap = cfg.get_num("pair", "cap", kInf);
    if (cap < kInf) v = v.capped(cap);
    return v;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace traplab
