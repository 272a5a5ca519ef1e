#include "extraction/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "extraction/errors.hpp"

namespace extraction::config {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"model", {"a", "b", "sigma", "rho", "c", "alpha"}},
        {"quadrature", {"rel_tol", "abs_tol", "max_subdivisions", "split_point"}},
        {"boundary", {"nodes_per_octave", "min_offset", "rel_tol"}},
        {"grid", {"x_lo", "x_hi", "nx", "y_max", "ny", "tol", "max_sweeps"}},
        {"sim",
         {"h", "horizon", "n_paths", "seed", "threads", "policy", "shift", "x", "y", "dominance", "shifts",
          "bridge_correction", "reflection_correction", "trace", "trace_stride"}},
        {"sweep", {"parameter", "values"}},
        {"verify", {"samples", "seed"}},
        {"output", {"dir", "format"}},
    };
    return s;
}

std::string trimmed(std::string s) {
    boost::algorithm::trim(s);
    return s;
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trimmed(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const std::string t = trimmed(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("config: '" + key + "' is not an integer: '" + text + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trimmed(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("config: '" + key + "' is not a non-negative integer: '" + text + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trimmed(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("config: '" + key + "' is not a boolean: '" + text + "'");
}

sim::Policy to_policy(const std::string& text, double shift) {
    const std::string t = trimmed(text);
    if (t == "optimal") return {sim::PolicyKind::OptimalOU, 0.0};  // resolved against the branch later
    if (t == "shifted") return sim::Policy::shifted(shift);
    if (t == "no-extraction") return {sim::PolicyKind::NoExtraction, 0.0};
    if (t == "immediate-depletion") return {sim::PolicyKind::ImmediateDepletion, 0.0};
    throw ConfigError("config: sim.policy must be optimal | shifted | no-extraction | immediate-depletion");
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, [](char ch) { return ch == ',' || ch == ' ' || ch == '\t'; });
    std::vector<double> out;
    for (const auto& p : parts) {
        if (trimmed(p).empty()) continue;
        out.push_back(to_double("list", p));
    }
    return out;
}

void RunConfig::validate() const {
    model.validate();
    try {
        quadrature.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (boundary.nodes_per_octave < 1 || !(boundary.min_offset > 0.0 && boundary.min_offset < 1.0) ||
        !(boundary.rel_tol > 0.0))
        throw ConfigError("config: boundary.nodes_per_octave >= 1, 0 < min_offset < 1, rel_tol > 0 required");
    sim.sim.validate();
    if (sim.trace_stride < 1) throw ConfigError("config: sim.trace_stride must be >= 1");
    if (!(sim.y >= 0.0)) throw ConfigError("config: sim.y must be >= 0");
    if (sweep.parameter != "a" && sweep.parameter != "sigma" && sweep.parameter != "b")
        throw ConfigError("config: sweep.parameter must be a, sigma or b");
    if (sweep.values.empty()) throw ConfigError("config: sweep.values must not be empty");
    if (verify.samples < 1) throw ConfigError("config: verify.samples must be >= 1");
    if (output.format != "csv" && output.format != "json")
        throw ConfigError("config: output.format must be csv or json");
    if (output.dir.empty()) throw ConfigError("config: output.dir must not be empty");
}

RunConfig parse_config(std::istream& in) {
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto& sch = schema();
    for (const auto& [section, body] : tree) {
        const auto it = sch.find(section);
        if (it == sch.end()) {
            if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, _] : body)
            if (!it->second.count(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
    }

    RunConfig cfg;
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(ptree::path_type(path, '.'))) return *v;
        return std::nullopt;
    };
    auto num = [&](const std::string& path, double& dst) {
        if (auto v = get(path)) dst = to_double(path, *v);
    };
    auto integer = [&](const std::string& path, auto& dst) {
        if (auto v = get(path)) dst = static_cast<std::decay_t<decltype(dst)>>(to_integer(path, *v));
    };
    auto flag = [&](const std::string& path, bool& dst) {
        if (auto v = get(path)) dst = to_bool(path, *v);
    };

    if (!tree.get_child_optional("model")) throw ConfigError("config: missing [model] section");
    for (const char* key : {"a", "b", "sigma", "rho", "c", "alpha"}) {
        const std::string path = std::string("model.") + key;
        const auto v = get(path);
        if (!v) throw ConfigError("config: missing required key '" + path + "'");
    }
    num("model.a", cfg.model.a);
    num("model.b", cfg.model.b);
    num("model.sigma", cfg.model.sigma);
    num("model.rho", cfg.model.rho);
    num("model.c", cfg.model.c);
    num("model.alpha", cfg.model.alpha);

    num("quadrature.rel_tol", cfg.quadrature.rel_tol);
    num("quadrature.abs_tol", cfg.quadrature.abs_tol);
    integer("quadrature.max_subdivisions", cfg.quadrature.max_subdivisions);
    num("quadrature.split_point", cfg.quadrature.split_point);

    integer("boundary.nodes_per_octave", cfg.boundary.nodes_per_octave);
    num("boundary.min_offset", cfg.boundary.min_offset);
    num("boundary.rel_tol", cfg.boundary.rel_tol);

    if (tree.get_child_optional("grid")) {
        oracle::GridSpec g;
        const bool has_range = get("grid.x_lo") || get("grid.x_hi");
        if (has_range && !(get("grid.x_lo") && get("grid.x_hi")))
            throw ConfigError("config: grid.x_lo and grid.x_hi must be given together");
        g.x_lo = g.x_hi = 0.0;
        num("grid.x_lo", g.x_lo);
        num("grid.x_hi", g.x_hi);
        integer("grid.nx", g.nx);
        num("grid.y_max", g.y_max);
        integer("grid.ny", g.ny);
        num("grid.tol", g.tol);
        integer("grid.max_sweeps", g.max_sweeps);
        cfg.grid = g;  // x_lo == x_hi == 0 marks "use the default range"
    }

    auto& s = cfg.sim;
    num("sim.h", s.sim.h);
    num("sim.horizon", s.sim.horizon);
    if (auto v = get("sim.n_paths")) {
        const auto n = to_integer("sim.n_paths", *v);
        if (n < 1) throw ConfigError("config: sim.n_paths must be >= 1");
        s.sim.n_paths = static_cast<std::size_t>(n);
    }
    if (auto v = get("sim.seed")) s.sim.base_seed = to_unsigned("sim.seed", *v);
    if (auto v = get("sim.threads")) {
        const auto n = to_integer("sim.threads", *v);
        if (n < 1) throw ConfigError("config: sim.threads must be >= 1");
        s.sim.threads = static_cast<unsigned>(n);
    }
    double shift = 0.0;
    num("sim.shift", shift);
    if (auto v = get("sim.policy")) s.sim.policy = to_policy(*v, shift);
    num("sim.x", s.x);
    num("sim.y", s.y);
    flag("sim.dominance", s.dominance);
    if (auto v = get("sim.shifts")) s.shifts = parse_list(*v);
    flag("sim.bridge_correction", s.sim.bridge_correction);
    flag("sim.reflection_correction", s.sim.reflection_correction);
    flag("sim.trace", s.trace);
    integer("sim.trace_stride", s.trace_stride);

    if (auto v = get("sweep.parameter")) cfg.sweep.parameter = trimmed(*v);
    if (auto v = get("sweep.values")) cfg.sweep.values = parse_list(*v);

    if (auto v = get("verify.samples")) {
        const auto n = to_integer("verify.samples", *v);
        if (n < 1) throw ConfigError("config: verify.samples must be >= 1");
        cfg.verify.samples = static_cast<std::size_t>(n);
    }
    if (auto v = get("verify.seed")) cfg.verify.seed = to_unsigned("verify.seed", *v);

    if (auto v = get("output.dir")) cfg.output.dir = trimmed(*v);
    if (auto v = get("output.format")) cfg.output.format = trimmed(*v);

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in);
}

void apply_environment(RunConfig& cfg) {
    if (const char* dir = std::getenv("EXTRACT_OUT_DIR"); dir && *dir) cfg.output.dir = dir;
    if (const char* seed = std::getenv("EXTRACT_SEED"); seed && *seed)
        cfg.sim.sim.base_seed = to_unsigned("EXTRACT_SEED", seed);
}

std::string default_config_text() {
    return R"([model]
# required: the six market constants
a = 0.4
b = 1
sigma = 0.8
rho = 0.375
c = 0.3
alpha = 0.25

[quadrature]
rel_tol = 1e-10
abs_tol = 1e-300
max_subdivisions = 400
split_point = 1.0

[boundary]
nodes_per_octave = 32
min_offset = 1e-6
rel_tol = 1e-12

[grid]
# x_lo/x_hi omitted: about 1.1 beyond [x_inf, x0] (1.4 around x_star)
nx = 400
y_max = 3
ny = 60
tol = 1e-12
max_sweeps = 1000

[sim]
h = 0.001
# 0 selects 10/rho
horizon = 0
n_paths = 10000
seed = 20240601
threads = 1
# optimal | shifted | no-extraction | immediate-depletion
policy = optimal
shift = 0
x = 0.5
y = 1
dominance = false
# empty: +-5% of x0 - x_inf (x_star - c on the Brownian branch)
shifts =
bridge_correction = true
reflection_correction = true
trace = false
trace_stride = 100

[sweep]
# a | sigma | b
parameter = a
values = 0.4, 0.5, 0.6, 0.7

[verify]
samples = 500
seed = 17

[output]
dir = out
# csv | json
format = csv
)";
}

}  // namespace extraction::config
