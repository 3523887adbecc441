#include "formation/cli.hpp"

#include "formation/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace formation::cli {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what, "schema_error");
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) schema(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema(path, "missing required key \"" + key + "\"");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) schema(path, "expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) schema(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

double opt_number(const json& obj, const std::string& key, double def, const std::string& path) {
    const auto it = obj.find(key);
    return it == obj.end() ? def : number(*it, path + "." + key);
}

std::uint64_t opt_count(const json& obj, const std::string& key, std::uint64_t def, const std::string& path) {
    const auto it = obj.find(key);
    return it == obj.end() ? def : count(*it, path + "." + key);
}

bool opt_bool(const json& obj, const std::string& key, bool def, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_boolean()) schema(path + "." + key, "expected true or false");
    return it->get<bool>();
}

std::string opt_string(const json& obj, const std::string& key, const std::string& def, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_string()) schema(path + "." + key, "expected a string");
    return it->get<std::string>();
}

num::Vector number_array(const json& v, const std::string& path) {
    if (!v.is_array()) schema(path, "expected an array of numbers");
    num::Vector out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// [[x, y], ...] flattened.
num::Vector points(const json& v, std::size_t n, const std::string& path) {
    if (!v.is_array() || v.size() != n)
        schema(path, "expected " + std::to_string(n) + " points");
    num::Vector x;
    for (std::size_t i = 0; i < n; ++i) {
        const num::Vector p = number_array(v[i], path + "[" + std::to_string(i) + "]");
        if (p.size() != 2) schema(path + "[" + std::to_string(i) + "]", "expected [x, y]");
        x.insert(x.end(), p.begin(), p.end());
    }
    return x;
}

// [re, im] pairs or plain reals.
std::vector<ReferenceSpectrum> spectra(const json& v, const std::string& path) {
    if (!v.is_array()) schema(path, "expected an array of spectra");
    std::vector<ReferenceSpectrum> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        ReferenceSpectrum s;
        const json& name = field(v[i], "name", p);
        if (!name.is_string()) schema(p + ".name", "expected a string");
        s.name = name.get<std::string>();
        const std::string kind = opt_string(v[i], "kind", "design", p);
        if (kind != "design" && kind != "ancillary") schema(p + ".kind", "expected \"design\" or \"ancillary\"");
        s.design = kind == "design";
        const json& vals = field(v[i], "values", p);
        if (!vals.is_array()) schema(p + ".values", "expected an array");
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const std::string q = p + ".values[" + std::to_string(k) + "]";
            if (vals[k].is_array()) {
                const num::Vector c = number_array(vals[k], q);
                if (c.size() != 2) schema(q, "expected [re, im]");
                s.values.emplace_back(c[0], c[1]);
            } else {
                s.values.emplace_back(number(vals[k], q), 0.0);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

FormationGraph parse_graph(const json& j) {
    const std::size_t n = count(field(j, "vertices", "graph"), "graph.vertices");
    const json& edges = field(j, "edges", "graph");
    if (!edges.is_array()) schema("graph.edges", "expected an array of [origin, target] pairs");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string p = "graph.edges[" + std::to_string(i) + "]";
        if (!edges[i].is_array() || edges[i].size() != 2) schema(p, "expected [origin, target]");
        pairs.emplace_back(count(edges[i][0], p + "[0]"), count(edges[i][1], p + "[1]"));
    }
    return FormationGraph::from_one_indexed(n, pairs);
}

Experiment parse_experiment(const json& j, std::size_t n, std::size_t m) {
    const std::string p = "experiment";
    const json& t = field(j, "type", p);
    if (!t.is_string()) schema(p + ".type", "expected a string");
    const std::string type = t.get<std::string>();
    Experiment e;
    static const std::pair<const char*, ExperimentType> kTypes[] = {
        {"census", ExperimentType::census},       {"spectrum", ExperimentType::spectrum},
        {"sweep", ExperimentType::sweep},         {"sotomayor", ExperimentType::sotomayor},
        {"simulate", ExperimentType::simulate},   {"rigidity", ExperimentType::rigidity}};
    const auto it = std::find_if(std::begin(kTypes), std::end(kTypes), [&](const auto& kv) { return type == kv.first; });
    if (it == std::end(kTypes))
        schema(p + ".type", "unknown experiment \"" + type + "\" (census, spectrum, sweep, sotomayor, simulate, rigidity)");
    e.type = it->second;

    e.census.n_random = opt_count(j, "n_random", e.census.n_random, p);
    e.census.n_collinear = opt_count(j, "n_collinear", e.census.n_collinear, p);
    e.census.aligned_grid = static_cast<int>(opt_count(j, "aligned_grid", 16, p));
    e.census.dedupe_tol = opt_number(j, "dedupe_tol", e.census.dedupe_tol, p);
    if (j.contains("reference")) e.reference = spectra(j["reference"], p + ".reference");
    e.eps = opt_number(j, "eps", e.eps, p);
    e.samples = static_cast<int>(opt_count(j, "samples", 21, p));
    const std::uint64_t edge = opt_count(j, "edge", 3, p);
    if (edge < 1 || edge > m) schema(p + ".edge", "edge " + std::to_string(edge) + " out of range 1.." + std::to_string(m));
    e.edge = edge - 1;
    e.require_singular = opt_bool(j, "require_singular", true, p);
    if (j.contains("positions")) e.positions = points(j["positions"], n, p + ".positions");
    e.t_end = opt_number(j, "t_end", e.t_end, p);
    e.step = opt_number(j, "step", e.step, p);
    e.sample_every = opt_count(j, "sample_every", e.sample_every, p);
    if (e.eps <= 0.0) schema(p + ".eps", "must be positive");
    if (e.samples < 1) schema(p + ".samples", "must be at least 1");
    if (e.step <= 0.0 || e.t_end < 0.0) schema(p, "simulation needs step > 0 and t_end >= 0");
    if (e.sample_every == 0) schema(p + ".sample_every", "must be positive");
    return e;
}

}  // namespace

std::string_view to_string(ExperimentType t) {
    switch (t) {
        case ExperimentType::census: return "census";
        case ExperimentType::spectrum: return "spectrum";
        case ExperimentType::sweep: return "sweep";
        case ExperimentType::sotomayor: return "sotomayor";
        case ExperimentType::simulate: return "simulate";
        case ExperimentType::rigidity: return "rigidity";
    }
    return "census";
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        const auto colon = what.rfind(": ");
        if (colon != std::string::npos) what = what.substr(colon + 2);
        throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what,
                          "parse_error");
    }
    if (!j.is_object()) schema("scenario", "expected a JSON object");
    const json& fmt = field(j, "format", "scenario");
    if (!fmt.is_string() || fmt.get<std::string>() != kFormat)
        schema("format", std::string("expected \"") + kFormat + "\"");

    FormationGraph graph = parse_graph(field(j, "graph", "scenario"));

    const json& lj = field(j, "lengths", "scenario");
    num::Vector values = number_array(field(lj, "values", "lengths"), "lengths.values");
    if (values.size() != graph.m())
        schema("lengths.values", "expected " + std::to_string(graph.m()) + " entries, got " + std::to_string(values.size()));
    std::vector<std::size_t> order(graph.m());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (lj.contains("order")) {
        const json& o = lj["order"];
        if (!o.is_array() || o.size() != graph.m()) schema("lengths.order", "expected a permutation of 1.." + std::to_string(graph.m()));
        std::vector<bool> seen(graph.m(), false);
        for (std::size_t i = 0; i < o.size(); ++i) {
            const std::uint64_t k = count(o[i], "lengths.order[" + std::to_string(i) + "]");
            if (k < 1 || k > graph.m() || seen[k - 1]) schema("lengths.order", "expected a permutation of 1.." + std::to_string(graph.m()));
            seen[k - 1] = true;
            order[i] = k - 1;
        }
    }
    const std::string units = opt_string(lj, "units", "length", "lengths");
    if (units != "length" && units != "squared") schema("lengths.units", "expected \"length\" or \"squared\"");

    const json& law_j = field(j, "law", "scenario");
    const json& law_name = field(law_j, "name", "law");
    if (!law_name.is_string()) schema("law.name", "expected a string");
    const std::string lname = law_name.get<std::string>();
    const auto parsed = parse_law_name(lname);
    if (!parsed) throw ConfigError("unknown law \"" + lname + "\" (gradient_squared, gradient_plain, eq1_plain)", "unknown_law");
    const double gain = opt_number(law_j, "gain", 1.0, "law");
    if (!(gain > 0.0)) schema("law.gain", "must be positive");
    ControlLaw law = ControlLaw::builtin(*parsed, gain, opt_bool(law_j, "toggle_sign", false, "law"));

    num::Vector sq(graph.m());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw InfeasibleError("target length " + std::to_string(order[i] + 1) + " must be positive and finite");
        sq[order[i]] = units == "squared" ? values[i] : values[i] * values[i];
    }
    TargetLengths lengths = TargetLengths::squared(sq).with_convention(law.convention());
    if (lj.contains("convention")) {
        const std::string c = opt_string(lj, "convention", "", "lengths");
        if (c != "squared" && c != "plain") schema("lengths.convention", "expected \"squared\" or \"plain\"");
        if (c != to_string(law.convention()))
            throw ConfigError("law " + lname + " expects " + std::string(to_string(law.convention())) +
                                  " length errors, scenario declares " + c,
                              "convention_mismatch");
    }

    Experiment exp = parse_experiment(field(j, "experiment", "scenario"), graph.n(), graph.m());
    const std::string name = opt_string(j, "name", "scenario", "scenario");
    const std::uint64_t seed = opt_count(j, "seed", 1, "scenario");
    const std::string output = opt_string(j, "output", "out/" + name, "scenario");
    return Scenario{name, std::move(graph), std::move(values), std::move(order), units == "squared",
                    std::move(lengths), std::move(law), std::move(exp), seed, output};
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario file " + path, "io_error");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace formation::cli
