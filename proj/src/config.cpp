#include "sepmix/config.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sepmix/errors.hpp"
#include "sepmix/format.hpp"

namespace sepmix {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::SchemaError, path + ": " + msg);
}

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) schema(path, "expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) schema(path.empty() ? k : path + "." + k, "unknown key");
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) schema(path, "expected a number");
    return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) schema(path, "expected an integer");
    return j.get<long long>();
}

enum class Ty { Int, Num, Bool, IntList, NumList, NumOrList };

struct Param {
    Ty ty;
    double lo;
    double hi;
};

constexpr double kBig = 1e300;

const std::map<std::string, std::map<std::string, Param>>& param_table() {
    static const std::map<std::string, std::map<std::string, Param>> t = {
        {"env",
         {{"n", {Ty::Int, 2, kBig}},
          {"omega", {Ty::NumList, 0, 1}},
          {"q", {Ty::Int, 1, kBig}},
          {"seeds", {Ty::Int, 1, kBig}},
          {"n_list", {Ty::IntList, 2, kBig}},
          {"eps", {Ty::Num, 0, kBig}}}},
        {"equilibrium",
         {{"n", {Ty::Int, 2, kBig}},
          {"omega", {Ty::NumList, 0, 1}},
          {"k", {Ty::Int, 1, kBig}},
          {"r_max", {Ty::Int, 0, kBig}}}},
        {"exact",
         {{"n", {Ty::Int, 2, 63}},
          {"omega", {Ty::NumList, 0, 1}},
          {"k", {Ty::Int, 1, kBig}},
          {"eps", {Ty::NumOrList, 0, 1}},
          {"q", {Ty::Int, 1, kBig}},
          {"T", {Ty::Num, 0, kBig}},
          {"grid_points", {Ty::Int, 2, 100000}},
          {"horizon", {Ty::Num, 0, kBig}}}},
        {"simulate",
         {{"n", {Ty::Int, 2, kBig}},
          {"omega", {Ty::NumList, 0, 1}},
          {"k", {Ty::Int, 1, kBig}},
          {"horizon", {Ty::Num, 0, kBig}},
          {"replicas", {Ty::Int, 1, kBig}},
          {"x2", {Ty::Int, 2, kBig}},
          {"y2", {Ty::Int, 2, kBig}},
          {"max_events", {Ty::Int, 1, kBig}}}},
        {"flow",
         {{"n", {Ty::Int, 4, kBig}},
          {"omega", {Ty::NumList, 0, 1}},
          {"x2", {Ty::Int, 2, kBig}},
          {"y2", {Ty::Int, 2, kBig}},
          {"horizon", {Ty::Num, 0, kBig}},
          {"replicas", {Ty::Int, 1, kBig}}}},
        {"scaling",
         {{"beta", {Ty::Num, 0, 1}},
          {"n_list", {Ty::IntList, 2, kBig}},
          {"eps", {Ty::Num, 0, 1}},
          {"replicas", {Ty::Int, 1, kBig}},
          {"cap", {Ty::Num, 0, kBig}}}},
    };
    return t;
}

void check_param(const json& v, const std::string& path, const Param& p) {
    auto range_num = [&](double x, const std::string& at) {
        if (!(x >= p.lo && x <= p.hi)) schema(at, "value out of range");
    };
    switch (p.ty) {
        case Ty::Int:
            range_num(static_cast<double>(integer(v, path)), path);
            break;
        case Ty::Num:
            range_num(number(v, path), path);
            break;
        case Ty::Bool:
            if (!v.is_boolean()) schema(path, "expected true or false");
            break;
        case Ty::IntList:
        case Ty::NumList:
        case Ty::NumOrList: {
            if (p.ty == Ty::NumOrList && v.is_number()) {
                range_num(number(v, path), path);
                break;
            }
            if (!v.is_array() || v.empty()) schema(path, "expected a non-empty array");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string at = path + "[" + std::to_string(i) + "]";
                double x = p.ty == Ty::IntList ? static_cast<double>(integer(v[i], at)) : number(v[i], at);
                range_num(x, at);
            }
            break;
        }
    }
}

}  // namespace

LawSpec parse_law(const json& j, const std::string& path) {
    if (!j.is_object()) schema(path, "expected an object");
    if (!j.contains("kind") || !j["kind"].is_string()) schema(path + ".kind", "required string");
    const std::string kind = j["kind"];
    if (!j.contains("alpha")) schema(path + ".alpha", "required");
    const double alpha = number(j["alpha"], path + ".alpha");
    if (!(alpha > 0.0 && alpha < 0.5)) schema(path + ".alpha", "ellipticity requires 0 < alpha < 1/2");
    try {
        if (kind == "two-point") {
            only_keys(j, path, {"kind", "alpha", "p"});
            if (!j.contains("p")) schema(path + ".p", "required");
            const double p = number(j["p"], path + ".p");
            if (!(p > 0.0 && p < 1.0)) schema(path + ".p", "must lie in (0,1)");
            return LawSpec::two_point(alpha, p);
        }
        if (kind == "finite-discrete") {
            only_keys(j, path, {"kind", "alpha", "values", "weights"});
            for (const char* key : {"values", "weights"})
                if (!j.contains(key) || !j[key].is_array()) schema(path + "." + key, "required array");
            std::vector<double> v, w;
            for (std::size_t i = 0; i < j["values"].size(); ++i)
                v.push_back(number(j["values"][i], path + ".values[" + std::to_string(i) + "]"));
            for (std::size_t i = 0; i < j["weights"].size(); ++i)
                w.push_back(number(j["weights"][i], path + ".weights[" + std::to_string(i) + "]"));
            return LawSpec::finite_discrete(alpha, v, w);
        }
        if (kind == "quantile-table") {
            only_keys(j, path, {"kind", "alpha", "grid"});
            if (!j.contains("grid") || !j["grid"].is_array()) schema(path + ".grid", "required array");
            std::vector<std::pair<double, double>> g;
            for (std::size_t i = 0; i < j["grid"].size(); ++i) {
                const auto& e = j["grid"][i];
                const std::string at = path + ".grid[" + std::to_string(i) + "]";
                if (!e.is_array() || e.size() != 2) schema(at, "expected [u, value]");
                g.push_back({number(e[0], at), number(e[1], at)});
            }
            return LawSpec::quantile_table(alpha, g);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidLaw) schema(path, e.what());
        throw;
    }
    schema(path + ".kind", "expected two-point, finite-discrete or quantile-table");
}

RunConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        schema("<root>", "JSON syntax error near line " + std::to_string(line) + ": " + e.what());
    }
    only_keys(j, "", {"law", "experiment", "seed", "output", "format"});
    RunConfig cfg;
    if (!j.contains("law")) schema("law", "required");
    cfg.law = parse_law(j["law"], "law");
    if (!j.contains("experiment")) schema("experiment", "required");
    const auto& ex = j["experiment"];
    if (!ex.is_object()) schema("experiment", "expected an object");
    if (!ex.contains("kind") || !ex["kind"].is_string()) schema("experiment.kind", "required string");
    cfg.kind = ex["kind"];
    const auto& table = param_table();
    auto it = table.find(cfg.kind);
    if (it == table.end()) schema("experiment.kind", "unknown experiment kind '" + cfg.kind + "'");
    for (const auto& [key, val] : ex.items()) {
        if (key == "kind") continue;
        auto p = it->second.find(key);
        if (p == it->second.end()) schema("experiment." + key, "unknown key");
        check_param(val, "experiment." + key, p->second);
        cfg.experiment[key] = val;
    }
    if (!cfg.experiment.is_object()) cfg.experiment = json::object();
    if (cfg.experiment.contains("omega")) {
        const auto& om = cfg.experiment["omega"];
        const double a = cfg.law->alpha();
        if (om.size() < 2) schema("experiment.omega", "needs at least two sites");
        for (std::size_t i = 0; i < om.size(); ++i) {
            double w = om[i].get<double>();
            if (!(w >= a - 1e-15 && w <= 1.0 - a + 1e-15))
                schema("experiment.omega[" + std::to_string(i) + "]", "outside [alpha, 1-alpha]");
        }
        if (cfg.experiment.contains("n") && cfg.experiment["n"].get<std::size_t>() != om.size())
            schema("experiment.n", "does not match the length of omega");
    }
    if (j.contains("seed")) {
        const auto& s = j["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            schema("seed", "expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) schema("output", "expected a string");
        cfg.output = j["output"].get<std::string>();
    }
    if (j.contains("format")) {
        if (!j["format"].is_string() || (j["format"] != "csv" && j["format"] != "json"))
            schema("format", "expected \"csv\" or \"json\"");
        cfg.format = j["format"].get<std::string>();
    }
    cfg.raw = j;
    return cfg;
}

Environment RunConfig::environment() const {
    if (experiment.contains("omega")) {
        auto env = make_env(experiment["omega"].get<std::vector<double>>(), law->alpha());
        env.law = *law;
        env.seed = seed;
        return env;
    }
    if (!experiment.contains("n")) schema("experiment.n", "required when omega is absent");
    return sample_env(*law, experiment["n"].get<int>(), seed);
}

std::string RunConfig::config_hash() const {
    json canon = raw;
    canon["seed"] = seed;
    return hex64(fnv1a(canon.dump()));
}

}  // namespace sepmix
