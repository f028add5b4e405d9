#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sepmix/run.hpp"

using namespace sepmix;

namespace {

struct Out {
    int code;
    std::string out;
    std::string err;
};

Out go(const std::string& cfg, const std::string& module, const std::string& verb,
       std::optional<std::uint64_t> seed = std::nullopt) {
    std::ostringstream o, e;
    RunOptions opt{module, verb, seed, std::nullopt, 1};
    int code = run(cfg, opt, o, e);
    return {code, o.str(), e.str()};
}

const char* kLaw = R"("law": {"kind": "two-point", "alpha": 0.25, "p": 0.3})";

std::string cfg(const std::string& experiment, const std::string& extra = "") {
    return std::string("{") + kLaw + R"(, "seed": 7, "experiment": )" + experiment + extra + "}";
}

}  // namespace

TEST_CASE("env dump writes the hash line and header") {
    auto r = go(cfg(R"({"kind": "env", "n": 10})"), "env", "dump");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("# config_hash=", 0) == 0);
    CHECK(r.out.find("version=sepmix 0.1.0") != std::string::npos);
    CHECK(r.out.find("site,omega,v,v_bar") != std::string::npos);
    auto again = go(cfg(R"({"kind": "env", "n": 10})"), "env", "dump");
    CHECK(again.out == r.out);
    auto other = go(cfg(R"({"kind": "env", "n": 10})"), "env", "dump", 8);
    CHECK(other.out != r.out);
}

TEST_CASE("unknown keys fail with their path") {
    auto r = go(cfg(R"({"kind": "env", "n": 10, "bogus": 1})"), "env", "dump");
    CHECK(r.code == 1);
    CHECK(r.err.find("experiment.bogus") != std::string::npos);
    auto top = go(cfg(R"({"kind": "env", "n": 10})", R"(, "colour": "red")"), "env", "dump");
    CHECK(top.code == 1);
    CHECK(top.err.find("colour") != std::string::npos);
    auto law = go(R"({"law": {"kind": "two-point", "alpha": 0.7, "p": 0.3}, "experiment": {"kind": "env", "n": 5}})",
                  "env", "dump");
    CHECK(law.code == 1);
    CHECK(law.err.find("law.alpha") != std::string::npos);
    auto p = go(R"({"law": {"kind": "two-point", "alpha": 0.25, "p": 1.2}, "experiment": {"kind": "env", "n": 5}})",
                "env", "dump");
    CHECK(p.code == 1);
    CHECK(p.err.find("law.p") != std::string::npos);
    auto minimal = go(R"({"law": {"kind": "two-point", "alpha": 0.25, "p": 0.3}, "experiment": {"kind": "env", "n": 5}})",
                      "env", "dump");
    CHECK(minimal.code == 0);
    auto syntax = go("{\n\"law\": ,\n}", "env", "dump");
    CHECK(syntax.code == 1);
    CHECK(syntax.err.find("line 2") != std::string::npos);
}

TEST_CASE("module must match the experiment kind") {
    auto r = go(cfg(R"({"kind": "env", "n": 10})"), "exact", "gap");
    CHECK(r.code == 1);
}

TEST_CASE("exact subcommands") {
    const std::string c = cfg(R"({"kind": "exact", "omega": [0.25, 0.75, 0.25, 0.75, 0.25, 0.75], "k": 2, "eps": [0.25, 0.1]})");
    auto gap = go(c, "exact", "gap");
    CHECK(gap.code == 0);
    CHECK(gap.out.find("\"gap\"") != std::string::npos);
    auto tm = go(c, "exact", "tmix");
    CHECK(tm.code == 0);
    CHECK(tm.out.find("\"sandwich_holds\": true") != std::string::npos);
    auto paths = go(c, "exact", "paths");
    CHECK(paths.code == 0);
    auto cc = go(cfg(R"({"kind": "exact", "n": 8, "k": 2, "q": 1, "T": 5})"), "exact", "censor-check");
    CHECK(cc.code == 0);
    CHECK(cc.out.find("\"violations\": 0") != std::string::npos);
}

TEST_CASE("equilibrium, simulate, flow and scaling run") {
    auto eq = go(cfg(R"({"kind": "equilibrium", "n": 20, "k": 5, "r_max": 3})"), "equilibrium", "report");
    CHECK(eq.code == 0);
    auto sim = go(cfg(R"({"kind": "simulate", "n": 20, "k": 5, "replicas": 2, "horizon": 50})"), "simulate", "couple");
    CHECK(sim.code == 0);
    CHECK(sim.out.find("replica,event_index,time,site,mark_applied,moved") != std::string::npos);
    auto hit = go(cfg(R"({"kind": "simulate", "n": 20, "k": 5, "replicas": 1, "horizon": 50})", R"(, "format": "json")"),
                  "simulate", "hit");
    CHECK(hit.code == 0);
    auto fl = go(cfg(R"({"kind": "flow", "n": 64, "replicas": 4, "horizon": 200})"), "flow", "stationary");
    CHECK(fl.code == 0);
    CHECK(fl.out.find("flow_exact") != std::string::npos);
    auto sc = go(R"({"law": {"kind": "finite-discrete", "alpha": 0.2, "values": [0.6, 0.8], "weights": [0.5, 0.5]},
                    "seed": 3, "experiment": {"kind": "scaling", "beta": 0.5, "n_list": [16, 32], "replicas": 20}})",
                 "scaling", "run");
    CHECK(sc.code == 0);
    CHECK(sc.out.find("# slope=") != std::string::npos);
}

TEST_CASE("output file is written atomically and the binary runs") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "sepmix_cli_test";
    fs::create_directories(dir);
    auto cfg_path = dir / "c.json";
    std::ofstream(cfg_path) << cfg(R"({"kind": "env", "n": 12})");
    auto out_path = dir / "o.csv";
    fs::remove(out_path);
    std::string cmd = std::string(SEPMIX_CLI_PATH) + " env traps --config " + cfg_path.string() + " --out " +
                      out_path.string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(out_path));
    CHECK_FALSE(fs::exists(out_path.string() + ".tmp"));
    std::string bad = std::string(SEPMIX_CLI_PATH) + " env traps > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
}

TEST_CASE("exact gap on the two-site fixture") {
    auto r = go(cfg(R"({"kind": "exact", "omega": [0.3, 0.7], "k": 1})"), "exact", "gap");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["gap"].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("scaling rows past the cap are censored with exit 0") {
    auto r = go(cfg(R"({"kind": "scaling", "beta": 0, "n_list": [64, 128], "replicas": 20, "cap": 1})"), "scaling",
                "run");
    CHECK(r.code == 0);
    CHECK(r.out.find(",1\n") != std::string::npos);
}
