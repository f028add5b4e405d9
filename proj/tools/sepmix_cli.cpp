#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sepmix/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sepmix: exclusion process in a random environment"};
    std::string module, verb, config;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    app.add_option("module", module, "env | equilibrium | exact | simulate | flow | scaling")->required();
    app.add_option("verb", verb, "subcommand of the module")->required();
    app.add_option("--config", config, "JSON configuration file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
    auto* out_opt = app.add_option("--out", out, "output path (default: config output, else stdout)");
    app.add_option("--threads", threads, "worker threads (default: SEPMIX_THREADS, else 1)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::ifstream in(config);
    if (!in) {
        std::cerr << "error: cannot read config " << config << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    sepmix::RunOptions opt;
    opt.module = module;
    opt.verb = verb;
    if (seed_opt->count()) opt.seed = seed;
    if (out_opt->count()) opt.out = out;
    opt.threads = threads;
    return sepmix::run(buf.str(), opt, std::cout, std::cerr);
}
