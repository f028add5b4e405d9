#include "sepmix/run.hpp"

#include <cmath>
#include <sstream>

#include "sepmix/dynamics.hpp"
#include "sepmix/equilibrium.hpp"
#include "sepmix/errors.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/format.hpp"
#include "sepmix/parallel.hpp"
#include "sepmix/rng.hpp"

namespace sepmix {

using nlohmann::json;

namespace {

json num(double v) {
    // JSON has no inf or nan; keep them readable as strings
    if (std::isfinite(v)) return v;
    return fmt_double(v);
}

json header(const RunConfig& cfg) {
    json j;
    j["config_hash"] = cfg.config_hash();
    j["version"] = kVersion;
    return j;
}

std::string instance_hash(const RunConfig& cfg, int n, int k) {
    json id;
    id["law"] = cfg.raw["law"];
    id["n"] = n;
    id["k"] = k;
    id["seed"] = cfg.seed;
    if (cfg.has("omega")) id["omega"] = cfg.experiment["omega"];
    return hex64(fnv1a(id.dump()));
}

int require_k(const RunConfig& cfg, int n) {
    if (!cfg.has("k")) throw Error(ErrorKind::SchemaError, "experiment.k: required");
    int k = cfg.get<int>("k", 1);
    if (k > n - 1) throw Error(ErrorKind::BadK, "experiment.k must be at most n-1");
    return k;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RunResult env_cmd(const RunConfig& cfg, const std::string& verb) {
    const std::string h = cfg.config_hash();
    if (verb == "dump") {
        auto env = cfg.environment();
        auto prof = potential(env);
        CsvWriter w(h, {"site", "omega", "v", "v_bar"});
        for (int x = 1; x <= env.n; ++x) {
            w.cell(x).cell(env.at(x)).cell(prof.V(x)).cell(prof.v_bar[static_cast<std::size_t>(x - 1)]);
            w.end_row();
        }
        return {w.str(), 0, ""};
    }
    if (verb == "traps") {
        auto env = cfg.environment();
        auto prof = potential(env);
        auto trap = deepest_trap(prof);
        long q = cfg.has("q") ? cfg.get<long>("q", 1) : q_n(cfg.law_spec(), env.n);
        double gain = q < env.n ? constrained_max_gain(prof, static_cast<int>(q)) : std::nan("");
        CsvWriter w(h, {"x", "y", "depth", "constrained_gain_at_qN"});
        w.cell(trap.x).cell(trap.y).cell(trap.depth).cell(gain);
        w.end_row();
        return {w.str(), 0, ""};
    }
    if (verb == "stats") {
        std::vector<int> ns = cfg.has("n_list") ? cfg.experiment["n_list"].get<std::vector<int>>()
                                                : std::vector<int>{cfg.get<int>("n", 1024)};
        const int count = cfg.get<int>("seeds", 200);
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < count; ++i) seeds.push_back(hash_key(cfg.seed, Stream::Instance, static_cast<std::uint64_t>(i)));
        CsvWriter w(h, {"n", "seeds", "lambda", "q", "median_centered", "q10_centered", "q90_centered",
                        "frac_in_window", "frac_in_sym_window", "frac_short_trap", "frac_event_A"});
        for (int n : ns) {
            auto t = trap_depth_window_stats(cfg.law_spec(), n, seeds, cfg.get<double>("eps", 1.0));
            w.cell(n).cell(count).cell(t.lambda).cell(static_cast<long long>(t.q)).cell(t.median_centered);
            w.cell(t.q10_centered).cell(t.q90_centered).cell(t.frac_in_window).cell(t.frac_in_sym_window);
            w.cell(t.frac_short_trap).cell(t.frac_event_A);
            w.end_row();
        }
        return {w.str(), 0, ""};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown verb for env: " + verb);
}

RunResult equilibrium_cmd(const RunConfig& cfg, const std::string& verb) {
    if (verb != "report") throw Error(ErrorKind::InvalidArgument, "unknown verb for equilibrium: " + verb);
    auto env = cfg.environment();
    const int k = require_k(cfg, env.n);
    auto prof = potential(env);
    auto t = EquilibriumTable::build(prof, k);
    const int r_max = cfg.get<int>("r_max", env.n);
    json j = header(cfg);
    j["n"] = env.n;
    j["k"] = k;
    j["Z_log"] = t.log_z();
    j["prob_max"] = t.prob(extremal(env.n, k).second);
    json ar = json::array();
    for (int r = 0; r <= r_max; ++r) ar.push_back(t.prob_A_r(r));
    j["prob_A_r"] = ar;
    auto [mean, var] = t.mean_var_m();
    j["mean_m"] = mean;
    j["var_m"] = var;
    j["var_bound"] = static_cast<double>(env.n) * env.n * k;
    j["leftmost_law"] = t.leftmost_law();
    j["marginals"] = t.marginals();
    RunResult res{dump(j), 0, ""};
    if (var > static_cast<double>(env.n) * env.n * k) res = {res.content, 2, "variance bound Var[m] <= n^2 k"};
    return res;
}

RunResult exact_cmd(const RunConfig& cfg, const std::string& verb) {
    auto env = cfg.environment();
    const int k = require_k(cfg, env.n);
    auto chain = ExactChain::build(env, k);
    json j = header(cfg);
    j["instance"] = instance_hash(cfg, env.n, k);
    j["n"] = env.n;
    j["k"] = k;
    j["states"] = chain.size();
    j["detailed_balance_residual"] = chain.detailed_balance_residual();
    RunResult res;
    if (verb == "gap") {
        auto spec = spectrum(chain);
        j["gap"] = spec[1];
        j["uniformization_rate"] = chain.uniformization_rate();
        j["pi_min"] = chain.pi_min();
        j["spectrum_head"] = std::vector<double>(spec.begin(), spec.begin() + std::min<std::size_t>(spec.size(), 6));
    } else if (verb == "tmix") {
        std::vector<double> eps;
        if (!cfg.has("eps"))
            eps = {0.25};
        else if (cfg.experiment["eps"].is_number())
            eps = {cfg.experiment["eps"].get<double>()};
        else
            eps = cfg.experiment["eps"].get<std::vector<double>>();
        const double gap = spectral_gap(chain);
        auto tm = t_mix_exact(chain, eps);
        j["gap"] = gap;
        j["pi_min"] = chain.pi_min();
        json rows = json::array();
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double lo = std::log(1.0 / (2.0 * eps[i])) / gap;
            const double hi = std::log(1.0 / (eps[i] * chain.pi_min())) / gap;
            const bool ok = tm[i] >= lo && tm[i] <= hi;
            rows.push_back({{"eps", eps[i]}, {"t_mix", tm[i]}, {"lower", lo}, {"upper", hi}, {"sandwich_holds", ok}});
            if (!ok) res = {"", 2, "gap-mixing sandwich at eps=" + fmt_double(eps[i])};
            if (eps[i] == 0.25 && tm[i] < env.n / 16.0) res = {"", 2, "linear lower bound t_mix(1/4) >= n/16"};
        }
        j["t_mix"] = rows;
    } else if (verb == "paths") {
        auto pb = canonical_path_bound(chain, env);
        const double gap = spectral_gap(chain);
        j["B"] = pb.B;
        j["inverse_B"] = 1.0 / pb.B;
        j["gap"] = gap;
        j["closed_form_bound"] = num(pb.closed_form_bound);
        j["max_path_length"] = pb.max_path_length;
        j["xi_star"] = pb.xi_star.to_string();
        if (gap < (1.0 - 1e-9) / pb.B) res = {"", 2, "flow bound gap >= 1/B"};
        if (pb.B > pb.closed_form_bound) res = {"", 2, "congestion bound B <= closed-form bound"};
    } else if (verb == "censor-check") {
        const int q = cfg.get<int>("q", 1);
        const double T = cfg.get<double>("T", 5.0);
        auto plan = build_sweep_scheme(env.n, k, q, T);
        const double horizon = cfg.get<double>("horizon", plan.horizon);
        const int pts = cfg.get<int>("grid_points", 20);
        std::vector<double> grid;
        for (int i = 1; i <= pts; ++i) grid.push_back(horizon * i / pts);
        auto rep = censoring_inequality_check(chain, plan.scheme, &plan.displacements, grid);
        json rows = json::array();
        for (const auto& r : rep.rows)
            rows.push_back({{"t", r.t}, {"min_uncensored", r.min_uncensored}, {"censored", r.censored},
                            {"displaced", r.displaced}});
        j["q"] = q;
        j["T"] = T;
        j["rows"] = rows;
        j["min_slack"] = rep.min_slack;
        j["violations"] = rep.violations;
        if (rep.violations > 0) res = {"", 2, "censoring inequalities"};
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown verb for exact: " + verb);
    }
    res.content = dump(j);
    return res;
}

std::pair<int, int> trap_window(const RunConfig& cfg, const Environment& env) {
    if (cfg.has("x2") != cfg.has("y2")) throw Error(ErrorKind::SchemaError, "experiment.x2: give both x2 and y2");
    if (cfg.has("x2")) return {cfg.get<int>("x2", 2), cfg.get<int>("y2", 2)};
    auto trap = deepest_trap(potential(env), SiteRange{(env.n + 1) / 2, 3 * env.n / 4});
    return {trap.x, trap.y};
}

RunResult simulate_cmd(const RunConfig& cfg, const std::string& verb, int threads) {
    auto env = cfg.environment();
    const int replicas = cfg.get<int>("replicas", 1);
    const double horizon = cfg.get<double>("horizon", 1e9 / env.n);
    const long long max_events = cfg.get<long long>("max_events", 100000);
    const bool as_json = cfg.format && *cfg.format == "json";
    const std::string h = cfg.config_hash();

    struct Log {
        std::string rows;
        json summary;
        int violations = 0;
    };
    std::vector<Log> logs(static_cast<std::size_t>(replicas));
    auto line = [](std::string& s, std::size_t r, long long i, const RingEvent& ev, int moved) {
        s += std::to_string(r) + "," + std::to_string(i) + "," + fmt_double(ev.time) + "," + std::to_string(ev.site) +
             "," + fmt_double(ev.mark) + "," + std::to_string(moved) + "\n";
    };

    if (verb == "couple" || verb == "hit") {
        const int k = require_k(cfg, env.n);
        auto [lo, hi] = extremal(env.n, k);
        const bool couple = verb == "couple";
        parallel_for(logs.size(), threads, [&](std::size_t r) {
            EventSource src(replica_seed(cfg.seed, r));
            std::vector<Configuration> start{lo};
            if (couple) start.push_back(hi);
            ExclusionFamily fam(env, src, start);
            const int edge = env.n - k;
            int inside = tail_count(lo, edge);
            bool done = couple ? fam.pair_diff() == 0 : inside == k;
            auto& L = logs[r];
            if (!done)
                done = fam.advance(horizon, [&](const RingEvent& ev) {
                    int moved = 0;
                    for (const auto& m : fam.last_moves()) moved += m.from != 0;
                    if (!as_json) line(L.rows, r, fam.rings(), ev, moved);
                    if (couple) {
                        if (!leq(fam.copies()[0], fam.copies()[1])) ++L.violations;
                        return fam.pair_diff() == 0 || fam.rings() >= max_events;
                    }
                    const Move& m = fam.last_moves()[0];
                    if (m.from == edge && m.to == edge + 1) ++inside;
                    if (m.from == edge + 1 && m.to == edge) --inside;
                    return inside == k || fam.rings() >= max_events;
                });
            const bool reached = couple ? fam.pair_diff() == 0 : inside == k;
            L.summary = {{"replica", r}, {"reached", reached}, {"time", fam.time()},
                         {"rings", fam.rings()}};
        });
    } else if (verb == "flow") {
        auto [x2, y2] = trap_window(cfg, env);
        parallel_for(logs.size(), threads, [&](std::size_t r) {
            EventSource src(replica_seed(cfg.seed, r));
            auto& L = logs[r];
            long long i = 0;
            FlowObserver obs = [&](const RingEvent& ev, bool changed) {
                ++i;
                if (!as_json && i <= max_events) line(L.rows, r, i, ev, changed ? 1 : 0);
            };
            auto st = flow_run(env, FlowState::empty(x2, y2), src, horizon, &obs);
            L.summary = {{"replica", r}, {"x2", x2}, {"y2", y2}, {"absorbed", st.absorbed}, {"horizon", horizon}};
        });
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown verb for simulate: " + verb);
    }

    RunResult res;
    int violations = 0;
    for (const auto& L : logs) violations += L.violations;
    if (as_json) {
        json j = header(cfg);
        json arr = json::array();
        for (const auto& L : logs) arr.push_back(L.summary);
        j["replicas"] = arr;
        j["order_violations"] = violations;
        res.content = dump(j);
    } else {
        CsvWriter w(h, {"replica", "event_index", "time", "site", "mark_applied", "moved"});
        std::string s = w.str();
        for (const auto& L : logs) s += L.rows;
        res.content = s;
    }
    if (violations > 0) {
        res.status = 2;
        res.message = "monotone coupling order";
    }
    return res;
}

RunResult flow_cmd(const RunConfig& cfg, const std::string& verb, int threads) {
    if (verb != "stationary") throw Error(ErrorKind::InvalidArgument, "unknown verb for flow: " + verb);
    auto env = cfg.environment();
    auto prof = potential(env);
    auto [x2, y2] = trap_window(cfg, env);
    auto law = flow_stationary_law(env, x2, y2);
    const double bound = flow_upper_bound(prof, x2, y2);
    const int replicas = cfg.get<int>("replicas", 50);
    const double horizon = cfg.get<double>("horizon", std::min(1e6, 200.0 / std::max(law.flow, 1e-12)));
    std::vector<double> rates(static_cast<std::size_t>(replicas));
    parallel_for(rates.size(), threads, [&](std::size_t r) {
        auto seed = replica_seed(cfg.seed, r);
        // initial window drawn from the exact stationary law
        SplitMix64 rng(hash_key(seed, Stream::Sampler, 0));
        double u = rng.uniform(), c = 0.0;
        std::size_t m = 0;
        for (; m + 1 < law.mu.size(); ++m) {
            c += law.mu[m];
            if (u < c) break;
        }
        auto st = FlowState::empty(x2, y2);
        for (int i = 0; i < y2 - x2 + 1; ++i) st.occ[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((m >> i) & 1U);
        auto end = flow_run(env, st, EventSource(seed), horizon);
        rates[r] = static_cast<double>(end.absorbed) / horizon;
    });
    double s = 0, s2 = 0;
    for (double v : rates) {
        s += v;
        s2 += v * v;
    }
    const double R = replicas;
    const double mean = s / R;
    const double se = replicas > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / R) / (R - 1)) / R) : 0.0;
    json j = header(cfg);
    j["x2"] = x2;
    j["y2"] = y2;
    j["depth"] = prof.V(y2) - prof.V(x2);
    j["k_prime"] = half_fill_census(prof, x2, y2).k_prime;
    j["flow_exact"] = law.flow;
    j["flow_bound"] = bound;
    j["mc_rate"] = mean;
    j["mc_se"] = se;
    j["mc_replicas"] = replicas;
    j["mc_horizon"] = horizon;
    RunResult res{dump(j), 0, ""};
    if (law.flow > bound) res = {res.content, 2, "stationary flow bound"};
    return res;
}

RunResult scaling_cmd(const RunConfig& cfg, const std::string& verb, int threads) {
    if (verb != "run") throw Error(ErrorKind::InvalidArgument, "unknown verb for scaling: " + verb);
    const double beta = cfg.get<double>("beta", 0.0);
    std::vector<int> ns = cfg.has("n_list") ? cfg.experiment["n_list"].get<std::vector<int>>()
                                            : std::vector<int>{128, 256, 512, 1024};
    const double eps = cfg.get<double>("eps", 0.25);
    const int replicas = cfg.get<int>("replicas", 200);
    std::optional<double> cap;
    if (cfg.has("cap")) cap = cfg.get<double>("cap", 1.0);
    auto table = scaling_run(cfg.law_spec(), beta, ns, eps, replicas, cfg.seed, cap, threads);
    CsvWriter w(cfg.config_hash(), {"n", "k", "beta", "lambda", "t_hat", "ci_lo", "ci_hi", "timeouts",
                                    "predicted_exponent", "censored"});
    for (const auto& r : table.rows) {
        w.cell(r.n).cell(r.k).cell(r.beta).cell(r.lambda_ref).cell(r.t_hat).cell(r.ci_lo).cell(r.ci_hi);
        w.cell(r.timeouts).cell(r.predicted_exponent).cell(r.censored ? 1 : 0);
        w.end_row();
    }
    std::string s = w.str();
    s += "# slope=" + fmt_double(table.fit.slope) + " slope_se=" + fmt_double(table.fit.slope_se) +
         " points=" + std::to_string(table.fit.points) + "\n";
    return {s, 0, ""};
}

}  // namespace

RunResult execute(const RunConfig& cfg, const std::string& module, const std::string& verb, int threads) {
    if (module != cfg.kind)
        throw Error(ErrorKind::InvalidArgument,
                    "module '" + module + "' does not match experiment.kind '" + cfg.kind + "'");
    if (module == "env") return env_cmd(cfg, verb);
    if (module == "equilibrium") return equilibrium_cmd(cfg, verb);
    if (module == "exact") return exact_cmd(cfg, verb);
    if (module == "simulate") return simulate_cmd(cfg, verb, threads);
    if (module == "flow") return flow_cmd(cfg, verb, threads);
    if (module == "scaling") return scaling_cmd(cfg, verb, threads);
    throw Error(ErrorKind::InvalidArgument, "unknown module: " + module);
}

int run(const std::string& config_text, const RunOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        RunConfig cfg = parse_config(config_text);
        if (opt.seed) cfg.seed = *opt.seed;
        auto res = execute(cfg, opt.module, opt.verb, resolve_threads(opt.threads));
        auto path = opt.out ? opt.out : cfg.output;
        if (path)
            write_atomic(*path, res.content);
        else
            out << res.content;
        if (res.status == 2) err << "property violation: " << res.message << "\n";
        return res.status;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::PropertyViolation ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sepmix
