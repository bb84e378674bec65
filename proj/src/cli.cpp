#include "czk/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "czk/analysis.hpp"
#include "czk/resettable.hpp"

namespace czk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
    int k = 8;
    int m = 8;
    int sessions = 2;
    std::string graph = "triangle";
    std::string adversary = "round_robin";
    std::string body = "oracle";
    std::string route = "compound";
    std::string group = "toy";
    std::string expander = "mixer";
    int reps = 0;
    bool admissible = false;
    int pairs = 0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool verify = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--k", o.k, "security parameter (bits)");
    cmd->add_option("--m", o.m, "preamble pair count");
    cmd->add_option("--sessions", o.sessions, "concurrent sessions");
    cmd->add_option("--graph", o.graph, "base graph: triangle|k4|cycle5|cycle6");
    cmd->add_option("--adversary", o.adversary,
                    "round_robin|nested|random_interleave|abort_prob:P|adaptive_abort|"
                    "custom_script:FILE, optionally BASE+abort:P");
    cmd->add_option("--body", o.body, "oracle|g3c");
    cmd->add_option("--route", o.route, "g3c instance: base|compound");
    cmd->add_option("--group", o.group, "hiding group: toy|default|FILE");
    cmd->add_option("--expander", o.expander, "binding expander: mixer|circuit");
    cmd->add_option("--reps", o.reps, "body repetitions (0: |E|*ceil(log2 k))");
    cmd->add_flag("--admissible", o.admissible, "merged determining message");
    cmd->add_option("--pairs", o.pairs, "admissible challenge pair count");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--verify", o.verify, "re-verify emitted transcripts offline");
    cmd->set_config("--config");
}

SecurityConfig make_config(const CommonOpts& o) {
    SecurityConfig c;
    c.k = o.k;
    c.m = o.m;
    c.num_sessions = o.sessions;
    c.body_tag = o.body == "g3c" ? BodyTag::G3c : BodyTag::Oracle;
    c.g3c_route = o.route == "base" ? G3cRoute::Base : G3cRoute::Compound;
    c.group = o.group == "default" ? GroupTag::Default256 : GroupTag::Toy61;
    c.expander = o.expander == "circuit" ? ExpanderTag::CircuitFriendly : ExpanderTag::Mixer;
    if (c.body_tag == BodyTag::G3c && c.g3c_route == G3cRoute::Compound)
        c.expander = ExpanderTag::CircuitFriendly;
    c.body_repetitions = o.reps;
    c.admissible = o.admissible;
    c.challenge_pairs = o.pairs;
    c.validate();
    return c;
}

StrategySpec load_strategy(const std::string& text, int m, int sessions) {
    if (text.rfind("custom_script:", 0) == 0) {
        const std::string path = text.substr(std::string("custom_script:").size());
        std::ifstream in(path);
        if (!in) throw parameter_error("cannot read schedule file: " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        const Schedule sched = Schedule::parse(buf.str(), m, sessions);
        StrategySpec spec;
        spec.policy = StrategySpec::Policy::CustomScript;
        spec.script = sched.slots;
        return spec;
    }
    return StrategySpec::parse(text);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    out << content;
}

Coloring witness_for(const std::string& name) {
    if (name == "triangle") return triangle_coloring();
    if (name == "cycle5") return cycle_coloring(5);
    if (name == "cycle6") return cycle_coloring(6);
    throw parameter_error("no shipped proper coloring for graph: " + name);
}

int cmd_prove(const CommonOpts& o) {
    const SecurityConfig config = make_config(o);
    auto setup = std::make_shared<const SessionSetup>(
        SessionSetup::create(config, derive(o.seed, "setup")));
    auto graph = std::make_shared<const Graph>(Graph::named(o.graph));
    VerifierBlackBox box(load_strategy(o.adversary, config.m, config.num_sessions), setup,
                         graph, derive(o.seed, "tape"));
    const Transcript t = run_interaction_honest(box, *setup, *graph, witness_for(o.graph),
                                                derive(o.seed, "prover"));
    write_file(fs::path(o.out_dir) / "transcript.jsonl", t.to_jsonl());
    json stats;
    stats["command"] = "prove";
    stats["seed"] = o.seed;
    for (const auto& [sid, oc] : t.outcomes)
        stats["outcomes"][std::to_string(sid)] = to_string(oc);
    stats["messages"] = t.records.size();
    stats["slots"] = slotify(t).slots.size();
    int violations = 0;
    if (o.verify) {
        const VerifyReport rep = verify_transcript(t, *setup, *graph);
        stats["verify_ok"] = rep.ok;
        stats["openings_checked"] = rep.openings_checked;
        if (!rep.ok) ++violations;
    }
    write_file(fs::path(o.out_dir) / "stats.json", stats.dump(2) + "\n");
    std::cout << stats.dump(2) << std::endl;
    return violations ? 1 : 0;
}

int cmd_simulate(const CommonOpts& o, int trials, bool trace) {
    const SecurityConfig config = make_config(o);
    auto setup = std::make_shared<const SessionSetup>(
        SessionSetup::create(config, derive(o.seed, "setup")));
    auto graph = std::make_shared<const Graph>(Graph::named(o.graph));
    json stats;
    stats["command"] = "simulate";
    stats["seed"] = o.seed;
    stats["trials"] = trials;
    int failures = 0;
    std::uint64_t total_exec = 0;
    bool verify_ok = true;
    std::string first_transcript, first_trace;
    json failure_list = json::array();
    for (int t = 0; t < trials; ++t) {
        VerifierBlackBox box(load_strategy(o.adversary, config.m, config.num_sessions), setup,
                             graph, derive(o.seed, "tape", static_cast<std::uint64_t>(t)));
        SimOptions opts;
        opts.collect_trace = trace && t == 0;
        const SimResult r = simulate(box, *setup, *graph,
                                     derive(o.seed, "sim", static_cast<std::uint64_t>(t)), opts);
        total_exec += r.stats.slot_executions;
        if (r.failure) {
            ++failures;
            failure_list.push_back(json::parse(r.failure->to_json()));
        } else if (t == 0) {
            first_transcript = r.transcript->to_jsonl();
            if (o.verify) {
                const VerifyReport rep = verify_transcript(*r.transcript, *setup, *graph);
                verify_ok = verify_ok && rep.ok;
            }
            if (opts.collect_trace) {
                std::ostringstream tr;
                for (const auto& rec : r.trace) tr << rec.to_json() << '\n';
                first_trace = tr.str();
            }
        }
    }
    stats["failures"] = failures;
    stats["failure_rate"] = static_cast<double>(failures) / trials;
    stats["failure_reports"] = failure_list;
    stats["mean_slot_executions"] = static_cast<double>(total_exec) / trials;
    stats["round_budget"] = round_budget(config.m * config.num_sessions);
    if (o.verify) stats["verify_ok"] = verify_ok;
    if (!first_transcript.empty())
        write_file(fs::path(o.out_dir) / "transcript.jsonl", first_transcript);
    if (!first_trace.empty()) write_file(fs::path(o.out_dir) / "trace.jsonl", first_trace);
    write_file(fs::path(o.out_dir) / "stats.json", stats.dump(2) + "\n");
    std::cout << stats.dump(2) << std::endl;
    return (o.verify && !verify_ok) ? 1 : 0;
}

int cmd_analyze_schedule(const CommonOpts& o, const std::string& schedule_file,
                         const std::string& family, int count) {
    std::vector<std::pair<std::string, Schedule>> schedules;
    if (!schedule_file.empty()) {
        std::ifstream in(schedule_file);
        if (!in) throw parameter_error("cannot read schedule file: " + schedule_file);
        std::stringstream buf;
        buf << in.rdbuf();
        schedules.emplace_back(schedule_file, Schedule::parse(buf.str(), o.m, o.sessions));
    } else if (family == "round_robin") {
        schedules.emplace_back(family, round_robin_schedule(o.m, o.sessions));
    } else if (family == "nested") {
        schedules.emplace_back(family, nested_schedule(o.m, o.sessions));
    } else if (family == "blocked") {
        schedules.emplace_back(family, blocked_schedule(o.m, o.sessions));
    } else if (family == "straddle") {
        schedules.emplace_back(family, straddle_schedule(o.m, o.sessions));
    } else if (family == "random") {
        Stream rng(derive(o.seed, "schedules"));
        for (int i = 0; i < count; ++i)
            schedules.emplace_back("random#" + std::to_string(i),
                                   random_schedule(o.m, o.sessions, rng));
    } else {
        throw parameter_error("analyze-schedule: give --schedule FILE or a known --family");
    }

    const int bound = lemma_bound(o.m, o.m * o.sessions);
    json out;
    out["m"] = o.m;
    out["sessions"] = o.sessions;
    out["bound"] = bound;
    json rows = json::array();
    int violations = 0;
    for (const auto& [name, sched] : schedules) {
        for (int sid = 1; sid <= o.sessions; ++sid) {
            const int count_ms = count_may_solve(sched, sid);
            json row;
            row["schedule"] = name;
            row["session"] = sid;
            row["count_may_solve"] = count_ms;
            row["holds"] = count_ms >= bound;
            if (count_ms < bound) {
                ++violations;
                row["certificate"] = sched.serialize();
            }
            rows.push_back(row);
        }
    }
    out["rows"] = rows;
    out["violations"] = violations;
    write_file(fs::path(o.out_dir) / "analyze_schedule.json", out.dump(2) + "\n");
    std::cout << "bound " << bound << ", " << rows.size() << " session checks, " << violations
              << " violations" << std::endl;
    return violations ? 1 : 0;
}

int cmd_claim64(const CommonOpts& o, int hmax) {
    std::ostringstream certs;
    int violations = 0;
    for (int h = 1; h <= hmax; ++h) {
        for (int r = 2; r <= (1 << h); ++r) {
            const Claim64Result res = verify_claim_6_4(r, h);
            certs << res.to_json() << '\n';
            if (!res.holds) ++violations;
            std::cout << "r=" << res.r << " h=" << res.h << " min=" << res.min_count
                      << " bound=" << res.bound << (res.holds ? " ok" : " VIOLATION")
                      << std::endl;
        }
    }
    write_file(fs::path(o.out_dir) / "claim64_certificates.jsonl", certs.str());
    return violations ? 1 : 0;
}

int cmd_seqexp(const CommonOpts& o, int a, int b, const std::string& strategy,
               long long trials, double eps) {
    ExperimentConfig config;
    config.required_wins = a;
    config.test_budget = b;
    config.trials = trials;
    config.seed = derive(o.seed, "seqexp");
    config.eps_win = eps;
    SeqStrategy strat;
    std::string label = strategy;
    if (strategy.rfind("const:", 0) == 0) {
        strat = const_strategy(std::stod(strategy.substr(6)));
    } else if (strategy == "adaptive") {
        strat = adaptive_threshold_strategy();
    } else if (strategy == "grid") {
        ExperimentConfig pilot = config;
        pilot.trials = std::max<long long>(1000, trials / 10);
        const double p = grid_search_constant(pilot);
        label = "grid(p=" + std::to_string(p) + ")";
        strat = const_strategy(p);
    } else {
        throw parameter_error("seqexp: strategy must be const:P, adaptive or grid");
    }
    const SeqExpResult res = sequential_experiment(config, strat);
    std::ostringstream csv;
    csv << "a,b,strategy,metric,value,stderr\n";
    csv << a << ',' << b << ',' << label << ",win_rate," << res.win_rate << ',' << res.sigma
        << '\n';
    csv << a << ',' << b << ',' << label << ",death_rate," << res.death_rate << ",\n";
    csv << a << ',' << b << ',' << label << ",bound," << res.bound << ",\n";
    write_file(fs::path(o.out_dir) / "seqexp.csv", csv.str());
    std::cout << csv.str() << (res.bound_holds ? "bound holds" : "BOUND VIOLATION")
              << std::endl;
    return res.bound_holds ? 0 : 1;
}

int cmd_sweep(const CommonOpts& o, const std::string& m_list, int trials) {
    std::vector<int> m_values;
    std::stringstream ss(m_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) m_values.push_back(std::stoi(tok));
    if (m_values.empty()) throw parameter_error("sweep: empty --m-list");
    SecurityConfig base = make_config(o);
    const SweepResult res = simulator_success_sweep(m_values, o.sessions, o.adversary, trials,
                                                    derive(o.seed, "sweep"), base);
    write_file(fs::path(o.out_dir) / "sweep.csv", res.to_csv());
    std::cout << res.to_csv() << std::endl;
    const bool trend_ok = res.spearman_rho < 0 && res.p_value < 0.01;
    std::cout << (trend_ok ? "trend holds" : "TREND VIOLATION") << std::endl;
    return trend_ok ? 0 : 1;
}

int cmd_resettable(const CommonOpts& o, const std::string& mode, int sessions, int resets) {
    SecurityConfig config = make_config(o);
    config.admissible = true;
    config.num_sessions = 1;
    config.validate();
    IncarnationRegistry registry;
    registry.seed = derive(o.seed, "registry");
    registry.inputs = {Graph::named(o.graph)};
    registry.witnesses = {witness_for(o.graph)};
    registry.p1_tapes = std::max(2, sessions);
    registry.p2_tapes = std::max(2, sessions);
    registry.setup = std::make_shared<const SessionSetup>(
        SessionSetup::create(config, derive(o.seed, "setup")));

    json stats;
    stats["command"] = "resettable";
    stats["mode"] = mode;
    stats["registry"] = json::parse(registry.to_json());
    int violations = 0;

    if (mode == "determinism") {
        std::vector<ResetSession> plan;
        for (int r = 0; r < resets; ++r)
            plan.push_back(ResetSession{0, 0, 0, derive(o.seed, "entropy"), 0, 0});
        const ResettableTranscript t = resetting_run(plan, registry, {});
        const std::string first = t.sessions.empty() ? "" : t.sessions[0].to_digest();
        bool identical = true;
        for (const auto& s : t.sessions) identical = identical && s.to_digest() == first;
        stats["resets"] = resets;
        stats["identical"] = identical;
        if (!identical) ++violations;
        write_file(fs::path(o.out_dir) / "resettable.jsonl", t.to_jsonl());
    } else if (mode == "demo") {
        std::vector<ResetSession> plan;
        Stream s(derive(o.seed, "plan"));
        for (int r = 0; r < sessions; ++r)
            plan.push_back(ResetSession{0, static_cast<int>(s.below(registry.p1_tapes)),
                                        static_cast<int>(s.below(registry.p2_tapes)),
                                        derive(o.seed, "entropy", static_cast<std::uint64_t>(r)),
                                        0, 0});
        const ResettableTranscript t = resetting_run(plan, registry, {});
        int accepted = 0;
        for (const auto& sess : t.sessions)
            if (sess.outcome == SessionOutcome::Accepted) ++accepted;
        stats["sessions"] = sessions;
        stats["accepted"] = accepted;
        if (accepted != sessions) ++violations;
        write_file(fs::path(o.out_dir) / "resettable.jsonl", t.to_jsonl());
    } else {
        throw parameter_error("resettable: mode must be determinism or demo");
    }
    stats["violations"] = violations;
    write_file(fs::path(o.out_dir) / "stats.json", stats.dump(2) + "\n");
    std::cout << stats.dump(2) << std::endl;
    return violations ? 1 : 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"desk-scale concurrent zero-knowledge laboratory"};
    app.require_subcommand(1);

    CommonOpts o;
    int trials = 1;
    bool trace = false;
    std::string schedule_file, family = "round_robin";
    int count = 100;
    int hmax = 5;
    int a = 4, b = 64;
    std::string strategy = "const:0.5";
    long long seq_trials = 100000;
    double eps = 0.0;
    std::string m_list = "8,16,32,64";
    std::string mode = "determinism";
    int r_sessions = 4, resets = 5;

    auto* prove = app.add_subcommand("prove", "honest concurrent run");
    add_common(prove, o);

    auto* sim = app.add_subcommand("simulate", "rewinding simulator run(s)");
    add_common(sim, o);
    sim->add_option("--trials", trials, "number of simulate runs");
    sim->add_flag("--trace", trace, "write the instrumented execution trace");

    auto* ana = app.add_subcommand("analyze-schedule", "may-solve counts vs the bound");
    add_common(ana, o);
    ana->add_option("--schedule", schedule_file, "schedule file: lines 'slot session round'");
    ana->add_option("--family", family, "round_robin|nested|blocked|straddle|random");
    ana->add_option("--count", count, "random schedules to draw");

    auto* c64 = app.add_subcommand("claim64", "exhaustive good-interval certificates");
    add_common(c64, o);
    c64->add_option("--hmax", hmax, "max recursion height (<= 5)");

    auto* seq = app.add_subcommand("seqexp", "sequential experiment table");
    add_common(seq, o);
    seq->add_option("--a", a, "required wins");
    seq->add_option("--b", b, "test budget");
    seq->add_option("--strategy", strategy, "const:P | adaptive | grid");
    seq->add_option("--trials", seq_trials, "Monte Carlo trials");
    seq->add_option("--eps", eps, "additive win advantage");

    auto* sw = app.add_subcommand("sweep", "failure-rate grid over m");
    add_common(sw, o);
    sw->add_option("--m-list", m_list, "comma-separated m values");
    sw->add_option("--trials", trials, "simulate runs per cell");

    auto* rs = app.add_subcommand("resettable", "resetting-adversary harness");
    add_common(rs, o);
    rs->add_option("--mode", mode, "determinism | demo");
    rs->add_option("--count", resets, "resets in determinism mode");
    rs->add_option("--incarnations", r_sessions, "sessions in demo mode");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (prove->parsed()) return cmd_prove(o);
        if (sim->parsed()) return cmd_simulate(o, trials, trace);
        if (ana->parsed()) return cmd_analyze_schedule(o, schedule_file, family, count);
        if (c64->parsed()) return cmd_claim64(o, hmax);
        if (seq->parsed()) return cmd_seqexp(o, a, b, strategy, seq_trials, eps);
        if (sw->parsed()) return cmd_sweep(o, m_list, trials);
        if (rs->parsed()) return cmd_resettable(o, mode, r_sessions, resets);
    } catch (const parameter_error& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << std::endl;
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 2;
}

}  // namespace czk
