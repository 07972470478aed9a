// sdiff command line: solve, bench, toy, prox-check, rho-bound
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sdiff/bench.hpp"

using namespace sdiff;

namespace {

struct Common {
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::vector<std::string> solvers;
    bool quiet = false;
};

Json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    try {
        return Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ParameterError("config " + path + ": " + e.what());
    }
}

void say(const Common& c, const std::string& s) {
    if (!c.quiet) std::fputs(s.c_str(), stdout);
}

SolveOutcome solve_preset_trial(const ExperimentConfig& cfg, const SolverSpec& sp, long trial) {
    const Instance in = make_instance(cfg, trial);
    const SolveJob job{in.S, in.b, in.x_true, sp, sp.s.value_or(cfg.s_truth), cfg.warm_rho_value(),
                       cfg.warm_iters.value_or(long(cfg.N)), cfg.seed};
    return run_solve_job(job);
}

void report(const Common& c, const SolveOutcome& res, const std::string& label) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%siterations %ld  converged %s\n", label.c_str(), res.trace.iterations,
                  res.trace.converged ? "yes" : "no");
    say(c, buf);
    if (res.rel_err) {
        std::snprintf(buf, sizeof buf, "%srel_err %.6e\n", label.c_str(), *res.rel_err);
        say(c, buf);
    }
}

Json trace_summary(const SolveOutcome& res) {
    const SolveTrace& tr = res.trace;
    Json j;
    j["iterations"] = tr.iterations;
    j["converged"] = tr.converged;
    j["final_objective"] = tr.objective_history.empty() ? 0.0 : tr.objective_history.back();
    j["fixed_point_residual"] = tr.fixed_point_residual;
    if (res.rel_err) j["rel_err"] = *res.rel_err;
    return j;
}

int cmd_solve(const Common& c, const std::string& config, const std::string& preset, long trial) {
    if (!preset.empty()) {
        // trials [trial, trial + n) of the first preset config, one roster entry
        PresetOptions po;
        po.seed = c.seed;
        const Preset p = make_preset(preset, po);
        if (p.configs.empty()) throw ParameterError("preset " + preset + " has no solver configs");
        const ExperimentConfig& cfg = p.configs.front();
        const std::string want = c.solvers.empty() ? "sdiff-l1" : c.solvers.front();
        const SolverSpec* sp = nullptr;
        for (const auto& s : cfg.roster)
            if (s.name == want || (c.solvers.empty() && !sp && uses_penalty(s.method))) sp = &s;
        if (!sp) throw ParameterError("preset " + preset + " has no solver " + want);
        const long n = c.trials.value_or(1);
        Json runs = Json::array();
        bool all = true;
        for (long t = trial; t < trial + n; ++t) {
            const SolveOutcome res = solve_preset_trial(cfg, *sp, t);
            report(c, res, n > 1 ? "trial " + std::to_string(t) + "  " : "");
            Json j = trace_summary(res);
            j["trial"] = t;
            runs.push_back(j);
            all = all && res.trace.converged;
            if (!c.out.empty() && t == trial) write_vector_text(res.trace.solution, c.out);
        }
        if (!c.out.empty()) {
            Json summary = {{"preset", preset}, {"config_id", cfg.id}, {"solver", sp->name}, {"seed", cfg.seed},
                            {"runs", runs}};
            std::ofstream(c.out + ".summary.json") << summary.dump(1) << "\n";
        }
        return all ? 0 : 2;
    }
    if (config.empty()) throw ParameterError("solve needs --config or --preset");
    Json j = load_json(config);
    if (c.seed) j["seed"] = *c.seed;
    const SolveJob job = solve_job_from_json(j);
    const SolveOutcome res = run_solve_job(job);
    report(c, res, "");
    if (!c.out.empty()) {
        write_vector_text(res.trace.solution, c.out);
        Json summary = trace_summary(res);
        summary["solver"] = job.solver.name;
        summary["seed"] = job.seed;
        std::ofstream(c.out + ".summary.json") << summary.dump(1) << "\n";
    }
    return res.trace.converged ? 0 : 2;
}

int cmd_bench(const Common& c, std::string preset, const std::string& config, bool full, bool timing) {
    const std::string out = c.out.empty() ? "results" : c.out;
    Json meta;
    PresetReport rep;
    if (!config.empty()) {
        Json j = load_json(config);
        if (c.seed) j["seed"] = *c.seed;
        if (c.trials) j["trials"] = *c.trials;
        ExperimentConfig cfg = experiment_config_from_json(j);
        if (!c.solvers.empty()) {
            std::vector<SolverSpec> kept;
            for (const auto& sp : cfg.roster)
                if (std::find(c.solvers.begin(), c.solvers.end(), sp.name) != c.solvers.end()) kept.push_back(sp);
            cfg.roster = kept;
            cfg.validate();
        }
        std::filesystem::create_directories(out);
        const ExperimentResult r = run_experiment(cfg);
        const std::string stem = (std::filesystem::path(out) / detail::slug(cfg.id)).string();
        write_results(r.rows, stem + "_results.csv", Format::Csv, timing);
        write_summary_csv(r.summary, stem + "_summary.csv", timing);
        rep.files = {stem + "_results.csv", stem + "_summary.csv"};
        rep.text = detail::format_summary(r.summary);
        preset = detail::slug(cfg.id);
        meta["config"] = config;
        meta["seed"] = cfg.seed;
        meta["trials"] = cfg.trials;
    } else {
        if (preset.empty()) throw ParameterError("bench needs a preset name or --config");
        PresetOptions po;
        po.trials = c.trials;
        po.seed = c.seed;
        po.full = full;
        po.solvers = c.solvers;
        po.timing = timing;
        const Preset p = make_preset(preset, po);
        rep = run_preset(p, out);
        meta["preset"] = preset;
        meta["seed"] = p.configs.empty() ? Json(nullptr) : Json(p.configs.front().seed);
        meta["trials"] = p.configs.empty() ? Json(nullptr) : Json(p.configs.front().trials);
        meta["full"] = full;
    }
    meta["files"] = rep.files;
    const std::string mp = (std::filesystem::path(out) / (preset + "_meta.json")).string();
    std::ofstream(mp) << meta.dump(1) << "\n";
    say(c, rep.text);
    for (const auto& f : rep.files) say(c, "wrote " + f + "\n");
    return 0;
}

int cmd_toy(const Common& c, double step) {
    const ToyResult toy = run_toy_example(make_grid(-2, 12, step));
    char buf[128];
    say(c, "curve          argmin t\n");
    for (std::size_t i = 0; i < toy.names.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%-14s %.2f\n", toy.names[i].c_str(), toy.argmin_t[i] + 0.0);
        say(c, buf);
    }
    if (!c.out.empty()) {
        std::FILE* f = std::fopen(c.out.c_str(), "w");
        if (!f) throw std::runtime_error("cannot write " + c.out);
        std::fprintf(f, "curve,argmin_t\n");
        for (std::size_t i = 0; i < toy.names.size(); ++i) std::fprintf(f, "%s,%.16e\n", toy.names[i].c_str(), toy.argmin_t[i]);
        std::fclose(f);
    }
    return 0;
}

int cmd_prox_check(const Common& c, long dims, bool fault) {
    const auto rows = run_prox_check(dims, c.trials.value_or(30), c.seed.value_or(7), fault);
    bool ok = true;
    char buf[160];
    for (const auto& r : rows) {
        const bool pass = r.max_gap <= 1e-6;
        ok = ok && pass;
        std::snprintf(buf, sizeof buf, "%-20s instances %4ld  max gap %.3e  %s\n", r.op.c_str(), r.instances,
                      r.max_gap, pass ? "ok" : "FAIL");
        say(c, buf);
    }
    return ok ? 0 : 1;
}

struct BoundArgs {
    std::optional<double> beta, eta, a, theta1, theta2, grad0, L, C, atb, a2;
    std::optional<long> s;
};

double need(const std::optional<double>& v, const char* flag) {
    if (!v) throw ParameterError(std::string("rho-bound: missing --") + flag);
    return *v;
}

Index need_s(const std::optional<long>& v) {
    if (!v) throw ParameterError("rho-bound: missing --s");
    return Index(*v);
}

int cmd_rho_bound(const Common& c, const std::string& kind, const BoundArgs& b) {
    RhoBoundQuery q;
    if (kind == "lipschitz")
        q = bound::LipschitzLoss{need(b.beta, "beta"), need(b.eta, "eta")};
    else if (kind == "l1")
        q = bound::LipschitzLossL1{need(b.beta, "beta")};
    else if (kind == "l1l2")
        q = bound::LipschitzLossL1L2{need(b.beta, "beta"), need(b.a, "a"), need_s(b.s)};
    else if (kind == "lsp")
        q = bound::LipschitzLossLSP{need(b.beta, "beta"), need(b.theta1, "theta1"), need(b.theta2, "theta2")};
    else if (kind == "grad")
        q = bound::GradientLipschitz{need(b.grad0, "grad0"), need(b.L, "L"), need(b.C, "C"), need(b.eta, "eta"),
                                     need_s(b.s)};
    else if (kind == "ls-l1")
        q = bound::LeastSquaresL1{need(b.atb, "atb"), need(b.a2, "a2"), need(b.C, "C"), need_s(b.s)};
    else if (kind == "ls-l1l2")
        q = bound::LeastSquaresL1L2{need(b.atb, "atb"), need(b.a2, "a2"), need(b.C, "C"), need_s(b.s), need(b.a, "a")};
    else if (kind == "ls-lsp")
        q = bound::LeastSquaresLSP{need(b.atb, "atb"), need(b.a2, "a2"), need(b.C, "C"), need_s(b.s),
                                   need(b.theta1, "theta1"), need(b.theta2, "theta2")};
    else
        throw ParameterError("rho-bound: unknown kind '" + kind +
                             "' (l1, lipschitz, l1l2, lsp, grad, ls-l1, ls-l1l2, ls-lsp)");
    const double v = rho_lower_bound(q);
    char buf[256];
    std::snprintf(buf, sizeof buf, "rho_bar = %.6f   %s\n", v, rho_bound_formula(q));
    if (c.quiet)
        std::printf("%.6f\n", v);
    else
        std::fputs(buf, stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"s-difference sparse recovery toolkit"};
    app.require_subcommand(1, 1);
    Common c;
    auto common = [&c](CLI::App* sub, bool trials = true) {
        sub->add_option("--out", c.out, "output path");
        sub->add_option("--seed", c.seed, "master seed");
        if (trials) sub->add_option("--trials", c.trials, "trial count")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", c.quiet, "less output");
    };

    std::string config, preset;
    long trial = 0;
    auto* solve = app.add_subcommand("solve", "solve one recovery problem");
    common(solve);
    solve->add_option("--config", config, "JSON solve config");
    solve->add_option("--preset", preset, "take the instance from a preset");
    solve->add_option("--trial", trial, "trial index within the preset")->check(CLI::NonNegativeNumber);
    solve->add_option("--solver", c.solvers, "roster entry (with --preset)");

    bool full = false, timing = false;
    auto* bench = app.add_subcommand("bench", "run a benchmark preset or config");
    common(bench);
    bench->add_option("preset_name", preset, "preset name");
    bench->add_option("--preset", preset, "preset name");
    bench->add_option("--config", config, "JSON experiment config");
    bench->add_option("--solver", c.solvers, "keep only these solvers");
    bench->add_flag("--full", full, "full-size ladder and trial counts");
    bench->add_flag("--timing", timing, "record wall times in the CSV");

    double step = 0.01;
    auto* toy = app.add_subcommand("toy", "toy example penalty curves");
    common(toy, false);
    toy->add_option("--step", step, "grid step")->check(CLI::Range(1e-4, 0.05));

    long dims = 5;
    bool fault = false;
    auto* prox = app.add_subcommand("prox-check", "closed-form prox versus brute-force oracle");
    common(prox);
    prox->add_option("--dims", dims, "largest dimension")->check(CLI::Range(1, 8));
    prox->add_flag("--inject-fault", fault, "perturb closed forms (negative control)");

    std::string kind;
    BoundArgs b;
    auto* rho = app.add_subcommand("rho-bound", "exact-penalty threshold for rho");
    common(rho, false);
    rho->add_option("kind", kind, "l1, lipschitz, l1l2, lsp, grad, ls-l1, ls-l1l2, ls-lsp")->required();
    rho->add_option("--beta", b.beta);
    rho->add_option("--eta", b.eta);
    rho->add_option("--a", b.a);
    rho->add_option("--s", b.s);
    rho->add_option("--theta1", b.theta1);
    rho->add_option("--theta2", b.theta2);
    rho->add_option("--grad0", b.grad0);
    rho->add_option("--L", b.L);
    rho->add_option("--C", b.C);
    rho->add_option("--atb", b.atb);
    rho->add_option("--a2", b.a2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*solve) return cmd_solve(c, config, preset, trial);
        if (*bench) return cmd_bench(c, preset, config, full, timing);
        if (*toy) return cmd_toy(c, step);
        if (*prox) return cmd_prox_check(c, dims, fault);
        if (*rho) return cmd_rho_bound(c, kind, b);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
