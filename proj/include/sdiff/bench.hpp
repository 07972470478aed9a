#pragma once

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "sdiff/core.hpp"
#include "sdiff/operators.hpp"
#include "sdiff/prox.hpp"
#include "sdiff/rng.hpp"
#include "sdiff/solvers.hpp"

namespace sdiff {

using Json = nlohmann::json;

enum class Method { SDiffFBS, PDCA, DCAADMM, L1ADMM, HalfThreshold, AIHT, L12DCA };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::SDiffFBS: return "fbs";
        case Method::PDCA: return "pdca";
        case Method::DCAADMM: return "dca-admm";
        case Method::L1ADMM: return "l1-admm";
        case Method::HalfThreshold: return "half";
        case Method::AIHT: return "aiht";
        case Method::L12DCA: return "l12-dca";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    for (Method m : {Method::SDiffFBS, Method::PDCA, Method::DCAADMM, Method::L1ADMM, Method::HalfThreshold,
                     Method::AIHT, Method::L12DCA})
        if (to_string(m) == s) return m;
    throw ParameterError("unknown method '" + s + "' (fbs, pdca, dca-admm, l1-admm, half, aiht, l12-dca)");
}

inline bool uses_penalty(Method m) { return m == Method::SDiffFBS || m == Method::PDCA || m == Method::DCAADMM; }

struct SolverSpec {
    std::string name;
    Method method = Method::SDiffFBS;
    Regularizer reg = Regularizer::l1();
    std::optional<Index> s;  // default s_truth
    double rho = 0.1;
    std::optional<double> step;
    double tol = 1e-5;
    std::optional<long> max_iter;
    bool warm_start = true;
    bool adaptive_s = false;
    bool generalized = false;         // dca-admm
    double mu = 1.0;                  // inner ADMM of dca-admm / l12-dca
    std::optional<double> admm_mu;    // l1-admm, default 100 rho
    bool allow_unsafe_step = false;
};

struct ExperimentConfig {
    std::string id = "custom";
    MatrixKind kind = MatrixKind::GaussianUnitColumns;
    Index M = 256, N = 1024, s_truth = 48;
    double noise = 0;
    std::vector<SolverSpec> roster;
    long trials = 10;
    std::uint64_t seed = 1;
    double success_threshold = 1e-3;
    std::optional<double> warm_rho;   // default 1e-6 noiseless, 1e-3 noisy
    std::optional<long> warm_iters;   // default N
    bool record_curves = false;

    double warm_rho_value() const { return warm_rho.value_or(noise > 0 ? 1e-3 : 1e-6); }

    void validate() const {
        if (trials < 1) throw ParameterError("config " + id + ": trials must be >= 1");
        if (!(success_threshold > 0)) throw ParameterError("config " + id + ": success threshold must be > 0");
        if (M < 1 || N < 1) throw ParameterError("config " + id + ": M, N must be >= 1");
        if (s_truth < 1 || s_truth > N) throw ParameterError("config " + id + ": need 1 <= s_truth <= N");
        if (kind == MatrixKind::Custom) throw ParameterError("config " + id + ": matrix kind must be gaussian or dct");
        if (kind == MatrixKind::PartialDct && M > N) throw ParameterError("config " + id + ": dct needs M <= N");
        if (!(noise >= 0)) throw ParameterError("config " + id + ": noise must be >= 0");
        if (roster.empty()) throw ParameterError("config " + id + ": empty solver roster");
        std::set<std::string> names;
        for (const auto& sp : roster) {
            if (sp.name.empty()) throw ParameterError("config " + id + ": solver without a name");
            if (!names.insert(sp.name).second) throw ParameterError("config " + id + ": duplicate solver " + sp.name);
            if (sp.s && (*sp.s < 1 || *sp.s > N)) throw ParameterError("solver " + sp.name + ": s out of range");
        }
    }
};

struct SolverOutcome {
    std::string solver;
    double rel_err = 0;
    long iterations = 0;
    double wall_ms = 0;
    bool success = false;
    bool converged = false;
    std::string error;            // set when the solver threw
    std::vector<double> curve;    // Rel.Err per iteration, iteration 0 = start
};

struct TrialResult {
    long trial = 0;
    double start_rel_err = 0;
    std::vector<SolverOutcome> outcomes;  // roster order
};

struct Instance {
    SensingMatrix S;
    Vector x_true;
    Vector b;
};

// trial streams: derive(seed, trial); inside it 0 -> A, 1 -> x, 2 -> noise
inline Instance make_instance(const ExperimentConfig& cfg, long trial) {
    const std::uint64_t ts = Rng::derive(cfg.seed, std::uint64_t(trial));
    Instance in;
    in.S = cfg.kind == MatrixKind::PartialDct ? gen_partial_dct(cfg.M, cfg.N, Rng::derive(ts, 0))
                                              : gen_gaussian(cfg.M, cfg.N, Rng::derive(ts, 0));
    in.x_true = gen_sparse_signal(cfg.N, cfg.s_truth, Rng::derive(ts, 1));
    in.b = in.S.A * in.x_true;
    if (cfg.noise > 0) {
        Rng nr(Rng::derive(ts, 2));
        for (Index i = 0; i < in.b.size(); ++i) in.b[i] += cfg.noise * nr.normal();
    }
    return in;
}

inline double rel_err(const Vector& x, const Vector& truth) { return (x - truth).norm() / truth.norm(); }

inline SolveTrace run_solver(const SolverSpec& sp, const LeastSquaresProblem& prob, const Vector& x0, Index s_truth,
                             const std::function<void(long, const Vector&)>& on_iterate = {}) {
    SolverConfig c;
    c.rho = sp.rho;
    c.step = sp.step;
    c.tol = sp.tol;
    c.max_iter = sp.max_iter;
    c.init = InitKind::Given;
    c.init_vector = x0;
    c.adaptive_s = sp.adaptive_s;
    c.allow_unsafe_step = sp.allow_unsafe_step;
    c.on_iterate = on_iterate;
    const Index s = sp.s.value_or(s_truth);
    AdmmConfig inner;
    inner.mu = sp.mu;
    inner.tol = sp.tol;
    inner.generalized = sp.generalized;
    switch (sp.method) {
        case Method::SDiffFBS: return fbs_solve(prob, SDiffPenalty(sp.reg, s), c);
        case Method::PDCA: return pdca_solve(prob, SDiffPenalty(sp.reg, s), c);
        case Method::DCAADMM: return dca_admm_solve(prob, SDiffPenalty(sp.reg, s), c, inner);
        case Method::L1ADMM: return l1_admm_trace(prob, sp.rho, c, sp.admm_mu);
        case Method::HalfThreshold: return half_threshold_solve(prob, sp.rho, c);
        case Method::AIHT: return aiht_solve(prob, s, c);
        case Method::L12DCA: return l12_dca_solve(prob, sp.rho, c, inner);
    }
    throw ParameterError("run_solver: bad method");
}

inline TrialResult run_trial(const ExperimentConfig& cfg, long trial) {
    cfg.validate();
    const Instance in = make_instance(cfg, trial);
    const LeastSquaresProblem prob(in.S.A, in.b);
    const Vector warm = l1_admm_solve(prob, cfg.warm_rho_value(), cfg.warm_iters.value_or(long(cfg.N)));
    const Vector zero = Vector::Zero(cfg.N);
    TrialResult tr;
    tr.trial = trial;
    tr.start_rel_err = rel_err(warm, in.x_true);
    for (const auto& sp : cfg.roster) {
        SolverOutcome o;
        o.solver = sp.name;
        const Vector& x0 = sp.warm_start ? warm : zero;
        std::function<void(long, const Vector&)> hook;
        if (cfg.record_curves) {
            o.curve.push_back(rel_err(x0, in.x_true));
            hook = [&](long, const Vector& x) { o.curve.push_back(rel_err(x, in.x_true)); };
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const SolveTrace st = run_solver(sp, prob, x0, cfg.s_truth, hook);
            o.rel_err = rel_err(st.solution, in.x_true);
            o.iterations = st.iterations;
            o.converged = st.converged;
        } catch (const std::exception& e) {
            o.rel_err = std::numeric_limits<double>::infinity();
            o.error = e.what();
        }
        o.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        o.success = o.rel_err <= cfg.success_threshold;
        tr.outcomes.push_back(std::move(o));
    }
    return tr;
}

// SDIFF_THREADS caps the pool; default is the core count
inline unsigned bench_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* e = std::getenv("SDIFF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v >= 1) n = unsigned(v);
    }
    return n;
}

inline std::vector<TrialResult> run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<TrialResult> out(static_cast<std::size_t>(cfg.trials));
    const unsigned nt = std::min<unsigned>(bench_threads(), unsigned(cfg.trials));
    if (nt <= 1) {
        for (long t = 0; t < cfg.trials; ++t) out[t] = run_trial(cfg, t);
        return out;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            for (long t; (t = next++) < cfg.trials;) {
                try {
                    out[t] = run_trial(cfg, t);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

// one CSV row
struct ResultRow {
    std::string config_id;
    std::string matrix_kind;
    Index M = 0, N = 0, s_truth = 0;
    double noise = 0;
    std::string solver;
    long trial = 0;
    double rel_err = 0;
    long iterations = 0;
    double wall_ms = 0;
    bool success = false;

    bool operator==(const ResultRow&) const = default;
};

inline bool row_less(const ResultRow& a, const ResultRow& b) {
    return std::tie(a.config_id, a.trial, a.solver) < std::tie(b.config_id, b.trial, b.solver);
}

inline std::vector<ResultRow> to_rows(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials) {
    std::vector<ResultRow> rows;
    for (const auto& t : trials)
        for (const auto& o : t.outcomes)
            rows.push_back({cfg.id, to_string(cfg.kind), cfg.M, cfg.N, cfg.s_truth, cfg.noise, o.solver, t.trial,
                            o.rel_err, o.iterations, o.wall_ms, o.success});
    std::sort(rows.begin(), rows.end(), row_less);
    return rows;
}

struct SummaryStats {
    std::string config_id;
    std::string solver;
    long count = 0;
    long failures = 0;      // solver threw
    double mean_rel_err = 0;
    double std_rel_err = 0;  // sample std, 0 for a single trial
    double success_rate = 0;
    double mean_iterations = 0;
    double mean_wall_ms = 0;
};

// groups by (config, solver); sums run in trial order so the result does not
// depend on execution order
inline std::vector<SummaryStats> summarize(std::vector<ResultRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.config_id, a.solver, a.trial) < std::tie(b.config_id, b.solver, b.trial);
    });
    std::vector<SummaryStats> out;
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].config_id == rows[i].config_id && rows[j].solver == rows[i].solver) ++j;
        SummaryStats s;
        s.config_id = rows[i].config_id;
        s.solver = rows[i].solver;
        s.count = long(j - i);
        double sum = 0, it = 0, ms = 0, ok = 0;
        for (std::size_t k = i; k < j; ++k) {
            sum += rows[k].rel_err;
            it += double(rows[k].iterations);
            ms += rows[k].wall_ms;
            ok += rows[k].success;
            if (!std::isfinite(rows[k].rel_err)) ++s.failures;
        }
        s.mean_rel_err = sum / double(s.count);
        double var = 0;
        for (std::size_t k = i; k < j; ++k) var += (rows[k].rel_err - s.mean_rel_err) * (rows[k].rel_err - s.mean_rel_err);
        s.std_rel_err = s.count > 1 && std::isfinite(var) ? std::sqrt(var / double(s.count - 1)) : 0.0;
        s.success_rate = ok / double(s.count);
        s.mean_iterations = it / double(s.count);
        s.mean_wall_ms = ms / double(s.count);
        out.push_back(s);
        i = j;
    }
    return out;
}

inline const SummaryStats& find_stats(const std::vector<SummaryStats>& v, const std::string& solver,
                                      const std::string& config_id = "") {
    for (const auto& s : v)
        if (s.solver == solver && (config_id.empty() || s.config_id == config_id)) return s;
    throw ParameterError("no summary for solver " + solver + (config_id.empty() ? "" : " in " + config_id));
}

struct ExperimentResult {
    ExperimentConfig cfg;
    std::vector<TrialResult> trials;
    std::vector<ResultRow> rows;
    std::vector<SummaryStats> summary;

    const SummaryStats& stats(const std::string& solver) const { return find_stats(summary, solver); }
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult r;
    r.cfg = cfg;
    r.trials = run_trials(cfg);
    r.rows = to_rows(cfg, r.trials);
    r.summary = summarize(r.rows);
    return r;
}

// ---- default rosters ----

inline SolverSpec make_spec(std::string name, Method m, double rho, Regularizer reg = Regularizer::l1()) {
    SolverSpec s;
    s.name = std::move(name);
    s.method = m;
    s.rho = rho;
    s.reg = reg;
    return s;
}

// table / fig3 roster; rho 1e-1 (FBS) and 1e-6 (others) noiseless, 1 and 1e-3 noisy
inline std::vector<SolverSpec> default_roster(bool noisy) {
    const double rf = noisy ? 1.0 : 0.1, ro = noisy ? 1e-3 : 1e-6;
    return {make_spec("l1-admm", Method::L1ADMM, ro),
            make_spec("l12-dca", Method::L12DCA, ro),
            make_spec("half", Method::HalfThreshold, ro),
            make_spec("aiht", Method::AIHT, ro),
            make_spec("sdiff-l1", Method::SDiffFBS, rf, Regularizer::l1()),
            make_spec("sdiff-l12", Method::SDiffFBS, rf, Regularizer::l1_minus_al2(1.0)),
            make_spec("sdiff-l2", Method::SDiffFBS, rf, Regularizer::l2())};
}

// same penalty ||x||_1 - ||x^s||_1 through three solvers
inline std::vector<SolverSpec> comparison_roster(bool noisy) {
    const double rf = noisy ? 1.0 : 0.1, ro = noisy ? 1e-3 : 1e-6;
    return {make_spec("l1-admm", Method::L1ADMM, ro), make_spec("dca-admm", Method::DCAADMM, ro),
            make_spec("pdca", Method::PDCA, ro), make_spec("fbs", Method::SDiffFBS, rf)};
}

// (||x||_1 - ||x||_2) - (||x^s||_1 - ||x^s||_2)
inline std::vector<SolverSpec> s_sensitivity_roster(bool noisy) {
    const double rf = noisy ? 1.0 : 0.1, ro = noisy ? 1e-3 : 1e-6;
    auto dca = make_spec("dca-admm", Method::DCAADMM, ro, Regularizer::l1_minus_al2(1.0));
    dca.generalized = true;
    return {make_spec("l1-admm", Method::L1ADMM, ro), dca,
            make_spec("fbs", Method::SDiffFBS, rf, Regularizer::l1_minus_al2(1.0))};
}

// ---- sweeps ----

struct SweepResult {
    std::vector<Index> values;
    std::vector<ExperimentResult> runs;  // one per value

    std::vector<ResultRow> rows() const {
        std::vector<ResultRow> all;
        for (const auto& r : runs) all.insert(all.end(), r.rows.begin(), r.rows.end());
        std::sort(all.begin(), all.end(), row_less);
        return all;
    }
};

inline std::string with_suffix(const std::string& id, const char* key, Index v) {
    return id + "/" + key + "=" + std::to_string(v);
}

inline SweepResult run_success_rate_sweep(const ExperimentConfig& cfg, const std::vector<Index>& sparsities) {
    SweepResult out;
    for (Index k : sparsities) {
        ExperimentConfig c = cfg;
        c.s_truth = k;
        c.id = with_suffix(cfg.id, "s_truth", k);
        out.values.push_back(k);
        out.runs.push_back(run_experiment(c));
    }
    return out;
}

inline std::vector<ExperimentResult> run_relerr_table(const std::vector<ExperimentConfig>& cfgs) {
    std::vector<ExperimentResult> out;
    for (const auto& c : cfgs) out.push_back(run_experiment(c));
    return out;
}

struct ComparisonResult {
    ExperimentResult result;
    // mean over trials of 10 log10 Rel.Err at each iteration; finished runs hold their last value
    std::map<std::string, std::vector<double>> log_curves;
};

inline ComparisonResult run_solver_comparison(ExperimentConfig cfg) {
    cfg.record_curves = true;
    ComparisonResult out;
    out.result = run_experiment(cfg);
    for (const auto& sp : cfg.roster) {
        std::vector<const std::vector<double>*> cs;
        std::size_t len = 0;
        for (const auto& t : out.result.trials)
            for (const auto& o : t.outcomes)
                if (o.solver == sp.name && !o.curve.empty()) {
                    cs.push_back(&o.curve);
                    len = std::max(len, o.curve.size());
                }
        std::vector<double> mean(len, 0.0);
        for (std::size_t k = 0; k < len; ++k) {
            for (const auto* c : cs) mean[k] += 10 * std::log10((*c)[std::min(k, c->size() - 1)]);
            mean[k] /= double(cs.size());
        }
        out.log_curves[sp.name] = std::move(mean);
    }
    return out;
}

inline SweepResult run_s_sensitivity(const ExperimentConfig& cfg, const std::vector<Index>& s_list) {
    SweepResult out;
    for (Index s : s_list) {
        if (s < 1 || s > cfg.N) throw ParameterError("run_s_sensitivity: s out of [1, N]");
        ExperimentConfig c = cfg;
        c.id = with_suffix(cfg.id, "s", s);
        for (auto& sp : c.roster)
            if (uses_penalty(sp.method)) sp.s = s;
        out.values.push_back(s);
        out.runs.push_back(run_experiment(c));
    }
    return out;
}

// ---- toy example ----

struct ToyResult {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // values[curve][grid point]
    std::vector<double> argmin_t;             // first grid point attaining the minimum
};

inline Vector toy_point(double t) {
    Vector x(6);
    x << t, t, t, 15 - 3 * t, 20 - 4 * t, 4 * t - 40;
    return x;
}

// grid lo, lo+step, ..., hi built from integer multiples so t = 0 is hit exactly
inline std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0) || !(hi >= lo)) throw ParameterError("make_grid: need step > 0 and hi >= lo");
    const double inv = 1 / step;
    const bool integral = std::abs(inv - std::round(inv)) < 1e-9;
    const long k0 = std::lround(std::ceil(lo / step - 1e-9)), k1 = std::lround(std::floor(hi / step + 1e-9));
    std::vector<double> g;
    for (long k = k0; k <= k1; ++k) g.push_back(integral ? double(k) / std::round(inv) : double(k) * step);
    return g;
}

inline double l1_over_l2(const Vector& x) {
    const double n2 = x.norm();
    return n2 == 0 ? 0.0 : x.lpNorm<1>() / n2;
}

inline ToyResult run_toy_example(const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw ParameterError("run_toy_example: empty grid");
    const Index s = 3;
    const Regularizer mcp = Regularizer::mcp(15);
    using Fn = std::function<double(const Vector&)>;
    auto sum_mcp = [mcp](const Vector& x) {
        double v = 0;
        for (Index i = 0; i < x.size(); ++i) v += mcp.scalar(x[i]);
        return v;
    };
    auto sdiff = [s](Regularizer r) { return Fn([r, s](const Vector& x) { return penalty_eval(SDiffPenalty(r, s), x); }); };
    const std::vector<std::pair<std::string, Fn>> curves = {
        {"l1", [](const Vector& x) { return x.lpNorm<1>(); }},
        {"l1/2", [](const Vector& x) { return x.cwiseAbs().cwiseSqrt().sum(); }},
        {"l1-l2", [](const Vector& x) { return x.lpNorm<1>() - x.norm(); }},
        {"l1/l2", l1_over_l2},
        {"mcp", sum_mcp},
        {"sdiff-l1", sdiff(Regularizer::l1())},
        {"sdiff-l2", sdiff(Regularizer::l2())},
        {"sdiff-l1-l2", sdiff(Regularizer::l1_minus_al2(1.0))},
        {"sdiff-l1/l2", [s](const Vector& x) { return std::max(l1_over_l2(x) - l1_over_l2(truncate(x, s)), 0.0); }},
        {"sdiff-mcp", sdiff(mcp)},
    };
    ToyResult out;
    out.t = t_grid;
    for (const auto& [name, f] : curves) {
        std::vector<double> v;
        v.reserve(t_grid.size());
        for (double t : t_grid) v.push_back(f(toy_point(t)));
        const auto it = std::min_element(v.begin(), v.end());
        out.names.push_back(name);
        out.argmin_t.push_back(t_grid[std::size_t(it - v.begin())]);
        out.values.push_back(std::move(v));
    }
    return out;
}

// ---- persistence ----

enum class Format { Csv, Json };

inline Format format_from_string(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ParameterError("unknown format '" + s + "' (csv, json)");
}

inline const char* kCsvHeader = "config_id,matrix_kind,M,N,s_truth,noise,solver,trial,rel_err,iterations,wall_ms,success";

namespace detail {

inline std::FILE* open_out(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path + ": " + std::strerror(errno));
    return f;
}

inline void close_out(std::FILE* f, const std::string& path) {
    const bool bad = std::ferror(f);
    if (std::fclose(f) != 0 || bad) throw std::runtime_error("write failed: " + path);
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

}  // namespace detail

// wall_ms is written as 0 unless timing is requested, so reruns match byte for byte
inline void write_results(std::vector<ResultRow> rows, const std::string& path, Format fmt, bool timing = false) {
    std::sort(rows.begin(), rows.end(), row_less);
    if (!timing)
        for (auto& r : rows) r.wall_ms = 0;
    if (fmt == Format::Csv) {
        std::FILE* f = detail::open_out(path);
        std::fprintf(f, "%s\n", kCsvHeader);
        for (const auto& r : rows)
            std::fprintf(f, "%s,%s,%ld,%ld,%ld,%s,%s,%ld,%s,%ld,%s,%d\n", r.config_id.c_str(), r.matrix_kind.c_str(),
                         long(r.M), long(r.N), long(r.s_truth), detail::num(r.noise).c_str(), r.solver.c_str(), r.trial,
                         detail::num(r.rel_err).c_str(), r.iterations, detail::num(r.wall_ms).c_str(),
                         int(r.success));
        detail::close_out(f, path);
        return;
    }
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json j = {{"config_id", r.config_id}, {"matrix_kind", r.matrix_kind}, {"M", r.M},
                  {"N", r.N}, {"s_truth", r.s_truth}, {"noise", r.noise},
                  {"solver", r.solver}, {"trial", r.trial}, {"iterations", r.iterations},
                  {"wall_ms", r.wall_ms}, {"success", r.success}};
        j["rel_err"] = std::isfinite(r.rel_err) ? Json(r.rel_err) : Json(nullptr);
        arr.push_back(std::move(j));
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path + ": " + std::strerror(errno));
    os << arr.dump(1) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<ResultRow> read_results_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    const Json arr = Json::parse(is);
    std::vector<ResultRow> rows;
    for (const auto& j : arr) {
        ResultRow r;
        r.config_id = j.at("config_id");
        r.matrix_kind = j.at("matrix_kind");
        r.M = j.at("M");
        r.N = j.at("N");
        r.s_truth = j.at("s_truth");
        r.noise = j.at("noise");
        r.solver = j.at("solver");
        r.trial = j.at("trial");
        r.rel_err = j.at("rel_err").is_null() ? std::numeric_limits<double>::infinity() : j.at("rel_err").get<double>();
        r.iterations = j.at("iterations");
        r.wall_ms = j.at("wall_ms");
        r.success = j.at("success");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_summary_csv(const std::vector<SummaryStats>& stats, const std::string& path, bool timing = false) {
    std::FILE* f = detail::open_out(path);
    std::fprintf(f, "config_id,solver,trials,failures,mean_rel_err,std_rel_err,success_rate,mean_iterations,mean_wall_ms\n");
    for (const auto& s : stats)
        std::fprintf(f, "%s,%s,%ld,%ld,%s,%s,%s,%s,%s\n", s.config_id.c_str(), s.solver.c_str(), s.count, s.failures,
                     detail::num(s.mean_rel_err).c_str(), detail::num(s.std_rel_err).c_str(),
                     detail::num(s.success_rate).c_str(), detail::num(s.mean_iterations).c_str(),
                     detail::num(timing ? s.mean_wall_ms : 0.0).c_str());
    detail::close_out(f, path);
}

// sparsity column followed by one success-rate column per solver
inline void write_success_csv(const SweepResult& sw, const std::string& path) {
    std::FILE* f = detail::open_out(path);
    std::fprintf(f, "s_truth");
    if (!sw.runs.empty())
        for (const auto& sp : sw.runs[0].cfg.roster) std::fprintf(f, ",%s", sp.name.c_str());
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < sw.runs.size(); ++i) {
        std::fprintf(f, "%ld", long(sw.values[i]));
        for (const auto& sp : sw.runs[i].cfg.roster)
            std::fprintf(f, ",%s", detail::num(sw.runs[i].stats(sp.name).success_rate).c_str());
        std::fprintf(f, "\n");
    }
    detail::close_out(f, path);
}

// two-column plot data
inline void write_curve(const std::vector<double>& x, const std::vector<double>& y, const std::string& path,
                        const std::string& xname = "x", const std::string& yname = "y") {
    if (x.size() != y.size()) throw DimensionError("write_curve: length mismatch");
    std::FILE* f = detail::open_out(path);
    std::fprintf(f, "%s,%s\n", xname.c_str(), yname.c_str());
    for (std::size_t i = 0; i < x.size(); ++i) std::fprintf(f, "%s,%s\n", detail::num(x[i]).c_str(), detail::num(y[i]).c_str());
    detail::close_out(f, path);
}

// ---- prox versus brute-force oracle ----

struct ProxCheckRow {
    std::string op;
    long instances = 0;
    double max_gap = 0;  // max (E(closed) - E(oracle)) / max(1, E(oracle)), floored at 0
};

inline std::vector<std::string> prox_check_ops() {
    return {"prox_l1", "prox_l2sq", "prox_l2", "prox_l1_minus_al2", "prox_mcp", "prox_lsp"};
}

// random instances: N in [min(2, max_dim), max_dim], s in [1, N], lambda in [0.01, 2],
// y ~ 2 N(0, 1); the fault hook perturbs the closed form (negative control)
inline std::vector<ProxCheckRow> run_prox_check(Index max_dim, long trials, std::uint64_t seed,
                                                bool inject_fault = false, long budget = 20000) {
    if (max_dim < 1 || max_dim > 8) throw ParameterError("prox-check: dims must be in [1, 8]");
    if (trials < 1) throw ParameterError("prox-check: trials must be >= 1");
    std::vector<ProxCheckRow> out;
    const auto ops = prox_check_ops();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        Rng rng(Rng::derive(seed, k));
        ProxCheckRow row;
        row.op = ops[k];
        for (long t = 0; t < trials; ++t) {
            const Index lo = std::min<Index>(2, max_dim);
            const Index n = lo + Index(rng.below(std::uint64_t(max_dim - lo + 1)));
            const Index s = 1 + Index(rng.below(std::uint64_t(n)));
            const double lambda = rng.uniform(0.01, 2.0);
            Vector y(n);
            for (Index i = 0; i < n; ++i) y[i] = 2 * rng.normal();
            Regularizer r = Regularizer::l1();
            switch (k) {
                case 1: r = Regularizer::l2_squared(); break;
                case 2: r = Regularizer::l2(); break;
                case 3: r = Regularizer::l1_minus_al2(rng.uniform(0.05, 1.0)); break;
                case 4: r = Regularizer::mcp(rng.uniform(0.2, 4.0)); break;
                case 5: r = Regularizer::lsp(rng.uniform(0.1, 3.0)); break;
                default: break;
            }
            const ProxProblem pp(SDiffPenalty(r, s), lambda, y);
            Vector xc = prox_sdiff(pp);
            if (inject_fault) xc = 1.05 * xc + Vector::Constant(n, 0.01);
            const Vector xo = prox_oracle(pp, budget, Rng::derive(seed, 1000 + t));
            const double ec = prox_objective(pp, xc), eo = prox_objective(pp, xo);
            row.max_gap = std::max(row.max_gap, (ec - eo) / std::max(1.0, eo));
            ++row.instances;
        }
        out.push_back(row);
    }
    return out;
}

// ---- JSON configs (unknown fields are errors) ----

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ParameterError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ParameterError("config: unknown field '" + it.key() + "' in " + where);
    }
}

template <class T>
T field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParameterError("config: missing field '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ParameterError("config: field '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

template <class T>
std::optional<T> opt_field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return field<T>(j, key, where);
}

}  // namespace detail

// "l1" | "l2" | "l2sq" | "l1-l2" | {"kind": ..., "a"/"theta"/"theta1"/"theta2": ...}
inline Regularizer regularizer_from_json(const Json& j, const std::string& where) {
    std::string kind;
    Json params = Json::object();
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else {
        detail::check_keys(j, {"kind", "a", "theta", "theta1", "theta2"}, where);
        kind = detail::field<std::string>(j, "kind", where);
        params = j;
    }
    auto p = [&](const char* k) { return detail::field<double>(params, k, where); };
    if (kind == "l1") return Regularizer::l1();
    if (kind == "l2") return Regularizer::l2();
    if (kind == "l2sq") return Regularizer::l2_squared();
    if (kind == "l1-l2") return Regularizer::l1_minus_al2(params.contains("a") ? p("a") : 1.0);
    if (kind == "lsp") return Regularizer::lsp(p("theta"));
    if (kind == "mcp") return Regularizer::mcp(p("theta"));
    if (kind == "scad") return Regularizer::scad(p("theta"));
    if (kind == "huber-l2") return Regularizer::huber_of_l2(p("theta"));
    if (kind == "log-l2") return Regularizer::log_of_l2(p("theta"));
    if (kind == "mcp-l2") return Regularizer::mcp_of_l2(p("theta"));
    if (kind == "lsp-weighted") return Regularizer::lsp_weighted(p("theta1"), p("theta2"));
    throw ParameterError("config: unknown regularizer '" + kind + "' in " + where);
}

inline SolverSpec solver_spec_from_json(const Json& j, const std::string& where) {
    detail::check_keys(j, {"name", "method", "regularizer", "s", "rho", "step", "tol", "max_iter", "warm_start",
                           "adaptive_s", "generalized", "mu", "admm_mu", "allow_unsafe_step"},
                       where);
    SolverSpec s;
    s.method = method_from_string(detail::field<std::string>(j, "method", where));
    s.name = detail::opt_field<std::string>(j, "name", where).value_or(to_string(s.method));
    if (j.contains("regularizer")) s.reg = regularizer_from_json(j.at("regularizer"), where + ".regularizer");
    if (auto v = detail::opt_field<long>(j, "s", where)) s.s = Index(*v);
    s.rho = detail::field<double>(j, "rho", where);
    s.step = detail::opt_field<double>(j, "step", where);
    s.tol = detail::opt_field<double>(j, "tol", where).value_or(s.tol);
    s.max_iter = detail::opt_field<long>(j, "max_iter", where);
    s.warm_start = detail::opt_field<bool>(j, "warm_start", where).value_or(true);
    s.adaptive_s = detail::opt_field<bool>(j, "adaptive_s", where).value_or(false);
    s.generalized = detail::opt_field<bool>(j, "generalized", where).value_or(false);
    s.mu = detail::opt_field<double>(j, "mu", where).value_or(1.0);
    s.admm_mu = detail::opt_field<double>(j, "admm_mu", where);
    s.allow_unsafe_step = detail::opt_field<bool>(j, "allow_unsafe_step", where).value_or(false);
    if (!(s.rho > 0)) throw ParameterError("config: rho must be > 0 in " + where);
    return s;
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
    const std::string w = "experiment";
    detail::check_keys(j, {"id", "matrix", "M", "N", "s_truth", "noise", "solvers", "trials", "seed",
                           "success_threshold", "warm_rho", "warm_iters"},
                       w);
    ExperimentConfig c;
    c.id = detail::opt_field<std::string>(j, "id", w).value_or("custom");
    c.kind = matrix_kind_from_string(detail::field<std::string>(j, "matrix", w));
    c.M = detail::field<long>(j, "M", w);
    c.N = detail::field<long>(j, "N", w);
    c.s_truth = detail::field<long>(j, "s_truth", w);
    c.noise = detail::opt_field<double>(j, "noise", w).value_or(0.0);
    c.trials = detail::opt_field<long>(j, "trials", w).value_or(10);
    c.seed = detail::opt_field<std::uint64_t>(j, "seed", w).value_or(1);
    c.success_threshold = detail::opt_field<double>(j, "success_threshold", w).value_or(1e-3);
    c.warm_rho = detail::opt_field<double>(j, "warm_rho", w);
    c.warm_iters = detail::opt_field<long>(j, "warm_iters", w);
    if (j.contains("solvers")) {
        const Json& arr = j.at("solvers");
        if (!arr.is_array()) throw ParameterError("config: 'solvers' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            c.roster.push_back(solver_spec_from_json(arr[i], "solvers[" + std::to_string(i) + "]"));
    } else {
        c.roster = default_roster(c.noise > 0);
    }
    c.validate();
    return c;
}

// ---- single solve jobs ----

struct SolveJob {
    SensingMatrix S;
    Vector b;
    std::optional<Vector> x_true;  // known when b was synthesized
    SolverSpec solver;
    Index s = 1;
    double warm_rho = 1e-6;
    long warm_iters = 0;
    std::uint64_t seed = 1;
};

struct SolveOutcome {
    SolveTrace trace;
    std::optional<double> rel_err;
};

inline Vector read_vector_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<double> v;
    std::string line;
    long ln = 0;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty() || line[0] == '#') continue;
        try {
            v.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(ln) + ": not a number");
        }
    }
    return Eigen::Map<const Vector>(v.data(), Index(v.size()));
}

inline void write_vector_text(const Vector& x, const std::string& path) {
    std::FILE* f = detail::open_out(path);
    for (Index i = 0; i < x.size(); ++i) std::fprintf(f, "%.17g\n", x[i]);
    detail::close_out(f, path);
}

inline SensingMatrix read_matrix_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[8] = {};
    is.read(magic, 8);
    if (is && std::equal(magic, magic + 8, detail::kMagic)) return read_matrix_binary(path);
    return read_matrix_csv(path);
}

// schema: {"seed", "matrix": {...}, "b": {...}, "solver": {...}, "warm_rho", "warm_iters"}
inline SolveJob solve_job_from_json(const Json& j) {
    detail::check_keys(j, {"seed", "matrix", "b", "solver", "warm_rho", "warm_iters"}, "solve config");
    SolveJob job;
    job.seed = detail::opt_field<std::uint64_t>(j, "seed", "solve config").value_or(1);
    if (!j.contains("matrix")) throw ParameterError("config: missing field 'matrix' in solve config");
    if (!j.contains("b")) throw ParameterError("config: missing field 'b' in solve config");
    if (!j.contains("solver")) throw ParameterError("config: missing field 'solver' in solve config");
    const Json& m = j.at("matrix");
    detail::check_keys(m, {"kind", "M", "N", "seed", "file"}, "matrix");
    if (m.contains("file")) {
        job.S = read_matrix_file(detail::field<std::string>(m, "file", "matrix"));
    } else {
        const auto kind = detail::field<std::string>(m, "kind", "matrix");
        const Index N = detail::field<long>(m, "N", "matrix");
        const std::uint64_t ms = detail::opt_field<std::uint64_t>(m, "seed", "matrix").value_or(Rng::derive(job.seed, 0));
        if (kind == "identity") {
            if (N < 1) throw ParameterError("config: matrix.N must be >= 1");
            job.S = SensingMatrix{Matrix::Identity(N, N), MatrixKind::Custom, 0};
        } else {
            const Index M = detail::field<long>(m, "M", "matrix");
            const auto mk = matrix_kind_from_string(kind);
            if (mk == MatrixKind::Custom) throw ParameterError("config: matrix.kind custom needs 'file'");
            job.S = mk == MatrixKind::PartialDct ? gen_partial_dct(M, N, ms) : gen_gaussian(M, N, ms);
        }
    }
    const Json& bj = j.at("b");
    detail::check_keys(bj, {"values", "file", "synthesize"}, "b");
    std::optional<Index> synth_s;
    if (bj.contains("values")) {
        const auto v = detail::field<std::vector<double>>(bj, "values", "b");
        job.b = Eigen::Map<const Vector>(v.data(), Index(v.size()));
    } else if (bj.contains("file")) {
        job.b = read_vector_text(detail::field<std::string>(bj, "file", "b"));
    } else if (bj.contains("synthesize")) {
        const Json& sj = bj.at("synthesize");
        detail::check_keys(sj, {"s_truth", "noise", "seed"}, "b.synthesize");
        const Index k = detail::field<long>(sj, "s_truth", "b.synthesize");
        const double noise = detail::opt_field<double>(sj, "noise", "b.synthesize").value_or(0.0);
        const std::uint64_t ss = detail::opt_field<std::uint64_t>(sj, "seed", "b.synthesize").value_or(Rng::derive(job.seed, 1));
        Vector x = gen_sparse_signal(job.S.cols(), k, ss);
        job.b = job.S.A * x;
        if (noise > 0) {
            Rng nr(Rng::derive(ss, 2));
            for (Index i = 0; i < job.b.size(); ++i) job.b[i] += noise * nr.normal();
        }
        job.x_true = std::move(x);
        synth_s = k;
    } else {
        throw ParameterError("config: 'b' needs one of values, file, synthesize");
    }
    if (job.b.size() != job.S.rows())
        throw DimensionError("config: b has length " + std::to_string(job.b.size()) + ", matrix has " +
                             std::to_string(job.S.rows()) + " rows");
    job.solver = solver_spec_from_json(j.at("solver"), "solver");
    const bool needs_s = uses_penalty(job.solver.method) || job.solver.method == Method::AIHT;
    if (job.solver.s)
        job.s = *job.solver.s;
    else if (synth_s)
        job.s = *synth_s;
    else if (needs_s)
        throw ParameterError("config: missing field 's' in solver");
    job.warm_rho = detail::opt_field<double>(j, "warm_rho", "solve config").value_or(1e-6);
    job.warm_iters = detail::opt_field<long>(j, "warm_iters", "solve config").value_or(long(job.S.cols()));
    return job;
}

inline SolveOutcome run_solve_job(const SolveJob& job) {
    const LeastSquaresProblem prob(job.S.A, job.b);
    const Vector x0 = job.solver.warm_start ? l1_admm_solve(prob, job.warm_rho, job.warm_iters)
                                            : Vector::Zero(job.S.cols());
    SolverSpec sp = job.solver;
    sp.s = job.s;
    SolveOutcome out;
    out.trace = run_solver(sp, prob, x0, job.s);
    if (job.x_true) out.rel_err = rel_err(out.trace.solution, *job.x_true);
    return out;
}

// ---- presets ----

enum class PresetKind { SuccessSweep, RelErrTable, SolverComparison, SSensitivity, Toy };

struct PresetOptions {
    std::optional<long> trials;
    std::optional<std::uint64_t> seed;
    bool full = false;                 // full-size ladder and trial counts
    std::vector<std::string> solvers;  // keep only these roster entries
    bool timing = false;
};

struct Preset {
    std::string name;
    PresetKind kind = PresetKind::RelErrTable;
    std::vector<ExperimentConfig> configs;
    std::vector<Index> sweep;  // sparsities or s values
    bool timing = false;
};

inline std::vector<std::string> preset_names() {
    return {"fig3_gaussian", "fig3_dct", "table2", "table3", "table4", "table5", "table6", "fig5", "toy"};
}

inline Preset make_preset(const std::string& name, const PresetOptions& opt = {}) {
    Preset p;
    p.name = name;
    p.timing = opt.timing;
    const std::uint64_t seed = opt.seed.value_or(20240601);
    auto base = [&](std::string id, MatrixKind k, Index M, Index N, Index st, double noise, long trials,
                    std::vector<SolverSpec> roster) {
        ExperimentConfig c;
        c.id = std::move(id);
        c.kind = k;
        c.M = M;
        c.N = N;
        c.s_truth = st;
        c.noise = noise;
        c.trials = opt.trials.value_or(trials);
        c.seed = seed;
        c.roster = std::move(roster);
        if (!opt.solvers.empty()) {
            std::vector<SolverSpec> kept;
            for (auto& sp : c.roster)
                if (std::find(opt.solvers.begin(), opt.solvers.end(), sp.name) != opt.solvers.end()) kept.push_back(sp);
            if (kept.empty()) throw ParameterError("preset " + name + ": --solver matches no roster entry");
            c.roster = std::move(kept);
        }
        return c;
    };
    const auto G = MatrixKind::GaussianUnitColumns, D = MatrixKind::PartialDct;
    if (name == "fig3_gaussian" || name == "fig3_dct") {
        p.kind = PresetKind::SuccessSweep;
        p.configs.push_back(base(name, name == "fig3_dct" ? D : G, 64, 256, 8, 0.0, 100, default_roster(false)));
        p.sweep = {4, 8, 12, 16, 20, 24, 28, 32, 36};
    } else if (name == "table2" || name == "table3" || name == "table4" || name == "table5") {
        p.kind = PresetKind::RelErrTable;
        const bool noisy = name == "table4" || name == "table5";
        const auto k = (name == "table3" || name == "table5") ? D : G;
        const int top = opt.full ? (noisy ? 4 : 8) : 2;
        for (int i = 1; i <= top; ++i)
            p.configs.push_back(base(name + "/i=" + std::to_string(i), k, 256 * i, 1024 * i, 48 * i,
                                     noisy ? 0.01 : 0.0, opt.full ? 30 : 10, default_roster(noisy)));
    } else if (name == "table6") {
        p.kind = PresetKind::SolverComparison;
        for (bool noisy : {false, true})
            for (auto k : {G, D})
                p.configs.push_back(base(std::string("table6/") + (noisy ? "noisy" : "noiseless") + "-" + to_string(k),
                                         k, 256, 1024, 48, noisy ? 0.01 : 0.0, opt.full ? 30 : 10,
                                         comparison_roster(noisy)));
    } else if (name == "fig5") {
        p.kind = PresetKind::SSensitivity;
        for (auto k : {G, D})
            p.configs.push_back(base("fig5/" + to_string(k), k, 256, 1024, 48, 0.0, opt.full ? 30 : 5,
                                     s_sensitivity_roster(false)));
        p.sweep = {10, 20, 30, 40, 48, 60, 80, 100, 200, 500, 1000};
    } else if (name == "toy") {
        p.kind = PresetKind::Toy;
    } else {
        std::string all;
        for (const auto& n : preset_names()) all += (all.empty() ? "" : ", ") + n;
        throw ParameterError("unknown preset '" + name + "'; valid presets: " + all);
    }
    return p;
}

struct PresetReport {
    std::string text;                // human-readable summary
    std::vector<std::string> files;  // artifacts written
    std::vector<SummaryStats> summary;
    std::optional<ToyResult> toy;
};

namespace detail {

inline std::string slug(std::string s) {
    for (char& c : s)
        if (c == '/' || c == '=' || c == ' ') c = '_';
    return s;
}

inline std::string format_summary(const std::vector<SummaryStats>& v) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-32s %-10s %12s %12s %8s %10s\n", "config", "solver", "mean_relerr", "std",
                  "success", "mean_iter");
    out += buf;
    for (const auto& s : v) {
        std::snprintf(buf, sizeof buf, "%-32s %-10s %12.3e %12.3e %8.3f %10.1f\n", s.config_id.c_str(),
                      s.solver.c_str(), s.mean_rel_err, s.std_rel_err, s.success_rate, s.mean_iterations);
        out += buf;
    }
    return out;
}

}  // namespace detail

inline PresetReport run_preset(const Preset& p, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    PresetReport rep;
    auto path = [&](const std::string& leaf) {
        const std::string f = (std::filesystem::path(out_dir) / (p.name + "_" + leaf)).string();
        rep.files.push_back(f);
        return f;
    };
    std::vector<ResultRow> rows;
    switch (p.kind) {
        case PresetKind::Toy: {
            const ToyResult toy = run_toy_example(make_grid(-2, 12, 0.01));
            std::FILE* f = detail::open_out(path("curves.csv"));
            std::fprintf(f, "t");
            for (const auto& n : toy.names) std::fprintf(f, ",%s", n.c_str());
            std::fprintf(f, "\n");
            for (std::size_t i = 0; i < toy.t.size(); ++i) {
                std::fprintf(f, "%s", detail::num(toy.t[i]).c_str());
                for (const auto& v : toy.values) std::fprintf(f, ",%s", detail::num(v[i]).c_str());
                std::fprintf(f, "\n");
            }
            detail::close_out(f, rep.files.back());
            f = detail::open_out(path("minima.csv"));
            std::fprintf(f, "curve,argmin_t\n");
            char buf[128];
            rep.text = "curve          argmin t\n";
            for (std::size_t c = 0; c < toy.names.size(); ++c) {
                std::fprintf(f, "%s,%s\n", toy.names[c].c_str(), detail::num(toy.argmin_t[c]).c_str());
                std::snprintf(buf, sizeof buf, "%-14s %.2f\n", toy.names[c].c_str(), toy.argmin_t[c] + 0.0);
                rep.text += buf;
            }
            detail::close_out(f, rep.files.back());
            rep.toy = toy;
            return rep;
        }
        case PresetKind::SuccessSweep: {
            const SweepResult sw = run_success_rate_sweep(p.configs.at(0), p.sweep);
            write_success_csv(sw, path("success.csv"));
            rows = sw.rows();
            break;
        }
        case PresetKind::RelErrTable: {
            for (const auto& r : run_relerr_table(p.configs)) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
            break;
        }
        case PresetKind::SolverComparison: {
            for (const auto& c : p.configs) {
                const ComparisonResult cr = run_solver_comparison(c);
                rows.insert(rows.end(), cr.result.rows.begin(), cr.result.rows.end());
                for (const auto& [solver, curve] : cr.log_curves) {
                    std::vector<double> it(curve.size());
                    for (std::size_t k = 0; k < it.size(); ++k) it[k] = double(k);
                    write_curve(it, curve, path("curve_" + detail::slug(c.id.substr(p.name.size() + 1)) + "_" + solver + ".csv"),
                                "iteration", "log_rel_err");
                }
            }
            break;
        }
        case PresetKind::SSensitivity: {
            for (const auto& c : p.configs) {
                const SweepResult sw = run_s_sensitivity(c, p.sweep);
                const auto r = sw.rows();
                rows.insert(rows.end(), r.begin(), r.end());
                for (const auto& sp : c.roster) {
                    std::vector<double> xs, ys;
                    for (std::size_t i = 0; i < sw.runs.size(); ++i) {
                        xs.push_back(double(sw.values[i]));
                        ys.push_back(sw.runs[i].stats(sp.name).mean_rel_err);
                    }
                    write_curve(xs, ys, path("curve_" + detail::slug(c.id.substr(p.name.size() + 1)) + "_" + sp.name + ".csv"),
                                "s", "mean_rel_err");
                }
            }
            break;
        }
    }
    std::sort(rows.begin(), rows.end(), row_less);
    write_results(rows, path("results.csv"), Format::Csv, p.timing);
    rep.summary = summarize(rows);
    write_summary_csv(rep.summary, path("summary.csv"), p.timing);
    rep.text = detail::format_summary(rep.summary);
    return rep;
}

}  // namespace sdiff
