#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdiff/core.hpp"
#include "sdiff/operators.hpp"
#include "sdiff/prox.hpp"

namespace sdiff {

struct LeastSquaresProblem {
    LeastSquaresProblem(Matrix A_, Vector b_, std::optional<double> L = std::nullopt)
        : A(std::move(A_)), b(std::move(b_)) {
        if (A.rows() < 1 || A.cols() < 1) throw DimensionError("LeastSquaresProblem: empty A");
        if (b.size() != A.rows())
            throw DimensionError("LeastSquaresProblem: b has length " + std::to_string(b.size()) + ", A has " +
                                 std::to_string(A.rows()) + " rows");
        if (!A.allFinite() || !b.allFinite()) throw ParameterError("LeastSquaresProblem: non-finite data");
        lipschitz = L ? *L : spectral_norm_sq(A);
        if (!(lipschitz > 0)) throw ParameterError("LeastSquaresProblem: A is zero (L = 0)");
    }
    LeastSquaresProblem(const SensingMatrix& S, Vector b_) : LeastSquaresProblem(S.A, std::move(b_)) {}

    Index rows() const { return A.rows(); }
    Index cols() const { return A.cols(); }
    double loss(const Vector& x) const { return 0.5 * (A * x - b).squaredNorm(); }

    Matrix A;
    Vector b;
    double lipschitz = 0;
};

inline Vector ls_gradient(const LeastSquaresProblem& prob, const Vector& x) {
    if (x.size() != prob.cols())
        throw DimensionError("ls_gradient: x has length " + std::to_string(x.size()) + ", expected " +
                             std::to_string(prob.cols()));
    return prob.A.transpose() * (prob.A * x - prob.b);
}

enum class InitKind { Zeros, L1AdmmWarmStart, Given };

struct SolverConfig {
    double rho = 0.1;
    std::optional<double> step;   // beta, default 0.99/L
    std::optional<long> max_iter;  // default 5N
    double tol = 1e-5;
    InitKind init = InitKind::Zeros;
    Vector init_vector;                     // used with InitKind::Given
    std::optional<long> warm_start_iters;   // default N
    std::optional<double> warm_start_rho;   // default rho
    bool adaptive_s = false;
    std::optional<double> adaptive_epsilon;  // default 1e-3 * ||x0||_inf
    std::vector<double> rho_schedule;        // continuation, increasing
    bool allow_unsafe_step = false;          // permit step*L >= 1
    bool keep_iterates = false;
    std::function<void(long, const Vector&)> on_iterate;
};

struct AdmmConfig {
    double mu = 1.0;
    double tol = 1e-5;  // same relative-step rule as the outer loop
    std::optional<long> max_inner;  // default 5N
    long max_outer = 20;
    // w = sign(x) - g1 + g2: linearize everything but ||x||_1
    bool generalized = false;
};

struct SolveTrace {
    Vector solution;
    std::vector<double> objective_history;  // F(x^[0]), F(x^[1]), ...
    std::vector<double> step_norm_history;  // ||x^[k+1] - x^[k]||
    long iterations = 0;
    bool converged = false;
    double fixed_point_residual = std::numeric_limits<double>::quiet_NaN();
    long outer_iterations = 0;
    std::vector<Index> s_history;
    std::vector<Vector> iterates;  // only with keep_iterates
};

inline long default_max_iter(const LeastSquaresProblem& prob, const SolverConfig& cfg) {
    return cfg.max_iter ? *cfg.max_iter : 5 * long(prob.cols());
}

inline double resolve_step(const LeastSquaresProblem& prob, const SolverConfig& cfg, const char* who) {
    const double beta = cfg.step ? *cfg.step : 0.99 / prob.lipschitz;
    if (!(beta > 0) || !std::isfinite(beta)) throw ParameterError(std::string(who) + ": step must be > 0");
    if (beta * prob.lipschitz >= 1 && !cfg.allow_unsafe_step)
        throw ParameterError(std::string(who) + ": step*L = " + std::to_string(beta * prob.lipschitz) +
                             " >= 1 voids the descent guarantee; set allow_unsafe_step to run anyway");
    return beta;
}

inline bool relative_step_small(double step_norm, const Vector& x, double tol) {
    return step_norm / std::max(x.norm(), 1.0) < tol;
}

namespace detail {

inline void guard_finite(const Vector& x, const char* who, long k) {
    if (!x.allFinite()) throw DivergenceError(who, k);
}

struct Recorder {
    SolveTrace& tr;
    const SolverConfig& cfg;
    void start(const Vector& x0, double f0) {
        tr.objective_history.push_back(f0);
        if (cfg.keep_iterates) tr.iterates.push_back(x0);
    }
    void step(long k, const Vector& x, double f, double dn) {
        tr.objective_history.push_back(f);
        tr.step_norm_history.push_back(dn);
        if (cfg.keep_iterates) tr.iterates.push_back(x);
        if (cfg.on_iterate) cfg.on_iterate(k, x);
    }
};

// (A^T A + mu I)^{-1} via the smaller Gram matrix
class RidgeSolver {
public:
    RidgeSolver(const Matrix& A, double mu) : A_(A), mu_(mu), wide_(A.rows() < A.cols()) {
        if (!(mu > 0)) throw ParameterError("ADMM: mu must be > 0");
        if (wide_) {
            Matrix K = A * A.transpose();
            K.diagonal().array() += mu;
            llt_.compute(K);
        } else {
            Matrix K = A.transpose() * A;
            K.diagonal().array() += mu;
            llt_.compute(K);
        }
        if (llt_.info() != Eigen::Success) throw std::runtime_error("ADMM: factorization failed");
    }
    Vector solve(const Vector& r) const {
        if (!wide_) return llt_.solve(r);
        return (r - A_.transpose() * llt_.solve(A_ * r)) / mu_;
    }

private:
    const Matrix& A_;
    double mu_;
    bool wide_;
    Eigen::LLT<Matrix> llt_;
};

struct AdmmState {
    Vector x, v, u;
};

// min 1/2||Ax-b||^2 - rho<w,x> + rho||x||_1 by scaled ADMM; result in st.v
inline long admm_l1_inner(const RidgeSolver& sys, const Vector& Atb, double rho,
                          const Vector& w, double mu, double tol, long max_sweeps, AdmmState& st,
                          const std::function<void(const Vector&)>& per_sweep = {}) {
    const Vector rhs0 = Atb + rho * w;
    Vector v_old;
    long sweep = 0;
    while (sweep < max_sweeps) {
        ++sweep;
        st.x = sys.solve(rhs0 + mu * (st.v - st.u));
        v_old = st.v;
        for (Index i = 0; i < st.v.size(); ++i) st.v[i] = shrink(st.x[i] + st.u[i], rho / mu);
        st.u += st.x - st.v;
        guard_finite(st.v, "admm", sweep);
        if (per_sweep) per_sweep(st.v);
        if (relative_step_small((st.v - v_old).norm(), st.v, tol)) break;
    }
    return sweep;
}

}  // namespace detail

// augmented weight for the plain l1 problem; with mu = 1 and rho ~ 1e-6 the
// threshold rho/mu is negligible and N sweeps barely leave the least-norm point
inline double l1_admm_default_mu(double rho) { return rho > 0 ? 100 * rho : 1.0; }

// standard ADMM for 1/2||Ax-b||^2 + rho||x||_1 from zero, exactly `iters` sweeps
inline Vector l1_admm_solve(const LeastSquaresProblem& prob, double rho, long iters,
                            std::optional<double> mu_opt = {}) {
    if (iters < 1) throw ParameterError("l1_admm_solve: iters must be >= 1");
    if (!(rho >= 0)) throw ParameterError("l1_admm_solve: rho must be >= 0");
    const double mu = mu_opt.value_or(l1_admm_default_mu(rho));
    const Index n = prob.cols();
    detail::RidgeSolver sys(prob.A, mu);
    const Vector Atb = prob.A.transpose() * prob.b;
    detail::AdmmState st{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
    const Vector w = Vector::Zero(n);
    for (long k = 0; k < iters; ++k) detail::admm_l1_inner(sys, Atb, rho, w, mu, 0.0, 1, st);
    return st.v;
}

inline Vector initial_point(const LeastSquaresProblem& prob, const SolverConfig& cfg) {
    const Index n = prob.cols();
    switch (cfg.init) {
        case InitKind::Zeros: return Vector::Zero(n);
        case InitKind::L1AdmmWarmStart:
            return l1_admm_solve(prob, cfg.warm_start_rho.value_or(cfg.rho), cfg.warm_start_iters.value_or(long(n)));
        case InitKind::Given:
            if (cfg.init_vector.size() != n)
                throw DimensionError("init vector has length " + std::to_string(cfg.init_vector.size()) +
                                     ", expected " + std::to_string(n));
            require_finite(cfg.init_vector, "init vector");
            return cfg.init_vector;
    }
    return Vector::Zero(n);
}

// s^[k+1] = #{ i : |x^[k]_i| >= min(|x^[k-1]_{pi(s^[k-1])}|, eps) }, clamped to [1, N].
// Exact zeros never count, so a zero threshold does not select the whole vector.
inline Index adaptive_s_update(const Vector& x_curr, const Vector& x_prev, Index s_prev, double epsilon) {
    if (!(epsilon > 0)) throw ParameterError("adaptive_s_update: epsilon must be > 0");
    if (x_curr.size() != x_prev.size()) throw DimensionError("adaptive_s_update: length mismatch");
    require_sparsity(s_prev, x_prev.size());
    const double thr = std::min(detail::rank_magnitude(x_prev, s_prev), epsilon);
    Index count = 0;
    for (Index i = 0; i < x_curr.size(); ++i) {
        const double m = std::abs(x_curr[i]);
        if (m > 0 && m >= thr) ++count;
    }
    return std::clamp<Index>(count, 1, x_curr.size());
}

inline double sdiff_objective(const LeastSquaresProblem& prob, const SDiffPenalty& pen, double rho, const Vector& x) {
    return prob.loss(x) + rho * penalty_eval(pen, x);
}

namespace detail {

inline SolveTrace fbs_stage(const LeastSquaresProblem& prob, SDiffPenalty pen, const SolverConfig& cfg, double rho,
                            Vector x, double beta, long max_iter) {
    if (!has_closed_form_prox(pen.reg))
        throw CapabilityError("fbs_solve: no closed-form prox for " + pen.reg.name());
    if (!(rho > 0)) throw ParameterError("fbs_solve: rho must be > 0");
    SolveTrace tr;
    Recorder rec{tr, cfg};
    rec.start(x, sdiff_objective(prob, pen, rho, x));
    const double eps = cfg.adaptive_epsilon ? *cfg.adaptive_epsilon
                                            : std::max(1e-3 * x.lpNorm<Eigen::Infinity>(), 1e-12);
    Vector x_prev = x;
    std::vector<Index> s_hist{pen.s, pen.s};
    tr.s_history.push_back(pen.s);
    for (long k = 0; k < max_iter; ++k) {
        if (cfg.adaptive_s && k >= 1) {
            const Index s_next = adaptive_s_update(x, x_prev, s_hist[s_hist.size() - 2], eps);
            s_hist.push_back(s_next);
            pen.s = s_next;
            tr.s_history.push_back(s_next);
        }
        const Vector y = x - beta * ls_gradient(prob, x);
        guard_finite(y, "fbs", k + 1);
        Vector xn = prox_sdiff(ProxProblem(pen, beta * rho, y));
        guard_finite(xn, "fbs", k + 1);
        const double dn = (xn - x).norm();
        x_prev = x;
        x = std::move(xn);
        ++tr.iterations;
        rec.step(k + 1, x, sdiff_objective(prob, pen, rho, x), dn);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.solution = x;
    const Vector fp = prox_sdiff(ProxProblem(pen, beta * rho, x - beta * ls_gradient(prob, x)));
    tr.fixed_point_residual = (x - fp).norm();
    return tr;
}

inline void append_trace(SolveTrace& into, SolveTrace&& more) {
    if (into.objective_history.empty()) {
        into = std::move(more);
        return;
    }
    into.objective_history.insert(into.objective_history.end(), more.objective_history.begin() + 1,
                                  more.objective_history.end());
    into.step_norm_history.insert(into.step_norm_history.end(), more.step_norm_history.begin(),
                                  more.step_norm_history.end());
    if (!more.iterates.empty())
        into.iterates.insert(into.iterates.end(), more.iterates.begin() + 1, more.iterates.end());
    into.s_history.insert(into.s_history.end(), more.s_history.begin(), more.s_history.end());
    into.iterations += more.iterations;
    into.converged = more.converged;
    into.solution = std::move(more.solution);
    into.fixed_point_residual = more.fixed_point_residual;
}

}  // namespace detail

// x^[k+1] = prox_{beta rho P}(x^[k] - beta grad phi(x^[k]))
inline SolveTrace fbs_solve(const LeastSquaresProblem& prob, const SDiffPenalty& penalty, const SolverConfig& cfg) {
    require_sparsity(penalty.s, prob.cols());
    const double beta = resolve_step(prob, cfg, "fbs_solve");
    const long max_iter = default_max_iter(prob, cfg);
    Vector x = initial_point(prob, cfg);
    if (cfg.rho_schedule.empty()) return detail::fbs_stage(prob, penalty, cfg, cfg.rho, std::move(x), beta, max_iter);
    SolveTrace tr;
    double last = 0;
    for (double rho_t : cfg.rho_schedule) {
        if (!(rho_t > last)) throw ParameterError("rho_schedule must be positive and increasing");
        last = rho_t;
        SolveTrace stage = detail::fbs_stage(prob, penalty, cfg, rho_t, x, beta, max_iter);
        x = stage.solution;
        detail::append_trace(tr, std::move(stage));
    }
    return tr;
}

// the two descent checks on a recorded FBS trace; F(x^[0]) stands in for F(0)
inline bool check_descent_bound(const SolveTrace& tr, double L, double beta) {
    const auto& F = tr.objective_history;
    const auto& d = tr.step_norm_history;
    if (F.size() != d.size() + 1) return false;
    if (d.empty()) return true;
    const double slack = 1e-10 * std::max(1.0, std::abs(F[0]));
    const double c = L / 2 - 1 / (2 * beta);
    for (std::size_t k = 0; k < d.size(); ++k)
        if (F[k + 1] - F[k] > c * d[k] * d[k] + slack) return false;
    const double gap = F[0] - *std::min_element(F.begin(), F.end());
    const double denom = 1 - L * beta;
    double running_min = d[0] * d[0];
    for (std::size_t K = 1; K < d.size(); ++K) {
        running_min = std::min(running_min, d[K] * d[K]);
        if (denom <= 0) {
            if (running_min > slack) return false;
            continue;
        }
        if (running_min > 2 * beta * gap / (double(K) * denom) + slack) return false;
    }
    return true;
}

// Delta_k = sum_{Lambda_{k+1}} r(x^[k]_i) - sum_{Lambda_k} r(x^[k]_i)
inline double refined_descent_delta(const Vector& x_prev, const Vector& x_next, const SDiffPenalty& penalty) {
    if (!penalty.reg.separable())
        throw CapabilityError("refined_descent_delta: " + penalty.reg.name() + " is not separable");
    if (x_prev.size() != x_next.size()) throw DimensionError("refined_descent_delta: length mismatch");
    require_sparsity(penalty.s, x_prev.size());
    const auto top_prev = detail::top_mask(x_prev, penalty.s);
    const auto top_next = detail::top_mask(x_next, penalty.s);
    double acc = 0;
    for (Index i = 0; i < x_prev.size(); ++i) {
        const double r = penalty.reg.scalar(x_prev[i]);
        if (!top_next[i]) acc += r;
        if (!top_prev[i]) acc -= r;
    }
    return acc;
}

namespace detail {

// argmin c*P1(x) + 1/2||x - v||^2 for the P1 shapes with a cheap prox
inline Vector p1_prox(const Regularizer& r, const Vector& v, double c) {
    switch (r.kind()) {
        case RegKind::L1: return v.unaryExpr([c](double t) { return shrink(t, c); });
        case RegKind::L2Squared: return v / (1 + 2 * c);
        case RegKind::L2: {
            const double n = v.norm();
            return n > c ? Vector(v * (1 - c / n)) : Vector(Vector::Zero(v.size()));
        }
        default: throw CapabilityError("pdca_solve: P1 of " + r.name() + " has no simple prox");
    }
}

}  // namespace detail

// x^[k+1] = argmin rho P1(x) + L/2 ||x - (x^[k] - (grad phi(x^[k]) - rho w^[k]) / L)||^2
inline SolveTrace pdca_solve(const LeastSquaresProblem& prob, const SDiffPenalty& penalty, const SolverConfig& cfg) {
    require_sparsity(penalty.s, prob.cols());
    if (!(cfg.rho > 0)) throw ParameterError("pdca_solve: rho must be > 0");
    detail::p1_prox(penalty.reg, Vector::Zero(1), 0.0);  // capability check up front
    const double L = cfg.step ? 1 / *cfg.step : prob.lipschitz;
    const long max_iter = default_max_iter(prob, cfg);
    SolveTrace tr;
    detail::Recorder rec{tr, cfg};
    Vector x = initial_point(prob, cfg);
    rec.start(x, sdiff_objective(prob, penalty, cfg.rho, x));
    for (long k = 0; k < max_iter; ++k) {
        const Vector w = p2_subgradient(penalty, x);
        const Vector v = x - (ls_gradient(prob, x) - cfg.rho * w) / L;
        detail::guard_finite(v, "pdca", k + 1);
        Vector xn = detail::p1_prox(penalty.reg, v, cfg.rho / L);
        const double dn = (xn - x).norm();
        x = std::move(xn);
        ++tr.iterations;
        rec.step(k + 1, x, sdiff_objective(prob, penalty, cfg.rho, x), dn);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.solution = x;
    return tr;
}

namespace detail {

using LinearizeFn = std::function<Vector(const Vector&)>;
using ObjectiveFn = std::function<double(const Vector&)>;

// outer DCA loop; each convex subproblem 1/2||Ax-b||^2 + rho||x||_1 - rho<w,x> by ADMM
inline SolveTrace dca_admm_core(const LeastSquaresProblem& prob, double rho, const SolverConfig& cfg,
                                const AdmmConfig& inner, const LinearizeFn& linearize, const ObjectiveFn& F,
                                const char* who) {
    if (!(rho > 0)) throw ParameterError(std::string(who) + ": rho must be > 0");
    if (inner.max_outer < 1) throw ParameterError(std::string(who) + ": max_outer must be >= 1");
    const Index n = prob.cols();
    const long max_inner = inner.max_inner ? *inner.max_inner : 5 * long(n);
    const long budget = cfg.max_iter ? *cfg.max_iter : std::numeric_limits<long>::max();
    RidgeSolver sys(prob.A, inner.mu);
    const Vector Atb = prob.A.transpose() * prob.b;
    SolveTrace tr;
    Recorder rec{tr, cfg};
    Vector x = initial_point(prob, cfg);
    rec.start(x, F(x));
    AdmmState st{x, x, Vector::Zero(n)};
    long sweeps_total = 0;
    for (long k = 0; k < inner.max_outer && sweeps_total < budget; ++k) {
        const Vector w = linearize(x);
        guard_finite(w, who, k + 1);
        auto per_sweep = [&](const Vector& v) {
            ++sweeps_total;
            if (cfg.on_iterate) cfg.on_iterate(sweeps_total, v);
        };
        const long cap = std::min(max_inner, budget - sweeps_total);
        admm_l1_inner(sys, Atb, rho, w, inner.mu, inner.tol, cap, st, per_sweep);
        const Vector& xn = st.v;
        const double dn = (xn - x).norm();
        x = xn;
        ++tr.outer_iterations;
        tr.objective_history.push_back(F(x));
        tr.step_norm_history.push_back(dn);
        if (cfg.keep_iterates) tr.iterates.push_back(x);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.iterations = sweeps_total;
    tr.solution = x;
    return tr;
}

}  // namespace detail

inline Vector generalized_linearization(const SDiffPenalty& penalty, const Vector& x) {
    return detail::signs(x) - p1_subgradient(penalty, x) + p2_subgradient(penalty, x);
}

inline SolveTrace dca_admm_solve(const LeastSquaresProblem& prob, const SDiffPenalty& penalty,
                                 const SolverConfig& cfg, const AdmmConfig& inner = {}) {
    require_sparsity(penalty.s, prob.cols());
    if (!inner.generalized && penalty.reg.kind() != RegKind::L1)
        throw CapabilityError("dca_admm_solve: standard mode needs P1 = ||x||_1 (L1); use generalized mode for " +
                              penalty.reg.name());
    detail::LinearizeFn lin;
    if (inner.generalized)
        lin = [&](const Vector& x) { return generalized_linearization(penalty, x); };
    else
        lin = [&](const Vector& x) { return p2_subgradient(penalty, x); };
    auto F = [&](const Vector& x) { return sdiff_objective(prob, penalty, cfg.rho, x); };
    return detail::dca_admm_core(prob, cfg.rho, cfg, inner, lin, F, "dca_admm");
}

// DCA for 1/2||Ax-b||^2 + rho(||x||_1 - ||x||_2)
inline SolveTrace l12_dca_solve(const LeastSquaresProblem& prob, double rho, const SolverConfig& cfg,
                                const AdmmConfig& inner = {}) {
    auto lin = [](const Vector& x) { return detail::unit_or_zero(x); };
    auto F = [&](const Vector& x) { return prob.loss(x) + rho * (x.lpNorm<1>() - x.norm()); };
    return detail::dca_admm_core(prob, rho, cfg, inner, lin, F, "l12_dca");
}

// l1-ADMM baseline with the common init and stopping rule
inline SolveTrace l1_admm_trace(const LeastSquaresProblem& prob, double rho, const SolverConfig& cfg,
                                std::optional<double> mu_opt = {}) {
    if (!(rho >= 0)) throw ParameterError("l1_admm: rho must be >= 0");
    const double mu = mu_opt.value_or(l1_admm_default_mu(rho));
    const Index n = prob.cols();
    const long max_iter = default_max_iter(prob, cfg);
    detail::RidgeSolver sys(prob.A, mu);
    const Vector Atb = prob.A.transpose() * prob.b;
    const Vector w = Vector::Zero(n);
    SolveTrace tr;
    detail::Recorder rec{tr, cfg};
    Vector x = initial_point(prob, cfg);
    auto F = [&](const Vector& v) { return prob.loss(v) + rho * v.lpNorm<1>(); };
    rec.start(x, F(x));
    detail::AdmmState st{x, x, Vector::Zero(n)};
    for (long k = 0; k < max_iter; ++k) {
        detail::admm_l1_inner(sys, Atb, rho, w, mu, 0.0, 1, st);
        const double dn = (st.v - x).norm();
        x = st.v;
        ++tr.iterations;
        rec.step(k + 1, x, F(x), dn);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.solution = x;
    return tr;
}

// IHT with FISTA-style extrapolation, kept only when it lowers the loss
inline SolveTrace aiht_solve(const LeastSquaresProblem& prob, Index s, const SolverConfig& cfg) {
    require_sparsity(s, prob.cols());
    const double beta = resolve_step(prob, cfg, "aiht_solve");
    const long max_iter = default_max_iter(prob, cfg);
    SolveTrace tr;
    detail::Recorder rec{tr, cfg};
    Vector x = truncate(initial_point(prob, cfg), s);
    rec.start(x, prob.loss(x));
    double t = 1;
    for (long k = 0; k < max_iter; ++k) {
        const Vector g = ls_gradient(prob, x);
        detail::guard_finite(g, "aiht", k + 1);
        Vector xp = truncate(x - beta * g, s);
        const double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
        const Vector z = truncate(xp + ((t - 1) / t_next) * (xp - x), s);
        const double fp = prob.loss(xp), fz = prob.loss(z);
        Vector xn;
        double fn;
        if (fz < fp) {
            xn = z;
            fn = fz;
            t = t_next;
        } else {
            xn = std::move(xp);
            fn = fp;
            t = 1;
        }
        detail::guard_finite(xn, "aiht", k + 1);
        const double dn = (xn - x).norm();
        x = std::move(xn);
        ++tr.iterations;
        rec.step(k + 1, x, fn, dn);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.solution = x;
    return tr;
}

// argmin_t (t - v)^2 + lam |t|^{1/2}  (half thresholding operator)
inline double half_threshold(double v, double lam) {
    const double thr = std::cbrt(54.0) / 4 * std::pow(lam, 2.0 / 3.0);
    if (std::abs(v) <= thr) return 0.0;
    const double phi = std::acos(lam / 8 * std::pow(std::abs(v) / 3, -1.5));
    return 2.0 / 3.0 * v * (1 + std::cos(2 * std::numbers::pi / 3 - 2 * phi / 3));
}

// 1/2||Ax-b||^2 + rho sum |x_i|^{1/2} by iterative half thresholding
inline SolveTrace half_threshold_solve(const LeastSquaresProblem& prob, double rho, const SolverConfig& cfg) {
    if (!(rho > 0)) throw ParameterError("half_threshold_solve: rho must be > 0");
    const double beta = resolve_step(prob, cfg, "half_threshold_solve");
    const long max_iter = default_max_iter(prob, cfg);
    auto F = [&](const Vector& v) { return prob.loss(v) + rho * v.cwiseAbs().cwiseSqrt().sum(); };
    SolveTrace tr;
    detail::Recorder rec{tr, cfg};
    Vector x = initial_point(prob, cfg);
    rec.start(x, F(x));
    // 1/2(t-B)^2 + beta rho |t|^{1/2}  ==  (t-B)^2 + 2 beta rho |t|^{1/2}
    const double lam = 2 * beta * rho;
    for (long k = 0; k < max_iter; ++k) {
        const Vector B = x - beta * ls_gradient(prob, x);
        detail::guard_finite(B, "half_threshold", k + 1);
        Vector xn = B.unaryExpr([lam](double v) { return half_threshold(v, lam); });
        const double dn = (xn - x).norm();
        x = std::move(xn);
        ++tr.iterations;
        rec.step(k + 1, x, F(x), dn);
        if (relative_step_small(dn, x, cfg.tol)) {
            tr.converged = true;
            break;
        }
    }
    tr.solution = x;
    return tr;
}

// exact-penalty thresholds: rho > rho_bar makes the penalized optimum feasible
namespace bound {
struct LipschitzLoss { double beta, eta; };
struct LipschitzLossL1 { double beta; };
struct LipschitzLossL1L2 { double beta, a; Index s; };
struct LipschitzLossLSP { double beta, theta1, theta2; };
struct GradientLipschitz { double grad0, L, C, eta; Index s; };
struct LeastSquaresL1 { double atb, a2, C; Index s; };
struct LeastSquaresL1L2 { double atb, a2, C; Index s; double a; };
struct LeastSquaresLSP { double atb, a2, C; Index s; double theta1, theta2; };
}  // namespace bound

using RhoBoundQuery = std::variant<bound::LipschitzLoss, bound::LipschitzLossL1, bound::LipschitzLossL1L2,
                                   bound::LipschitzLossLSP, bound::GradientLipschitz, bound::LeastSquaresL1,
                                   bound::LeastSquaresL1L2, bound::LeastSquaresLSP>;

namespace detail {

inline double pos(double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw ParameterError(std::string("rho bound: ") + what + " must be > 0");
    return v;
}
inline double nonneg(double v, const char* what) {
    if (!(v >= 0) || !std::isfinite(v)) throw ParameterError(std::string("rho bound: ") + what + " must be >= 0");
    return v;
}
inline Index sparsity(Index s) {
    if (s < 1) throw ParameterError("rho bound: s must be >= 1");
    return s;
}
// eta for l1 - a l2 on the s-difference: 1 - a/(2 sqrt s)
inline double eta_l1l2(double a, Index s) {
    if (!(a > 0 && a <= 1)) throw ParameterError("rho bound: need 0 < a <= 1");
    return 1 - a / (2 * std::sqrt(double(sparsity(s))));
}
inline double eta_lsp(double t1, double t2) {
    if (!(t1 > t2 && t2 > 0)) throw ParameterError("rho bound: need theta1 > theta2 > 0");
    return t1 - t2;
}
inline double ls_core(double atb, double a2, double C, Index s) {
    return nonneg(atb, "||A^T b||") + (1 + 1 / (2 * std::sqrt(double(sparsity(s) + 1)))) * pos(a2, "||A||^2") *
                                          pos(C, "C");
}

struct RhoBoundEval {
    double operator()(const bound::LipschitzLoss& q) const { return pos(q.beta, "beta") / pos(q.eta, "eta"); }
    double operator()(const bound::LipschitzLossL1& q) const { return pos(q.beta, "beta"); }
    double operator()(const bound::LipschitzLossL1L2& q) const { return pos(q.beta, "beta") / eta_l1l2(q.a, q.s); }
    double operator()(const bound::LipschitzLossLSP& q) const {
        return pos(q.beta, "beta") / eta_lsp(q.theta1, q.theta2);
    }
    double operator()(const bound::GradientLipschitz& q) const {
        return (nonneg(q.grad0, "||grad phi(0)||") +
                (1 + 1 / (2 * std::sqrt(double(sparsity(q.s) + 1)))) * pos(q.L, "L") * pos(q.C, "C")) /
               pos(q.eta, "eta");
    }
    double operator()(const bound::LeastSquaresL1& q) const { return ls_core(q.atb, q.a2, q.C, q.s); }
    double operator()(const bound::LeastSquaresL1L2& q) const {
        return ls_core(q.atb, q.a2, q.C, q.s) / eta_l1l2(q.a, q.s);
    }
    double operator()(const bound::LeastSquaresLSP& q) const {
        return ls_core(q.atb, q.a2, q.C, q.s) / eta_lsp(q.theta1, q.theta2);
    }
};

}  // namespace detail

inline double rho_lower_bound(const RhoBoundQuery& q) { return std::visit(detail::RhoBoundEval{}, q); }

inline const char* rho_bound_formula(const RhoBoundQuery& q) {
    static constexpr const char* names[] = {
        "beta/eta",
        "beta",
        "beta/(1 - a/(2 sqrt s))",
        "beta/(theta1 - theta2)",
        "(||grad phi(0)|| + (1 + 1/(2 sqrt(s+1))) L C)/eta",
        "||A^T b|| + (1 + 1/(2 sqrt(s+1))) ||A||^2 C",
        "(||A^T b|| + (1 + 1/(2 sqrt(s+1))) ||A||^2 C)/(1 - a/(2 sqrt s))",
        "(||A^T b|| + (1 + 1/(2 sqrt(s+1))) ||A||^2 C)/(theta1 - theta2)"};
    return names[q.index()];
}

}  // namespace sdiff
