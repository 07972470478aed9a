#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sdiff/core.hpp"
#include "sdiff/rng.hpp"

namespace sdiff {

struct ProxProblem {
    ProxProblem(SDiffPenalty p, double lambda, Vector y) : penalty(p), lambda(lambda), y(std::move(y)) {
        if (!(lambda > 0) || !std::isfinite(lambda)) throw ParameterError("prox: lambda must be > 0");
        require_finite(this->y, "prox anchor y");
        require_sparsity(penalty.s, this->y.size());
    }
    SDiffPenalty penalty;
    double lambda;
    Vector y;
};

// E(x) = ||x - y||^2 / (2 lambda) + P(x)
inline double prox_objective(const ProxProblem& p, const Vector& x) {
    return (x - p.y).squaredNorm() / (2 * p.lambda) + penalty_eval(p.penalty, x);
}

// returns +0 in the dead zone
inline double shrink(double v, double lambda) {
    if (lambda < 0) throw ParameterError("shrink: lambda must be >= 0");
    const double m = std::abs(v) - lambda;
    return m > 0 ? std::copysign(m, v) : 0.0;
}

namespace detail {

inline void check_prox_args(Index s, double lambda, const Vector& y) {
    if (!(lambda >= 0) || !std::isfinite(lambda)) throw ParameterError("prox: lambda must be >= 0");
    require_finite(y, "prox anchor y");
    require_sparsity(s, y.size());
}

}  // namespace detail

inline Vector prox_l1(Index s, double lambda, const Vector& y) {
    detail::check_prox_args(s, lambda, y);
    const auto top = detail::top_mask(y, s);
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = top[i] ? y[i] : shrink(y[i], lambda);
    return x;
}

inline Vector prox_l2sq(Index s, double lambda, const Vector& y) {
    detail::check_prox_args(s, lambda, y);
    const auto top = detail::top_mask(y, s);
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = top[i] ? y[i] : y[i] / (2 * lambda + 1);
    return x;
}

inline Vector prox_l2(Index s, double lambda, const Vector& y) {
    detail::check_prox_args(s, lambda, y);
    const auto top = detail::top_mask(y, s);
    double top_sq = 0, rest_sq = 0;
    for (Index i = 0; i < y.size(); ++i) (top[i] ? top_sq : rest_sq) += y[i] * y[i];
    // already s-sparse: the top factor cancels to 1
    if (rest_sq == 0 || lambda == 0) return y;
    const double ys = std::sqrt(top_sq);
    const double T = std::sqrt(rest_sq + (ys + lambda) * (ys + lambda));
    const double f_top = (ys + lambda) * (T - lambda) / (ys * T);
    const double f_rest = (T - lambda) / T;
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = y[i] * (top[i] ? f_top : f_rest);
    return x;
}

inline Vector prox_l1_minus_al2(double a, Index s, double lambda, const Vector& y) {
    if (!(a >= 0 && a <= 1)) throw ParameterError("prox_l1_minus_al2: a must lie in [0, 1]");
    detail::check_prox_args(s, lambda, y);
    const Index n = y.size();
    if (s >= n) return y;
    const auto top = detail::top_mask(y, s);
    double top_sq = 0, next_mag = 0;
    for (Index i = 0; i < n; ++i) {
        if (top[i])
            top_sq += y[i] * y[i];
        else
            next_mag = std::max(next_mag, std::abs(y[i]));
    }
    Vector x = Vector::Zero(n);
    if (next_mag > lambda) {
        // z = y_{pi(1)} on the support, shrink(y, lambda) off it; z^s covers the support
        const double ys = std::sqrt(top_sq);
        double zr_sq = 0;
        for (Index i = 0; i < n; ++i)
            if (!top[i]) {
                const double z = shrink(y[i], lambda);
                zr_sq += z * z;
            }
        const double D = std::sqrt(zr_sq + (ys - a * lambda) * (ys - a * lambda));
        const double lift = 1 + a * lambda / D;
        const double f_top = (ys - a * lambda) / ys;
        for (Index i = 0; i < n; ++i) x[i] = top[i] ? y[i] * f_top * lift : shrink(y[i], lambda) * lift;
        return x;
    }
    // |y_{pi(s+1)}| <= lambda: keep y^s. For a = 1, s = 1, |y_{pi(1)}| = lambda the
    // canonical pick among the optimal set is sign(y_{pi(1)}) lambda e_{pi(1)}, also y^s.
    for (Index i = 0; i < n; ++i)
        if (top[i]) x[i] = y[i];
    return x;
}

inline Vector prox_mcp(double theta, Index s, double lambda, const Vector& y) {
    if (!(theta > 0)) throw ParameterError("prox_mcp: theta must be > 0");
    detail::check_prox_args(s, lambda, y);
    const auto top = detail::top_mask(y, s);
    // theta <= lambda: the scalar problem is concave on [0, theta], so it is a
    // hard threshold at sqrt(lambda*theta)
    const double hard = std::sqrt(lambda * theta);
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        const double u = std::abs(y[i]);
        if (top[i])
            x[i] = y[i];
        else if (theta > lambda)
            x[i] = u >= theta ? y[i] : std::copysign(std::max(theta * (u - lambda) / (theta - lambda), 0.0), y[i]);
        else
            x[i] = u > hard ? y[i] : 0.0;
        if (x[i] == 0) x[i] = 0.0;
    }
    return x;
}

namespace detail {

// argmin_{t >= 0} (t-u)^2/(2 lambda) + log(1 + t/theta), u >= 0
inline double lsp_scalar(double u, double theta, double lambda) {
    auto h = [&](double t) { return (t - u) * (t - u) / (2 * lambda) + std::log1p(t / theta); };
    std::array<double, 3> cand{0.0, 0.0, 0.0};
    int nc = 1;
    // stationary points: t^2 + (theta-u) t + (lambda - u theta) = 0
    const double b = theta - u, c = lambda - u * theta;
    const double disc = b * b - 4 * c;
    if (disc >= 0) {
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        const double r1 = q, r2 = q != 0 ? c / q : 0.0;
        cand[nc++] = std::max(r1, 0.0);
        cand[nc++] = std::max(r2, 0.0);
    }
    std::sort(cand.begin(), cand.begin() + nc);
    double best = cand[0], hb = h(cand[0]);
    for (int k = 1; k < nc; ++k) {
        const double hv = h(cand[k]);
        if (hv < hb - 1e-12) {
            best = cand[k];
            hb = hv;
        }
    }
    return best;
}

}  // namespace detail

inline Vector prox_lsp(double theta, Index s, double lambda, const Vector& y) {
    if (!(theta > 0)) throw ParameterError("prox_lsp: theta must be > 0");
    detail::check_prox_args(s, lambda, y);
    const auto top = detail::top_mask(y, s);
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        if (top[i] || lambda == 0) {
            x[i] = y[i];
            continue;
        }
        const double w = detail::lsp_scalar(std::abs(y[i]), theta, lambda);
        x[i] = w > 0 ? std::copysign(w, y[i]) : 0.0;
    }
    return x;
}

inline bool has_closed_form_prox(const Regularizer& r) {
    switch (r.kind()) {
        case RegKind::L1:
        case RegKind::L2Squared:
        case RegKind::L2:
        case RegKind::L1MinusAL2:
        case RegKind::LSP:
        case RegKind::MCP: return true;
        default: return false;
    }
}

inline Vector prox_sdiff(const ProxProblem& p) {
    const Regularizer& r = p.penalty.reg;
    const Index s = p.penalty.s;
    switch (r.kind()) {
        case RegKind::L1: return prox_l1(s, p.lambda, p.y);
        case RegKind::L2Squared: return prox_l2sq(s, p.lambda, p.y);
        case RegKind::L2: return prox_l2(s, p.lambda, p.y);
        case RegKind::L1MinusAL2: return prox_l1_minus_al2(r.a(), s, p.lambda, p.y);
        case RegKind::LSP: return prox_lsp(r.theta(), s, p.lambda, p.y);
        case RegKind::MCP: return prox_mcp(r.theta(), s, p.lambda, p.y);
        default:
            throw CapabilityError("no closed-form prox for " + r.name() + "; use prox_oracle or a DCA solver");
    }
}

// Brute-force minimizer of E for small N. Multi-start pattern/subgradient
// descent; budget is the number of E evaluations per start.
inline Vector prox_oracle(const ProxProblem& p, long budget = 20000, std::uint64_t seed = 0x5eed) {
    if (budget < 1000) throw ParameterError("prox_oracle: budget must be >= 1000");
    const Index n = p.y.size();
    const double scale = std::max(1.0, p.y.lpNorm<Eigen::Infinity>());
    auto E = [&](const Vector& x) { return prox_objective(p, x); };
    Rng rng(seed);

    std::vector<Vector> starts;
    starts.push_back(Vector::Zero(n));
    starts.push_back(p.y);
    for (Index k = 1; k <= n; ++k) starts.push_back(truncate(p.y, k));
    for (int r = 0; r < 10; ++r) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = p.y[i] * rng.uniform(0.0, 1.2);
        starts.push_back(v);
    }

    Vector best = starts[0];
    double fbest = E(best);
    Vector trial(n), dir(n);
    for (const Vector& x0 : starts) {
        Vector x = x0;
        double fx = E(x);
        double step = 0.1 * scale;
        int fails = 0;
        long evals = 0;
        long move = 0;
        const long moves_per_sweep = 3 * n + 3;
        while (evals < budget && step > 1e-13 * scale) {
            const long m = move++ % moves_per_sweep;
            trial = x;
            if (m < 2 * n) {
                trial[m / 2] += (m % 2 ? -step : step);
            } else if (m < 3 * n) {
                trial[m - 2 * n] = 0.0;
            } else if (m == 3 * n) {
                // steepest descent along a subgradient of E
                dir = (x - p.y) / p.lambda + p1_subgradient(p.penalty, x) - p2_subgradient(p.penalty, x);
                const double dn = dir.norm();
                if (dn == 0) continue;
                trial -= step * dir / dn;
            } else if (m == 3 * n + 1) {
                // pull toward the anchor
                const double d = (p.y - x).norm();
                if (d == 0) continue;
                trial += std::min(step, d) * (p.y - x) / d;
            } else {
                for (Index i = 0; i < n; ++i) dir[i] = rng.normal();
                trial += step * dir / dir.norm();
            }
            const double ft = E(trial);
            ++evals;
            if (ft < fx) {
                x = trial;
                fx = ft;
                fails = 0;
            } else if (++fails >= 50) {
                step *= 0.5;
                fails = 0;
            }
        }
        if (fx < fbest) {
            fbest = fx;
            best = x;
        }
    }
    return best;
}

}  // namespace sdiff
