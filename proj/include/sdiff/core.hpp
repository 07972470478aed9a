#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sdiff/errors.hpp"

namespace sdiff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

inline void require_finite(const Vector& x, const char* what) {
    if (x.size() < 1) throw DimensionError(std::string(what) + ": empty vector");
    if (!x.allFinite()) throw ParameterError(std::string(what) + ": non-finite entry");
}

inline void require_sparsity(Index s, Index n) {
    if (s < 1 || s > n)
        throw ParameterError("sparsity level s=" + std::to_string(s) + " outside [1, " + std::to_string(n) + "]");
}

struct TopSSplit {
    std::vector<Index> top;      // Gamma^s, in rank order
    std::vector<Index> rest;     // complement, in rank order
    std::vector<Index> ranking;  // full permutation pi, descending |y|
};

namespace detail {

// strict total order: larger magnitude first, lower index on ties
struct RankOrder {
    const Vector* y;
    bool operator()(Index a, Index b) const {
        double ma = std::abs((*y)[a]), mb = std::abs((*y)[b]);
        return ma > mb || (ma == mb && a < b);
    }
};

// marks the top-s entries; nth_element is enough since the order is total
inline std::vector<char> top_mask(const Vector& y, Index s) {
    const Index n = y.size();
    std::vector<char> mask(n, 0);
    if (s >= n) {
        std::fill(mask.begin(), mask.end(), 1);
        return mask;
    }
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index(0));
    std::nth_element(idx.begin(), idx.begin() + s, idx.end(), RankOrder{&y});
    for (Index k = 0; k < s; ++k) mask[idx[k]] = 1;
    return mask;
}

// |y_{pi(k)}| for 1-based rank k (0 when k > N)
inline double rank_magnitude(const Vector& y, Index k) {
    const Index n = y.size();
    if (k < 1 || k > n) return 0.0;
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index(0));
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), RankOrder{&y});
    return std::abs(y[idx[k - 1]]);
}

inline Vector apply_mask(const Vector& y, const std::vector<char>& mask) {
    Vector out = Vector::Zero(y.size());
    for (Index i = 0; i < y.size(); ++i)
        if (mask[i]) out[i] = y[i];
    return out;
}

}  // namespace detail

inline TopSSplit top_s_split(const Vector& y, Index s) {
    require_sparsity(s, y.size());
    TopSSplit out;
    out.ranking.resize(y.size());
    std::iota(out.ranking.begin(), out.ranking.end(), Index(0));
    std::sort(out.ranking.begin(), out.ranking.end(), detail::RankOrder{&y});
    out.top.assign(out.ranking.begin(), out.ranking.begin() + s);
    out.rest.assign(out.ranking.begin() + s, out.ranking.end());
    return out;
}

inline Vector truncate(const Vector& y, Index s) {
    require_sparsity(s, y.size());
    return detail::apply_mask(y, detail::top_mask(y, s));
}

enum class RegKind { L1, L2Squared, L2, L1MinusAL2, LSP, MCP, SCAD, HuberOfL2, LogOfL2, MCPOfL2, LSPWeighted };

class Regularizer {
public:
    static Regularizer l1() { return {RegKind::L1}; }
    static Regularizer l2_squared() { return {RegKind::L2Squared}; }
    static Regularizer l2() { return {RegKind::L2}; }
    static Regularizer l1_minus_al2(double a) {
        if (!(a > 0 && a <= 1)) throw ParameterError("L1MinusAL2 needs 0 < a <= 1");
        return {RegKind::L1MinusAL2, a};
    }
    static Regularizer lsp(double theta) { return {RegKind::LSP, positive(theta, "LSP")}; }
    static Regularizer mcp(double theta) { return {RegKind::MCP, positive(theta, "MCP")}; }
    static Regularizer scad(double theta) {
        if (!(theta > 2) || !std::isfinite(theta)) throw ParameterError("SCAD needs theta > 2");
        return {RegKind::SCAD, theta};
    }
    static Regularizer huber_of_l2(double theta) { return {RegKind::HuberOfL2, positive(theta, "HuberOfL2")}; }
    static Regularizer log_of_l2(double theta) { return {RegKind::LogOfL2, positive(theta, "LogOfL2")}; }
    static Regularizer mcp_of_l2(double theta) { return {RegKind::MCPOfL2, positive(theta, "MCPOfL2")}; }
    // theta1*theta2 >= 1 keeps every coordinate term nonnegative
    static Regularizer lsp_weighted(double theta1, double theta2) {
        if (!(theta1 > theta2 && theta2 > 0) || !std::isfinite(theta1))
            throw ParameterError("LSPWeighted needs theta1 > theta2 > 0");
        if (theta1 * theta2 < 1) throw ParameterError("LSPWeighted needs theta1*theta2 >= 1 for R >= 0");
        return {RegKind::LSPWeighted, theta1, theta2};
    }

    RegKind kind() const { return kind_; }
    double a() const { return p1_; }
    double theta() const { return p1_; }
    double theta1() const { return p1_; }
    double theta2() const { return p2_; }

    bool separable() const {
        switch (kind_) {
            case RegKind::L1:
            case RegKind::L2Squared:
            case RegKind::LSP:
            case RegKind::MCP:
            case RegKind::SCAD:
            case RegKind::LSPWeighted: return true;
            default: return false;
        }
    }

    // per-coordinate term r(t), separable kinds only
    double scalar(double t) const {
        const double u = std::abs(t);
        switch (kind_) {
            case RegKind::L1: return u;
            case RegKind::L2Squared: return t * t;
            case RegKind::LSP: return std::log1p(u / p1_);
            case RegKind::MCP: return u <= p1_ ? u - t * t / (2 * p1_) : p1_ / 2;
            case RegKind::SCAD:
                if (u < 1) return u;
                if (u < p1_) return (2 * p1_ * u - t * t - 1) / (2 * (p1_ - 1));
                return (p1_ + 1) / 2;
            case RegKind::LSPWeighted: return p1_ * u - std::log1p(u / p2_);
            default: throw CapabilityError(name() + " is not separable");
        }
    }

    // derivative of r on t > 0 side, sign applied (0 at t = 0)
    double scalar_slope(double t) const {
        const double u = std::abs(t), sg = sign(t);
        switch (kind_) {
            case RegKind::L1: return sg;
            case RegKind::L2Squared: return 2 * t;
            case RegKind::LSP: return sg / (p1_ + u);
            case RegKind::MCP: return u <= p1_ ? sg - t / p1_ : 0.0;
            case RegKind::SCAD:
                if (u < 1) return sg;
                if (u < p1_) return sg * (p1_ - u) / (p1_ - 1);
                return 0.0;
            case RegKind::LSPWeighted: return sg * (p1_ - 1 / (p2_ + u));
            default: throw CapabilityError(name() + " is not separable");
        }
    }

    std::string name() const {
        auto num = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            return std::string(buf);
        };
        switch (kind_) {
            case RegKind::L1: return "L1";
            case RegKind::L2Squared: return "L2Squared";
            case RegKind::L2: return "L2";
            case RegKind::L1MinusAL2: return "L1MinusAL2(a=" + num(p1_) + ")";
            case RegKind::LSP: return "LSP(theta=" + num(p1_) + ")";
            case RegKind::MCP: return "MCP(theta=" + num(p1_) + ")";
            case RegKind::SCAD: return "SCAD(theta=" + num(p1_) + ")";
            case RegKind::HuberOfL2: return "HuberOfL2(theta=" + num(p1_) + ")";
            case RegKind::LogOfL2: return "LogOfL2(theta=" + num(p1_) + ")";
            case RegKind::MCPOfL2: return "MCPOfL2(theta=" + num(p1_) + ")";
            case RegKind::LSPWeighted: return "LSPWeighted(theta1=" + num(p1_) + ",theta2=" + num(p2_) + ")";
        }
        return "?";
    }

    bool operator==(const Regularizer&) const = default;

private:
    Regularizer(RegKind k, double p1 = 0, double p2 = 0) : kind_(k), p1_(p1), p2_(p2) {}
    static double positive(double v, const char* what) {
        if (!(v > 0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " needs theta > 0");
        return v;
    }

    RegKind kind_;
    double p1_ = 0, p2_ = 0;
};

struct SDiffPenalty {
    SDiffPenalty(Regularizer r, Index s) : reg(r), s(s) {
        if (s < 1) throw ParameterError("sparsity level s must be >= 1");
    }
    Regularizer reg;
    Index s;
};

namespace detail {

// g(u) for the radial kinds R(x) = g(||x||_2)
inline double radial(const Regularizer& r, double u) {
    const double th = r.theta();
    switch (r.kind()) {
        case RegKind::HuberOfL2: return u <= th ? u * u / (2 * th) : u - th / 2;
        case RegKind::LogOfL2: return std::log1p(u / th);
        case RegKind::MCPOfL2: return u <= th ? u - u * u / (2 * th) : th / 2;
        default: throw CapabilityError(r.name() + " is not radial");
    }
}

inline double radial_slope(const Regularizer& r, double u) {
    const double th = r.theta();
    switch (r.kind()) {
        case RegKind::HuberOfL2: return u <= th ? u / th : 1.0;
        case RegKind::LogOfL2: return 1 / (th + u);
        case RegKind::MCPOfL2: return u <= th ? 1 - u / th : 0.0;
        default: throw CapabilityError(r.name() + " is not radial");
    }
}

inline bool is_radial(RegKind k) {
    return k == RegKind::HuberOfL2 || k == RegKind::LogOfL2 || k == RegKind::MCPOfL2;
}

// ||x|| - ||x^s|| without cancellation: ||rest||^2 / (||x|| + ||x^s||)
inline double norm_gap(double nx, double nxs, double rest_sq) {
    return nx + nxs > 0 ? rest_sq / (nx + nxs) : 0.0;
}

}  // namespace detail

inline double reg_eval(const Regularizer& r, const Vector& x) {
    require_finite(x, "reg_eval");
    switch (r.kind()) {
        case RegKind::L1: return x.lpNorm<1>();
        case RegKind::L2Squared: return x.squaredNorm();
        case RegKind::L2: return x.norm();
        case RegKind::L1MinusAL2: return x.lpNorm<1>() - r.a() * x.norm();
        case RegKind::HuberOfL2:
        case RegKind::LogOfL2:
        case RegKind::MCPOfL2: return detail::radial(r, x.norm());
        default: {
            double acc = 0;
            for (Index i = 0; i < x.size(); ++i) acc += r.scalar(x[i]);
            return acc;
        }
    }
}

// R(x) - R(x^s), evaluated through the off-support entries to avoid cancellation
inline double penalty_eval(const SDiffPenalty& p, const Vector& x) {
    require_finite(x, "penalty_eval");
    require_sparsity(p.s, x.size());
    const auto mask = detail::top_mask(x, p.s);
    const Regularizer& r = p.reg;
    if (r.separable()) {
        double acc = 0;
        for (Index i = 0; i < x.size(); ++i)
            if (!mask[i]) acc += r.scalar(x[i]);
        return std::max(acc, 0.0);
    }
    double rest1 = 0, rest_sq = 0, top_sq = 0;
    for (Index i = 0; i < x.size(); ++i) {
        if (mask[i]) {
            top_sq += x[i] * x[i];
        } else {
            rest1 += std::abs(x[i]);
            rest_sq += x[i] * x[i];
        }
    }
    if (rest_sq == 0) return 0.0;
    const double nxs = std::sqrt(top_sq), nx = std::sqrt(top_sq + rest_sq);
    const double gap = detail::norm_gap(nx, nxs, rest_sq);
    const double th = r.kind() == RegKind::L1MinusAL2 ? 0.0 : r.theta();
    double val = 0;
    switch (r.kind()) {
        case RegKind::L2: val = gap; break;
        case RegKind::L1MinusAL2: val = rest1 - r.a() * gap; break;
        case RegKind::HuberOfL2:
            if (nx <= th)
                val = rest_sq / (2 * th);
            else if (nxs > th)
                val = gap;
            else
                val = detail::radial(r, nx) - detail::radial(r, nxs);
            break;
        case RegKind::LogOfL2: val = std::log1p(gap / (th + nxs)); break;
        case RegKind::MCPOfL2:
            if (nx <= th)
                val = gap * (1 - (nx + nxs) / (2 * th));
            else if (nxs > th)
                val = 0.0;
            else
                val = detail::radial(r, nx) - detail::radial(r, nxs);
            break;
        default: throw CapabilityError("penalty_eval: unhandled regularizer " + r.name());
    }
    return std::max(val, 0.0);
}

// (P1(x), P2(x)) from the DC decomposition table
inline std::pair<double, double> dc_parts(const SDiffPenalty& p, const Vector& x) {
    require_finite(x, "dc_parts");
    require_sparsity(p.s, x.size());
    const Regularizer& r = p.reg;
    const Vector xs = truncate(x, p.s);
    const double n1 = x.lpNorm<1>(), n1s = xs.lpNorm<1>();
    const double n2 = x.norm(), n2s = xs.norm();
    switch (r.kind()) {
        case RegKind::L1: return {n1, n1s};
        case RegKind::L2Squared: return {x.squaredNorm(), xs.squaredNorm()};
        case RegKind::L2: return {n2, n2s};
        case RegKind::L1MinusAL2: return {n1 + r.a() * n2s, n1s + r.a() * n2};
        case RegKind::HuberOfL2: return {reg_eval(r, x), reg_eval(r, xs)};
        case RegKind::LSP: {
            const double th = r.theta();
            return {n1 / th + (n1s / th - reg_eval(r, xs)), n1s / th + (n1 / th - reg_eval(r, x))};
        }
        case RegKind::MCP:
        case RegKind::SCAD: return {n1 + (n1s - reg_eval(r, xs)), n1s + (n1 - reg_eval(r, x))};
        case RegKind::LogOfL2: {
            const double th = r.theta();
            return {n2 / th + (n2s / th - reg_eval(r, xs)), n2s / th + (n2 / th - reg_eval(r, x))};
        }
        case RegKind::MCPOfL2: return {n2 + (n2s - reg_eval(r, xs)), n2s + (n2 - reg_eval(r, x))};
        case RegKind::LSPWeighted: {
            // G(x) = ||x||_1/theta2 - sum log(1+|x_i|/theta2) is convex
            const double t1 = r.theta1(), t2 = r.theta2();
            auto G = [&](const Vector& v) {
                double acc = 0;
                for (Index i = 0; i < v.size(); ++i) acc += std::abs(v[i]) / t2 - std::log1p(std::abs(v[i]) / t2);
                return acc;
            };
            return {t1 * n1 + G(x) + n1s / t2, t1 * n1s + n1 / t2 + G(xs)};
        }
    }
    throw CapabilityError("dc_parts: unhandled regularizer " + r.name());
}

namespace detail {

// gradient of ||.||_1/c - sum log(1+|t|/c) style terms: sign(t)(1/c - 1/(c+|t|))
inline double log_gap_slope(double t, double c) { return t / (c * (c + std::abs(t))); }

inline Vector unit_or_zero(const Vector& v) {
    const double n = v.norm();
    return n > 0 ? Vector(v / n) : Vector(Vector::Zero(v.size()));
}

inline Vector signs(const Vector& v) { return v.unaryExpr([](double t) { return sign(t); }); }

}  // namespace detail

// one element of dP2(x)
inline Vector p2_subgradient(const SDiffPenalty& p, const Vector& x) {
    require_finite(x, "p2_subgradient");
    require_sparsity(p.s, x.size());
    const Regularizer& r = p.reg;
    const auto mask = detail::top_mask(x, p.s);
    const Vector xs = detail::apply_mask(x, mask);
    const Vector sg_top = detail::signs(xs);
    const Index n = x.size();
    Vector w = Vector::Zero(n);
    switch (r.kind()) {
        case RegKind::L1: return sg_top;
        case RegKind::L2Squared: return 2 * xs;
        case RegKind::L2: return detail::unit_or_zero(xs);
        case RegKind::L1MinusAL2: return sg_top + r.a() * detail::unit_or_zero(x);
        case RegKind::HuberOfL2: return detail::radial_slope(r, xs.norm()) * detail::unit_or_zero(xs);
        case RegKind::LSP:
            for (Index i = 0; i < n; ++i) w[i] = sg_top[i] / r.theta() + detail::log_gap_slope(x[i], r.theta());
            return w;
        case RegKind::MCP:
        case RegKind::SCAD:
            for (Index i = 0; i < n; ++i) w[i] = sg_top[i] + (sign(x[i]) - r.scalar_slope(x[i]));
            return w;
        case RegKind::LogOfL2: {
            const double th = r.theta();
            return detail::unit_or_zero(xs) / th + x / (th * (th + x.norm()));
        }
        case RegKind::MCPOfL2: {
            const double u = x.norm();
            return detail::unit_or_zero(xs) + (1 - detail::radial_slope(r, u)) * detail::unit_or_zero(x);
        }
        case RegKind::LSPWeighted: {
            const double t1 = r.theta1(), t2 = r.theta2();
            for (Index i = 0; i < n; ++i)
                w[i] = t1 * sg_top[i] + (mask[i] ? detail::log_gap_slope(x[i], t2) : 0.0) + sign(x[i]) / t2;
            return w;
        }
    }
    throw CapabilityError("p2_subgradient: unhandled regularizer " + r.name());
}

// one element of dP1(x), same conventions as p2_subgradient
inline Vector p1_subgradient(const SDiffPenalty& p, const Vector& x) {
    require_finite(x, "p1_subgradient");
    require_sparsity(p.s, x.size());
    const Regularizer& r = p.reg;
    const auto mask = detail::top_mask(x, p.s);
    const Vector xs = detail::apply_mask(x, mask);
    const Vector sg = detail::signs(x);
    const Index n = x.size();
    Vector w = Vector::Zero(n);
    switch (r.kind()) {
        case RegKind::L1: return sg;
        case RegKind::L2Squared: return 2 * x;
        case RegKind::L2: return detail::unit_or_zero(x);
        case RegKind::L1MinusAL2: return sg + r.a() * detail::unit_or_zero(xs);
        case RegKind::HuberOfL2: return detail::radial_slope(r, x.norm()) * detail::unit_or_zero(x);
        case RegKind::LSP:
            for (Index i = 0; i < n; ++i)
                w[i] = sg[i] / r.theta() + (mask[i] ? detail::log_gap_slope(x[i], r.theta()) : 0.0);
            return w;
        case RegKind::MCP:
        case RegKind::SCAD:
            for (Index i = 0; i < n; ++i) w[i] = sg[i] + (mask[i] ? sign(x[i]) - r.scalar_slope(x[i]) : 0.0);
            return w;
        case RegKind::LogOfL2: {
            const double th = r.theta();
            return detail::unit_or_zero(x) / th + xs / (th * (th + xs.norm()));
        }
        case RegKind::MCPOfL2:
            return detail::unit_or_zero(x) + (1 - detail::radial_slope(r, xs.norm())) * detail::unit_or_zero(xs);
        case RegKind::LSPWeighted: {
            const double t1 = r.theta1(), t2 = r.theta2();
            for (Index i = 0; i < n; ++i)
                w[i] = t1 * sg[i] + detail::log_gap_slope(x[i], t2) + (mask[i] ? sign(x[i]) / t2 : 0.0);
            return w;
        }
    }
    throw CapabilityError("p1_subgradient: unhandled regularizer " + r.name());
}

}  // namespace sdiff
