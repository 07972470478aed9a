#pragma once

#include <vector>

#include "sdiff/core.hpp"
#include "sdiff/rng.hpp"

namespace testutil {

using sdiff::Index;
using sdiff::Regularizer;
using sdiff::Vector;

inline Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Index>(v.size()));
    Index i = 0;
    for (double t : v) x[i++] = t;
    return x;
}

inline Vector randn(sdiff::Rng& rng, Index n, double scale = 1.0) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = scale * rng.normal();
    return x;
}

// exactly k nonzeros at random positions
inline Vector rand_sparse(sdiff::Rng& rng, Index n, Index k, double scale = 1.0) {
    Vector x = Vector::Zero(n);
    for (Index i : rng.sample<Index>(n, k)) {
        double v;
        do v = scale * rng.normal();
        while (v == 0);
        x[i] = v;
    }
    return x;
}

inline double scale_of(const Vector& x) { return std::max(1.0, x.lpNorm<Eigen::Infinity>()); }

// one of every kind, moderate parameters
inline std::vector<Regularizer> all_regularizers() {
    return {Regularizer::l1(),          Regularizer::l2_squared(),    Regularizer::l2(),
            Regularizer::l1_minus_al2(1), Regularizer::l1_minus_al2(0.5), Regularizer::lsp(1),
            Regularizer::mcp(2),        Regularizer::scad(3.7),       Regularizer::huber_of_l2(1),
            Regularizer::log_of_l2(1),  Regularizer::mcp_of_l2(2),    Regularizer::lsp_weighted(2, 1)};
}

}  // namespace testutil
