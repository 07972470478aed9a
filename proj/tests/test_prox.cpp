#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "sdiff/prox.hpp"

using namespace sdiff;
using testutil::vec;

namespace {

double E(const SDiffPenalty& p, double lambda, const Vector& y, const Vector& x) {
    return prox_objective(ProxProblem(p, lambda, y), x);
}

// closed form no worse than the brute-force oracle
void expect_optimal(const SDiffPenalty& p, double lambda, const Vector& y, const Vector& x) {
    const ProxProblem pp(p, lambda, y);
    const double eo = prox_objective(pp, prox_oracle(pp));
    EXPECT_LE(prox_objective(pp, x), eo + 1e-6 * std::max(1.0, eo)) << p.reg.name();
}

std::vector<Regularizer> closed_form_regs() {
    return {Regularizer::l1(), Regularizer::l2_squared(), Regularizer::l2(), Regularizer::l1_minus_al2(1),
            Regularizer::l1_minus_al2(0.3), Regularizer::mcp(1.5), Regularizer::mcp(0.3), Regularizer::lsp(1),
            Regularizer::lsp(0.2)};
}

}  // namespace

TEST(Shrink, Examples) {
    EXPECT_EQ(shrink(-1, 1), 0.0);
    EXPECT_EQ(shrink(3, 1), 2.0);
    EXPECT_EQ(shrink(0.5, 1), 0.0);
    EXPECT_EQ(shrink(-3, 1), -2.0);
    EXPECT_THROW(shrink(1, -1), ParameterError);
}

TEST(ProxL1, Examples) {
    const Vector y = vec({3, -1, 0.5});
    const Vector x1 = prox_l1(1, 1, y);
    EXPECT_EQ(x1, vec({3, 0, 0}));
    expect_optimal(SDiffPenalty(Regularizer::l1(), 1), 1, y, x1);
    const Vector x2 = prox_l1(2, 0.2, y);
    EXPECT_NEAR((x2 - vec({3, -1, 0.3})).norm(), 0, 1e-15);
    expect_optimal(SDiffPenalty(Regularizer::l1(), 2), 0.2, y, x2);
    EXPECT_EQ(prox_l1(1, 0, y), y);
    EXPECT_EQ(prox_l1(2, 0, y), y);
}

TEST(ProxL2sq, Examples) {
    const Vector y = vec({2, 1, -0.6});
    const Vector x = prox_l2sq(1, 1, y);
    EXPECT_NEAR((x - vec({2, 1.0 / 3, -0.2})).norm(), 0, 1e-15);
    expect_optimal(SDiffPenalty(Regularizer::l2_squared(), 1), 1, y, x);
    EXPECT_EQ(prox_l2sq(1, 0, y), y);
    EXPECT_EQ(prox_l2sq(1, 1, Vector::Zero(3)), Vector::Zero(3));
}

TEST(ProxL2, Examples) {
    const Vector y = vec({2, 1});
    const Vector x = prox_l2(1, 1, y);
    // T = sqrt(1 + 9); top scales by 3(T-1)/(2T), rest by (T-1)/T
    const double T = std::sqrt(10.0);
    EXPECT_NEAR(x[0], 2 * 3 * (T - 1) / (2 * T), 1e-14);
    EXPECT_NEAR(x[1], (T - 1) / T, 1e-14);
    EXPECT_NEAR(x[0], 2.05132, 1e-5);
    EXPECT_NEAR(x[1], 0.68377, 1e-5);
    expect_optimal(SDiffPenalty(Regularizer::l2(), 1), 1, y, x);
    EXPECT_EQ(prox_l2(1, 1, Vector::Zero(2)), Vector::Zero(2));
    EXPECT_EQ(prox_l2(1, 1, vec({2, 0})), vec({2, 0}));
    // off-support zero next to a nonzero tail entry: no 0/0
    const Vector z = prox_l2(1, 0.5, vec({0, 1, 3}));
    EXPECT_TRUE(z.allFinite());
    EXPECT_EQ(z[0], 0.0);
}

TEST(ProxL1MinusAL2, Examples) {
    const Vector y = vec({3, 2, 0.2});
    const Vector x = prox_l1_minus_al2(1, 1, 0.5, y);
    // z = (3, 1.5, 0), D = sqrt(1.5^2 + 2.5^2)
    const double D = std::sqrt(8.5), lift = 1 + 0.5 / D;
    EXPECT_NEAR(x[0], 3 * (2.5 / 3) * lift, 1e-14);
    EXPECT_NEAR(x[1], 1.5 * lift, 1e-14);
    EXPECT_EQ(x[2], 0.0);
    EXPECT_NEAR(x[0], 2.92874, 1e-5);
    EXPECT_NEAR(x[1], 1.75724, 1e-5);
    expect_optimal(SDiffPenalty(Regularizer::l1_minus_al2(1), 1), 0.5, y, x);

    EXPECT_EQ(prox_l1_minus_al2(1, 1, 1, vec({3, 0.5})), vec({3, 0}));
    // tie |y_pi(s+1)| = lambda keeps y^s
    EXPECT_EQ(prox_l1_minus_al2(1, 1, 1, vec({3, 1})), vec({3, 0}));
    // infinite-solution case a = 1, s = 1, |y_pi(1)| = lambda
    const Vector c = prox_l1_minus_al2(1, 1, 1, vec({-1, 1, 0.5}));
    EXPECT_EQ(c, vec({-1, 0, 0}));
    EXPECT_THROW(prox_l1_minus_al2(1.5, 1, 1, vec({1, 2})), ParameterError);
}

TEST(ProxL1MinusAL2, ReducesToL1AtZeroA) {
    Rng rng(21);
    for (int t = 0; t < 500; ++t) {
        const Index n = 2 + Index(rng.below(5));
        const Index s = 1 + Index(rng.below(std::uint64_t(n)));
        const double lambda = rng.uniform(0.01, 2);
        const Vector y = testutil::randn(rng, n, 2);
        const Vector a = prox_l1_minus_al2(0, s, lambda, y), b = prox_l1(s, lambda, y);
        for (Index i = 0; i < n; ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i]));
    }
}

TEST(ProxMcp, Examples) {
    const Vector y = vec({3, 0.5, 1.5});
    const Vector x = prox_mcp(2, 1, 1, y);
    EXPECT_NEAR((x - vec({3, 0, 1})).norm(), 0, 1e-15);
    expect_optimal(SDiffPenalty(Regularizer::mcp(2), 1), 1, y, x);
    const Vector y2 = vec({3, 0.4});
    const Vector x2 = prox_mcp(0.5, 1, 1, y2);
    EXPECT_EQ(x2, vec({3, 0}));
    expect_optimal(SDiffPenalty(Regularizer::mcp(0.5), 1), 1, y2, x2);
    EXPECT_EQ(prox_mcp(2, 1, 1, Vector::Zero(3)), Vector::Zero(3));
    // |y_i| = theta sits in the keep branch
    EXPECT_EQ(prox_mcp(2, 1, 1, vec({3, 2})), vec({3, 2}));
}

// theta <= lambda: the scalar problem is a hard threshold at sqrt(lambda theta), not at theta
TEST(ProxMcp, SmallThetaThreshold) {
    const double theta = 0.5, lambda = 1;
    const Vector y = vec({3, 0.6});  // theta < 0.6 < sqrt(0.5)
    const Vector x = prox_mcp(theta, 1, lambda, y);
    EXPECT_EQ(x, vec({3, 0}));
    expect_optimal(SDiffPenalty(Regularizer::mcp(theta), 1), lambda, y, x);
    EXPECT_EQ(prox_mcp(theta, 1, lambda, vec({3, 0.8})), vec({3, 0.8}));
}

TEST(ProxLsp, Examples) {
    const Vector y = vec({5, 2});
    const Vector x = prox_lsp(1, 1, 0.1, y);
    EXPECT_EQ(x[0], 5.0);
    // 1-D grid oracle for argmin_t (t-2)^2/0.2 + log(1+t)
    double best = 0, hb = 1e300;
    for (long k = 0; k <= 3000000; ++k) {
        const double t = k * 1e-6;
        const double h = (t - 2) * (t - 2) / 0.2 + std::log1p(t);
        if (h < hb) {
            hb = h;
            best = t;
        }
    }
    EXPECT_NEAR(x[1], best, 2e-6);
    EXPECT_NEAR(x[1], (1 + std::sqrt(8.6)) / 2, 1e-12);
    expect_optimal(SDiffPenalty(Regularizer::lsp(1), 1), 0.1, y, x);

    EXPECT_EQ(prox_lsp(1, 1, 0.1, Vector::Zero(2)), Vector::Zero(2));
    const Vector big = prox_lsp(1e6, 1, 1, vec({3, 2}));
    EXPECT_NEAR(big[1], 2, 1e-5);
}

TEST(ProxSdiff, DispatchAndErrors) {
    const Vector y = vec({3, -1, 0.5});
    EXPECT_EQ(prox_sdiff(ProxProblem(SDiffPenalty(Regularizer::l1(), 1), 1, y)), vec({3, 0, 0}));
    EXPECT_EQ(prox_sdiff(ProxProblem(SDiffPenalty(Regularizer::l1(), 3), 1, y)), y);
    EXPECT_THROW(prox_sdiff(ProxProblem(SDiffPenalty(Regularizer::scad(3), 1), 1, y)), CapabilityError);
    EXPECT_THROW(prox_sdiff(ProxProblem(SDiffPenalty(Regularizer::huber_of_l2(1), 1), 1, y)), CapabilityError);
    EXPECT_THROW(ProxProblem(SDiffPenalty(Regularizer::l1(), 1), 0, y), ParameterError);
    EXPECT_THROW(ProxProblem(SDiffPenalty(Regularizer::l1(), 4), 1, y), ParameterError);
    for (const auto& r : closed_form_regs())
        EXPECT_EQ(prox_sdiff(ProxProblem(SDiffPenalty(r, 2), 0.7, Vector::Zero(4))), Vector::Zero(4));
}

TEST(ProxOracle, Basics) {
    const SDiffPenalty p(Regularizer::l1(), 1);
    const Vector y = vec({3, -1, 0.5});
    const ProxProblem pp(p, 1, y);
    EXPECT_NEAR(prox_objective(pp, prox_oracle(pp)), prox_objective(pp, prox_l1(1, 1, y)), 1e-6);
    EXPECT_EQ(prox_oracle(ProxProblem(p, 1, Vector::Zero(3))), Vector::Zero(3));
    const ProxProblem full(SDiffPenalty(Regularizer::l1(), 3), 1, y);
    EXPECT_NEAR((prox_oracle(full) - y).norm(), 0, 1e-12);
    EXPECT_THROW(prox_oracle(pp, 10), ParameterError);
}

// random properties over every closed-form operator
TEST(ProxProperties, RandomInstances) {
    Rng rng(23);
    for (const auto& r : closed_form_regs()) {
        for (int t = 0; t < 500; ++t) {
            const Index n = 2 + Index(rng.below(5));
            const Index s = 1 + Index(rng.below(std::uint64_t(n)));
            const double lambda = rng.uniform(0.01, 2);
            Vector y = testutil::randn(rng, n, 2);
            const SDiffPenalty p(r, s);
            const Vector x = prox_sdiff(ProxProblem(p, lambda, y));
            EXPECT_NE(x.squaredNorm(), 0.0) << r.name();
            for (Index i = 0; i < n; ++i) EXPECT_GE(x[i] * y[i], 0.0) << r.name();
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j)
                    if (std::abs(y[i]) > std::abs(y[j])) EXPECT_GE(std::abs(x[i]), std::abs(x[j]) - 1e-12) << r.name();
            if (r.separable()) {
                const auto sp = top_s_split(y, s);
                for (Index i : sp.top) EXPECT_EQ(x[i], y[i]) << r.name();
            }
        }
    }
}

TEST(ProxProperties, OracleDominanceSmall) {
    Rng rng(29);
    for (const auto& r : closed_form_regs()) {
        for (int t = 0; t < 15; ++t) {
            const Index n = 2 + Index(rng.below(3));
            const Index s = 1 + Index(rng.below(std::uint64_t(n)));
            const double lambda = rng.uniform(0.01, 2);
            const Vector y = testutil::randn(rng, n, 2);
            const SDiffPenalty p(r, s);
            expect_optimal(p, lambda, y, prox_sdiff(ProxProblem(p, lambda, y)));
        }
    }
}

TEST(ProxProperties, FixedPointOfSparseAnchor) {
    Rng rng(31);
    for (const auto& r : closed_form_regs()) {
        const Vector y = testutil::rand_sparse(rng, 6, 2, 3);
        EXPECT_EQ(prox_sdiff(ProxProblem(SDiffPenalty(r, 2), 0.5, y)), y) << r.name();
    }
}

TEST(ProxObjective, Value) {
    const SDiffPenalty p(Regularizer::l1(), 1);
    EXPECT_NEAR(E(p, 0.5, vec({3, 1}), vec({3, 0})), 1.0 / 1.0, 1e-15);
}
