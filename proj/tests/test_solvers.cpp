#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "sdiff/solvers.hpp"

using namespace sdiff;
using testutil::vec;

namespace {

LeastSquaresProblem identity_problem(const Vector& b) {
    return LeastSquaresProblem(Matrix::Identity(b.size(), b.size()), b);
}

struct CsInstance {
    LeastSquaresProblem prob;
    Vector x_true;
};

CsInstance cs_instance(Index M, Index N, Index k, double noise, std::uint64_t seed, bool dct = false) {
    const auto S = dct ? gen_partial_dct(M, N, Rng::derive(seed, 0)) : gen_gaussian(M, N, Rng::derive(seed, 0));
    const Vector x = gen_sparse_signal(N, k, Rng::derive(seed, 1));
    Vector b = S.A * x;
    Rng nr(Rng::derive(seed, 2));
    for (Index i = 0; i < M; ++i) b[i] += noise * nr.normal();
    return {LeastSquaresProblem(S.A, b), x};
}

SolverConfig warm(double rho, double warm_rho) {
    SolverConfig c;
    c.rho = rho;
    c.init = InitKind::L1AdmmWarmStart;
    c.warm_start_rho = warm_rho;
    return c;
}

double relerr(const Vector& x, const Vector& t) { return (x - t).norm() / t.norm(); }

}  // namespace

TEST(LsGradient, Examples) {
    const auto p = identity_problem(vec({1, 0}));
    EXPECT_EQ(ls_gradient(p, Vector::Zero(2)), vec({-1, 0}));
    EXPECT_EQ(ls_gradient(p, vec({1, 0})), vec({0, 0}));
    EXPECT_THROW(ls_gradient(p, Vector::Zero(3)), DimensionError);
}

TEST(LsGradient, FiniteDifferences) {
    auto in = cs_instance(6, 9, 2, 0.1, 4);
    Rng rng(1);
    const Vector x = testutil::randn(rng, 9);
    const Vector g = ls_gradient(in.prob, x);
    const double h = 1e-6;
    for (Index i = 0; i < 9; ++i) {
        Vector e = Vector::Zero(9);
        e[i] = h;
        const double fd = (in.prob.loss(x + e) - in.prob.loss(x - e)) / (2 * h);
        EXPECT_NEAR(fd, g[i], 1e-6 * std::max(1.0, g.norm()));
    }
}

TEST(Problem, LipschitzAndValidation) {
    auto in = cs_instance(20, 50, 3, 0, 2);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const Vector v = testutil::randn(rng, 50);
        EXPECT_LE((in.prob.A.transpose() * (in.prob.A * v)).norm(), (in.prob.lipschitz + 1e-8) * v.norm());
    }
    EXPECT_THROW(LeastSquaresProblem(Matrix::Identity(2, 2), vec({1, 2, 3})), DimensionError);
    EXPECT_THROW(LeastSquaresProblem(Matrix::Zero(2, 2), vec({1, 2})), ParameterError);
}

TEST(Fbs, IdentityExamples) {
    const auto p = identity_problem(vec({5, 0}));
    SolverConfig c;
    c.rho = 0.1;
    c.step = 0.99;
    const auto tr = fbs_solve(p, SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_TRUE(tr.converged);
    EXPECT_NEAR(tr.solution[0], 5, 1e-4);
    EXPECT_EQ(tr.solution[1], 0.0);
    EXPECT_NEAR(tr.objective_history.back(), 0, 1e-8);

    const auto z = fbs_solve(identity_problem(Vector::Zero(3)), SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_EQ(z.iterations, 1);
    EXPECT_EQ(z.solution, Vector::Zero(3));
}

TEST(Fbs, StepAndCapabilityGuards) {
    const auto p = identity_problem(vec({5, 0}));
    SolverConfig c;
    c.step = 1.5;
    EXPECT_THROW(fbs_solve(p, SDiffPenalty(Regularizer::l1(), 1), c), ParameterError);
    c.allow_unsafe_step = true;
    EXPECT_NO_THROW(fbs_solve(p, SDiffPenalty(Regularizer::l1(), 1), c));
    EXPECT_THROW(fbs_solve(p, SDiffPenalty(Regularizer::scad(3), 1), SolverConfig{}), CapabilityError);
    EXPECT_THROW(fbs_solve(p, SDiffPenalty(Regularizer::l1(), 3), SolverConfig{}), ParameterError);
}

// step 2.5/L on the identity: x <- prox(-1.5 x + 2.5 b) grows without bound
TEST(Fbs, DivergenceIsReported) {
    const auto p = identity_problem(vec({5, 1, 1}));
    SolverConfig c;
    c.step = 2.5;
    c.allow_unsafe_step = true;
    c.rho = 1e-9;
    c.max_iter = 5000;
    c.tol = 0;
    try {
        fbs_solve(p, SDiffPenalty(Regularizer::l1(), 3), c);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.iteration, 1);
    }
}

TEST(Fbs, RecoversSparseSignalNoiseless) {
    auto rate = [](Index k, int trials) {
        int ok = 0;
        for (int t = 0; t < trials; ++t) {
            auto in = cs_instance(64, 256, k, 0, 100 + t);
            const auto tr = fbs_solve(in.prob, SDiffPenalty(Regularizer::l1(), k), warm(0.1, 1e-6));
            ok += relerr(tr.solution, in.x_true) <= 1e-3;
        }
        return double(ok) / trials;
    };
    EXPECT_GT(rate(12, 40), 0.5);
    // near the transition: about half succeed with the N-sweep warm start
    EXPECT_GE(rate(16, 60), 0.4);
}

// monotone descent, the rate bound, the refined bound and stationarity on seeded runs
TEST(Fbs, DescentDiagnostics) {
    const std::vector<Regularizer> regs = {Regularizer::l1(), Regularizer::l2(), Regularizer::l1_minus_al2(1),
                                           Regularizer::mcp(1), Regularizer::lsp(0.5), Regularizer::l2_squared()};
    for (int t = 0; t < 12; ++t) {
        const bool noisy = t % 2, dct = (t / 2) % 2;
        auto in = cs_instance(40, 120, 8, noisy ? 0.01 : 0.0, 300 + t, dct);
        const Regularizer r = regs[t % regs.size()];
        SolverConfig c = warm(noisy ? 1.0 : 0.1, noisy ? 1e-3 : 1e-6);
        c.keep_iterates = true;
        const SDiffPenalty pen(r, 8);
        const auto tr = fbs_solve(in.prob, pen, c);
        const double beta = 0.99 / in.prob.lipschitz, L = in.prob.lipschitz;
        const auto& F = tr.objective_history;
        for (std::size_t k = 1; k < F.size(); ++k) EXPECT_LE(F[k], F[k - 1] + 1e-10 * std::max(1.0, F[0]));
        EXPECT_TRUE(check_descent_bound(tr, L, beta)) << r.name();
        if (tr.converged)
            EXPECT_LE(tr.fixed_point_residual, 10 * c.tol * std::max(1.0, tr.solution.norm())) << r.name();
        if (r.separable()) {
            for (std::size_t k = 0; k + 1 < tr.iterates.size(); ++k) {
                const Vector& a = tr.iterates[k];
                const Vector& b = tr.iterates[k + 1];
                const double d2 = (b - a).squaredNorm();
                const double delta = refined_descent_delta(a, b, pen);
                const double bound = (L / 2 - 1 / (2 * beta)) * d2 + std::min(-d2 / (2 * beta) + c.rho * delta, 0.0);
                EXPECT_LE(F[k + 1] - F[k], bound + 1e-10 * std::max(1.0, F[0])) << r.name() << " k=" << k;
            }
        }
    }
}

TEST(CheckDescentBound, ConstantTraceAndNegativeControl) {
    SolveTrace flat;
    flat.objective_history = {3, 3, 3, 3};
    flat.step_norm_history = {0, 0, 0};
    EXPECT_TRUE(check_descent_bound(flat, 1, 0.5));

    // step 2/L: the iteration oscillates and the objective goes up
    const auto p = identity_problem(vec({4, 3, 0.5}));
    SolverConfig c;
    c.step = 2.0;
    c.allow_unsafe_step = true;
    c.rho = 0.1;
    c.max_iter = 20;
    const auto tr = fbs_solve(p, SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_FALSE(check_descent_bound(tr, 1, 2.0));
}

TEST(RefinedDelta, Examples) {
    const SDiffPenalty p(Regularizer::l1(), 1);
    EXPECT_EQ(refined_descent_delta(vec({3, 2}), vec({4, 1}), p), 0.0);
    EXPECT_EQ(refined_descent_delta(vec({3, 2}), vec({2, 3}), p), 1.0);
    EXPECT_EQ(refined_descent_delta(vec({0, 0}), vec({2, 3}), p), 0.0);
    EXPECT_THROW(refined_descent_delta(vec({1, 2}), vec({1, 2}), SDiffPenalty(Regularizer::l2(), 1)), CapabilityError);
}

TEST(Fbs, ReproducibleWithFixedIterations) {
    auto in = cs_instance(32, 96, 5, 0.01, 7);
    SolverConfig c = warm(1.0, 1e-3);
    c.tol = 0;
    c.max_iter = 60;
    const auto a = fbs_solve(in.prob, SDiffPenalty(Regularizer::l1(), 5), c);
    const auto b = fbs_solve(in.prob, SDiffPenalty(Regularizer::l1(), 5), c);
    EXPECT_EQ(a.iterations, 60);
    EXPECT_EQ(a.solution, b.solution);
    EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(Fbs, RhoContinuationReachesFeasibility) {
    auto in = cs_instance(48, 128, 6, 0.01, 12);
    SolverConfig c = warm(0.1, 1e-3);
    c.rho_schedule = {0.01, 0.1, 1, 10};
    const SDiffPenalty pen(Regularizer::l1(), 6);
    const auto tr = fbs_solve(in.prob, pen, c);
    EXPECT_LE(penalty_eval(pen, tr.solution), 1e-8);
    SolverConfig bad = c;
    bad.rho_schedule = {1, 0.5};
    EXPECT_THROW(fbs_solve(in.prob, pen, bad), ParameterError);
}

TEST(Fbs, AdaptiveSRecovers) {
    auto in = cs_instance(64, 256, 8, 0, 41);
    SolverConfig c = warm(0.1, 1e-6);
    c.adaptive_s = true;
    const auto tr = fbs_solve(in.prob, SDiffPenalty(Regularizer::l1(), 40), c);
    EXPECT_LE(relerr(tr.solution, in.x_true), 1e-3);
    EXPECT_FALSE(tr.s_history.empty());
}

TEST(AdaptiveS, Examples) {
    EXPECT_EQ(adaptive_s_update(vec({5, 0.2, 0, 0}), vec({4, 1, 0.05, 0}), 2, 0.5), 1);
    const Vector x = vec({3, -2, 0.5, 0});
    EXPECT_EQ(adaptive_s_update(x, x, 3, 0.1), 3);
    EXPECT_EQ(adaptive_s_update(Vector::Zero(4), vec({1, 0, 0, 0}), 1, 0.1), 1);
    EXPECT_THROW(adaptive_s_update(x, x, 3, 0), ParameterError);
}

TEST(Pdca, Examples) {
    SolverConfig c;
    c.rho = 0.1;
    const auto tr = pdca_solve(identity_problem(vec({5, 0})), SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_TRUE(tr.converged);
    EXPECT_NEAR(tr.solution[0], 5, 1e-4);
    EXPECT_EQ(tr.solution[1], 0.0);
    const auto z = pdca_solve(identity_problem(Vector::Zero(3)), SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_EQ(z.solution, Vector::Zero(3));
    EXPECT_THROW(pdca_solve(identity_problem(vec({1, 2})), SDiffPenalty(Regularizer::lsp(1), 1), c), CapabilityError);
}

TEST(Pdca, SlowerThanFbsOnNoisyInstance) {
    auto in = cs_instance(128, 512, 24, 0.01, 77);
    const SDiffPenalty pen(Regularizer::l1(), 24);
    const auto f = fbs_solve(in.prob, pen, warm(1.0, 1e-3));
    const auto d = pdca_solve(in.prob, pen, warm(1e-3, 1e-3));
    EXPECT_LT(f.iterations, d.iterations);
}

TEST(DcaAdmm, Examples) {
    SolverConfig c;
    c.rho = 0.1;
    const auto tr = dca_admm_solve(identity_problem(vec({5, 0})), SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_NEAR(tr.solution[0], 5, 1e-4);
    EXPECT_NEAR(tr.solution[1], 0, 1e-12);
    EXPECT_LE(tr.outer_iterations, 20);
    const auto z = dca_admm_solve(identity_problem(Vector::Zero(3)), SDiffPenalty(Regularizer::l1(), 1), c);
    EXPECT_EQ(z.solution, Vector::Zero(3));
    EXPECT_THROW(dca_admm_solve(identity_problem(vec({1, 2})), SDiffPenalty(Regularizer::l2(), 1), c), CapabilityError);
    AdmmConfig g;
    g.generalized = true;
    EXPECT_NO_THROW(dca_admm_solve(identity_problem(vec({1, 2})), SDiffPenalty(Regularizer::l1_minus_al2(1), 1), c, g));
}

TEST(DcaAdmm, RecoversNoiselessSignal) {
    auto in = cs_instance(64, 256, 8, 0, 5);
    const auto tr = dca_admm_solve(in.prob, SDiffPenalty(Regularizer::l1(), 8), warm(1e-6, 1e-6));
    EXPECT_LE(relerr(tr.solution, in.x_true), 1e-3);
    AdmmConfig g;
    g.generalized = true;
    const auto tg = dca_admm_solve(in.prob, SDiffPenalty(Regularizer::l1_minus_al2(1), 4), warm(1e-6, 1e-6), g);
    EXPECT_LE(relerr(tg.solution, in.x_true), 1e-2);
}

TEST(L1Admm, Examples) {
    const auto p = identity_problem(vec({5, 0}));
    const Vector x = l1_admm_solve(p, 0.5, 20000);
    EXPECT_NEAR(x[0], 4.5, 1e-8);
    EXPECT_NEAR(x[1], 0, 1e-12);
    // rho = 0: least squares
    auto in = cs_instance(30, 12, 3, 0.1, 6);
    const Vector ls = in.prob.A.colPivHouseholderQr().solve(in.prob.b);
    EXPECT_NEAR((l1_admm_solve(in.prob, 0, 400, 1.0) - ls).norm(), 0, 1e-6);
    EXPECT_EQ(l1_admm_solve(identity_problem(Vector::Zero(3)), 0.5, 10), Vector::Zero(3));
    EXPECT_THROW(l1_admm_solve(p, 0.5, 0), ParameterError);
    EXPECT_DOUBLE_EQ(l1_admm_default_mu(1e-3), 0.1);
}

TEST(L1Admm, TraceMatchesSoftThreshold) {
    SolverConfig c;
    c.max_iter = 20000;
    c.tol = 1e-10;
    const auto tr = l1_admm_trace(identity_problem(vec({5, -0.2, 2})), 0.5, c);
    EXPECT_NEAR((tr.solution - vec({4.5, 0, 1.5})).norm(), 0, 1e-4);
}

TEST(Aiht, Examples) {
    SolverConfig c;
    const auto tr = aiht_solve(identity_problem(vec({5, 0.1, 0})), 1, c);
    EXPECT_NEAR((tr.solution - vec({5, 0, 0})).norm(), 0, 1e-4);
    EXPECT_EQ(tr.solution[1], 0.0);
    auto in = cs_instance(64, 256, 8, 0, 9);
    const auto r = aiht_solve(in.prob, 8, warm(1e-6, 1e-6));
    EXPECT_LE(relerr(r.solution, in.x_true), 1e-3);
}

// the scalar threshold against a grid minimization of (t - v)^2 + lam sqrt|t|
TEST(HalfThreshold, ScalarOperator) {
    Rng rng(3);
    for (int k = 0; k < 40; ++k) {
        const double v = rng.uniform(-4, 4), lam = rng.uniform(0.05, 2);
        auto h = [&](double t) { return (t - v) * (t - v) + lam * std::sqrt(std::abs(t)); };
        double best = 0, hb = h(0);
        for (long i = -400000; i <= 400000; ++i) {
            const double t = i * 1e-5;
            if (h(t) < hb) {
                hb = h(t);
                best = t;
            }
        }
        EXPECT_LE(h(half_threshold(v, lam)), hb + 1e-9) << v << " " << lam;
        EXPECT_NEAR(half_threshold(v, lam), best, 1e-4) << v << " " << lam;
    }
}

TEST(HalfThreshold, Examples) {
    SolverConfig c;
    EXPECT_EQ(half_threshold_solve(identity_problem(Vector::Zero(3)), 0.1, c).solution, Vector::Zero(3));
    EXPECT_EQ(half_threshold_solve(identity_problem(vec({1, -2, 0.5})), 100, c).solution, Vector::Zero(3));
    EXPECT_THROW(half_threshold_solve(identity_problem(vec({1})), 0, c), ParameterError);
}

TEST(L12Dca, Examples) {
    SolverConfig c;
    c.rho = 0.1;
    EXPECT_EQ(l12_dca_solve(identity_problem(Vector::Zero(3)), 0.1, c).solution, Vector::Zero(3));
    const auto tr = l12_dca_solve(identity_problem(vec({5, 0})), 0.1, c);
    EXPECT_NEAR(tr.solution[0], 5, 1e-4);
    EXPECT_NEAR(tr.solution[1], 0, 1e-12);
}

TEST(RhoBound, Examples) {
    EXPECT_DOUBLE_EQ(rho_lower_bound(bound::LipschitzLossL1{2}), 2);
    EXPECT_NEAR(rho_lower_bound(bound::LeastSquaresL1{1, 1, 1, 1}), 2 + 1 / (2 * std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(rho_lower_bound(bound::LeastSquaresL1{1, 1, 1, 1}), 2.353553, 1e-6);
    EXPECT_NEAR(rho_lower_bound(bound::LipschitzLossL1L2{1, 1, 4}), 4.0 / 3, 1e-15);
    EXPECT_NEAR(rho_lower_bound(bound::LipschitzLoss{3, 1.5}), 2, 1e-15);
    EXPECT_NEAR(rho_lower_bound(bound::LipschitzLossLSP{1, 3, 1}), 0.5, 1e-15);
    EXPECT_NEAR(rho_lower_bound(bound::LeastSquaresL1L2{1, 1, 1, 3, 1}),
                (1 + (1 + 1 / (2 * std::sqrt(4.0)))) / (1 - 1 / (2 * std::sqrt(3.0))), 1e-14);
    EXPECT_NEAR(rho_lower_bound(bound::GradientLipschitz{1, 2, 1, 0.5, 3}), (1 + 1.25 * 2) / 0.5, 1e-14);
    EXPECT_THROW(rho_lower_bound(bound::LipschitzLossL1L2{1, 2, 4}), ParameterError);
    EXPECT_THROW(rho_lower_bound(bound::LipschitzLossLSP{1, 1, 3}), ParameterError);
    EXPECT_THROW(rho_lower_bound(bound::LipschitzLossL1{0}), ParameterError);
}
