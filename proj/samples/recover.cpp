// recover a sparse vector from Gaussian measurements with a few penalties
#include <cstdio>

#include "sdiff/bench.hpp"

using namespace sdiff;

int main() {
    const Index M = 128, N = 512, k = 16;
    const auto S = gen_gaussian(M, N, 42);
    const Vector x = gen_sparse_signal(N, k, 43);
    const LeastSquaresProblem prob(S.A, S.A * x);

    SolverConfig cfg;
    cfg.init = InitKind::L1AdmmWarmStart;
    cfg.warm_start_rho = 1e-6;

    std::printf("%-18s %10s %12s\n", "penalty", "iters", "rel_err");
    for (const auto& r : {Regularizer::l1(), Regularizer::l2(), Regularizer::l1_minus_al2(1.0)}) {
        cfg.rho = 0.1;
        const SolveTrace tr = fbs_solve(prob, SDiffPenalty(r, k), cfg);
        std::printf("%-18s %10ld %12.3e\n", r.name().c_str(), tr.iterations, rel_err(tr.solution, x));
    }

    cfg.rho = 1e-6;
    const SolveTrace aiht = aiht_solve(prob, k, cfg);
    std::printf("%-18s %10ld %12.3e\n", "aiht", aiht.iterations, rel_err(aiht.solution, x));

    // with s unknown, start high and let the adaptive rule shrink it
    cfg.rho = 0.1;
    cfg.adaptive_s = true;
    const SolveTrace ad = fbs_solve(prob, SDiffPenalty(Regularizer::l1(), 40), cfg);
    std::printf("%-18s %10ld %12.3e  final s %ld\n", "adaptive", ad.iterations, rel_err(ad.solution, x),
                long(ad.s_history.back()));
}
