#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "sdiff/core.hpp"
#include "sdiff/rng.hpp"

namespace sdiff {

enum class MatrixKind : std::uint32_t { GaussianUnitColumns = 1, PartialDct = 2, Custom = 3 };

inline std::string to_string(MatrixKind k) {
    switch (k) {
        case MatrixKind::GaussianUnitColumns: return "gaussian";
        case MatrixKind::PartialDct: return "dct";
        case MatrixKind::Custom: return "custom";
    }
    return "?";
}

inline MatrixKind matrix_kind_from_string(const std::string& s) {
    if (s == "gaussian") return MatrixKind::GaussianUnitColumns;
    if (s == "dct") return MatrixKind::PartialDct;
    if (s == "custom") return MatrixKind::Custom;
    throw ParameterError("unknown matrix kind '" + s + "' (gaussian, dct, custom)");
}

struct SensingMatrix {
    Matrix A;
    MatrixKind kind = MatrixKind::Custom;
    std::uint64_t seed = 0;

    Index rows() const { return A.rows(); }
    Index cols() const { return A.cols(); }
};

// i.i.d. N(0,1) filled column by column, then columns scaled to unit norm
inline SensingMatrix gen_gaussian(Index M, Index N, std::uint64_t seed) {
    if (M < 1 || N < 1) throw ParameterError("gen_gaussian: M, N must be >= 1");
    Rng rng(seed);
    SensingMatrix S{Matrix(M, N), MatrixKind::GaussianUnitColumns, seed};
    for (Index j = 0; j < N; ++j) {
        double nrm = 0;
        do {
            for (Index i = 0; i < M; ++i) S.A(i, j) = rng.normal();
            nrm = S.A.col(j).norm();
        } while (nrm == 0);
        S.A.col(j) /= nrm;
    }
    return S;
}

// rows of the orthonormal N x N DCT-II, sampled without replacement, kept in ascending order
inline SensingMatrix gen_partial_dct(Index M, Index N, std::uint64_t seed) {
    if (M < 1 || N < 1) throw ParameterError("gen_partial_dct: M, N must be >= 1");
    if (M > N) throw ParameterError("gen_partial_dct: M > N");
    Rng rng(seed);
    auto rows = rng.sample<Index>(N, M);
    std::sort(rows.begin(), rows.end());
    SensingMatrix S{Matrix(M, N), MatrixKind::PartialDct, seed};
    const double c0 = std::sqrt(1.0 / N), c1 = std::sqrt(2.0 / N);
    for (Index r = 0; r < M; ++r) {
        const Index k = rows[r];
        const double a = k == 0 ? c0 : c1;
        for (Index j = 0; j < N; ++j)
            S.A(r, j) = a * std::cos(std::numbers::pi * double((2 * j + 1) * k) / double(2 * N));
    }
    return S;
}

// indices first, then values; exact zeros redrawn
inline Vector gen_sparse_signal(Index N, Index s_truth, std::uint64_t seed) {
    if (s_truth < 1 || s_truth > N) throw ParameterError("gen_sparse_signal: need 1 <= s_truth <= N");
    Rng rng(seed);
    const auto idx = rng.sample<Index>(N, s_truth);
    Vector x = Vector::Zero(N);
    for (Index k : idx) {
        double v;
        do v = rng.normal();
        while (v == 0);
        x[k] = v;
    }
    return x;
}

// largest eigenvalue of A^T A by power iteration
inline double spectral_norm_sq(const Matrix& A, double tol = 1e-10, int max_iter = 1000) {
    const Index n = A.cols();
    if (A.rows() < 1 || n < 1) throw DimensionError("spectral_norm_sq: empty matrix");
    Rng rng(0x51ec7);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();
    double lam = 0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = A.transpose() * (A * v);
        const double next = v.dot(w);
        const double wn = w.norm();
        if (wn == 0) return 0.0;
        v = w / wn;
        if (it > 0 && std::abs(next - lam) <= tol * std::abs(next)) {
            lam = next;
            break;
        }
        lam = next;
    }
    // Rayleigh quotient at the final vector
    return std::max(lam, (A * v).squaredNorm());
}

inline double spectral_norm_sq(const SensingMatrix& S) { return spectral_norm_sq(S.A); }

// Dump format (binary): "SDIFFMAT" magic, then little-endian u64 M, u64 N,
// u32 kind, u64 seed, then M*N f64 values in row-major order.
namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) {
        const int c = is.get();
        if (c == EOF) throw std::runtime_error("matrix dump: truncated file");
        v |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * b);
    }
    return v;
}

constexpr char kMagic[8] = {'S', 'D', 'I', 'F', 'F', 'M', 'A', 'T'};

}  // namespace detail

inline void write_matrix_binary(const SensingMatrix& S, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(detail::kMagic, 8);
    detail::put_le(os, std::uint64_t(S.rows()), 8);
    detail::put_le(os, std::uint64_t(S.cols()), 8);
    detail::put_le(os, std::uint64_t(S.kind), 4);
    detail::put_le(os, S.seed, 8);
    for (Index i = 0; i < S.rows(); ++i)
        for (Index j = 0; j < S.cols(); ++j) detail::put_le(os, std::bit_cast<std::uint64_t>(S.A(i, j)), 8);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline SensingMatrix read_matrix_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || !std::equal(magic, magic + 8, detail::kMagic)) throw std::runtime_error(path + ": bad magic");
    const auto M = Index(detail::get_le(is, 8)), N = Index(detail::get_le(is, 8));
    const auto kind = static_cast<MatrixKind>(detail::get_le(is, 4));
    const auto seed = detail::get_le(is, 8);
    if (M < 1 || N < 1 || M > (1 << 20) || N > (1 << 20)) throw std::runtime_error(path + ": bad dimensions");
    SensingMatrix S{Matrix(M, N), kind, seed};
    for (Index i = 0; i < M; ++i)
        for (Index j = 0; j < N; ++j) S.A(i, j) = std::bit_cast<double>(detail::get_le(is, 8));
    return S;
}

// CSV dump: header line "# M,N,kind,seed" values, then one row per line in %.17g
inline void write_matrix_csv(const SensingMatrix& S, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "# %ld,%ld,%s,%llu\n", long(S.rows()), long(S.cols()), to_string(S.kind).c_str(),
                 static_cast<unsigned long long>(S.seed));
    for (Index i = 0; i < S.rows(); ++i)
        for (Index j = 0; j < S.cols(); ++j) std::fprintf(f, j + 1 < S.cols() ? "%.17g," : "%.17g\n", S.A(i, j));
    std::fclose(f);
}

inline SensingMatrix read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line.rfind("# ", 0) != 0) throw std::runtime_error(path + ": missing header");
    std::stringstream hs(line.substr(2));
    std::string tok;
    std::vector<std::string> h;
    while (std::getline(hs, tok, ',')) h.push_back(tok);
    if (h.size() != 4) throw std::runtime_error(path + ": bad header");
    const Index M = std::stol(h[0]), N = std::stol(h[1]);
    SensingMatrix S{Matrix(M, N), matrix_kind_from_string(h[2]), std::stoull(h[3])};
    for (Index i = 0; i < M; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error(path + ": too few rows");
        std::stringstream rs(line);
        for (Index j = 0; j < N; ++j) {
            if (!std::getline(rs, tok, ',')) throw std::runtime_error(path + ": short row " + std::to_string(i));
            S.A(i, j) = std::stod(tok);
        }
    }
    return S;
}

}  // namespace sdiff
