#pragma once

#include "qbcast/densops.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace qbtest {

// splitmix64; test-local so expected values stay frozen across toolchains
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

inline qbcast::QubitParams random_qubit_params(Rng& rng) {
    return {rng.uniform(0.0, std::numbers::pi / 2.0),
            rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform()};
}

inline qbcast::DensityOperator random_density(Rng& rng, std::size_t dim) {
    qbcast::ComplexMatrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            a(i, j) = qbcast::cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    qbcast::ComplexMatrix g = a * a.adjoint();
    g *= qbcast::cplx{1.0 / g.trace().real()};
    // exact Hermitian symmetrization of the product rounding
    for (std::size_t i = 0; i < dim; ++i) {
        g(i, i) = qbcast::cplx{g(i, i).real(), 0.0};
        for (std::size_t j = i + 1; j < dim; ++j) {
            const qbcast::cplx avg = 0.5 * (g(i, j) + std::conj(g(j, i)));
            g(i, j) = avg;
            g(j, i) = std::conj(avg);
        }
    }
    return qbcast::DensityOperator(std::move(g));
}

inline qbcast::ComplexMatrix random_unitary(Rng& rng, std::size_t n) {
    qbcast::ComplexMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) = rng.uniform(-1.5, 1.5);
        for (std::size_t j = i + 1; j < n; ++j) {
            const qbcast::cplx v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    const qbcast::EighResult e = qbcast::eigh(h);
    qbcast::ComplexMatrix u(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const qbcast::cplx phase = std::polar(1.0, e.eigenvalues[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                u(i, j) += e.eigenvectors(i, k) * phase * std::conj(e.eigenvectors(j, k));
    }
    return u;
}

// independent partial-trace oracle: brute-force double sum over composite
// indices, no shared code with qbcast::partial_trace
inline qbcast::ComplexMatrix oracle_marginal(const qbcast::ComplexMatrix& rho,
                                             const std::vector<std::size_t>& dims,
                                             std::size_t keep) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    auto digits = [&](std::size_t idx) {
        std::vector<std::size_t> out(dims.size());
        for (std::size_t k = dims.size(); k-- > 0;) {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
        return out;
    };
    qbcast::ComplexMatrix out(dims[keep], dims[keep]);
    for (std::size_t row = 0; row < total; ++row)
        for (std::size_t col = 0; col < total; ++col) {
            const auto dr = digits(row);
            const auto dc = digits(col);
            bool rest_equal = true;
            for (std::size_t k = 0; k < dims.size(); ++k)
                if (k != keep && dr[k] != dc[k]) rest_equal = false;
            if (rest_equal) out(dr[keep], dc[keep]) += rho(row, col);
        }
    return out;
}

}  // namespace qbtest
