#include "qbcast/cloners.hpp"
#include "qbcast/densops.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qbcast;
using qbtest::Rng;

namespace {
const double pi = std::numbers::pi;
}

TEST_SUITE_BEGIN("densops");

TEST_CASE("qubit_from_params basis cases") {
    const DensityOperator north = qubit_from_params({0.0, 0.0, 1.0});
    CHECK(north(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(north(0, 1)) == doctest::Approx(0.0).epsilon(1e-14));

    // lambda = 1/2 is maximally mixed for any angles
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const DensityOperator mixed =
            qubit_from_params({rng.uniform(0.0, pi), rng.uniform(0.0, 2 * pi), 0.5});
        CHECK(max_abs_diff(mixed.matrix(), DensityOperator::maximally_mixed(2).matrix()) <
              1e-14);
    }

    const DensityOperator plus = qubit_from_params({pi / 4.0, 0.0, 1.0});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(plus(i, j) - cplx{0.5}) < 1e-14);
}

TEST_CASE("qubit_from_params rejects bad lambda") {
    CHECK_THROWS_AS(qubit_from_params({0.0, 0.0, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(qubit_from_params({0.0, 0.0, 1.1}), std::invalid_argument);
}

TEST_CASE("qubit_from_params eigenvalues are {lambda, 1-lambda}") {
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const QubitParams p = qbtest::random_qubit_params(rng);
        auto evs = eigh(qubit_from_params(p).matrix()).eigenvalues;
        std::vector<double> expect{p.lambda, 1.0 - p.lambda};
        std::sort(expect.begin(), expect.end());
        CHECK(std::abs(evs[0] - expect[0]) < 1e-12);
        CHECK(std::abs(evs[1] - expect[1]) < 1e-12);
    }
}

TEST_CASE("tensor identities and bookkeeping") {
    CHECK(max_abs_diff(tensor(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
                       ComplexMatrix::identity(4)) == 0.0);

    const DensityOperator zero = qubit_from_params({0.0, 0.0, 1.0});
    const DensityOperator one = qubit_from_params({0.0, 0.0, 0.0});
    const DensityOperator prod = tensor(zero, one);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::abs(prod(i, j) - (i == 1 && j == 1 ? cplx{1.0} : cplx{})) < 1e-14);
}

TEST_CASE("tensor trace factorizes") {
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        const DensityOperator r1 = qbtest::random_density(rng, 2);
        const DensityOperator r2 = qbtest::random_density(rng, 3);
        const DensityOperator t = tensor(r1, r2);
        // independent route: sum the diagonal by hand
        cplx tr = 0.0;
        for (std::size_t k = 0; k < 6; ++k) tr += t(k, k);
        CHECK(std::abs(tr - r1.matrix().trace() * r2.matrix().trace()) < 1e-13);
        CHECK(std::abs(tr - cplx{1.0}) < 1e-13);
    }
}

TEST_CASE("tensor is associative") {
    Rng rng(14);
    const DensityOperator a = qbtest::random_density(rng, 2);
    const DensityOperator b = qbtest::random_density(rng, 2);
    const DensityOperator c = qbtest::random_density(rng, 3);
    CHECK(max_abs_diff(tensor(tensor(a, b), c).matrix(),
                       tensor(a, tensor(b, c)).matrix()) < 1e-15);
}

TEST_CASE("partial_trace recovers product factors") {
    Rng rng(15);
    const DensityOperator r1 = qbtest::random_density(rng, 2);
    const DensityOperator r2 = qbtest::random_density(rng, 2);
    const DensityOperator joint = tensor(r1, r2);
    const std::vector<std::size_t> dims{2, 2};
    CHECK(max_abs_diff(partial_trace(joint, dims, 0).matrix(), r1.matrix()) < 1e-14);
    CHECK(max_abs_diff(partial_trace(joint, dims, 1).matrix(), r2.matrix()) < 1e-14);
}

TEST_CASE("partial_trace of a Bell state is maximally mixed") {
    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<cplx> bell{r, 0.0, 0.0, r};
    const DensityOperator rho = DensityOperator::pure(bell);
    const std::vector<std::size_t> dims{2, 2};
    const DensityOperator marg = partial_trace(rho, dims, 1);
    CHECK(max_abs_diff(marg.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
}

TEST_CASE("partial_trace matches the brute-force oracle and is order independent") {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        // random 3-qubit pure state
        std::vector<cplx> v(8);
        double norm = 0.0;
        for (auto& z : v) {
            z = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            norm += std::norm(z);
        }
        for (auto& z : v) z /= std::sqrt(norm);
        const DensityOperator rho = DensityOperator::pure(v);
        const std::vector<std::size_t> dims{2, 2, 2};

        // one-shot marginal vs tracing the last qubit first vs the oracle
        const DensityOperator direct = partial_trace(rho, dims, 0);
        const ComplexMatrix oracle = qbtest::oracle_marginal(rho.matrix(), {2, 2, 2}, 0);
        const DensityOperator keep01 =
            partial_trace(rho, std::vector<std::size_t>{4, 2}, 0);
        const DensityOperator stepwise =
            partial_trace(keep01, std::vector<std::size_t>{2, 2}, 0);
        CHECK(max_abs_diff(direct.matrix(), oracle) < 1e-12);
        CHECK(max_abs_diff(stepwise.matrix(), oracle) < 1e-12);

        // trace preservation and positivity
        CHECK(std::abs(direct.matrix().trace() - cplx{1.0}) < 1e-13);
        CHECK(direct.min_eigenvalue() > -1e-10);
    }
}

TEST_CASE("partial_trace rejects inconsistent dims") {
    const DensityOperator rho = DensityOperator::maximally_mixed(4);
    CHECK_THROWS_AS(partial_trace(rho, std::vector<std::size_t>{2, 3}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(rho, std::vector<std::size_t>{2, 2}, 2),
                    std::invalid_argument);
}

TEST_CASE("mat_sqrt_psd fixed points") {
    const ComplexMatrix s = mat_sqrt_psd(DensityOperator::maximally_mixed(2));
    ComplexMatrix expect = ComplexMatrix::identity(2);
    expect *= cplx{1.0 / std::sqrt(2.0)};
    CHECK(max_abs_diff(s, expect) < 1e-14);

    const DensityOperator proj = qubit_from_params({0.0, 0.0, 1.0});
    CHECK(max_abs_diff(mat_sqrt_psd(proj), proj.matrix()) < 1e-14);
}

TEST_CASE("mat_sqrt_psd squares back and is Hermitian") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const DensityOperator rho = qbtest::random_density(rng, 4);
        const ComplexMatrix s = mat_sqrt_psd(rho);
        CHECK(max_abs_diff(s, s.adjoint()) < 1e-12);
        CHECK(max_abs_diff(s * s, rho.matrix()) < 1e-10);
    }
}

TEST_CASE("mat_sqrt_psd clamps noise and rejects real negatives") {
    ComplexMatrix noisy(2, 2);
    noisy(0, 0) = 1.0 + 1e-9;
    noisy(1, 1) = -1e-9;
    const ComplexMatrix s = mat_sqrt_psd(DensityOperator(noisy));
    CHECK(s(1, 1).real() == 0.0);

    ComplexMatrix bad(2, 2);
    bad(0, 0) = 1.0 + 1e-6;
    bad(1, 1) = -1e-6;
    CHECK_THROWS_AS(mat_sqrt_psd(DensityOperator(bad)), std::invalid_argument);
}

TEST_CASE("is_unitary") {
    CHECK(is_unitary(ComplexMatrix::identity(8), 1e-12));
    ComplexMatrix stretched(2, 2);
    stretched(0, 0) = 1.0;
    stretched(1, 1) = 2.0;
    CHECK_FALSE(is_unitary(stretched, 1e-10));
    CHECK(is_unitary(omega_dqcm(0.7).U, 1e-10));
}

TEST_CASE("complete_unitary is deterministic and order-sensitive only in the gauge") {
    Rng rng(18);
    const ComplexMatrix u = qbtest::random_unitary(rng, 6);
    std::vector<cplx> c0(6), c3(6);
    for (std::size_t i = 0; i < 6; ++i) {
        c0[i] = u(i, 0);
        c3[i] = u(i, 3);
    }
    const ComplexMatrix a = complete_unitary(6, {{0, c0}, {3, c3}});
    CHECK(is_unitary(a, 1e-12));
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(a(i, 0) - c0[i]) < 1e-14);
        CHECK(std::abs(a(i, 3) - c3[i]) < 1e-14);
    }
    const ComplexMatrix b = complete_unitary(6, {{0, c0}, {3, c3}});
    CHECK(max_abs_diff(a, b) == 0.0);

    const std::vector<std::size_t> reversed{5, 4, 3, 2, 1, 0};
    const ComplexMatrix c = complete_unitary(6, {{0, c0}, {3, c3}}, reversed);
    CHECK(is_unitary(c, 1e-12));
}

TEST_CASE("complete_unitary rejects non-orthonormal seeds") {
    std::vector<cplx> e0{1.0, 0.0};
    std::vector<cplx> big{1.0, 1.0};
    CHECK_THROWS_AS(complete_unitary(2, {{0, big}}), std::invalid_argument);
    CHECK_THROWS_AS(complete_unitary(2, {{0, e0}, {1, e0}}), std::invalid_argument);
}

TEST_CASE("bloch_roundtrip") {
    const BlochVector center = bloch_roundtrip({0.3, 1.2, 0.5});
    CHECK(center.norm() < 1e-14);

    const BlochVector north = bloch_roundtrip({0.0, 0.0, 1.0});
    CHECK(north.x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(north.y == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(north.z == doctest::Approx(1.0).epsilon(1e-14));

    // theta = pi/4, omega = pi/2, lambda = 0.8: direction (0, 1, 0), length 0.6
    const BlochVector v = bloch_roundtrip({pi / 4.0, pi / 2.0, 0.8});
    CHECK(std::abs(v.norm() - 0.6) < 1e-12);
    CHECK(std::abs(v.x) < 1e-12);
    CHECK(std::abs(v.y - 0.6) < 1e-12);
    CHECK(std::abs(v.z) < 1e-12);

    Rng rng(19);
    for (int i = 0; i < 50; ++i) {
        const QubitParams p = qbtest::random_qubit_params(rng);
        CHECK(std::abs(bloch_roundtrip(p).norm() - std::abs(2.0 * p.lambda - 1.0)) < 1e-12);
    }
}

TEST_CASE("density operator validation") {
    ComplexMatrix skew(2, 2);
    skew(0, 0) = 0.5;
    skew(1, 1) = 0.5;
    skew(0, 1) = cplx{0.0, 0.1};
    skew(1, 0) = cplx{0.0, 0.1};  // not the conjugate
    CHECK_THROWS_AS(DensityOperator{skew}, std::invalid_argument);

    ComplexMatrix overweight = ComplexMatrix::identity(2);
    CHECK_THROWS_AS(DensityOperator{overweight}, std::invalid_argument);
}

TEST_SUITE_END();
