#include "qbcast/cloners.hpp"
#include "qbcast/fidelity.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qbcast;
using qbtest::Rng;

namespace {

const double pi = std::numbers::pi;

// random valid output entries (x, y): any point with |y|^2 <= x(1-x)
std::pair<double, cplx> random_output_entries(Rng& rng) {
    const double x = rng.uniform();
    const double r = rng.uniform() * std::sqrt(std::max(x - x * x, 0.0));
    const double phase = rng.uniform(0.0, 2.0 * pi);
    return {x, std::polar(r, phase)};
}

DensityOperator from_entries(double x, cplx y) {
    ComplexMatrix m(2, 2);
    m(0, 0) = x;
    m(0, 1) = y;
    m(1, 0) = std::conj(y);
    m(1, 1) = 1.0 - x;
    return DensityOperator(std::move(m));
}

DensityOperator conjugated(const ComplexMatrix& u, const DensityOperator& rho) {
    return DensityOperator(u * rho.matrix() * u.adjoint());
}

}  // namespace

TEST_SUITE_BEGIN("fidelity");

TEST_CASE("uhlmann fixed values") {
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
        const DensityOperator rho = qbtest::random_density(rng, 2);
        CHECK(uhlmann_fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const DensityOperator zero = qubit_from_params({0.0, 0.0, 1.0});
    const DensityOperator one = qubit_from_params({0.0, 0.0, 0.0});
    CHECK(uhlmann_fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-12));

    // F(I/2, pure) = <psi| I/2 |psi> = 1/2
    const DensityOperator any_pure = qubit_from_params({0.77, 2.3, 1.0});
    CHECK(uhlmann_fidelity(DensityOperator::maximally_mixed(2), any_pure) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("uhlmann symmetry and dimension check") {
    Rng rng(22);
    for (int i = 0; i < 30; ++i) {
        const DensityOperator a = qbtest::random_density(rng, 2);
        const DensityOperator b = qbtest::random_density(rng, 2);
        CHECK(std::abs(uhlmann_fidelity(a, b) - uhlmann_fidelity(b, a)) < 1e-10);
    }
    CHECK_THROWS_AS(uhlmann_fidelity(DensityOperator::maximally_mixed(2),
                                     DensityOperator::maximally_mixed(4)),
                    std::invalid_argument);
}

TEST_CASE("closed form: hand-checked values") {
    // rho_A = rho_s reproduces 1 for random parameters
    Rng rng(23);
    for (int i = 0; i < 30; ++i) {
        const QubitParams p = qbtest::random_qubit_params(rng);
        const DensityOperator rho = qubit_from_params(p);
        CHECK(qubit_fidelity_closed_form(rho(0, 0).real(), rho(0, 1), p) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }

    // maximally mixed output against a pure input
    CHECK(qubit_fidelity_closed_form(0.5, 0.0, {0.3, 0.7, 0.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));

    // lambda = 1/4: 1/2 + 2 sqrt((3/16)(1/4)) = 1/2 + sqrt(3)/4
    const double expect = 0.5 + std::sqrt(3.0) / 4.0;
    const double got = qubit_fidelity_closed_form(0.5, 0.0, {1.1, 0.4, 0.25});
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    CHECK(got == doctest::Approx(uhlmann_fidelity(
                     DensityOperator::maximally_mixed(2),
                     qubit_from_params({1.1, 0.4, 0.25}))).epsilon(1e-10));
}

TEST_CASE("closed form radicand handling") {
    // determinant barely below zero clamps; far below is a modeling error
    const double x = 0.5;
    const double edge = std::sqrt(0.25);
    CHECK_NOTHROW(qubit_fidelity_closed_form(x, cplx{edge, 0.0}, {0.2, 0.0, 0.3}));
    CHECK_THROWS_AS(qubit_fidelity_closed_form(x, cplx{edge + 1e-3, 0.0}, {0.2, 0.0, 0.3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(qubit_fidelity_closed_form(x, 0.0, {0.2, 0.0, 1.4}),
                    std::invalid_argument);
}

TEST_CASE("closed form equals the Uhlmann route") {
    Rng rng(24);
    for (int i = 0; i < 2000; ++i) {
        const auto [x, y] = random_output_entries(rng);
        const QubitParams p = qbtest::random_qubit_params(rng);
        const double closed = qubit_fidelity_closed_form(x, y, p);
        const double eig = uhlmann_fidelity(from_entries(x, y), qubit_from_params(p));
        CHECK(std::abs(closed - eig) < 1e-9);
    }
}

TEST_CASE("fidelity is invariant under a joint unitary") {
    Rng rng(25);
    for (int i = 0; i < 25; ++i) {
        const ComplexMatrix u = qbtest::random_unitary(rng, 2);
        const DensityOperator a = qbtest::random_density(rng, 2);
        const DensityOperator b = qbtest::random_density(rng, 2);
        CHECK(std::abs(uhlmann_fidelity(a, b) -
                       uhlmann_fidelity(conjugated(u, a), conjugated(u, b))) < 1e-10);
    }
}

TEST_CASE("fidelity reaches 1 only at equality") {
    Rng rng(26);
    for (int i = 0; i < 30; ++i) {
        const DensityOperator a = qbtest::random_density(rng, 2);
        const DensityOperator b = qbtest::random_density(rng, 2);
        if (max_abs_diff(a.matrix(), b.matrix()) > 1e-6) CHECK(uhlmann_fidelity(a, b) < 1.0);
    }
}

TEST_CASE("fidelity is not affine in the shrinking factor") {
    // scaling outputs at f in {0, 1/2, 1} for a lambda = 1/4 input
    const QubitParams p{0.6, 1.4, 0.25};
    const DensityOperator in = qubit_from_params(p);
    auto scaled = [&](double f) {
        ComplexMatrix m = ComplexMatrix::identity(2);
        m *= cplx{(1.0 - f) / 2.0};
        ComplexMatrix fr = in.matrix();
        fr *= cplx{f};
        m += fr;
        return DensityOperator(std::move(m));
    };
    const double f0 = uhlmann_fidelity(scaled(0.0), in);
    const double fh = uhlmann_fidelity(scaled(0.5), in);
    const double f1 = uhlmann_fidelity(scaled(1.0), in);
    CHECK(std::abs(fh - 0.5 * (f0 + f1)) > 1e-6);
}

TEST_CASE("qubit_fidelity_direct matches the eigendecomposition route") {
    Rng rng(27);
    for (int i = 0; i < 300; ++i) {
        const DensityOperator a = qbtest::random_density(rng, 2);
        const DensityOperator b = qbtest::random_density(rng, 2);
        CHECK(std::abs(qubit_fidelity_direct(a, b) - uhlmann_fidelity(a, b)) < 5e-11);
    }
    // rank-deficient pair stays exact
    const DensityOperator pure = qubit_from_params({0.4, 0.9, 1.0});
    const DensityOperator mixed = qubit_from_params({0.4, 0.9, 0.25});
    CHECK(std::abs(qubit_fidelity_direct(pure, mixed) - uhlmann_fidelity(pure, mixed)) <
          1e-12);
}

TEST_CASE("shrinking factor") {
    const DensityOperator pure = qubit_from_params({0.5, 0.3, 1.0});
    CHECK(*shrinking_factor(pure, pure) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*shrinking_factor(pure, DensityOperator::maximally_mixed(2)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    // Gisin-Massar M=2 marginal of a pure input shrinks by 2/3
    const BroadcastChannel gm = gisin_massar_channel(2);
    const DensityOperator out = clone_marginal(gm, pure);
    const auto f = shrinking_factor(pure, out);
    REQUIRE(f.has_value());
    CHECK(*f == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

    // maximally mixed input: f is not identifiable
    CHECK_FALSE(shrinking_factor(DensityOperator::maximally_mixed(2), pure).has_value());
    CHECK_FALSE(shrinking_factor(DensityOperator::maximally_mixed(2),
                                 DensityOperator::maximally_mixed(2))
                    .has_value());

    // a rotation is not a scaling
    const DensityOperator rotated = qubit_from_params({0.5 + 0.4, 0.3, 1.0});
    CHECK_FALSE(shrinking_factor(pure, rotated).has_value());
}

TEST_CASE("scaling channels have shrinking factor 2z - 1") {
    Rng rng(28);
    for (int i = 0; i < 30; ++i) {
        QubitParams p = qbtest::random_qubit_params(rng);
        if (std::abs(p.lambda - 0.5) < 1e-3) p.lambda = 0.3;  // keep f identifiable
        const double z = rng.uniform();
        const auto f = shrinking_factor(qubit_from_params(p),
                                        scaling_channel_output(p, z));
        REQUIRE(f.has_value());
        CHECK(*f == doctest::Approx(2.0 * z - 1.0).epsilon(1e-9));
        CHECK(*f >= -1.0 - 1e-12);
        CHECK(*f <= 1.0 + 1e-12);
    }
}

TEST_SUITE_END();
