#include "fixtures.hpp"

#include "lumpkit/jacobian.hpp"

#include <doctest.h>

using namespace lumpkit;
using fixtures::vec;

namespace {

Eigen::MatrixXd stacked_flattenings(const JacobianBasis &basis) {
    const auto m = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(basis.size()), m * m);
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c)
                rows(static_cast<Eigen::Index>(i), r * m + c) = basis.matrices()[i](r, c);
    return rows;
}

SamplingDomain unit_box(std::size_t m, std::uint64_t seed) {
    SamplingDomain dom;
    dom.lower = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    dom.upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 2.0);
    dom.seed = seed;
    return dom;
}

} // namespace

TEST_CASE("basis dimension at the reference points") {
    const JacobianBasis exact = jacobian_basis_from_points(fixtures::exact_system(), fixtures::reference_points());
    CHECK(exact.size() == 5);
    const JacobianBasis perturbed =
        jacobian_basis_from_points(fixtures::perturbed_system(), fixtures::perturbed_points());
    CHECK(perturbed.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK((perturbed.matrices()[i] - fixtures::reference_perturbed_jacobians()[i]).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("a linear drift has a one-dimensional Jacobian space") {
    const OdeSystem lin = parse_model("model lin\nvar u, v, w\neq u = 2*u - v\neq v = w\neq w = -3*u + 0.5*w\n"
                                      "init u = 1\ninit v = 1\ninit w = 1\nobs u\nhorizon 1\n");
    const JacobianBasis basis = sample_jacobian_basis(lin, unit_box(3, 4));
    CHECK(basis.size() == 1);
}

TEST_CASE("membership residual") {
    JacobianBasis empty(3);
    CHECK(membership_residual(empty, Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(std::sqrt(3.0)));

    JacobianBasis one(3);
    const Eigen::MatrixXd j1 = fixtures::mat3({0, 0, 0, 2, -2, -8, -1, 0, 2});
    const Eigen::MatrixXd j2 = fixtures::mat3({0, 2, 4, 1, 0, -2, -0.5, -0.25, 0.5});
    REQUIRE(one.try_add(j1, vec({1, 0, 0})));
    CHECK(membership_residual(one, j1) <= 1e-14);
    CHECK(membership_residual(one, 3.5 * j1) <= 1e-13);

    // Residual of J2 after removing its component along J1 (Frobenius inner product).
    const double coef = (j1.array() * j2.array()).sum() / j1.squaredNorm();
    const double expected = (j2 - coef * j1).norm();
    CHECK(membership_residual(one, j2) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_FALSE(one.try_add(2 * j1, vec({0, 0, 0})));
    CHECK(one.size() == 1);
}

TEST_CASE("randomized sampling") {
    const OdeSystem sys = fixtures::perturbed_system();
    const SamplingDomain dom = SamplingDomain::around(sys.initial_condition(), 11);
    CHECK(dom.upper[0] == 2.0);
    const JacobianBasis basis = sample_jacobian_basis(sys, dom);

    SUBCASE("same seed, same basis") {
        const JacobianBasis again = sample_jacobian_basis(sys, dom);
        REQUIRE(again.size() == basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i)
            CHECK(again.matrices()[i] == basis.matrices()[i]);
    }
    SUBCASE("kept Jacobians are linearly independent") {
        CHECK(numeric_rank(stacked_flattenings(basis)) == basis.size());
    }
    SUBCASE("spans Jacobians at fresh points") {
        UniformSampler rng(999);
        for (int s = 0; s < 50; ++s) {
            const Eigen::VectorXd x = rng.in_box(dom.lower, dom.upper);
            const Eigen::MatrixXd j = evaluate_drift_dual(sys, x).second;
            CHECK(membership_residual(basis, j) <= 1e-6 * j.norm());
        }
    }
    SUBCASE("dimension does not depend on the seed") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SamplingDomain d = dom;
            d.seed = seed;
            CHECK(sample_jacobian_basis(sys, d).size() == basis.size());
        }
    }
}

TEST_CASE("sampling domain validation") {
    const OdeSystem sys = fixtures::exact_system();
    SamplingDomain dom = unit_box(3, 0);
    SUBCASE("wrong dimension") {
        dom.lower = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(sample_jacobian_basis(sys, dom), DomainError);
    }
    SUBCASE("empty extent") {
        dom.upper[1] = dom.lower[1];
        CHECK_THROWS_AS(sample_jacobian_basis(sys, dom), DomainError);
    }
    SUBCASE("zero confirmations") {
        dom.confirmations = 0;
        CHECK_THROWS_AS(sample_jacobian_basis(sys, dom), DomainError);
    }
    SUBCASE("denominator vanishing everywhere") {
        const OdeSystem bad = parse_model("model bad\nvar a, b\neq a = 1/(a - a)\neq b = a\ninit a = 1\ninit b = 1\n"
                                          "obs a\nhorizon 1\n");
        CHECK_THROWS_AS(sample_jacobian_basis(bad, unit_box(2, 0)), DomainError);
    }
}
