#include <doctest.h>

#include <stdexcept>

#include "fairiv/linear_iv.hpp"
#include "test_util.hpp"

using fairiv::FairnessDefinition;
using fairiv::FairnessSpec;
using fairiv::LinearIVModel;
using fairiv::Matrix;
using fairiv::Vector;

namespace {

// k = 2, p = q = 1 with orthogonal instrument columns. The normal equations
// give phi = (Sigma'Sigma)^{-1} Sigma' E[WY] = (0.18/0.36, 0.05/0.25).
LinearIVModel diagonal_model() {
    LinearIVModel m;
    m.Sigma_ZW = Matrix(2, 1);
    m.Sigma_ZW << 0.6, 0.0;
    m.Sigma_SW = Matrix(2, 1);
    m.Sigma_SW << 0.0, 0.5;
    m.Sigma_Z = Matrix::Identity(1, 1);
    m.Sigma_S = Matrix::Identity(1, 1);
    m.Sigma_ZS = Matrix::Zero(1, 1);
    m.EWY = Vector(2);
    m.EWY << 0.3, 0.1;
    return m;
}

LinearIVModel random_model(std::mt19937_64& rng, Eigen::Index k,
                           Eigen::Index p, Eigen::Index q) {
    LinearIVModel m;
    m.Sigma_ZW = random_matrix(rng, k, p);
    m.Sigma_SW = random_matrix(rng, k, q);
    m.Sigma_Z = Matrix::Identity(p, p);
    m.Sigma_S = Matrix::Identity(q, q) * 1.5;
    m.Sigma_ZS = random_matrix(rng, q, p) * 0.3;
    m.EWY = random_vector(rng, k);
    return m;
}

FairnessSpec irrelevance_spec(const LinearIVModel& m) {
    return fairiv::make_linear_spec(FairnessDefinition::Irrelevance,
                                    Matrix::Zero(m.q(), m.p()));
}

}  // namespace

TEST_CASE("unconstrained solution on the diagonal model") {
    const Vector phi = fairiv::phi_unconstrained(diagonal_model());
    CHECK(phi(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(phi(1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("unconstrained solution degenerate cases") {
    LinearIVModel m = diagonal_model();
    m.EWY.setZero();
    CHECK(fairiv::phi_unconstrained(m).norm() == 0.0);

    m.Sigma_ZW << 1.0, 0.0;
    m.Sigma_SW << 0.0, 1.0;
    m.EWY << -0.7, 0.4;
    const Vector phi = fairiv::phi_unconstrained(m);
    CHECK(phi(0) == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(phi(1) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("rank deficient design is rejected") {
    LinearIVModel m = diagonal_model();
    m.Sigma_SW = m.Sigma_ZW;  // duplicate column
    CHECK_THROWS_AS(fairiv::phi_unconstrained(m), std::runtime_error);
}

TEST_CASE("projection under irrelevance zeroes the S coefficient") {
    const LinearIVModel m = diagonal_model();
    const Vector phi = fairiv::phi_fair_projected(m, irrelevance_spec(m));
    CHECK(phi(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(phi(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("projection under parity uses the null space projector") {
    LinearIVModel m = diagonal_model();
    m.Sigma_ZW << 1.0, 0.0;
    m.Sigma_SW << 0.0, 1.0;
    m.EWY << 1.0, 1.0;  // unconstrained phi = (1, 1)
    Matrix Pi(1, 1);
    Pi << 0.5;
    const auto spec =
        fairiv::make_linear_spec(FairnessDefinition::StatisticalParity, Pi);
    const Vector phi = fairiv::phi_fair_projected(m, spec);
    CHECK(phi(0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(phi(1) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("projection leaves an already fair solution unchanged") {
    LinearIVModel m = diagonal_model();
    m.Sigma_ZW << 1.0, 0.0;
    m.Sigma_SW << 0.0, 1.0;
    m.EWY << 1.0, -0.5;  // F phi = 0.5*1 + 1*(-0.5) = 0
    Matrix Pi(1, 1);
    Pi << 0.5;
    const auto spec =
        fairiv::make_linear_spec(FairnessDefinition::StatisticalParity, Pi);
    const Vector phi = fairiv::phi_unconstrained(m);
    CHECK((fairiv::phi_fair_projected(m, spec) - phi).norm() <= 1e-12);
    CHECK((fairiv::phi_fair_restricted(m, spec) - phi).norm() <= 1e-10);
}

TEST_CASE("restriction under irrelevance solves the reduced system") {
    const LinearIVModel m = diagonal_model();
    const Vector phi = fairiv::phi_fair_restricted(m, irrelevance_spec(m));
    CHECK(phi(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(phi(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("restricted equals projected when the cross moments vanish") {
    std::mt19937_64 rng(31);
    const Matrix Zw = random_matrix(rng, 5, 2);
    // build Sigma_SW inside the orthogonal complement of Sigma_ZW's columns
    const Matrix M =
        Matrix::Identity(5, 5) -
        Zw * (Zw.transpose() * Zw).inverse() * Zw.transpose();
    LinearIVModel m = random_model(rng, 5, 2, 2);
    m.Sigma_ZW = Zw;
    m.Sigma_SW = M * m.Sigma_SW;
    REQUIRE((m.Sigma_ZW.transpose() * m.Sigma_SW).norm() <= 1e-12);

    const auto spec = irrelevance_spec(m);
    const Vector proj = fairiv::phi_fair_projected(m, spec);
    const Vector restr = fairiv::phi_fair_restricted(m, spec);
    CHECK((proj - restr).norm() <= 1e-8);
}

TEST_CASE("restricted and projected differ on a generic model") {
    std::mt19937_64 rng(37);
    const LinearIVModel m = random_model(rng, 5, 2, 2);
    const auto spec = irrelevance_spec(m);
    const Vector proj = fairiv::phi_fair_projected(m, spec);
    const Vector restr = fairiv::phi_fair_restricted(m, spec);
    CHECK((proj - restr).norm() >= 1e-3);
}

TEST_CASE("penalized solution on the diagonal model") {
    const LinearIVModel m = diagonal_model();
    const auto spec = irrelevance_spec(m);

    const Vector at_zero = fairiv::phi_penalized(m, spec, 0.0);
    CHECK((at_zero - fairiv::phi_unconstrained(m)).norm() <= 1e-12);

    const Vector at_three = fairiv::phi_penalized(m, spec, 3.0);
    CHECK(at_three(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(at_three(1) == doctest::Approx(0.05 / 3.25).epsilon(1e-12));
}

TEST_CASE("large rho drives the violation to zero") {
    std::mt19937_64 rng(41);
    const LinearIVModel m = random_model(rng, 6, 2, 2);
    Matrix Pi = fairiv::pi_from_covariances(m.Sigma_S, m.Sigma_ZS);
    const auto spec =
        fairiv::make_linear_spec(FairnessDefinition::StatisticalParity, Pi);
    const Vector phi = fairiv::phi_unconstrained(m);
    const Vector phi_rho = fairiv::phi_penalized(m, spec, 1e8);
    CHECK((spec.F * phi_rho).norm() <= 1e-6 * (1.0 + phi.norm()));
    const Vector limit = fairiv::phi_penalized_limit(m, spec);
    CHECK((phi_rho - limit).norm() <= 1e-6 * (1.0 + phi.norm()));
}

TEST_CASE("woodbury expansion matches the direct solve") {
    std::mt19937_64 rng(43);
    const LinearIVModel m = random_model(rng, 6, 2, 2);
    Matrix Pi = fairiv::pi_from_covariances(m.Sigma_S, m.Sigma_ZS);
    const auto spec =
        fairiv::make_linear_spec(FairnessDefinition::StatisticalParity, Pi);
    for (double rho : {1e-3, 1.0, 1e3}) {
        const Vector direct = fairiv::phi_penalized(m, spec, rho);
        const Vector expanded = fairiv::phi_penalized_woodbury(m, spec, rho);
        CHECK((direct - expanded).norm() <= 1e-8 * (1.0 + direct.norm()));
    }
}

TEST_CASE("penalized solution agrees with the generic solver") {
    std::mt19937_64 rng(47);
    const LinearIVModel m = random_model(rng, 6, 2, 2);
    const auto spec = irrelevance_spec(m);
    for (double rho : {0.5, 5.0}) {
        const Vector closed = fairiv::phi_penalized(m, spec, rho);
        const Vector generic = fairiv::penalized_solve(
            m.sigma_xw(), m.EWY, spec.F, 1e-12, rho);
        CHECK((closed - generic).norm() <= 1e-6 * (1.0 + closed.norm()));
    }
}

TEST_CASE("pi from covariances") {
    Matrix S2(1, 1), ZS(1, 1);
    S2 << 2.0;
    ZS << 1.0;
    CHECK(fairiv::pi_from_covariances(S2, ZS)(0, 0) ==
          doctest::Approx(0.5).epsilon(1e-14));

    std::mt19937_64 rng(53);
    const Matrix any = random_matrix(rng, 2, 3);
    CHECK((fairiv::pi_from_covariances(Matrix::Identity(2, 2), any) - any)
              .norm() <= 1e-14);
    CHECK(fairiv::pi_from_covariances(Matrix::Identity(2, 2),
                                      Matrix::Zero(2, 3))
              .norm() == 0.0);
    CHECK_THROWS_AS(
        fairiv::pi_from_covariances(Matrix::Zero(2, 2), Matrix::Zero(2, 3)),
        std::runtime_error);
}
