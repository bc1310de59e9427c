#include "fairiv/fairness.hpp"

#include <stdexcept>

namespace fairiv {

namespace {

void check_binary(const Vector& s) {
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) != 0.0 && s(i) != 1.0)
            throw std::invalid_argument("sensitive attribute must be 0 or 1");
}

}  // namespace

Matrix build_parity_matrix(const Vector& s) {
    check_binary(s);
    const Eigen::Index n = s.size();
    const double n1 = s.sum();
    const double n0 = static_cast<double>(n) - n1;
    if (n1 == 0.0 || n0 == 0.0)
        throw std::invalid_argument(
            "statistical parity is undefined when one group is empty");
    // Row weights of the two group means: the same n-identical-rows structure
    // as iota_n [(D1'D1)^{-1}D1' - (D0'D0)^{-1}D0'] and iota_n (D1'D1)^{-1}D1'.
    Vector v(2 * n);
    v.head(n) = s / n1 - (Vector::Ones(n) - s) / n0;
    v.tail(n) = s / n1;
    Matrix F = Matrix::Zero(2 * n, 2 * n);
    F.bottomRows(n) = v.transpose().replicate(n, 1);
    return F;
}

Matrix build_irrelevance_matrix(Eigen::Index n) {
    if (n < 1)
        throw std::invalid_argument("n must be at least 1");
    Matrix F = Matrix::Zero(2 * n, 2 * n);
    F.bottomRightCorner(n, n).setIdentity();
    return F;
}

Matrix build_linear_parity_F(const Matrix& Pi) {
    if (!Pi.allFinite())
        throw std::invalid_argument("Pi contains a nonfinite entry");
    const Eigen::Index q = Pi.rows(), p = Pi.cols();
    Matrix F(q, p + q);
    F.leftCols(p) = Pi;
    F.rightCols(q) = Matrix::Identity(q, q);
    return F;
}

FairnessSpec make_sample_spec(FairnessDefinition def, const Vector& s) {
    FairnessSpec spec;
    spec.definition = def;
    spec.F = def == FairnessDefinition::StatisticalParity
                 ? build_parity_matrix(s)
                 : build_irrelevance_matrix(s.size());
    spec.P = null_space_projector(spec.F);
    return spec;
}

FairnessSpec make_linear_spec(FairnessDefinition def, const Matrix& Pi) {
    FairnessSpec spec;
    spec.definition = def;
    if (def == FairnessDefinition::StatisticalParity) {
        spec.F = build_linear_parity_F(Pi);
    } else {
        spec.F = build_linear_parity_F(Matrix::Zero(Pi.rows(), Pi.cols()));
    }
    spec.P = null_space_projector(spec.F);
    return spec;
}

double fairness_violation(const Matrix& F, const Vector& phi, Eigen::Index n_weight) {
    if (F.cols() != phi.size())
        throw std::invalid_argument("fairness_violation: F and phi do not conform");
    if (n_weight < 1)
        throw std::invalid_argument("fairness_violation: n_weight must be positive");
    return std::sqrt((F * phi).squaredNorm() / static_cast<double>(n_weight));
}

double rho_criterion(const Vector& phi_rho, const Vector& phi_unconstrained,
                     const Matrix& F, double varsigma, Eigen::Index n_weight) {
    if (phi_rho.size() != phi_unconstrained.size())
        throw std::invalid_argument("rho_criterion: estimate lengths differ");
    if (!(varsigma > 0.0))
        throw std::invalid_argument("rho_criterion: varsigma must be positive");
    const double nw = static_cast<double>(n_weight);
    const double loss2 = (phi_rho - phi_unconstrained).squaredNorm() / nw;
    const double viol = fairness_violation(F, phi_rho, n_weight);
    return loss2 + varsigma * viol * viol;
}

}  // namespace fairiv
