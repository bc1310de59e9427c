#include "fairiv/linear_iv.hpp"

#include <stdexcept>

namespace fairiv {

namespace {

// Full-column-rank check plus the normal-equation solve shared by the
// closed forms below.
Eigen::ColPivHouseholderQR<Matrix> design_qr(const LinearIVModel& model) {
    const Matrix S = model.sigma_xw();
    if (S.rows() < S.cols())
        throw std::invalid_argument("linear IV model needs k >= p + q instruments");
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    if (qr.rank() < S.cols())
        throw std::runtime_error("Sigma_XW is rank deficient");
    return qr;
}

Matrix normal_matrix(const LinearIVModel& model) {
    const Matrix S = model.sigma_xw();
    return S.transpose() * S;
}

void check_spec(const LinearIVModel& model, const FairnessSpec& spec) {
    if (spec.F.cols() != model.p() + model.q())
        throw std::invalid_argument("fairness operator does not match model dimension");
}

}  // namespace

Matrix LinearIVModel::sigma_xw() const {
    if (Sigma_ZW.rows() != Sigma_SW.rows())
        throw std::invalid_argument("Sigma_ZW and Sigma_SW must have equal row counts");
    Matrix S(Sigma_ZW.rows(), Sigma_ZW.cols() + Sigma_SW.cols());
    S << Sigma_ZW, Sigma_SW;
    return S;
}

Vector phi_unconstrained(const LinearIVModel& model) {
    if (model.EWY.size() != model.Sigma_ZW.rows())
        throw std::invalid_argument("EWY length must match instrument count");
    return design_qr(model).solve(model.EWY);
}

Vector phi_fair_projected(const LinearIVModel& model, const FairnessSpec& spec) {
    check_spec(model, spec);
    return spec.P * phi_unconstrained(model);
}

Vector phi_fair_restricted(const LinearIVModel& model, const FairnessSpec& spec) {
    check_spec(model, spec);
    const Matrix N = normal_matrix(model);
    const Matrix A = spec.P * N * spec.P;
    const Vector b = spec.P * (model.sigma_xw().transpose() * model.EWY);
    const Eigen::Index rank_P =
        static_cast<Eigen::Index>(std::llround(spec.P.trace()));
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
    Eigen::Index rank_A = 0;
    while (rank_A < sv.size() && sv(rank_A) > cutoff) ++rank_A;
    if (rank_A < rank_P)
        throw std::runtime_error(
            "restriction leaves the system singular on range(P)");
    svd.setThreshold(1e-12);
    return svd.solve(b);
}

Vector phi_penalized(const LinearIVModel& model, const FairnessSpec& spec, double rho) {
    check_spec(model, spec);
    if (rho < 0.0)
        throw std::invalid_argument("rho must be nonnegative");
    Matrix A = normal_matrix(model);
    if (rho > 0.0)
        A.noalias() += rho * (spec.F.transpose() * spec.F);
    const Vector b = model.sigma_xw().transpose() * model.EWY;
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("penalized normal matrix is not positive definite");
    return ldlt.solve(b);
}

Vector phi_penalized_woodbury(const LinearIVModel& model, const FairnessSpec& spec,
                              double rho) {
    check_spec(model, spec);
    if (rho < 0.0)
        throw std::invalid_argument("rho must be nonnegative");
    const Matrix N = normal_matrix(model);
    Eigen::LDLT<Matrix> ldlt(N);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("Sigma_XW'Sigma_XW is not positive definite");
    const Vector b = model.sigma_xw().transpose() * model.EWY;
    const Vector base = ldlt.solve(b);
    if (rho == 0.0) return base;
    const Matrix NiFt = ldlt.solve(spec.F.transpose());
    const Eigen::Index q = spec.F.rows();
    const Matrix core =
        Matrix::Identity(q, q) + rho * (spec.F * NiFt);
    return base - rho * (NiFt * core.partialPivLu().solve(spec.F * base));
}

Vector phi_penalized_limit(const LinearIVModel& model, const FairnessSpec& spec) {
    check_spec(model, spec);
    const Matrix N = normal_matrix(model);
    Eigen::LDLT<Matrix> ldlt(N);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("Sigma_XW'Sigma_XW is not positive definite");
    const Vector phi = phi_unconstrained(model);
    const Matrix NiFt = ldlt.solve(spec.F.transpose());
    const Matrix core = spec.F * NiFt;
    Eigen::FullPivLU<Matrix> lu(core);
    if (!lu.isInvertible())
        throw std::runtime_error("F (Sigma'Sigma)^{-1} F' is singular");
    return phi - NiFt * lu.solve(spec.F * phi);
}

Matrix pi_from_covariances(const Matrix& Sigma_S, const Matrix& Sigma_ZS) {
    if (Sigma_S.rows() != Sigma_S.cols())
        throw std::invalid_argument("Sigma_S must be square");
    if (Sigma_S.rows() != Sigma_ZS.rows())
        throw std::invalid_argument("Sigma_ZS must have q rows to conform with Sigma_S");
    Eigen::LLT<Matrix> llt(Sigma_S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("Sigma_S is not positive definite");
    return llt.solve(Sigma_ZS);
}

}  // namespace fairiv
