#include "fairiv/linop.hpp"

#include <stdexcept>

namespace fairiv {

namespace {

void check_finite(const Matrix& m, const char* name) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(name) + " contains a nonfinite entry");
}

void check_finite(const Vector& v, const char* name) {
    if (!v.allFinite())
        throw std::invalid_argument(std::string(name) + " contains a nonfinite entry");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
}

Vector solve_spd(Matrix A, const Vector& b) {
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("LDLT factorization failed");
    return ldlt.solve(b);
}

}  // namespace

Vector tikhonov_solve(const Matrix& K, const Vector& r, double alpha) {
    check_finite(K, "K");
    check_finite(r, "r");
    check_alpha(alpha);
    if (K.rows() != r.size())
        throw std::invalid_argument("tikhonov_solve: K rows must match r length");
    Matrix A = K.transpose() * K;
    A.diagonal().array() += alpha;
    return solve_spd(std::move(A), K.transpose() * r);
}

Vector penalized_solve(const Matrix& K, const Vector& r, const Matrix& F,
                       double alpha, double rho) {
    check_finite(K, "K");
    check_finite(r, "r");
    check_finite(F, "F");
    check_alpha(alpha);
    if (rho < 0.0)
        throw std::invalid_argument("rho must be nonnegative");
    if (K.rows() != r.size())
        throw std::invalid_argument("penalized_solve: K rows must match r length");
    if (F.cols() != K.cols())
        throw std::invalid_argument("penalized_solve: K and F must share column dimension");
    Matrix A = K.transpose() * K;
    if (rho > 0.0)
        A.noalias() += rho * (F.transpose() * F);
    A.diagonal().array() += alpha;
    return solve_spd(std::move(A), K.transpose() * r);
}

Vector restricted_solve(const Matrix& K, const Vector& r, const Matrix& P,
                        double alpha) {
    check_finite(K, "K");
    check_finite(r, "r");
    check_finite(P, "P");
    check_alpha(alpha);
    if (P.rows() != P.cols())
        throw std::invalid_argument("restricted_solve: P must be square");
    if (P.cols() != K.cols())
        throw std::invalid_argument("restricted_solve: P dimension must match K columns");
    if (K.rows() != r.size())
        throw std::invalid_argument("restricted_solve: K rows must match r length");
    const double scale = std::max(1.0, P.norm());
    if ((P - P.transpose()).norm() > 1e-10 * scale)
        throw std::invalid_argument("restricted_solve: P is not symmetric");
    if ((P * P - P).norm() > 1e-10 * scale)
        throw std::invalid_argument("restricted_solve: P is not idempotent");
    Matrix KP = K * P;
    Matrix A = KP.transpose() * KP;
    A.diagonal().array() += alpha;
    Vector x = solve_spd(std::move(A), P * (K.transpose() * r));
    // The solve leaves an O(eps/alpha) component off range(P); project it out.
    return P * x;
}

Matrix null_space_projector(const Matrix& F) {
    check_finite(F, "F");
    const Eigen::Index d = F.cols();
    // Column-pivoted QR of F' gives an orthonormal basis of range(F'),
    // whose orthogonal complement is null(F). Eigen 3.4's BDCSVD returns
    // nonfinite factors for large strongly rank-deficient inputs (the
    // 2n x 2n parity operator has rank 1), so no SVD here.
    Eigen::ColPivHouseholderQR<Matrix> qr;
    qr.setThreshold(1e-12);
    qr.compute(F.transpose());
    const Eigen::Index rank = qr.rank();
    Matrix P = Matrix::Identity(d, d);
    if (rank > 0) {
        const Matrix Q1 = qr.householderQ() * Matrix::Identity(d, rank);
        P.noalias() -= Q1 * Q1.transpose();
        P = 0.5 * (P + P.transpose()).eval();
    }
    return P;
}

Vector singular_values(const Matrix& K) {
    check_finite(K, "K");
    // Jacobi is slower than the divide-and-conquer kernel but does not
    // share its rank-deficiency defect; this op only sees small inputs.
    return Eigen::JacobiSVD<Matrix>(K).singularValues();
}

}  // namespace fairiv
