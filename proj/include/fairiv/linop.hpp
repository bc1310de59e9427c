#pragma once

#include <Eigen/Dense>

namespace fairiv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct RegularizationConfig {
    double alpha = 1e-3;  // Tikhonov weight; must be > 0 whenever a regularized inverse is formed
    double rho = 0.0;     // fairness penalty weight; >= 0
};

// Solves (alpha*I + K'K) x = K'r through an LDLT factorization of the SPD
// normal matrix. alpha = 0 is rejected: the d x d system may be singular
// without it, and every downstream procedure regularizes.
Vector tikhonov_solve(const Matrix& K, const Vector& r, double alpha);

// Solves (alpha*I + rho*F'F + K'K) x = K'r. rho = 0 reproduces
// tikhonov_solve exactly (the penalty block is skipped, not multiplied out).
Vector penalized_solve(const Matrix& K, const Vector& r, const Matrix& F,
                       double alpha, double rho);

// Solves (alpha*I + P K'K P) x = P K'r for a symmetric idempotent P and
// returns P x, so the result lies in range(P) up to round-off. P is checked
// for symmetry and idempotency to 1e-10 before the solve.
Vector restricted_solve(const Matrix& K, const Vector& r, const Matrix& P,
                        double alpha);

// Orthogonal projector onto null(F), built from the SVD of F with singular
// values below 1e-12 * sigma_max treated as zero. Rank-deficient F (the
// discretized parity operator is rank one) needs no special casing here,
// which is why the textbook F'(FF')^{-1}F form is not used.
Matrix null_space_projector(const Matrix& F);

// Singular values of K, sorted nonincreasing. Diagnostic for how ill-posed
// a discretized operator is.
Vector singular_values(const Matrix& K);

}  // namespace fairiv
