#pragma once

#include "fairiv/linop.hpp"

namespace fairiv {

enum class FairnessDefinition {
    StatisticalParity,  // equal average score across the two groups
    Irrelevance,        // the score does not use the sensitive attribute at all
};

// A fairness constraint in operator form: the fair set is null(F), and P is
// the orthogonal projector onto it. For the discretized nonparametric model
// F and P are 2n x 2n and act on stacked (phi0, phi1) values; for the linear
// model F is q x (p+q).
struct FairnessSpec {
    FairnessDefinition definition;
    Matrix F;
    Matrix P;
};

// Discretized statistical-parity operator for a binary attribute vector s.
// Upper blocks are zero; each lower-block row applied to stacked (phi0, phi1)
// yields mean_{s=1}(phi0 + phi1) - mean_{s=0}(phi0). Requires both groups to
// be present. The result has rank one.
Matrix build_parity_matrix(const Vector& s);

// Discretized irrelevance operator: zeroes phi0 entries, reproduces phi1.
Matrix build_irrelevance_matrix(Eigen::Index n);

// Linear-model parity operator [Pi  I_q] with Pi the q x p coefficient of S
// in E[Z|S].
Matrix build_linear_parity_F(const Matrix& Pi);

// Builds F for the requested definition at the sample's attribute vector and
// pairs it with its null-space projector.
FairnessSpec make_sample_spec(FairnessDefinition def, const Vector& s);

// Linear-model counterpart. Pi is q x p; Irrelevance uses only its shape
// (the constraint is gamma = 0 regardless of Pi).
FairnessSpec make_linear_spec(FairnessDefinition def, const Matrix& Pi);

// Empirical norm of the constraint residual: sqrt(sum((F phi)_i^2) / n_weight).
double fairness_violation(const Matrix& F, const Vector& phi, Eigen::Index n_weight);

// Selection criterion for the penalty weight:
// ||phi_rho - phi_unconstrained||_n^2 + varsigma * ||F phi_rho||_n^2.
double rho_criterion(const Vector& phi_rho, const Vector& phi_unconstrained,
                     const Matrix& F, double varsigma, Eigen::Index n_weight);

}  // namespace fairiv
