#pragma once

#include "fairiv/fairness.hpp"

namespace fairiv {

// Covariance blocks of the jointly Gaussian linear-IV testbed with
// Y = Z'beta + S'gamma + U and instruments W. Everything downstream works
// off Sigma_XW = [Sigma_ZW  Sigma_SW] (k x (p+q)) and the cross-moment E[WY],
// so the model admits closed-form solutions usable as analytic oracles.
struct LinearIVModel {
    Matrix Sigma_ZW;  // k x p, Cov(W, Z)
    Matrix Sigma_SW;  // k x q, Cov(W, S)
    Matrix Sigma_Z;   // p x p
    Matrix Sigma_S;   // q x q, positive definite
    Matrix Sigma_ZS;  // q x p, oriented so Pi = Sigma_S^{-1} Sigma_ZS fits F = [Pi  I_q]
    Vector EWY;       // k

    Eigen::Index p() const { return Sigma_ZW.cols(); }
    Eigen::Index q() const { return Sigma_SW.cols(); }
    Matrix sigma_xw() const;  // [Sigma_ZW  Sigma_SW]
};

// (Sigma_XW' Sigma_XW)^{-1} Sigma_XW' E[WY], components ordered (beta, gamma).
Vector phi_unconstrained(const LinearIVModel& model);

// P phi_unconstrained. Under Irrelevance this equals (beta + A_ZS gamma, 0)
// with A_ZS = (Sigma_ZW'Sigma_ZW)^{-1} Sigma_ZW'Sigma_SW.
Vector phi_fair_projected(const LinearIVModel& model, const FairnessSpec& spec);

// (P Sigma_XW'Sigma_XW P)^+ P Sigma_XW' E[WY], the inverse taken on range(P)
// through an SVD pseudo-inverse.
Vector phi_fair_restricted(const LinearIVModel& model, const FairnessSpec& spec);

// (rho F'F + Sigma_XW'Sigma_XW)^{-1} Sigma_XW' E[WY] by direct solve.
Vector phi_penalized(const LinearIVModel& model, const FairnessSpec& spec, double rho);

// Same quantity through the rank-q expansion
//   (Sigma'Sigma)^{-1} - rho (Sigma'Sigma)^{-1} F' (I_q + rho F (Sigma'Sigma)^{-1} F')^{-1} F (Sigma'Sigma)^{-1},
// kept separate as a diagnostic cross-check of the direct solve.
Vector phi_penalized_woodbury(const LinearIVModel& model, const FairnessSpec& spec, double rho);

// rho -> infinity limit: phi - (Sigma'Sigma)^{-1} F' (F (Sigma'Sigma)^{-1} F')^{-1} F phi.
Vector phi_penalized_limit(const LinearIVModel& model, const FairnessSpec& spec);

// Pi = Sigma_S^{-1} Sigma_ZS.
Matrix pi_from_covariances(const Matrix& Sigma_S, const Matrix& Sigma_ZS);

}  // namespace fairiv
