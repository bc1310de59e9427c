#pragma once

#include <vector>

#include "fairiv/fairness.hpp"

namespace fairiv {

// One observation per row: outcome y, endogenous regressors z, binary
// sensitive attribute s, instruments w.
struct Sample {
    Vector y;
    Matrix z;  // n x p
    Vector s;
    Matrix w;  // n x q_w

    Eigen::Index n() const { return y.size(); }
};

// Values of the varying coefficients at the sample points. All 2n-dimensional
// operator algebra uses the stacking [phi0; phi1].
struct StackedFunction {
    Vector phi0;
    Vector phi1;

    Vector stacked() const;
    static StackedFunction unstack(const Vector& v);
};

// Discretized operators of the varying-coefficient IV system. Khat smooths in
// the instruments, KhatStar in the endogenous regressors; Ks and KsStar are
// their 2n x 2n liftings through S'S with S = [I_n  diag(s)]. Gram and bhat
// cache KsStar*Ks and KsStar*rhat, which every solver needs.
struct EstimationSystem {
    Matrix Khat;      // n x n, rows sum to one
    Matrix KhatStar;  // n x n, rows sum to one
    Matrix Ks;        // 2n x 2n
    Matrix KsStar;    // 2n x 2n
    Vector rhat;      // 2n
    Matrix Gram;      // KsStar * Ks
    Vector bhat;      // KsStar * rhat

    Eigen::Index n() const { return Khat.rows(); }
};

struct Tuning {
    double h_z = 0.0;
    double h_w = 0.0;
    double alpha = 0.0;
    double rho = 0.0;
    double varsigma = 1.0;
};

// 0.75 (1 - u^2) on |u| <= 1, zero outside.
double epanechnikov(double u);

// Product-Epanechnikov weights between all row pairs of points, each row
// normalized to sum one. A row with no raw mass (an isolated point under a
// small bandwidth) falls back to weight one on its diagonal entry so the
// matrix stays stochastic.
Matrix kernel_weight_matrix(const Matrix& points, double h);

EstimationSystem build_system(const Sample& sample, double h_z, double h_w);

// (alpha I + KsStar Ks)^{-1} KsStar rhat, unstacked. The Gram matrix is not
// symmetric (the adjoint is estimated by smoothing in z, not by transposing),
// so the solve uses partial-pivot LU rather than a symmetric factorization.
StackedFunction estimate_unconstrained(const EstimationSystem& sys, double alpha);

// P applied to the unconstrained estimate.
StackedFunction estimate_projected(const EstimationSystem& sys,
                                   const FairnessSpec& spec, double alpha);

// (alpha I + P Gram P)^{-1} P KsStar rhat, re-projected onto range(P).
StackedFunction estimate_restricted(const EstimationSystem& sys,
                                    const FairnessSpec& spec, double alpha);

// (alpha I + rho F'F + Gram)^{-1} KsStar rhat. rho = 0 reproduces the
// unconstrained estimate exactly.
StackedFunction estimate_penalized(const EstimationSystem& sys,
                                   const FairnessSpec& spec, double alpha,
                                   double rho);

// Sequential leave-one-out cross-validation: first h_w and h_z by the LOO
// error of the Nadaraya-Watson regressions of {y, s*y} on w and on z over 20
// log-spaced bandwidths in [0.05, 1] x range; then alpha by the LOO error of
// the fitted outcome values over 30 log-spaced points in [1e-6, 10].
// Deterministic given the sample. rho is left at 0 and varsigma at 1.
Tuning select_tuning(const Sample& sample);

struct RhoCurvePoint {
    double rho;
    double loss;       // ||phi_rho - phi_unconstrained||_n
    double violation;  // ||F phi_rho||_n
    double criterion;  // loss^2 + varsigma * violation^2
};

// Penalized path over the grid {0} followed by 60 log-spaced points in
// [1e-4, 1e4], with the loss/violation/criterion at each point.
std::vector<RhoCurvePoint> rho_curve(const EstimationSystem& sys,
                                     const FairnessSpec& spec, double alpha,
                                     double varsigma);

// Minimizer of the criterion over that grid; ties break toward smaller rho.
double select_rho(const Sample& sample, const EstimationSystem& sys,
                  const FairnessSpec& spec, double alpha, double varsigma);

// Nadaraya-Watson smoothing of per-sample values onto a reporting grid with
// the same kernel; a grid point with no mass takes the value at the nearest
// sample point.
Vector smooth_to_grid(const Vector& points, const Vector& values,
                      const Vector& grid, double h);

}  // namespace fairiv
