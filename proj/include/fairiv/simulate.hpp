#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairiv/npiv.hpp"

namespace fairiv {

// Varying-coefficient design with an endogenous regressor: the structural
// error U enters both Z and Y, and W instruments Z.
struct DgpConfig {
    Eigen::Index n = 1000;
    std::uint64_t seed = 42;
    double mean_tau0 = 0.0;
    double mean_tau1 = 0.5;
    double cov_offdiag = 0.0;  // defaulted to 2 sin(pi/12) by the constructor
    double var_eta = 0.16;
    double var_u = 0.25;

    DgpConfig();
};

Sample generate_sample(const DgpConfig& config);

// Structural pair (phi0(z), phi1(z)) = (3z^2, 1 - 5z^3).
std::pair<double, double> true_phi(double z);

// Fraction of values <= g for each grid point g. Grid must be sorted
// ascending; values must be nonempty.
Vector empirical_cdf(const Vector& values, const Vector& grid);

struct CdfBlock {
    std::string source;  // "z", "data", "projected", "restricted", "penalized"
    Vector grid;
    Vector cdf_s0;
    Vector cdf_s1;
};

struct DefinitionReport {
    FairnessDefinition definition = FairnessDefinition::StatisticalParity;
    double rho_star = 0.0;   // argmin of the criterion at varsigma
    double rho_star2 = 0.0;  // argmin at 2 varsigma
    std::vector<RhoCurvePoint> curve;     // rho grid with loss/violation at varsigma
    std::vector<double> criterion2;       // criterion at 2 varsigma, same grid
    StackedFunction projected, restricted, penalized;  // curves on z_grid
    double violation_unconstrained = 0.0;
    double violation_projected = 0.0;
    double violation_restricted = 0.0;
    double violation_penalized = 0.0;
    std::vector<CdfBlock> cdfs;  // predicted values by group: data + estimators
};

struct IllustrationReport {
    DgpConfig config;
    Sample sample;
    Tuning tuning;  // h_z, h_w, alpha shared across definitions
    double varsigma = 1.0;
    Vector z_grid;  // 101 points on [-1, 1]
    StackedFunction truth;
    StackedFunction unconstrained;
    CdfBlock z_cdf;  // endogenous regressor by group
    std::vector<DefinitionReport> definitions;  // parity then irrelevance
};

IllustrationReport run_illustration(const DgpConfig& config, double varsigma);

struct RateRow {
    Eigen::Index n = 0;
    double median_err_unconstrained = 0.0;
    double median_err_projected = 0.0;
};

// Monte Carlo check that both estimators improve with n. Replication r of
// sample size ns[i] uses seed base_seed + r. Tuning follows a deterministic
// n-scaled rule rather than per-replication cross-validation, so the medians
// track the sample size and not the selector's noise.
std::vector<RateRow> rate_study(const std::vector<Eigen::Index>& ns, int reps,
                                std::uint64_t base_seed);

}  // namespace fairiv
