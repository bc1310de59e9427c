#include "fairiv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fairiv {

namespace {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// 53-bit uniform in (0, 1]; keeps log() below finite.
double uniform01(std::mt19937_64& rng) {
    return ((rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller. std::normal_distribution is implementation-defined, which
// would break seed-level reproducibility across standard libraries.
std::pair<double, double> normal_pair(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Vector fitted_values(const Sample& sample, const StackedFunction& phi) {
    return phi.phi0 + sample.s.cwiseProduct(phi.phi1);
}

Vector linspace(double lo, double hi, Eigen::Index count) {
    return Vector::LinSpaced(count, lo, hi);
}

CdfBlock group_cdf_block(const std::string& source, const Vector& values,
                         const Vector& s, const Vector& grid) {
    const Eigen::Index n = values.size();
    std::vector<double> v0, v1;
    for (Eigen::Index i = 0; i < n; ++i)
        (s(i) == 1.0 ? v1 : v0).push_back(values(i));
    CdfBlock block;
    block.source = source;
    block.grid = grid;
    block.cdf_s0 = empirical_cdf(
        Eigen::Map<const Vector>(v0.data(), static_cast<Eigen::Index>(v0.size())),
        grid);
    block.cdf_s1 = empirical_cdf(
        Eigen::Map<const Vector>(v1.data(), static_cast<Eigen::Index>(v1.size())),
        grid);
    return block;
}

CdfBlock fitted_cdf_block(const std::string& source, const Sample& sample,
                          const Vector& values) {
    return group_cdf_block(
        source, values, sample.s,
        linspace(values.minCoeff(), values.maxCoeff(), 101));
}

StackedFunction curves_on_grid(const Vector& z, const StackedFunction& phi,
                               const Vector& grid, double h) {
    StackedFunction out;
    out.phi0 = smooth_to_grid(z, phi.phi0, grid, h);
    out.phi1 = smooth_to_grid(z, phi.phi1, grid, h);
    return out;
}

StackedFunction truth_at(const Vector& z) {
    StackedFunction t;
    t.phi0.resize(z.size());
    t.phi1.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const auto [p0, p1] = true_phi(z(i));
        t.phi0(i) = p0;
        t.phi1(i) = p1;
    }
    return t;
}

// Fixed tuning rule for the rate study. Cross-validating every replication
// makes the medians noisy enough to swamp the rate in n; the study measures
// the estimator, not the selector.
Tuning rate_rule(const Sample& sample) {
    const double n = static_cast<double>(sample.n());
    const double range_z =
        sample.z.col(0).maxCoeff() - sample.z.col(0).minCoeff();
    const double range_w =
        sample.w.col(0).maxCoeff() - sample.w.col(0).minCoeff();
    Tuning t;
    t.h_z = 0.4 * range_z * std::pow(n, -0.2);
    t.h_w = 1.0 * range_w * std::pow(n, -0.2);
    t.alpha = 0.05 * std::pow(n, -1.0 / 3.0);
    return t;
}

}  // namespace

DgpConfig::DgpConfig() : cov_offdiag(2.0 * std::sin(std::numbers::pi / 12.0)) {}

Sample generate_sample(const DgpConfig& config) {
    if (config.n < 10)
        throw std::invalid_argument("generate_sample needs n >= 10");
    if (std::abs(config.cov_offdiag) >= 1.0)
        throw std::invalid_argument("tau covariance must be positive definite");
    if (config.var_eta < 0.0 || config.var_u < 0.0)
        throw std::invalid_argument("variances must be nonnegative");

    const Eigen::Index n = config.n;
    const double c = config.cov_offdiag;
    const double chol = std::sqrt(1.0 - c * c);
    const double sd_eta = std::sqrt(config.var_eta);
    const double sd_u = std::sqrt(config.var_u);

    std::mt19937_64 rng(config.seed);
    Sample sample;
    sample.y.resize(n);
    sample.z.resize(n, 1);
    sample.s.resize(n);
    sample.w.resize(n, 1);

    // All draws for observation i happen before observation i + 1, so a
    // longer run extends a shorter one with the same seed.
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto [g0, g1] = normal_pair(rng);
        const double tau1 = config.mean_tau0 + g0;
        const double tau2 = config.mean_tau1 + c * g0 + chol * g1;
        const double s = uniform01(rng) < normal_cdf(tau2) ? 1.0 : 0.0;
        const auto [g2, g3] = normal_pair(rng);
        const double eta = sd_eta * g2;
        const double u = sd_u * g3;

        const double w = -1.0 + 2.0 * normal_cdf(tau1);
        const double index = w - 0.5 * s - 0.5 * w * s + 0.5 * u + eta;
        const double z = -1.0 + 2.0 * normal_cdf(index);
        const auto [p0, p1] = true_phi(z);
        sample.w(i, 0) = w;
        sample.s(i) = s;
        sample.z(i, 0) = z;
        sample.y(i) = p0 + p1 * s + u;
    }
    return sample;
}

std::pair<double, double> true_phi(double z) {
    return {3.0 * z * z, 1.0 - 5.0 * z * z * z};
}

Vector empirical_cdf(const Vector& values, const Vector& grid) {
    if (values.size() == 0)
        throw std::invalid_argument("empirical_cdf needs at least one value");
    for (Eigen::Index g = 1; g < grid.size(); ++g)
        if (grid(g) < grid(g - 1))
            throw std::invalid_argument("cdf grid must be sorted ascending");

    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    Vector out(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), grid(g));
        out(g) = static_cast<double>(it - sorted.begin()) /
                 static_cast<double>(sorted.size());
    }
    return out;
}

IllustrationReport run_illustration(const DgpConfig& config, double varsigma) {
    if (!(varsigma > 0.0))
        throw std::invalid_argument("varsigma must be positive");

    IllustrationReport rep;
    rep.config = config;
    rep.varsigma = varsigma;
    rep.sample = generate_sample(config);
    rep.tuning = select_tuning(rep.sample);
    rep.tuning.varsigma = varsigma;

    const Sample& sample = rep.sample;
    const Eigen::Index n = sample.n();
    const EstimationSystem sys = build_system(sample, rep.tuning.h_z, rep.tuning.h_w);
    const double alpha = rep.tuning.alpha;

    rep.z_grid = linspace(-1.0, 1.0, 101);
    rep.truth = truth_at(rep.z_grid);
    const StackedFunction unc = estimate_unconstrained(sys, alpha);
    rep.unconstrained = curves_on_grid(sample.z.col(0), unc, rep.z_grid, rep.tuning.h_z);
    rep.z_cdf = group_cdf_block("z", sample.z.col(0), sample.s, rep.z_grid);

    for (FairnessDefinition def : {FairnessDefinition::StatisticalParity,
                                   FairnessDefinition::Irrelevance}) {
        const FairnessSpec spec = make_sample_spec(def, sample.s);
        DefinitionReport d;
        d.definition = def;
        d.curve = rho_curve(sys, spec, alpha, varsigma);
        d.criterion2.reserve(d.curve.size());
        d.rho_star = d.curve.front().rho;
        d.rho_star2 = d.curve.front().rho;
        double best = d.curve.front().criterion;
        double best2 = std::numeric_limits<double>::infinity();
        for (const auto& pt : d.curve) {
            const double crit2 =
                pt.loss * pt.loss + 2.0 * varsigma * pt.violation * pt.violation;
            d.criterion2.push_back(crit2);
            if (pt.criterion < best) {
                best = pt.criterion;
                d.rho_star = pt.rho;
            }
            if (crit2 < best2) {
                best2 = crit2;
                d.rho_star2 = pt.rho;
            }
        }

        const StackedFunction proj = estimate_projected(sys, spec, alpha);
        const StackedFunction restr = estimate_restricted(sys, spec, alpha);
        const StackedFunction pen = estimate_penalized(sys, spec, alpha, d.rho_star);
        d.violation_unconstrained = fairness_violation(spec.F, unc.stacked(), n);
        d.violation_projected = fairness_violation(spec.F, proj.stacked(), n);
        d.violation_restricted = fairness_violation(spec.F, restr.stacked(), n);
        d.violation_penalized = fairness_violation(spec.F, pen.stacked(), n);

        d.projected = curves_on_grid(sample.z.col(0), proj, rep.z_grid, rep.tuning.h_z);
        d.restricted = curves_on_grid(sample.z.col(0), restr, rep.z_grid, rep.tuning.h_z);
        d.penalized = curves_on_grid(sample.z.col(0), pen, rep.z_grid, rep.tuning.h_z);

        d.cdfs.push_back(fitted_cdf_block("data", sample, sample.y));
        d.cdfs.push_back(fitted_cdf_block("projected", sample, fitted_values(sample, proj)));
        d.cdfs.push_back(fitted_cdf_block("restricted", sample, fitted_values(sample, restr)));
        d.cdfs.push_back(fitted_cdf_block("penalized", sample, fitted_values(sample, pen)));
        rep.definitions.push_back(std::move(d));
    }
    return rep;
}

std::vector<RateRow> rate_study(const std::vector<Eigen::Index>& ns, int reps,
                                std::uint64_t base_seed) {
    if (reps < 1)
        throw std::invalid_argument("rate_study needs at least one replication");
    for (Eigen::Index n : ns)
        if (n < 50)
            throw std::invalid_argument("rate_study needs n >= 50");

    std::vector<RateRow> table;
    table.reserve(ns.size());
    for (Eigen::Index n : ns) {
        std::vector<double> err_unc, err_proj;
        err_unc.reserve(reps);
        err_proj.reserve(reps);
        for (int r = 0; r < reps; ++r) {
            DgpConfig config;
            config.n = n;
            config.seed = base_seed + static_cast<std::uint64_t>(r);
            const Sample sample = generate_sample(config);
            const Tuning t = rate_rule(sample);
            const EstimationSystem sys = build_system(sample, t.h_z, t.h_w);
            const FairnessSpec spec = make_sample_spec(
                FairnessDefinition::StatisticalParity, sample.s);

            const Vector truth = truth_at(sample.z.col(0)).stacked();
            const Vector unc = estimate_unconstrained(sys, t.alpha).stacked();
            const Vector proj = estimate_projected(sys, spec, t.alpha).stacked();
            const double nw = static_cast<double>(n);
            err_unc.push_back(std::sqrt((unc - truth).squaredNorm() / nw));
            err_proj.push_back(
                std::sqrt((proj - spec.P * truth).squaredNorm() / nw));
        }
        table.push_back({n, median(err_unc), median(err_proj)});
    }
    return table;
}

}  // namespace fairiv
