#include "fairiv/npiv.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairiv {

namespace {

constexpr int kBandwidthGridSize = 20;
constexpr int kAlphaGridSize = 30;
constexpr int kRhoGridSize = 60;

void validate_sample(const Sample& sample) {
    const Eigen::Index n = sample.y.size();
    if (n == 0)
        throw std::invalid_argument("sample is empty");
    if (sample.z.rows() != n || sample.s.size() != n || sample.w.rows() != n)
        throw std::invalid_argument("sample columns have mismatched lengths");
    if (!sample.y.allFinite() || !sample.z.allFinite() || !sample.w.allFinite())
        throw std::invalid_argument("sample contains a nonfinite entry");
    for (Eigen::Index i = 0; i < n; ++i)
        if (sample.s(i) != 0.0 && sample.s(i) != 1.0)
            throw std::invalid_argument("sample s values must be 0 or 1");
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < count; ++i)
        g[i] = std::exp(a + (b - a) * i / (count - 1));
    return g;
}

double column_range(const Matrix& points) {
    const double r =
        (points.colwise().maxCoeff() - points.colwise().minCoeff()).maxCoeff();
    if (!(r > 0.0))
        throw std::invalid_argument("cross-validation needs a nonconstant variable");
    return r;
}

// Raw (unnormalized) product-kernel weights.
Matrix raw_kernel(const Matrix& points, double h) {
    const Eigen::Index n = points.rows(), d = points.cols();
    Matrix K = Matrix::Ones(n, n);
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                K(i, j) *= epanechnikov((points(i, c) - points(j, c)) / h);
    return K;
}

// LOO Nadaraya-Watson squared error of each target regressed on points.
// A zero-mass row predicts with the leave-one-out global mean, the h -> inf
// limit of the smoother, so shrinking h past isolation is still penalized.
double loo_nw_error(const Matrix& points, const std::vector<Vector>& targets,
                    double h) {
    const Eigen::Index n = points.rows();
    Matrix K = raw_kernel(points, h);
    K.diagonal().setZero();
    const Vector mass = K.rowwise().sum();
    double err = 0.0;
    for (const Vector& y : targets) {
        const Vector smoothed = K * y;
        const double total = y.sum();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pred = mass(i) > 0.0
                                    ? smoothed(i) / mass(i)
                                    : (total - y(i)) / static_cast<double>(n - 1);
            const double d = y(i) - pred;
            err += d * d;
        }
    }
    return err;
}

double argmin_bandwidth(const Matrix& points, const std::vector<Vector>& targets) {
    const double range = column_range(points);
    const auto grid = log_grid(0.05 * range, 1.0 * range, kBandwidthGridSize);
    double best_h = grid.front();
    double best = loo_nw_error(points, targets, grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double e = loo_nw_error(points, targets, grid[i]);
        if (e < best) {
            best = e;
            best_h = grid[i];
        }
    }
    return best_h;
}

}  // namespace

Vector StackedFunction::stacked() const {
    Vector v(phi0.size() + phi1.size());
    v << phi0, phi1;
    return v;
}

StackedFunction StackedFunction::unstack(const Vector& v) {
    const Eigen::Index n = v.size() / 2;
    if (2 * n != v.size())
        throw std::invalid_argument("stacked vector must have even length");
    return {v.head(n), v.tail(n)};
}

double epanechnikov(double u) {
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

Matrix kernel_weight_matrix(const Matrix& points, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    if (!points.allFinite())
        throw std::invalid_argument("points contain a nonfinite entry");
    Matrix K = raw_kernel(points, h);
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        const double mass = K.row(i).sum();
        if (mass > 0.0) {
            K.row(i) /= mass;
        } else {
            K.row(i).setZero();
            K(i, i) = 1.0;
        }
    }
    return K;
}

EstimationSystem build_system(const Sample& sample, double h_z, double h_w) {
    validate_sample(sample);
    const Eigen::Index n = sample.n();
    EstimationSystem sys;
    sys.Khat = kernel_weight_matrix(sample.w, h_w);
    sys.KhatStar = kernel_weight_matrix(sample.z, h_z);

    // Ks = (I_2 (x) Khat) S'S with S'S = [[I, D], [D, D]]; only the two
    // diagonal blocks of the Kronecker lifting are ever formed.
    const auto ds = sample.s.asDiagonal();
    const Matrix KhD = sys.Khat * ds;
    const Matrix KsD = sys.KhatStar * ds;
    sys.Ks.resize(2 * n, 2 * n);
    sys.Ks << sys.Khat, KhD, KhD, KhD;
    sys.KsStar.resize(2 * n, 2 * n);
    sys.KsStar << sys.KhatStar, KsD, KsD, KsD;

    sys.rhat.resize(2 * n);
    sys.rhat.head(n) = sys.Khat * sample.y;
    sys.rhat.tail(n) = sys.Khat * sample.s.cwiseProduct(sample.y);

    sys.Gram.noalias() = sys.KsStar * sys.Ks;
    sys.bhat.noalias() = sys.KsStar * sys.rhat;
    return sys;
}

StackedFunction estimate_unconstrained(const EstimationSystem& sys, double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    Matrix A = sys.Gram;
    A.diagonal().array() += alpha;
    return StackedFunction::unstack(A.partialPivLu().solve(sys.bhat));
}

StackedFunction estimate_projected(const EstimationSystem& sys,
                                   const FairnessSpec& spec, double alpha) {
    if (spec.P.cols() != 2 * sys.n())
        throw std::invalid_argument("fairness spec does not match system size");
    return StackedFunction::unstack(
        spec.P * estimate_unconstrained(sys, alpha).stacked());
}

StackedFunction estimate_restricted(const EstimationSystem& sys,
                                    const FairnessSpec& spec, double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (spec.P.cols() != 2 * sys.n())
        throw std::invalid_argument("fairness spec does not match system size");
    Matrix A = spec.P * sys.Gram * spec.P;
    A.diagonal().array() += alpha;
    Vector x = A.partialPivLu().solve(Vector(spec.P * sys.bhat));
    return StackedFunction::unstack(spec.P * x);
}

StackedFunction estimate_penalized(const EstimationSystem& sys,
                                   const FairnessSpec& spec, double alpha,
                                   double rho) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (rho < 0.0)
        throw std::invalid_argument("rho must be nonnegative");
    if (spec.F.cols() != 2 * sys.n())
        throw std::invalid_argument("fairness spec does not match system size");
    Matrix A = sys.Gram;
    if (rho > 0.0)
        A.noalias() += rho * (spec.F.transpose() * spec.F);
    A.diagonal().array() += alpha;
    return StackedFunction::unstack(A.partialPivLu().solve(sys.bhat));
}

Tuning select_tuning(const Sample& sample) {
    validate_sample(sample);
    const Eigen::Index n = sample.n();
    if (n < 30)
        throw std::invalid_argument("select_tuning needs at least 30 observations");

    const std::vector<Vector> targets = {sample.y,
                                         sample.s.cwiseProduct(sample.y)};
    Tuning t;
    t.h_w = argmin_bandwidth(sample.w, targets);
    t.h_z = argmin_bandwidth(sample.z, targets);

    const EstimationSystem sys = build_system(sample, t.h_z, t.h_w);

    // LOO error of the fitted outcomes yhat_i = phi0_i + s_i phi1_i. The
    // whole pipeline is linear in y, so the LOO residual is the plain
    // residual divided by one minus the smoother diagonal.
    Matrix B(2 * n, n);  // KsStar (I_2 (x) Khat) S'
    {
        Matrix top(2 * n, n);
        top.topRows(n) = sys.Khat;
        top.bottomRows(n) = sys.Khat * sample.s.asDiagonal();
        B.noalias() = sys.KsStar * top;
    }
    Matrix rhs(2 * n, n + 1);
    rhs.leftCols(n) = B;
    rhs.col(n) = sys.bhat;

    const auto grid = log_grid(1e-6, 10.0, kAlphaGridSize);
    double best = std::numeric_limits<double>::infinity();
    for (double alpha : grid) {
        Matrix A = sys.Gram;
        A.diagonal().array() += alpha;
        const Matrix X = A.partialPivLu().solve(rhs);
        double cv = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double yhat = X(i, n) + sample.s(i) * X(n + i, n);
            const double lever = X(i, i) + sample.s(i) * X(n + i, i);
            const double denom = std::max(std::abs(1.0 - lever), 1e-3);
            const double resid = (sample.y(i) - yhat) / denom;
            cv += resid * resid;
        }
        if (cv < best) {
            best = cv;
            t.alpha = alpha;
        }
    }
    return t;
}

std::vector<RhoCurvePoint> rho_curve(const EstimationSystem& sys,
                                     const FairnessSpec& spec, double alpha,
                                     double varsigma) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (!(varsigma > 0.0))
        throw std::invalid_argument("varsigma must be positive");
    if (spec.F.cols() != 2 * sys.n())
        throw std::invalid_argument("fairness spec does not match system size");
    const Eigen::Index n = sys.n();

    std::vector<double> grid;
    grid.reserve(kRhoGridSize + 1);
    grid.push_back(0.0);
    for (double rho : log_grid(1e-4, 1e4, kRhoGridSize)) grid.push_back(rho);

    const Matrix FtF = spec.F.transpose() * spec.F;
    Matrix base = sys.Gram;
    base.diagonal().array() += alpha;
    const Vector phi_unc = base.partialPivLu().solve(sys.bhat);

    std::vector<RhoCurvePoint> curve;
    curve.reserve(grid.size());
    for (double rho : grid) {
        Vector phi;
        if (rho == 0.0) {
            phi = phi_unc;
        } else {
            Matrix A = base + rho * FtF;
            phi = A.partialPivLu().solve(sys.bhat);
        }
        RhoCurvePoint pt;
        pt.rho = rho;
        pt.loss = std::sqrt((phi - phi_unc).squaredNorm() / static_cast<double>(n));
        pt.violation = fairness_violation(spec.F, phi, n);
        pt.criterion = pt.loss * pt.loss + varsigma * pt.violation * pt.violation;
        curve.push_back(pt);
    }
    return curve;
}

double select_rho(const Sample& sample, const EstimationSystem& sys,
                  const FairnessSpec& spec, double alpha, double varsigma) {
    if (sample.n() != sys.n())
        throw std::invalid_argument("sample and system sizes differ");
    const auto curve = rho_curve(sys, spec, alpha, varsigma);
    double best_rho = curve.front().rho;
    double best = curve.front().criterion;
    for (const auto& pt : curve) {
        if (pt.criterion < best) {  // strict: ties keep the smaller rho
            best = pt.criterion;
            best_rho = pt.rho;
        }
    }
    return best_rho;
}

Vector smooth_to_grid(const Vector& points, const Vector& values,
                      const Vector& grid, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    if (points.size() != values.size())
        throw std::invalid_argument("points and values have different lengths");
    Vector out(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        double mass = 0.0, acc = 0.0;
        double nearest = std::numeric_limits<double>::infinity();
        Eigen::Index nearest_i = 0;
        for (Eigen::Index i = 0; i < points.size(); ++i) {
            const double dist = std::abs(grid(g) - points(i));
            const double wgt = epanechnikov(dist / h);
            mass += wgt;
            acc += wgt * values(i);
            if (dist < nearest) {
                nearest = dist;
                nearest_i = i;
            }
        }
        out(g) = mass > 0.0 ? acc / mass : values(nearest_i);
    }
    return out;
}

}  // namespace fairiv
