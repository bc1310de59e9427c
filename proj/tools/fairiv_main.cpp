#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairiv/csv.hpp"
#include "fairiv/simulate.hpp"

namespace {

using fairiv::CsvTable;
using fairiv::EstimationSystem;
using fairiv::FairnessDefinition;
using fairiv::FairnessSpec;
using fairiv::Sample;
using fairiv::StackedFunction;
using fairiv::Tuning;
using fairiv::Vector;

namespace fs = std::filesystem;

struct Options {
    std::string data;
    std::string out = ".";
    std::string fairness = "parity";
    std::string method = "penalized";
    std::string alpha = "auto";
    std::string rho = "auto";
    double varsigma = 1.0;
    int grid = 101;
    long long n = 1000;
    std::uint64_t seed = 42;
    std::string n_list = "100,200,400";
    int reps = 30;
};

double parse_number(const std::string& text, const std::string& flag) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::runtime_error(flag + " expects a number or 'auto', got '" +
                                 text + "'");
    return value;
}

FairnessDefinition parse_fairness(const std::string& name) {
    if (name == "parity") return FairnessDefinition::StatisticalParity;
    if (name == "irrelevance") return FairnessDefinition::Irrelevance;
    throw std::runtime_error("--fairness must be parity or irrelevance");
}

std::vector<Eigen::Index> parse_n_list(const std::string& text) {
    std::vector<Eigen::Index> ns;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        long long n = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), n);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw std::runtime_error("--n-list expects comma-separated integers");
        ns.push_back(static_cast<Eigen::Index>(n));
        pos = comma + 1;
    }
    return ns;
}

fs::path out_file(const Options& opt, const char* name) {
    fs::create_directories(opt.out);
    return fs::path(opt.out) / name;
}

Sample load_sample(const Options& opt) {
    if (opt.data.empty())
        throw std::runtime_error("--data is required");
    return fairiv::read_sample(opt.data);
}

// Bandwidths always come from cross-validation; a numeric --alpha replaces
// only the selected alpha.
Tuning resolve_tuning(const Sample& sample, const Options& opt) {
    Tuning t = fairiv::select_tuning(sample);
    if (opt.alpha != "auto") {
        t.alpha = parse_number(opt.alpha, "--alpha");
        if (!(t.alpha > 0.0))
            throw std::runtime_error("--alpha must be positive");
    }
    t.varsigma = opt.varsigma;
    return t;
}

double resolve_rho(const Sample& sample, const EstimationSystem& sys,
                   const FairnessSpec& spec, const Tuning& t,
                   const Options& opt) {
    if (opt.rho != "auto") {
        const double rho = parse_number(opt.rho, "--rho");
        if (rho < 0.0)
            throw std::runtime_error("--rho must be nonnegative");
        return rho;
    }
    return fairiv::select_rho(sample, sys, spec, t.alpha, t.varsigma);
}

void write_tuning(const Options& opt, const Tuning& t, double rho) {
    nlohmann::json j;
    j["h_z"] = t.h_z;
    j["h_w"] = t.h_w;
    j["alpha"] = t.alpha;
    j["rho"] = rho;
    fairiv::write_text_atomic(out_file(opt, "tuning.json").string(),
                              j.dump(2) + "\n");
}

void cmd_simulate(const Options& opt) {
    fairiv::DgpConfig config;
    config.n = static_cast<Eigen::Index>(opt.n);
    config.seed = opt.seed;
    fairiv::write_sample(out_file(opt, "sample.csv").string(),
                         fairiv::generate_sample(config));
}

void cmd_estimate(const Options& opt) {
    const Sample sample = load_sample(opt);
    const Tuning t = resolve_tuning(sample, opt);
    const EstimationSystem sys = fairiv::build_system(sample, t.h_z, t.h_w);
    const FairnessSpec spec =
        fairiv::make_sample_spec(parse_fairness(opt.fairness), sample.s);

    double rho = 0.0;
    StackedFunction phi;
    if (opt.method == "unconstrained") {
        phi = fairiv::estimate_unconstrained(sys, t.alpha);
    } else if (opt.method == "projected") {
        phi = fairiv::estimate_projected(sys, spec, t.alpha);
    } else if (opt.method == "restricted") {
        phi = fairiv::estimate_restricted(sys, spec, t.alpha);
    } else if (opt.method == "penalized") {
        rho = resolve_rho(sample, sys, spec, t, opt);
        phi = fairiv::estimate_penalized(sys, spec, t.alpha, rho);
    } else {
        throw std::runtime_error(
            "--method must be unconstrained, projected, restricted or penalized");
    }

    if (opt.grid < 2)
        throw std::runtime_error("--grid must be at least 2");
    const Vector grid = Vector::LinSpaced(opt.grid, -1.0, 1.0);
    const Vector phi0 = fairiv::smooth_to_grid(sample.z.col(0), phi.phi0, grid, t.h_z);
    const Vector phi1 = fairiv::smooth_to_grid(sample.z.col(0), phi.phi1, grid, t.h_z);

    CsvTable table;
    table.header = {"z_grid", "phi0_hat", "phi1_hat"};
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        table.rows.push_back({fairiv::format_double(grid(i)),
                              fairiv::format_double(phi0(i)),
                              fairiv::format_double(phi1(i))});
    fairiv::write_csv_atomic(out_file(opt, "estimate.csv").string(), table);
    write_tuning(opt, t, rho);
}

void cmd_select_rho(const Options& opt) {
    const Sample sample = load_sample(opt);
    const Tuning t = resolve_tuning(sample, opt);
    const EstimationSystem sys = fairiv::build_system(sample, t.h_z, t.h_w);
    const FairnessSpec spec =
        fairiv::make_sample_spec(parse_fairness(opt.fairness), sample.s);

    const auto curve = fairiv::rho_curve(sys, spec, t.alpha, t.varsigma);
    CsvTable table;
    table.header = {"rho", "criterion_varsigma1", "criterion_varsigma2"};
    for (const auto& pt : curve) {
        const double crit2 = pt.loss * pt.loss +
                             2.0 * t.varsigma * pt.violation * pt.violation;
        table.rows.push_back({fairiv::format_double(pt.rho),
                              fairiv::format_double(pt.criterion),
                              fairiv::format_double(crit2)});
    }
    fairiv::write_csv_atomic(out_file(opt, "rho_curve.csv").string(), table);
}

void cmd_tradeoff(const Options& opt) {
    const Sample sample = load_sample(opt);
    const Tuning t = resolve_tuning(sample, opt);
    const EstimationSystem sys = fairiv::build_system(sample, t.h_z, t.h_w);
    const FairnessSpec spec =
        fairiv::make_sample_spec(parse_fairness(opt.fairness), sample.s);

    const auto curve = fairiv::rho_curve(sys, spec, t.alpha, t.varsigma);
    CsvTable table;
    table.header = {"rho", "loss", "violation"};
    for (const auto& pt : curve)
        table.rows.push_back({fairiv::format_double(pt.rho),
                              fairiv::format_double(pt.loss),
                              fairiv::format_double(pt.violation)});
    fairiv::write_csv_atomic(out_file(opt, "tradeoff.csv").string(), table);
}

void cmd_cdf_report(const Options& opt) {
    const Sample sample = load_sample(opt);
    const Tuning t = resolve_tuning(sample, opt);
    const EstimationSystem sys = fairiv::build_system(sample, t.h_z, t.h_w);
    const FairnessSpec spec =
        fairiv::make_sample_spec(parse_fairness(opt.fairness), sample.s);
    const double rho = resolve_rho(sample, sys, spec, t, opt);

    const Vector z = sample.z.col(0);
    const Vector z_grid = Vector::LinSpaced(opt.grid, -1.0, 1.0);
    std::vector<fairiv::CdfBlock> blocks;
    auto group_cdfs = [&](const std::string& source, const Vector& values,
                          const Vector& grid) {
        std::vector<double> v0, v1;
        for (Eigen::Index i = 0; i < sample.n(); ++i)
            (sample.s(i) == 1.0 ? v1 : v0).push_back(values(i));
        fairiv::CdfBlock b;
        b.source = source;
        b.grid = grid;
        b.cdf_s0 = fairiv::empirical_cdf(
            Eigen::Map<const Vector>(v0.data(), static_cast<Eigen::Index>(v0.size())), grid);
        b.cdf_s1 = fairiv::empirical_cdf(
            Eigen::Map<const Vector>(v1.data(), static_cast<Eigen::Index>(v1.size())), grid);
        blocks.push_back(std::move(b));
    };
    auto fitted = [&](const StackedFunction& phi) {
        return Vector(phi.phi0 + sample.s.cwiseProduct(phi.phi1));
    };
    auto value_grid = [&](const Vector& v) {
        return Vector(Vector::LinSpaced(opt.grid, v.minCoeff(), v.maxCoeff()));
    };

    group_cdfs("z", z, z_grid);
    group_cdfs("data", sample.y, value_grid(sample.y));
    const Vector proj = fitted(fairiv::estimate_projected(sys, spec, t.alpha));
    const Vector restr = fitted(fairiv::estimate_restricted(sys, spec, t.alpha));
    const Vector pen = fitted(fairiv::estimate_penalized(sys, spec, t.alpha, rho));
    group_cdfs("projected", proj, value_grid(proj));
    group_cdfs("restricted", restr, value_grid(restr));
    group_cdfs("penalized", pen, value_grid(pen));

    CsvTable table;
    table.header = {"grid", "cdf_s0", "cdf_s1", "source"};
    for (const auto& b : blocks)
        for (Eigen::Index i = 0; i < b.grid.size(); ++i)
            table.rows.push_back({fairiv::format_double(b.grid(i)),
                                  fairiv::format_double(b.cdf_s0(i)),
                                  fairiv::format_double(b.cdf_s1(i)),
                                  b.source});
    fairiv::write_csv_atomic(out_file(opt, "cdf.csv").string(), table);
}

void cmd_rates(const Options& opt) {
    const auto rows = fairiv::rate_study(parse_n_list(opt.n_list), opt.reps,
                                         opt.seed);
    CsvTable table;
    table.header = {"n", "median_err_unconstrained", "median_err_projected"};
    for (const auto& row : rows)
        table.rows.push_back({std::to_string(row.n),
                              fairiv::format_double(row.median_err_unconstrained),
                              fairiv::format_double(row.median_err_projected)});
    fairiv::write_csv_atomic(out_file(opt, "rates.csv").string(), table);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware nonparametric instrumental-variable estimation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool needs_data) {
        sub->add_option("--out", opt.out, "Output directory");
        if (needs_data) {
            sub->add_option("--data", opt.data, "Input sample CSV (y,z,s,w)");
            sub->add_option("--fairness", opt.fairness, "parity or irrelevance");
            sub->add_option("--alpha", opt.alpha, "Regularization, number or 'auto'");
            sub->add_option("--varsigma", opt.varsigma, "Fairness weight in the rho criterion");
        }
    };

    auto* sim = app.add_subcommand("simulate", "Draw a synthetic sample");
    add_common(sim, false);
    sim->add_option("--n", opt.n, "Sample size");
    sim->add_option("--seed", opt.seed, "RNG seed");

    auto* est = app.add_subcommand("estimate", "Fit the structural functions");
    add_common(est, true);
    est->add_option("--method", opt.method,
                    "unconstrained, projected, restricted or penalized");
    est->add_option("--rho", opt.rho, "Fairness penalty, number or 'auto'");
    est->add_option("--grid", opt.grid, "Output grid size");

    auto* sel = app.add_subcommand("select-rho", "Emit the rho selection criterion");
    add_common(sel, true);

    auto* trade = app.add_subcommand("tradeoff", "Emit loss and violation over rho");
    add_common(trade, true);

    auto* cdf = app.add_subcommand("cdf-report", "Group-wise CDFs of data and fits");
    add_common(cdf, true);
    cdf->add_option("--rho", opt.rho, "Fairness penalty, number or 'auto'");
    cdf->add_option("--grid", opt.grid, "CDF grid size");

    auto* rates = app.add_subcommand("rates", "Monte Carlo error medians across n");
    rates->add_option("--out", opt.out, "Output directory");
    rates->add_option("--n-list", opt.n_list, "Comma-separated sample sizes");
    rates->add_option("--reps", opt.reps, "Replications per sample size");
    rates->add_option("--seed", opt.seed, "Base RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) cmd_simulate(opt);
        if (*est) cmd_estimate(opt);
        if (*sel) cmd_select_rho(opt);
        if (*trade) cmd_tradeoff(opt);
        if (*cdf) cmd_cdf_report(opt);
        if (*rates) cmd_rates(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
