#include "aew/baselines.hpp"
#include "aew/diagnostics.hpp"
#include "aew/error.hpp"
#include "aew/experiment.hpp"
#include "aew/posterior.hpp"
#include "aew/report.hpp"
#include "aew/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct FitArgs {
    std::string data;
    double lambda_kappa = 4.0;
    std::optional<std::size_t> sbar;
    std::optional<double> sigma;
    std::size_t t0 = 3000;
    std::size_t t = 7000;
    std::uint64_t seed = 1;
    std::optional<double> threshold;
    bool normalize = false;
    std::string trace;
};

struct ExperimentArgs {
    std::string spec;
    std::string out = "out";
    std::optional<std::size_t> workers;
};

struct DiagnoseArgs {
    std::string data;
    std::vector<std::size_t> s{1};
    std::string mode = "exact";
    std::size_t samples = 10'000;
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::optional<double> sigma;
    double lambda_kappa = 4.0;
};

struct LassoArgs {
    std::string data;
    std::optional<double> lambda_l;
    std::optional<double> a;
    std::optional<double> sigma;
};

double sigma_or_estimate(const aew::Dataset& data, const std::optional<double>& sigma) {
    if (sigma) return *sigma;
    const double s = std::sqrt(aew::estimate_sigma2(data));
    std::cerr << "sigma estimated as " << aew::format_double(s) << '\n';
    return s;
}

int run_fit(const FitArgs& args) {
    const aew::Dataset raw = aew::read_dataset_csv(args.data);
    std::optional<aew::NormalizedDataset> norm;
    if (args.normalize) norm = aew::normalize_columns(raw);
    const aew::Dataset& data = norm ? norm->data : raw;

    const double sigma = sigma_or_estimate(data, args.sigma);
    aew::PosteriorConfig pcfg = aew::PosteriorConfig::practical(data.n(), data.p(), sigma * sigma, args.lambda_kappa);
    if (args.sbar) pcfg.s_bar = *args.sbar;
    pcfg.validate(data.p());

    aew::ChainConfig ccfg;
    ccfg.burn_in = args.t0;
    ccfg.steps = args.t;
    ccfg.seed = args.seed;
    ccfg.record_trace = !args.trace.empty();
    ccfg.validate();

    const auto start = std::chrono::steady_clock::now();
    const aew::ChainAccumulators acc = aew::run_chain(data, pcfg, ccfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double tau = args.threshold.value_or(aew::default_threshold(sigma, data.n(), data.p()));
    aew::VectorXd mean = aew::estimate_mean(acc);
    aew::Thresholded thr = aew::threshold(mean, tau);
    const aew::MapEstimate map = aew::estimate_map(acc, data);
    aew::VectorXd map_beta = map.beta;
    if (norm) {
        mean = aew::to_original_units(mean, norm->scales);
        thr.beta = aew::to_original_units(thr.beta, norm->scales);
        map_beta = aew::to_original_units(map_beta, norm->scales);
    }

    std::cout << "index,beta_mean,beta_thresholded,beta_map\n";
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
        std::cout << j << ',' << aew::format_double(mean[j]) << ',' << aew::format_double(thr.beta[j]) << ','
                  << aew::format_double(map_beta[j]) << '\n';
    }
    std::cerr << "support " << aew::join_support(thr.support) << "\nmap " << aew::join_support(map.subset)
              << "\naccept_rate " << aew::format_double(acc.accept_rate()) << "\nseconds " << secs << '\n';

    if (!args.trace.empty()) {
        std::ofstream out(args.trace);
        if (!out) throw aew::DomainError("cannot write trace file '" + args.trace + "'");
        aew::write_trace_csv(acc.trace, out);
    }
    return 0;
}

int run_experiment_cmd(const ExperimentArgs& args) {
    aew::ExperimentSpec spec = aew::read_spec_file(args.spec);
    if (args.workers) spec.workers = *args.workers;
    const auto start = std::chrono::steady_clock::now();
    const aew::ExperimentSummary summary = aew::run_experiment(spec);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    aew::emit(summary, args.out);
    std::cout << aew::summary_csv(summary.methods);
    std::cerr << "seconds " << secs << '\n';
    return 0;
}

int run_diagnose(const DiagnoseArgs& args) {
    const aew::Dataset data = aew::read_dataset_csv(args.data);
    aew::NuOptions opts;
    if (args.mode == "exact") opts.mode = aew::NuMode::exact;
    else if (args.mode == "mc") opts.mode = aew::NuMode::monte_carlo;
    else throw aew::DomainError("--mode must be exact or mc");
    opts.samples = args.samples;
    opts.seed = args.seed;
    const double lambda = args.lambda_kappa * std::log(static_cast<double>(data.p()));

    const bool jsonl = args.format == "jsonl";
    if (!jsonl && args.format != "csv") throw aew::DomainError("--format must be csv or jsonl");
    if (!jsonl) std::cout << "s,nu_s,kappa_s,mode,samples,identifiable_2s,rho\n";
    for (const std::size_t s : args.s) {
        const aew::DesignReport r = aew::design_report(data, s, opts, args.sigma, lambda);
        const char* mode = r.mode == aew::NuMode::exact ? "exact" : "mc";
        if (jsonl) {
            nlohmann::json row{{"s", r.s},
                               {"nu_s", aew::format_double(r.nu_s)},
                               {"kappa_s", aew::format_double(r.kappa_s)},
                               {"mode", mode},
                               {"samples", r.samples},
                               {"identifiable_2s", r.identifiable_2s}};
            row["rho"] = r.rho ? nlohmann::json(aew::format_double(*r.rho)) : nlohmann::json(nullptr);
            std::cout << row.dump() << '\n';
        } else {
            std::cout << r.s << ',' << aew::format_double(r.nu_s) << ',' << aew::format_double(r.kappa_s) << ','
                      << mode << ',' << r.samples << ',' << (r.identifiable_2s ? "true" : "false") << ','
                      << (r.rho ? aew::format_double(*r.rho) : std::string()) << '\n';
        }
    }
    return 0;
}

int run_lasso(const LassoArgs& args) {
    const aew::Dataset data = aew::read_dataset_csv(args.data);
    aew::LassoConfig cfg;
    if (args.lambda_l) {
        cfg.lambda_l = *args.lambda_l;
    } else {
        const double sigma = sigma_or_estimate(data, args.sigma);
        cfg.lambda_l = aew::lasso_lambda(args.a.value_or(4.0), sigma, data.n(), data.p());
    }
    const aew::LassoResult res = aew::lasso_cd(data, cfg);
    std::cout << "index,beta\n";
    for (Eigen::Index j = 0; j < res.beta.size(); ++j) std::cout << j << ',' << aew::format_double(res.beta[j]) << '\n';
    std::cerr << "lambda_l " << aew::format_double(cfg.lambda_l) << "\nsweeps " << res.sweeps << "\nduality_gap "
              << aew::format_double(res.duality_gap) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aggregation by exponential weights for sparse regression"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Run the Metropolis-Hastings sampler on one dataset");
    fit_cmd->add_option("--data", fit.data, "CSV with columns y,x1,...,xp")->required();
    fit_cmd->add_option("--lambda-kappa", fit.lambda_kappa, "lambda = kappa log p");
    fit_cmd->add_option("--sbar", fit.sbar, "Largest subset size (default n/2)");
    fit_cmd->add_option("--sigma", fit.sigma, "Noise level (default: plug-in estimate)");
    fit_cmd->add_option("--t0", fit.t0, "Burn-in steps");
    fit_cmd->add_option("--t", fit.t, "Recorded steps");
    fit_cmd->add_option("--seed", fit.seed);
    fit_cmd->add_option("--threshold", fit.threshold, "Zero out |beta_j| <= threshold");
    fit_cmd->add_flag("--normalize", fit.normalize, "Rescale columns to ||X_j||^2 = n before fitting");
    fit_cmd->add_option("--trace", fit.trace, "Write the step trace to this CSV file");

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation study from a spec file");
    exp_cmd->add_option("--spec", exp.spec, "key=value spec file")->required();
    exp_cmd->add_option("--out", exp.out, "Output directory");
    exp_cmd->add_option("--workers", exp.workers, "Threads over replications");

    DiagnoseArgs diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Design constants nu_s and kappa_s");
    diag_cmd->add_option("--data", diag.data)->required();
    diag_cmd->add_option("--s", diag.s, "Sparsity levels")->delimiter(',');
    diag_cmd->add_option("--mode", diag.mode, "exact or mc");
    diag_cmd->add_option("--samples", diag.samples);
    diag_cmd->add_option("--seed", diag.seed);
    diag_cmd->add_option("--format", diag.format, "csv or jsonl");
    diag_cmd->add_option("--sigma", diag.sigma, "Noise level, enables the rho column");
    diag_cmd->add_option("--lambda-kappa", diag.lambda_kappa);

    LassoArgs lasso;
    auto* lasso_cmd = app.add_subcommand("lasso", "Lasso by coordinate descent");
    lasso_cmd->add_option("--data", lasso.data)->required();
    auto* lam_opt = lasso_cmd->add_option("--lambda-l", lasso.lambda_l, "Penalty lambda_L");
    auto* a_opt = lasso_cmd->add_option("--a", lasso.a, "lambda_L = A sigma sqrt(log p / n)");
    lam_opt->excludes(a_opt);
    lasso_cmd->add_option("--sigma", lasso.sigma);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*exp_cmd) return run_experiment_cmd(exp);
        if (*diag_cmd) return run_diagnose(diag);
        if (*lasso_cmd) return run_lasso(lasso);
    } catch (const aew::NonFiniteError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const aew::SingularError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const aew::NotConvergedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
