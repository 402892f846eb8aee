#pragma once

#include "aew/dataset.hpp"
#include "aew/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aew {

enum class Method { aew, lasso, l0 };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

/// Simulation study: Gaussian design, beta* = signal * 1{j < s_star},
/// sigma^2 = ||X beta*||^2 / (9 n), repeated `reps` times.
struct ExperimentSpec {
    std::size_t n = 100;
    std::size_t p = 200;
    std::size_t s_star = 5;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::aew, Method::lasso, Method::l0};
    /// Sparsity exponent lambda = lambda_kappa log p.
    double lambda_kappa = 4.0;
    /// When nonempty, lambda_kappa is picked from this grid on tuning draws.
    std::vector<double> lambda_kappa_grid;
    /// Lasso lambda_L = A sigma sqrt(log p / n), A picked from this grid.
    std::vector<double> lasso_a_grid{0.5, 1.0, 2.0, 4.0, 8.0};
    /// Number of separate tuning draws (their own RNG streams, never reused
    /// as evaluation replications).
    std::size_t tune_reps = 10;
    /// Rescale columns to ||X_j||^2 = n after drawing.
    bool normalize = true;
    double signal = 1.0;
    std::optional<std::size_t> s_bar;
    ChainConfig chain;
    /// Threads over replications; outputs do not depend on it.
    std::size_t workers = 1;

    void validate() const;
};

/// key=value lines; '#' starts a comment. Unknown keys are an error.
ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec read_spec_file(const std::filesystem::path& path);
/// Inverse of parse_spec for every field.
std::string format_spec(const ExperimentSpec& spec);

struct Instance {
    Dataset data;
    VectorXd beta_star;
    Support J_star;
    double sigma = 0.0;
};

/// Deterministic in (spec.seed, rep_index).
Instance gen_instance(const ExperimentSpec& spec, std::size_t rep_index);
/// Draws used for tuning, independent of every evaluation replication.
Instance gen_tuning_instance(const ExperimentSpec& spec, std::size_t tune_index);

struct MetricRecord {
    double linf = 0.0;
    double l2 = 0.0;
    std::size_t fp = 0;
    std::size_t tp = 0;
};

MetricRecord metrics(const VectorXd& beta_hat, const Support& support_hat, const VectorXd& beta_star,
                     const Support& J_star);

struct RepRow {
    std::size_t rep = 0;
    Method method = Method::aew;
    bool ok = true;
    std::string error;  // empty when ok
    MetricRecord m;
};

struct MethodSummary {
    Method method = Method::aew;
    /// Tuning parameter in use: kappa for aew and l0, A for lasso.
    double param = 0.0;
    std::size_t reps_ok = 0;
    std::size_t reps_failed = 0;
    double linf_mean = 0.0;
    double linf_sd = 0.0;
    double l2_mean = 0.0;
    double l2_sd = 0.0;
    double fp_mean = 0.0;
    double tp_rate = 0.0;
};

struct ExperimentSummary {
    ExperimentSpec spec;
    std::vector<RepRow> rows;  // ordered by rep, then by method order in spec
    std::vector<MethodSummary> methods;
};

/// Per-method statistics over the successful rows, in row order.
MethodSummary summarize(Method method, double param, const std::vector<RepRow>& rows, std::size_t s_star);

/// Tunes on separate draws, then runs every replication and method. A
/// failing method marks its row and the sweep continues.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

/// Writes summary.csv, reps.csv, spec.txt and boxplot_{linf,l2,fp}.svg.
void emit(const ExperimentSummary& summary, const std::filesystem::path& out_dir);

std::string summary_csv(const std::vector<MethodSummary>& methods);
std::string reps_csv(const std::vector<RepRow>& rows);
std::vector<MethodSummary> parse_summary_csv(std::string_view text);
std::vector<RepRow> parse_reps_csv(std::string_view text);

}  // namespace aew
