#include "aew/experiment.hpp"

#include "aew/baselines.hpp"
#include "aew/error.hpp"
#include "aew/posterior.hpp"
#include "aew/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace aew {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream layout under spec.seed: even streams draw instances, odd streams
// drive the chains; tuning draws hang off a separate base seed.
constexpr std::uint64_t kTuningSalt = 0x74756E696E67ULL;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw DomainError("spec: " + key + " expects an integer, got '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw DomainError("spec: " + key + " expects an integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw DomainError("spec: " + key + " expects a number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DomainError("spec: " + key + " expects true or false, got '" + v + "'");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.empty()) return out;
    for (const auto& cell : split_csv_line(v)) out.push_back(parse_real(key, trim(cell)));
    return out;
}

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

Instance draw_instance(const ExperimentSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);

    MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
    }
    if (spec.normalize) {
        const double root_n = std::sqrt(static_cast<double>(spec.n));
        for (Eigen::Index j = 0; j < p; ++j) X.col(j) *= root_n / X.col(j).norm();
    }

    VectorXd beta_star = VectorXd::Zero(p);
    Support J_star;
    for (std::size_t j = 0; j < spec.s_star; ++j) {
        beta_star[static_cast<Eigen::Index>(j)] = spec.signal;
        J_star.push_back(j);
    }
    const VectorXd mean = X * beta_star;
    const double sigma = std::sqrt(mean.squaredNorm() / (9.0 * static_cast<double>(spec.n)));
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = mean[i] + sigma * normal(rng);

    return {Dataset(std::move(X), std::move(y), sigma), std::move(beta_star), std::move(J_star), sigma};
}

Support nonzero_support(const VectorXd& beta) {
    Support J;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) J.push_back(static_cast<std::size_t>(j));
    }
    return J;
}

std::size_t s_bar_for(const ExperimentSpec& spec) {
    if (spec.s_bar) return std::min(*spec.s_bar, spec.p);
    return std::clamp<std::size_t>(spec.n / 2, 1, spec.p);
}

MetricRecord run_method(Method method, double param, const Instance& inst, const ExperimentSpec& spec,
                        std::uint64_t chain_seed) {
    const Dataset& data = inst.data;
    const double sigma2 = inst.sigma * inst.sigma;
    switch (method) {
        case Method::aew: {
            PosteriorConfig pcfg = PosteriorConfig::practical(spec.n, spec.p, sigma2, param);
            pcfg.s_bar = s_bar_for(spec);
            ChainConfig ccfg = spec.chain;
            ccfg.seed = chain_seed;
            ccfg.workers = 1;
            const ChainAccumulators acc = run_chain(data, pcfg, ccfg);
            const Thresholded t = threshold(estimate_mean(acc), default_threshold(inst.sigma, spec.n, spec.p));
            return metrics(t.beta, t.support, inst.beta_star, inst.J_star);
        }
        case Method::lasso: {
            LassoConfig lcfg;
            lcfg.lambda_l = lasso_lambda(param, inst.sigma, spec.n, spec.p);
            const VectorXd beta = lasso_cd(data, lcfg).beta;
            return metrics(beta, nonzero_support(beta), inst.beta_star, inst.J_star);
        }
        case Method::l0: {
            L0Config cfg;
            cfg.lambda = 2.0 * sigma2 * param * std::log(static_cast<double>(spec.p));
            cfg.s_bar = s_bar_for(spec);
            cfg.strategy = L0Strategy::forward_greedy;
            const L0Result fit = l0_select(data, cfg);
            return metrics(fit.beta, fit.subset, inst.beta_star, inst.J_star);
        }
    }
    throw DomainError("unknown method");
}

RepRow guarded_run(Method method, double param, const Instance& inst, const ExperimentSpec& spec,
                   std::size_t rep, std::uint64_t chain_seed) {
    RepRow row;
    row.rep = rep;
    row.method = method;
    try {
        row.m = run_method(method, param, inst, spec, chain_seed);
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        std::replace(row.error.begin(), row.error.end(), ',', ';');
        std::replace(row.error.begin(), row.error.end(), '\n', ' ');
        row.m = {kNaN, kNaN, 0, 0};
    }
    return row;
}

double tune(Method method, const std::vector<double>& grid, const std::vector<Instance>& draws,
            const ExperimentSpec& spec) {
    double best_param = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (const double value : grid) {
        double total = 0.0;
        for (std::size_t t = 0; t < draws.size(); ++t) {
            const std::uint64_t seed = derive_seed(derive_seed(spec.seed, kTuningSalt), 2 * t + 1);
            const RepRow row = guarded_run(method, value, draws[t], spec, t, seed);
            total += row.ok ? row.m.linf : std::numeric_limits<double>::infinity();
        }
        const double err = total / static_cast<double>(draws.size());
        if (err < best_err) {
            best_err = err;
            best_param = value;
        }
    }
    return best_param;
}

std::string format_metric(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::aew: return "aew";
        case Method::lasso: return "lasso";
        case Method::l0: return "l0";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "aew") return Method::aew;
    if (name == "lasso") return Method::lasso;
    if (name == "l0") return Method::l0;
    throw DomainError("unknown method '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
    if (n < 1 || p < 1) throw DomainError("n and p must be positive");
    if (s_star > p) throw DomainError("s_star must not exceed p");
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (!(lambda_kappa > 0.0)) throw DomainError("lambda_kappa must be positive");
    for (const double k : lambda_kappa_grid) {
        if (!(k > 0.0)) throw DomainError("lambda_kappa_grid entries must be positive");
    }
    for (const double a : lasso_a_grid) {
        if (!(a > 0.0)) throw DomainError("lasso_a_grid entries must be positive");
    }
    if (lasso_a_grid.empty()) throw DomainError("lasso_a_grid must not be empty");
    if ((lasso_a_grid.size() > 1 || lambda_kappa_grid.size() > 1) && tune_reps < 1) {
        throw DomainError("tuning over a grid needs tune_reps >= 1");
    }
    if (s_bar && *s_bar < 1) throw DomainError("s_bar must be at least 1");
    chain.validate();
}

ExperimentSpec parse_spec(std::string_view text) {
    ExperimentSpec spec;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw DomainError("spec line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));

        if (key == "n") spec.n = parse_size(key, value);
        else if (key == "p") spec.p = parse_size(key, value);
        else if (key == "s_star") spec.s_star = parse_size(key, value);
        else if (key == "reps") spec.reps = parse_size(key, value);
        else if (key == "seed") spec.seed = parse_u64(key, value);
        else if (key == "methods") {
            spec.methods.clear();
            if (!value.empty()) {
                for (const auto& m : split_csv_line(value)) spec.methods.push_back(parse_method(trim(m)));
            }
        }
        else if (key == "lambda_kappa") spec.lambda_kappa = parse_real(key, value);
        else if (key == "lambda_kappa_grid") spec.lambda_kappa_grid = parse_real_list(key, value);
        else if (key == "lasso_a_grid") spec.lasso_a_grid = parse_real_list(key, value);
        else if (key == "tune_reps") spec.tune_reps = parse_size(key, value);
        else if (key == "normalize") spec.normalize = parse_bool(key, value);
        else if (key == "signal") spec.signal = parse_real(key, value);
        else if (key == "s_bar") {
            if (value.empty()) spec.s_bar.reset();
            else spec.s_bar = parse_size(key, value);
        }
        else if (key == "burn_in") spec.chain.burn_in = parse_size(key, value);
        else if (key == "steps") spec.chain.steps = parse_size(key, value);
        else if (key == "flip_prob") {
            spec.chain.flip_prob = parse_real(key, value);
            spec.chain.swap_prob = 1.0 - spec.chain.flip_prob;
        }
        else if (key == "chains") spec.chain.chains = parse_size(key, value);
        else if (key == "init") {
            if (value == "empty") spec.chain.init = ChainInit::empty;
            else if (value == "lasso") spec.chain.init = ChainInit::lasso;
            else throw DomainError("spec: init must be empty or lasso");
        }
        else if (key == "workers") spec.workers = parse_size(key, value);
        else throw DomainError("spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    spec.validate();
    return spec;
}

ExperimentSpec read_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open spec file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

std::string format_spec(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "n=" << spec.n << '\n'
        << "p=" << spec.p << '\n'
        << "s_star=" << spec.s_star << '\n'
        << "reps=" << spec.reps << '\n'
        << "seed=" << spec.seed << '\n';
    out << "methods=";
    for (std::size_t i = 0; i < spec.methods.size(); ++i) out << (i ? "," : "") << method_name(spec.methods[i]);
    out << '\n'
        << "lambda_kappa=" << format_double(spec.lambda_kappa) << '\n'
        << "lambda_kappa_grid=" << join_reals(spec.lambda_kappa_grid) << '\n'
        << "lasso_a_grid=" << join_reals(spec.lasso_a_grid) << '\n'
        << "tune_reps=" << spec.tune_reps << '\n'
        << "normalize=" << (spec.normalize ? "true" : "false") << '\n'
        << "signal=" << format_double(spec.signal) << '\n'
        << "s_bar=" << (spec.s_bar ? std::to_string(*spec.s_bar) : std::string()) << '\n'
        << "burn_in=" << spec.chain.burn_in << '\n'
        << "steps=" << spec.chain.steps << '\n'
        << "flip_prob=" << format_double(spec.chain.flip_prob) << '\n'
        << "chains=" << spec.chain.chains << '\n'
        << "init=" << (spec.chain.init == ChainInit::lasso ? "lasso" : "empty") << '\n'
        << "workers=" << spec.workers << '\n';
    return out.str();
}

Instance gen_instance(const ExperimentSpec& spec, std::size_t rep_index) {
    return draw_instance(spec, derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(rep_index)));
}

Instance gen_tuning_instance(const ExperimentSpec& spec, std::size_t tune_index) {
    return draw_instance(spec, derive_seed(derive_seed(spec.seed, kTuningSalt), 2 * static_cast<std::uint64_t>(tune_index)));
}

MetricRecord metrics(const VectorXd& beta_hat, const Support& support_hat, const VectorXd& beta_star,
                     const Support& J_star) {
    if (beta_hat.size() != beta_star.size()) throw DomainError("coefficient vectors differ in length");
    const VectorXd diff = beta_hat - beta_star;
    MetricRecord m;
    m.linf = diff.size() ? diff.lpNorm<Eigen::Infinity>() : 0.0;
    m.l2 = diff.norm();
    for (const std::size_t j : support_hat) {
        if (std::binary_search(J_star.begin(), J_star.end(), j)) ++m.tp;
        else ++m.fp;
    }
    return m;
}

MethodSummary summarize(Method method, double param, const std::vector<RepRow>& rows, std::size_t s_star) {
    MethodSummary s;
    s.method = method;
    s.param = param;
    std::vector<const RepRow*> ok;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        if (r.ok) ok.push_back(&r);
        else ++s.reps_failed;
    }
    s.reps_ok = ok.size();
    if (ok.empty()) {
        s.linf_mean = s.linf_sd = s.l2_mean = s.l2_sd = s.fp_mean = s.tp_rate = kNaN;
        return s;
    }
    const double k = static_cast<double>(ok.size());
    double linf = 0.0, l2 = 0.0, fp = 0.0, tp = 0.0;
    for (const RepRow* r : ok) {
        linf += r->m.linf;
        l2 += r->m.l2;
        fp += static_cast<double>(r->m.fp);
        tp += static_cast<double>(r->m.tp);
    }
    s.linf_mean = linf / k;
    s.l2_mean = l2 / k;
    s.fp_mean = fp / k;
    s.tp_rate = s_star == 0 ? 1.0 : tp / (k * static_cast<double>(s_star));
    double v_linf = 0.0, v_l2 = 0.0;
    for (const RepRow* r : ok) {
        v_linf += (r->m.linf - s.linf_mean) * (r->m.linf - s.linf_mean);
        v_l2 += (r->m.l2 - s.l2_mean) * (r->m.l2 - s.l2_mean);
    }
    s.linf_sd = ok.size() > 1 ? std::sqrt(v_linf / (k - 1.0)) : 0.0;
    s.l2_sd = ok.size() > 1 ? std::sqrt(v_l2 / (k - 1.0)) : 0.0;
    return s;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentSummary out;
    out.spec = spec;

    const auto has = [&](Method m) {
        return std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end();
    };

    double kappa = spec.lambda_kappa;
    double lasso_a = spec.lasso_a_grid.front();
    const bool tune_kappa = has(Method::aew) && spec.lambda_kappa_grid.size() > 1;
    const bool tune_a = has(Method::lasso) && spec.lasso_a_grid.size() > 1;
    if (tune_kappa || tune_a) {
        std::vector<Instance> draws;
        for (std::size_t t = 0; t < spec.tune_reps; ++t) draws.push_back(gen_tuning_instance(spec, t));
        if (tune_kappa) kappa = tune(Method::aew, spec.lambda_kappa_grid, draws, spec);
        if (tune_a) lasso_a = tune(Method::lasso, spec.lasso_a_grid, draws, spec);
    } else if (spec.lambda_kappa_grid.size() == 1) {
        kappa = spec.lambda_kappa_grid.front();
    }
    const auto param_for = [&](Method m) { return m == Method::lasso ? lasso_a : kappa; };

    const std::size_t m = spec.methods.size();
    out.rows.resize(spec.reps * m);
    const std::size_t workers = std::clamp<std::size_t>(spec.workers, 1, spec.reps);
    auto run_range = [&](std::size_t first) {
        for (std::size_t r = first; r < spec.reps; r += workers) {
            const Instance inst = gen_instance(spec, r);
            const std::uint64_t chain_seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(r) + 1);
            for (std::size_t k = 0; k < m; ++k) {
                const Method method = spec.methods[k];
                out.rows[r * m + k] = guarded_run(method, param_for(method), inst, spec, r, chain_seed);
            }
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& t : pool) t.join();
    }

    for (const Method method : spec.methods) {
        out.methods.push_back(summarize(method, param_for(method), out.rows, spec.s_star));
    }
    return out;
}

std::string summary_csv(const std::vector<MethodSummary>& methods) {
    std::ostringstream out;
    out << "method,param,reps_ok,reps_failed,linf_mean,linf_sd,l2_mean,l2_sd,fp_mean,tp_rate\n";
    for (const auto& s : methods) {
        out << method_name(s.method) << ',' << format_double(s.param) << ',' << s.reps_ok << ','
            << s.reps_failed << ',' << format_metric(s.linf_mean) << ',' << format_metric(s.linf_sd) << ','
            << format_metric(s.l2_mean) << ',' << format_metric(s.l2_sd) << ',' << format_metric(s.fp_mean)
            << ',' << format_metric(s.tp_rate) << '\n';
    }
    return out.str();
}

std::string reps_csv(const std::vector<RepRow>& rows) {
    std::ostringstream out;
    out << "rep,method,status,linf,l2,fp,tp,error\n";
    for (const auto& r : rows) {
        out << r.rep << ',' << method_name(r.method) << ',' << (r.ok ? "ok" : "failed") << ','
            << format_metric(r.m.linf) << ',' << format_metric(r.m.l2) << ',' << r.m.fp << ',' << r.m.tp << ','
            << r.error << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::vector<std::string>> csv_body(std::string_view text, std::size_t columns) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != columns) throw DomainError("csv row has " + std::to_string(cells.size()) + " fields");
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_metric(const std::string& v) {
    return v == "nan" ? kNaN : parse_real("value", v);
}

}  // namespace

std::vector<MethodSummary> parse_summary_csv(std::string_view text) {
    std::vector<MethodSummary> out;
    for (const auto& c : csv_body(text, 10)) {
        MethodSummary s;
        s.method = parse_method(c[0]);
        s.param = parse_real("param", c[1]);
        s.reps_ok = parse_size("reps_ok", c[2]);
        s.reps_failed = parse_size("reps_failed", c[3]);
        s.linf_mean = parse_metric(c[4]);
        s.linf_sd = parse_metric(c[5]);
        s.l2_mean = parse_metric(c[6]);
        s.l2_sd = parse_metric(c[7]);
        s.fp_mean = parse_metric(c[8]);
        s.tp_rate = parse_metric(c[9]);
        out.push_back(s);
    }
    return out;
}

std::vector<RepRow> parse_reps_csv(std::string_view text) {
    std::vector<RepRow> out;
    for (const auto& c : csv_body(text, 8)) {
        RepRow r;
        r.rep = parse_size("rep", c[0]);
        r.method = parse_method(c[1]);
        r.ok = c[2] == "ok";
        r.m.linf = parse_metric(c[3]);
        r.m.l2 = parse_metric(c[4]);
        r.m.fp = parse_size("fp", c[5]);
        r.m.tp = parse_size("tp", c[6]);
        r.error = c[7];
        out.push_back(std::move(r));
    }
    return out;
}

void emit(const ExperimentSummary& summary, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw DomainError("cannot write '" + (out_dir / name).string() + "'");
        f << content;
        if (!f) throw DomainError("failed writing '" + (out_dir / name).string() + "'");
    };
    write("summary.csv", summary_csv(summary.methods));
    write("reps.csv", reps_csv(summary.rows));
    write("spec.txt", format_spec(summary.spec));

    const struct {
        const char* name;
        const char* title;
        double (*get)(const MetricRecord&);
    } plots[] = {
        {"linf", "l-infinity estimation error", [](const MetricRecord& m) { return m.linf; }},
        {"l2", "l2 estimation error", [](const MetricRecord& m) { return m.l2; }},
        {"fp", "false positives", [](const MetricRecord& m) { return static_cast<double>(m.fp); }},
    };
    for (const auto& plot : plots) {
        std::vector<BoxSeries> series;
        for (const Method method : summary.spec.methods) {
            BoxSeries s{std::string(method_name(method)), {}};
            for (const auto& r : summary.rows) {
                if (r.method == method && r.ok) s.values.push_back(plot.get(r.m));
            }
            series.push_back(std::move(s));
        }
        write(std::string("boxplot_") + plot.name + ".svg", render_boxplot_svg(series, plot.title));
    }
}

}  // namespace aew
