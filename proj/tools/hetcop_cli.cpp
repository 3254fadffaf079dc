// hetcop command-line driver: simulate | pit | fit | metrics | backtest | replicate
//
// Every stochastic command requires a seed (flag, config file, or the
// HETCOP_SEED environment variable) and is bit-reproducible given the seed
// and thread width. Exit codes: 0 ok, 2 validation, 3 estimation failure,
// 4 replication failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "hetcop/hetcop.hpp"
#include "hetcop/replicate.hpp"

namespace fs = std::filesystem;
using hetcop::Json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitReplication = 4;

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("HETCOP_SEED");
    if (!s || !*s) return std::nullopt;
    return std::strtoull(s, nullptr, 10);
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& flag_seed, const Json& config) {
    if (flag_seed) return *flag_seed;
    if (config.contains("seed")) return config["seed"].get<std::uint64_t>();
    if (auto e = env_seed()) return *e;
    throw CliError(kExitValidation,
                   "a seed is required (--seed, config \"seed\", or HETCOP_SEED)");
}

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    if (!fs::exists(path)) throw CliError(kExitValidation, "config file not found: " + path);
    return hetcop::read_json(path);
}

/// Flag value if the user typed it, else the config value, else the default.
template <typename T>
T resolve(const CLI::Option* opt, const T& flag_value, const Json& config, const char* key,
          const T& fallback) {
    if (opt && opt->count() > 0) return flag_value;
    if (config.contains(key)) return config[key].get<T>();
    return fallback;
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw CliError(kExitValidation, std::string(what) + " not found: " + path);
}

void write_effective_config(const std::string& target, const Json& cfg) {
    fs::path p(target);
    fs::path out = fs::is_directory(p) || p.extension().empty()
                       ? p / "config.json"
                       : p.parent_path() / (p.stem().string() + ".config.json");
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    hetcop::write_json(out.string(), cfg);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<hetcop::MarginPtr> load_margins(const std::vector<std::string>& paths) {
    std::vector<hetcop::MarginPtr> margins;
    for (const auto& p : paths) {
        require_file(p, "margin file");
        margins.push_back(
            std::make_shared<hetcop::KdeMargin>(hetcop::margin_from_json(hetcop::read_json(p))));
    }
    return margins;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config_path, dgp, out, model_path;
    std::vector<std::string> margin_paths;
    std::size_t T = 0;
    std::optional<std::uint64_t> seed;
    double alpha0 = 0.01, alpha1 = 0.5, alpha2 = 0.2, alpha3 = 0.2;
    double beta1 = 0.9, hbar = 0.8, phi1 = 0.5, sigma2 = 2.5;
};

int cmd_simulate(const SimulateArgs& a, const std::map<std::string, const CLI::Option*>& opts,
                 const Json& cfg) {
    auto opt_of = [&](const char* key) -> const CLI::Option* {
        auto it = opts.find(key);
        return it == opts.end() ? nullptr : it->second;
    };
    std::string dgp = resolve(opt_of("dgp"), a.dgp, cfg, "dgp", std::string{});
    std::size_t T = resolve(opt_of("T"), a.T, cfg, "T", std::size_t{0});
    std::string out = resolve(opt_of("out"), a.out, cfg, "out", std::string{});
    if (dgp.empty() || T == 0 || out.empty())
        throw CliError(kExitValidation, "simulate: --dgp, --T and --out are required");
    std::uint64_t seed = require_seed(a.seed, cfg);

    Json eff{{"command", "simulate"}, {"dgp", dgp}, {"T", T}, {"seed", seed}, {"out", out}};
    if (dgp == "arch1" || dgp == "arch3") {
        hetcop::ArchParams par;
        par.alpha0 = resolve(opt_of("alpha0"), a.alpha0, cfg, "alpha0", 0.01);
        if (dgp == "arch1") {
            par.alphas = {resolve(opt_of("alpha1"), a.alpha1, cfg, "alpha1", 0.5)};
        } else {
            par.alphas = {resolve(opt_of("alpha1"), a.alpha1, cfg, "alpha1", 0.2),
                          resolve(opt_of("alpha2"), a.alpha2, cfg, "alpha2", 0.2),
                          resolve(opt_of("alpha3"), a.alpha3, cfg, "alpha3", 0.2)};
        }
        eff["alpha0"] = par.alpha0;
        for (std::size_t i = 0; i < par.alphas.size(); ++i)
            eff["alpha" + std::to_string(i + 1)] = par.alphas[i];
        hetcop::write_series_csv(out, hetcop::simulate_arch(par, T, seed));
    } else if (dgp == "garch") {
        hetcop::GarchParams par;
        par.alpha0 = resolve(opt_of("alpha0"), a.alpha0, cfg, "alpha0", 0.01);
        par.alpha1 = resolve(opt_of("alpha1"), a.alpha1, cfg, "alpha1", 0.05);
        par.beta1 = resolve(opt_of("beta1"), a.beta1, cfg, "beta1", 0.9);
        eff["alpha0"] = par.alpha0;
        eff["alpha1"] = par.alpha1;
        eff["beta1"] = par.beta1;
        hetcop::write_series_csv(out, hetcop::simulate_garch(par, T, seed));
    } else if (dgp == "sv") {
        hetcop::SvParams par;
        par.h_bar = resolve(opt_of("hbar"), a.hbar, cfg, "hbar", 0.8);
        par.phi1 = resolve(opt_of("phi1"), a.phi1, cfg, "phi1", 0.5);
        par.sigma2 = resolve(opt_of("sigma2"), a.sigma2, cfg, "sigma2", 2.5);
        eff["hbar"] = par.h_bar;
        eff["phi1"] = par.phi1;
        eff["sigma2"] = par.sigma2;
        hetcop::write_series_csv(out, hetcop::simulate_sv(par, T, seed));
    } else if (dgp == "copula") {
        std::string model = resolve(opt_of("model"), a.model_path, cfg, "model", std::string{});
        std::vector<std::string> margins =
            resolve(opt_of("margin"), a.margin_paths, cfg, "margin", std::vector<std::string>{});
        if (model.empty() || margins.empty())
            throw CliError(kExitValidation, "simulate --dgp copula needs --model and --margin");
        require_file(model, "model file");
        hetcop::DVineSpec spec = hetcop::vine_from_json(hetcop::read_json(model));
        auto mg = load_margins(margins);
        if (static_cast<int>(mg.size()) != spec.m)
            throw CliError(kExitValidation, "simulate: need one margin per series");
        eff["model"] = model;
        eff["margin"] = margins;
        if (spec.m == 1) {
            hetcop::write_series_csv(out, hetcop::simulate_copula_model(spec, *mg[0], T, seed));
        } else {
            hetcop::write_matrix_csv(out, hetcop::simulate_copula_model_multi(spec, mg, T, seed));
        }
    } else {
        throw CliError(kExitValidation, "simulate: unknown --dgp " + dgp);
    }
    write_effective_config(out, eff);
    return 0;
}

// ---------------------------------------------------------------------------
// pit
// ---------------------------------------------------------------------------

int cmd_pit(const std::string& data_path, const std::string& out, const std::string& margin_out) {
    require_file(data_path, "data file");
    auto rows = hetcop::read_csv(data_path);
    if (rows.empty()) throw CliError(kExitValidation, "pit: empty data file");
    std::size_t m = rows.front().size();
    std::vector<std::vector<double>> pits(rows.size(), std::vector<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> col(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) col[t] = rows[t][j];
        hetcop::KdeMargin margin = hetcop::fit_margin(col);
        auto u = hetcop::pit(margin, col);
        for (std::size_t t = 0; t < rows.size(); ++t) pits[t][j] = u[t];
        fs::path mp(margin_out);
        std::string path = m == 1 ? margin_out
                                  : (mp.parent_path() /
                                     (mp.stem().string() + "_" + std::to_string(j + 1) +
                                      mp.extension().string()))
                                        .string();
        hetcop::write_json(path, hetcop::margin_to_json(margin));
    }
    hetcop::write_matrix_csv(out, pits);
    Json eff{{"command", "pit"}, {"data", data_path}, {"out", out}, {"margin_out", margin_out}};
    write_effective_config(out, eff);
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string config_path, data, family = "mixture_t", method = "mle", out_dir;
    int p = 1;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    int starts = 5, max_evals = 3000;
    std::size_t iterations = 20000, burnin = 10000, adapt_start = 1000, thin = 10;
};

int cmd_fit(const FitArgs& a, const Json& cfg) {
    require_file(a.data, "data file");
    if (a.out_dir.empty()) throw CliError(kExitValidation, "fit: --out-dir is required");
    std::uint64_t seed = require_seed(a.seed, cfg);
    unsigned threads = a.threads == 0 ? hetcop::default_threads() : a.threads;

    auto rows = hetcop::read_csv(a.data);
    if (rows.size() < 100) throw CliError(kExitValidation, "fit: need at least 100 rows");
    const int m = static_cast<int>(rows.front().size());
    fs::create_directories(a.out_dir);
    auto path = [&](const std::string& n) { return (fs::path(a.out_dir) / n).string(); };

    // margins and copula data
    std::vector<hetcop::MarginPtr> margins;
    std::vector<std::vector<double>> u_multi(rows.size(),
                                             std::vector<double>(static_cast<std::size_t>(m)));
    std::vector<double> u_uni;
    for (int j = 0; j < m; ++j) {
        std::vector<double> col(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) col[t] = rows[t][static_cast<std::size_t>(j)];
        auto margin = std::make_shared<hetcop::KdeMargin>(hetcop::fit_margin(col));
        hetcop::write_json(path("margin_" + std::to_string(j + 1) + ".json"),
                           hetcop::margin_to_json(*margin));
        auto u = hetcop::pit(*margin, col);
        for (std::size_t t = 0; t < rows.size(); ++t)
            u_multi[t][static_cast<std::size_t>(j)] = u[t];
        if (m == 1) u_uni = std::move(u);
        margins.push_back(margin);
    }
    hetcop::CopulaData data = m == 1 ? hetcop::CopulaData::univariate(std::move(u_uni))
                                     : hetcop::CopulaData::multivariate(std::move(u_multi));

    hetcop::VineLayout layout{m, a.p, a.family};
    Json eff{{"command", "fit"},   {"data", a.data},     {"family", a.family}, {"p", a.p},
             {"m", m},             {"method", a.method}, {"seed", seed},       {"threads", threads},
             {"out_dir", a.out_dir}};

    try {
        if (a.method == "mle") {
            hetcop::MleOptions opt;
            opt.starts = a.starts;
            opt.max_evals = a.max_evals;
            opt.threads = threads;
            opt.seed = seed;
            eff["starts"] = a.starts;
            eff["max_evals"] = a.max_evals;
            hetcop::FitReport rep = hetcop::fit_mle(layout, data, opt);
            hetcop::write_json(path("model.json"), hetcop::vine_to_json(rep.spec()));
            hetcop::write_json(path("fit_report.json"), hetcop::fit_report_to_json(rep));
        } else if (a.method == "mcmc") {
            hetcop::McmcConfig mc;
            mc.iterations = a.iterations;
            mc.burnin = a.burnin;
            mc.adapt_start = a.adapt_start;
            mc.thin = a.thin;
            mc.seed = seed;
            mc.threads = threads;
            eff["iterations"] = a.iterations;
            eff["burnin"] = a.burnin;
            eff["adapt_start"] = a.adapt_start;
            eff["thin"] = a.thin;
            const hetcop::Margin* vol_margin = m == 1 ? margins[0].get() : nullptr;
            hetcop::McmcResult res = hetcop::fit_mcmc(layout, data, mc, vol_margin);
            hetcop::write_json(path("model.json"),
                               hetcop::vine_to_json(res.posterior_mean_spec(layout)));
            hetcop::write_json(path("fit_report.json"), hetcop::mcmc_result_to_json(res, layout));
            hetcop::write_chain_csv(path("chain.csv"), res);
        } else {
            throw CliError(kExitValidation, "fit: --method must be mle or mcmc");
        }
    } catch (const CliError&) {
        throw;
    } catch (const std::exception& e) {
        Json partial{{"schema", hetcop::kSchemaVersion},
                     {"type", "fit_report"},
                     {"error", e.what()}};
        hetcop::write_json(path("fit_report.json"), partial);
        write_effective_config(a.out_dir, eff);
        throw CliError(kExitEstimation, std::string("fit failed: ") + e.what());
    }
    write_effective_config(a.out_dir, eff);
    return 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::string config_path, model, out_dir, lags = "0,1", alpha_grid;
    std::vector<std::string> margin_paths;
    std::size_t n = 1000000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

int cmd_metrics(const MetricsArgs& a, const Json& cfg) {
    require_file(a.model, "model file");
    if (a.out_dir.empty()) throw CliError(kExitValidation, "metrics: --out-dir is required");
    std::uint64_t seed = require_seed(a.seed, cfg);
    hetcop::DVineSpec spec = hetcop::vine_from_json(hetcop::read_json(a.model));
    auto margins = load_margins(a.margin_paths);
    if (static_cast<int>(margins.size()) != spec.m)
        throw CliError(kExitValidation, "metrics: need one margin per series");
    fs::create_directories(a.out_dir);
    auto path = [&](const std::string& n2) { return (fs::path(a.out_dir) / n2).string(); };

    std::vector<double> alphas;
    if (a.alpha_grid.empty()) {
        for (int i = 1; i <= 19; ++i) alphas.push_back(0.05 * i);
    } else {
        alphas = parse_double_list(a.alpha_grid);
    }
    std::vector<int> lags;
    for (double v : parse_double_list(a.lags)) lags.push_back(static_cast<int>(v));

    Json rep{{"schema", hetcop::kSchemaVersion}, {"type", "dependence_report"}};
    if (spec.m == 1) {
        const hetcop::PairCopula& c2 = spec.pair_uni(1);
        hetcop::VolatilityMargin vm(margins[0]);
        rep["rho_y"] = Json::array();
        rep["rho_v"] = Json::array();
        for (int k : lags) {
            if (k == 0) continue;
            Json jy, jv;
            jy["k"] = k;
            jv["k"] = k;
            if (k == 1) {
                jy["value"] = hetcop::spearman_rho(c2);
                jy["method"] = "quadrature";
                jv["value"] = hetcop::rho_v_lag1(c2, vm, vm);
                jv["method"] = "quadrature";
            } else {
                std::vector<hetcop::MarginPtr> ms{margins[0]};
                auto path_u =
                    hetcop::simulate_uni(spec, a.n, seed + static_cast<std::uint64_t>(k));
                std::vector<double> x(path_u.begin(), path_u.end() - k),
                    y2(path_u.begin() + k, path_u.end());
                jy["value"] = hetcop::spearman(x, y2);
                jy["method"] = "simulation";
                jy["n"] = a.n;
                jy["se"] = 1.0 / std::sqrt(static_cast<double>(a.n));
                auto est = hetcop::rho_v_simulated(spec, ms, k, 1, 1, a.n / 10,
                                                   seed + 100 + static_cast<std::uint64_t>(k));
                jv["value"] = est.value;
                jv["se"] = est.se;
                jv["method"] = "simulation";
            }
            rep["rho_y"].push_back(jy);
            rep["rho_v"].push_back(jv);
        }
        auto qd_series = hetcop::quantile_dependence(
            [&](double x, double y2) { return c2.cdf(x, y2); }, alphas);
        auto qd_vol = hetcop::quantile_dependence(
            [&](double x, double y2) { return hetcop::vol_copula_cdf(c2, vm, vm, x, y2); },
            alphas);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < alphas.size(); ++i)
            rows.push_back({alphas[i], qd_series.lambda_low[i], qd_series.lambda_up[i],
                            qd_series.lambda_lu[i], qd_series.lambda_ul[i]});
        hetcop::write_csv(path("lambda_series.csv"),
                          {"alpha", "lambda_low", "lambda_up", "lambda_lu", "lambda_ul"}, rows);
        rows.clear();
        for (std::size_t i = 0; i < alphas.size(); ++i)
            rows.push_back({alphas[i], qd_vol.lambda_low[i], qd_vol.lambda_up[i],
                            qd_vol.lambda_lu[i], qd_vol.lambda_ul[i]});
        hetcop::write_csv(path("lambda_vol.csv"),
                          {"alpha", "lambda_low", "lambda_up", "lambda_lu", "lambda_ul"}, rows);
        auto td = hetcop::tail_dependence(c2);
        if (td.available) rep["tail_dependence"] = {{"lower", td.lower}, {"upper", td.upper}};
    } else {
        auto mats = hetcop::dependence_matrices(spec, margins, lags, a.n, seed);
        rep["matrices"] = Json::array();
        for (const auto& [k, dm] : mats) {
            Json jm{{"k", k},
                    {"p_y", dm.p_y},
                    {"p_v", dm.p_v},
                    {"n", a.n},
                    {"se_order", 1.0 / std::sqrt(static_cast<double>(a.n))}};
            rep["matrices"].push_back(jm);
            std::vector<std::string> header;
            for (int i = 1; i <= spec.m; ++i) header.push_back("series_" + std::to_string(i));
            hetcop::write_csv(path("p_y_k" + std::to_string(k) + ".csv"), header, dm.p_y);
            hetcop::write_csv(path("p_v_k" + std::to_string(k) + ".csv"), header, dm.p_v);
        }
    }
    hetcop::write_json(path("dependence_report.json"), rep);
    Json eff{{"command", "metrics"}, {"model", a.model}, {"seed", seed},
             {"n", a.n},             {"lags", a.lags},   {"out_dir", a.out_dir}};
    write_effective_config(a.out_dir, eff);
    return 0;
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

struct BacktestArgs {
    std::string config_path, model, data, out, alphas = "0.01,0.05,0.1,0.9,0.95,0.99";
    std::vector<std::string> margin_paths;
    std::size_t draws_per_day = 100000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

int cmd_backtest(const BacktestArgs& a, const Json& cfg) {
    require_file(a.model, "model file");
    require_file(a.data, "data file");
    if (a.out.empty()) throw CliError(kExitValidation, "backtest: --out is required");
    hetcop::DVineSpec spec = hetcop::vine_from_json(hetcop::read_json(a.model));
    auto margins = load_margins(a.margin_paths);
    if (static_cast<int>(margins.size()) != spec.m)
        throw CliError(kExitValidation, "backtest: need one margin per series");
    unsigned threads = a.threads == 0 ? hetcop::default_threads() : a.threads;
    auto alphas = parse_double_list(a.alphas);
    auto rows_data = hetcop::read_csv(a.data);

    std::vector<std::string> header{"series", "alpha", "alpha_hat", "lr_uc",    "lr_ind",
                                    "lr_cc",  "p_cc",  "reject95",  "reject99"};
    std::vector<std::vector<double>> out_rows;
    auto push_rows = [&](double series_id, const std::vector<hetcop::BacktestRow>& rows) {
        for (const auto& r : rows)
            out_rows.push_back({series_id, r.alpha, r.alpha_hat, r.lr_uc, r.lr_ind, r.lr_cc,
                                r.p_cc, r.reject95 ? 1.0 : 0.0, r.reject99 ? 1.0 : 0.0});
    };

    Json eff{{"command", "backtest"}, {"model", a.model}, {"data", a.data},
             {"alphas", a.alphas},    {"out", a.out},     {"threads", threads}};
    if (spec.m == 1) {
        std::vector<double> y(rows_data.size());
        for (std::size_t t = 0; t < rows_data.size(); ++t) y[t] = rows_data[t][0];
        push_rows(1, hetcop::rolling_backtest_uni(spec, *margins[0], y, alphas, threads));
    } else {
        // equally-weighted portfolio block (series id 0)
        std::uint64_t seed = require_seed(a.seed, cfg);
        eff["seed"] = seed;
        eff["draws_per_day"] = a.draws_per_day;
        std::vector<double> w(static_cast<std::size_t>(spec.m),
                              1.0 / static_cast<double>(spec.m));
        push_rows(0, hetcop::rolling_backtest_portfolio(spec, margins, rows_data, w, alphas,
                                                        a.draws_per_day, seed, threads));
    }
    hetcop::write_csv(a.out, header, out_rows);
    write_effective_config(a.out, eff);
    return 0;
}

// ---------------------------------------------------------------------------
// replicate
// ---------------------------------------------------------------------------

int cmd_replicate(const std::string& study, const std::string& out_dir,
                  const std::optional<std::uint64_t>& seed_flag, unsigned threads,
                  const Json& cfg) {
    if (study != "table2" && study != "arch3" && study != "simstudy")
        throw CliError(kExitValidation, "replicate: unknown study " + study);
    std::uint64_t seed = require_seed(seed_flag, cfg);
    unsigned w = threads == 0 ? hetcop::default_threads() : threads;

    hetcop::StudyReport rep;
    try {
        if (study == "table2") {
            rep = hetcop::replicate_table2(out_dir, seed, w);
        } else if (study == "arch3") {
            hetcop::Arch3Options opt;
            opt.cases = {0, 1, 2};
            opt.threads = w;
            rep = hetcop::replicate_arch3(out_dir, seed, opt);
        } else {
            hetcop::SimStudyOptions opt;
            opt.threads = w;
            rep = hetcop::replicate_simstudy(out_dir, seed, opt);
        }
    } catch (const std::exception& e) {
        throw CliError(kExitReplication, "replicate " + study + " failed: " + e.what());
    }
    Json eff{{"command", "replicate"}, {"study", study}, {"seed", seed}, {"threads", w},
             {"out_dir", out_dir}};
    write_effective_config(out_dir, eff);
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " = " << c.value << " (band ["
                  << c.lo << ", " << c.hi << "])\n";
    if (!rep.pass()) throw CliError(kExitReplication, "replicate " + study + ": checks failed");
    std::cout << "replicate " << study << ": all checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-series copulas for heteroskedastic data"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate a benchmark DGP or a fitted model");
    std::map<std::string, const CLI::Option*> sim_opts;
    sim_opts["dgp"] = c_sim->add_option("--dgp", sim.dgp, "arch1|arch3|garch|sv|copula");
    sim_opts["T"] = c_sim->add_option("--T", sim.T, "series length");
    std::optional<std::uint64_t> sim_seed;
    c_sim->add_option("--seed", sim_seed, "RNG seed");
    sim_opts["out"] = c_sim->add_option("--out", sim.out, "output CSV path");
    sim_opts["alpha0"] = c_sim->add_option("--alpha0", sim.alpha0, "ARCH/GARCH constant");
    sim_opts["alpha1"] = c_sim->add_option("--alpha1", sim.alpha1, "first lag coefficient");
    sim_opts["alpha2"] = c_sim->add_option("--alpha2", sim.alpha2, "second lag coefficient");
    sim_opts["alpha3"] = c_sim->add_option("--alpha3", sim.alpha3, "third lag coefficient");
    sim_opts["beta1"] = c_sim->add_option("--beta1", sim.beta1, "GARCH persistence");
    sim_opts["hbar"] = c_sim->add_option("--hbar", sim.hbar, "SV log-variance mean");
    sim_opts["phi1"] = c_sim->add_option("--phi1", sim.phi1, "SV persistence");
    sim_opts["sigma2"] = c_sim->add_option("--sigma2", sim.sigma2, "SV innovation variance");
    sim_opts["model"] = c_sim->add_option("--model", sim.model_path, "vine model JSON");
    sim_opts["margin"] =
        c_sim->add_option("--margin", sim.margin_paths, "margin JSON (repeat per series)");
    c_sim->add_option("--config", sim.config_path, "JSON config file");

    std::string pit_data, pit_out, pit_margin_out;
    auto* c_pit = app.add_subcommand("pit", "Fit margins and probability-integral-transform data");
    c_pit->add_option("--data", pit_data, "input CSV")->required();
    c_pit->add_option("--out", pit_out, "output PIT CSV")->required();
    c_pit->add_option("--margin-out", pit_margin_out, "margin JSON output path")->required();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit margins and the D-vine copula");
    c_fit->add_option("--data", fit.data, "input CSV")->required();
    c_fit->add_option("--family", fit.family, "mixture_t|mixture_cgumbel|t|convex_gumbel|gumbel");
    c_fit->add_option("--p", fit.p, "Markov order");
    c_fit->add_option("--method", fit.method, "mle|mcmc");
    c_fit->add_option("--out-dir", fit.out_dir, "output directory")->required();
    std::optional<std::uint64_t> fit_seed;
    c_fit->add_option("--seed", fit_seed, "RNG seed");
    c_fit->add_option("--threads", fit.threads, "parallelism width");
    c_fit->add_option("--starts", fit.starts, "MLE multi-start count");
    c_fit->add_option("--max-evals", fit.max_evals, "MLE evaluations per start");
    c_fit->add_option("--iterations", fit.iterations, "MCMC sweeps");
    c_fit->add_option("--burnin", fit.burnin, "MCMC burn-in sweeps");
    c_fit->add_option("--adapt-start", fit.adapt_start, "sweep at which adaptation starts");
    c_fit->add_option("--thin", fit.thin, "thinning for metric posteriors");
    c_fit->add_option("--config", fit.config_path, "JSON config file");

    MetricsArgs met;
    auto* c_met = app.add_subcommand("metrics", "Dependence metrics of a fitted model");
    c_met->add_option("--model", met.model, "vine model JSON")->required();
    c_met->add_option("--margin", met.margin_paths, "margin JSON (repeat per series)")->required();
    c_met->add_option("--lags", met.lags, "comma-separated lags");
    c_met->add_option("--alpha-grid", met.alpha_grid, "comma-separated quantile levels");
    c_met->add_option("--n", met.n, "Monte Carlo paths");
    std::optional<std::uint64_t> met_seed;
    c_met->add_option("--seed", met_seed, "RNG seed");
    c_met->add_option("--threads", met.threads, "parallelism width");
    c_met->add_option("--out-dir", met.out_dir, "output directory")->required();
    c_met->add_option("--config", met.config_path, "JSON config file");

    BacktestArgs bt;
    auto* c_bt = app.add_subcommand("backtest", "In-sample one-step-ahead VaR backtest");
    c_bt->add_option("--model", bt.model, "vine model JSON")->required();
    c_bt->add_option("--margin", bt.margin_paths, "margin JSON (repeat per series)")->required();
    c_bt->add_option("--data", bt.data, "realized data CSV")->required();
    c_bt->add_option("--alphas", bt.alphas, "comma-separated VaR levels");
    c_bt->add_option("--draws-per-day", bt.draws_per_day, "portfolio MC draws per day");
    std::optional<std::uint64_t> bt_seed;
    c_bt->add_option("--seed", bt_seed, "RNG seed (portfolio simulation)");
    c_bt->add_option("--threads", bt.threads, "parallelism width");
    c_bt->add_option("--out", bt.out, "output CSV")->required();
    c_bt->add_option("--config", bt.config_path, "JSON config file");

    std::string rep_study, rep_out, rep_config;
    std::optional<std::uint64_t> rep_seed;
    unsigned rep_threads = 0;
    auto* c_rep = app.add_subcommand("replicate", "Run a desk-scale replication study");
    c_rep->add_option("--study", rep_study, "table2|arch3|simstudy")->required();
    c_rep->add_option("--out-dir", rep_out, "output directory")->required();
    c_rep->add_option("--seed", rep_seed, "RNG seed");
    c_rep->add_option("--threads", rep_threads, "parallelism width");
    c_rep->add_option("--config", rep_config, "JSON config file");

    try {
        app.parse(argc, argv);
        if (c_sim->parsed()) {
            sim.seed = sim_seed;
            return cmd_simulate(sim, sim_opts, load_config(sim.config_path));
        }
        if (c_pit->parsed()) return cmd_pit(pit_data, pit_out, pit_margin_out);
        if (c_fit->parsed()) {
            fit.seed = fit_seed;
            return cmd_fit(fit, load_config(fit.config_path));
        }
        if (c_met->parsed()) {
            met.seed = met_seed;
            return cmd_metrics(met, load_config(met.config_path));
        }
        if (c_bt->parsed()) {
            bt.seed = bt_seed;
            return cmd_backtest(bt, load_config(bt.config_path));
        }
        if (c_rep->parsed())
            return cmd_replicate(rep_study, rep_out, rep_seed, rep_threads,
                                 load_config(rep_config));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const hetcop::invalid_parameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
