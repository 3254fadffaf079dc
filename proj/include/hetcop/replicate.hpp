#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hetcop/datagen.hpp"
#include "hetcop/forecast.hpp"
#include "hetcop/inference.hpp"
#include "hetcop/io.hpp"
#include "hetcop/volcop.hpp"

namespace hetcop {

// Desk-scale replication studies. Each returns a list of named checks with
// the band it was evaluated against, and writes plot-ready artifacts to the
// output directory (pass an empty path to skip the files).

struct StudyCheck {
    std::string name;
    double value = 0.0;
    double lo = 0.0, hi = 0.0;
    bool pass = false;
};

struct StudyReport {
    std::string study;
    std::vector<StudyCheck> checks;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline StudyCheck check_band(const std::string& name, double value, double center, double tol) {
    StudyCheck c;
    c.name = name;
    c.value = value;
    c.lo = center - tol;
    c.hi = center + tol;
    c.pass = value >= c.lo && value <= c.hi;
    return c;
}

inline StudyCheck check_less(const std::string& name, double value, double bound) {
    StudyCheck c;
    c.name = name;
    c.value = value;
    c.lo = -std::numeric_limits<double>::infinity();
    c.hi = bound;
    c.pass = value < bound;
    return c;
}

inline double empirical_rho_lag(std::span<const double> x, int lag) {
    std::vector<double> a(x.begin(), x.end() - lag), b(x.begin() + lag, x.end());
    return spearman(a, b);
}

inline double empirical_rho_v_lag(std::span<const double> y, int lag) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    std::vector<double> v(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) v[t] = std::abs(y[t] - mean);
    return empirical_rho_lag(v, lag);
}

inline void maybe_write_json(const std::string& dir, const std::string& name, const Json& j) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    write_json((std::filesystem::path(dir) / name).string(), j);
}

inline void maybe_write_csv(const std::string& dir, const std::string& name,
                            const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    write_csv((std::filesystem::path(dir) / name).string(), header, rows);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Table 2: first-order dependence metrics of ARCH(1) and SV(1) data,
// empirical and from the fitted mixture-of-t copula
// ---------------------------------------------------------------------------

inline StudyReport replicate_table2(const std::string& out_dir, std::uint64_t seed,
                                    unsigned threads) {
    struct Case {
        std::string name;
        std::function<std::vector<double>(std::uint64_t)> gen;
        double fit_target, fit_tol;     // fitted-copula rho_v_1
        double emp_target, emp_tol;     // empirical rho_v_1
    };
    ArchParams arch05{0.01, {0.5}}, arch09{0.01, {0.9}};
    SvParams sv05{0.8, 0.5, 2.5}, sv09{0.8, 0.9, 2.0};
    std::vector<Case> cases = {
        {"arch_a1_0.5", [&](std::uint64_t s) { return simulate_arch(arch05, 50000, s); }, 0.241,
         0.04, 0.240, 0.02},
        {"arch_a1_0.9", [&](std::uint64_t s) { return simulate_arch(arch09, 50000, s); }, 0.393,
         0.06, 0.371, 0.02},
        {"sv_phi_0.5", [&](std::uint64_t s) { return simulate_sv(sv05, 50000, s); }, 0.186, 0.06,
         0.230, 0.02},
        {"sv_phi_0.9", [&](std::uint64_t s) { return simulate_sv(sv09, 50000, s); }, 0.395, 0.06,
         0.453, 0.02},
    };

    StudyReport rep;
    rep.study = "table2";
    std::vector<std::vector<double>> table;
    std::uint64_t case_seed = seed;
    for (const auto& cs : cases) {
        auto y = cs.gen(case_seed++);
        auto margin = std::make_shared<KdeMargin>(fit_margin(y));
        auto u = pit(*margin, y);

        VineLayout layout{1, 1, "mixture_t"};
        MleOptions opt;
        opt.threads = threads;
        opt.seed = seed;
        FitReport fit = fit_mle(layout, CopulaData::univariate(u), opt);
        PairCopula c2 = fit.spec().pair_uni(1);

        VolatilityMargin vm(margin);
        double rho_v_fit = rho_v_lag1(c2, vm, vm);
        double rho_v_emp = detail::empirical_rho_v_lag(y, 1);
        double rho_y_fit = spearman_rho(c2);
        double rho_y_emp = detail::empirical_rho_lag(u, 1);

        rep.checks.push_back(
            detail::check_band(cs.name + ".rho_v_fit", rho_v_fit, cs.fit_target, cs.fit_tol));
        rep.checks.push_back(
            detail::check_band(cs.name + ".rho_v_emp", rho_v_emp, cs.emp_target, cs.emp_tol));
        rep.checks.push_back(detail::check_less(cs.name + ".abs_rho_y_fit", std::abs(rho_y_fit), 0.02));
        rep.checks.push_back(detail::check_less(cs.name + ".abs_rho_y_emp", std::abs(rho_y_emp), 0.02));
        table.push_back({rho_y_fit, rho_y_emp, rho_v_fit, rho_v_emp});
    }

    detail::maybe_write_csv(out_dir, "table2_metrics.csv",
                            {"rho_y_fit", "rho_y_emp", "rho_v_fit", "rho_v_emp"}, table);
    Json j;
    j["schema"] = kSchemaVersion;
    j["study"] = "table2";
    j["checks"] = Json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back(
            {{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}});
    detail::maybe_write_json(out_dir, "summary.json", j);
    return rep;
}

// ---------------------------------------------------------------------------
// Online Appendix Part A: ARCH(3) quantile-dependence replication
// ---------------------------------------------------------------------------

struct Arch3Options {
    std::vector<int> cases{0};             // indices into the three parameter sets
    std::size_t T = 50000;
    std::size_t sim_n = 1000000;           // model-curve simulation for lags >= 2
    double tol = 0.03;                     // acceptance band, case (i) only
    unsigned threads = 1;
    int mle_starts = 2;
};

inline StudyReport replicate_arch3(const std::string& out_dir, std::uint64_t seed,
                                   const Arch3Options& opt = {}) {
    static const std::vector<std::vector<double>> alpha_sets = {
        {0.01, 0.2, 0.2, 0.2}, {0.01, 0.3, 0.2, 0.2}, {0.01, 0.5, 0.2, 0.2}};
    StudyReport rep;
    rep.study = "arch3";

    std::vector<double> alphas;
    for (int i = 1; i <= 19; ++i) alphas.push_back(i * 0.05);

    for (int case_idx : opt.cases) {
        const auto& a = alpha_sets[static_cast<std::size_t>(case_idx)];
        ArchParams par{a[0], {a[1], a[2], a[3]}};
        auto y = simulate_arch(par, opt.T, seed + static_cast<std::uint64_t>(case_idx));
        KdeMargin margin = fit_margin(y);
        auto u = pit(margin, y);

        VineLayout layout{1, 3, "mixture_t"};
        MleOptions mle;
        mle.threads = opt.threads;
        mle.starts = opt.mle_starts;
        mle.seed = seed;
        FitReport fit = fit_mle(layout, CopulaData::univariate(u), mle);
        DVineSpec spec = fit.spec();

        // model curves: lag 1 from the pair-copula CDF, lags 2-3 rank-based
        // on a long simulated path
        auto sim = simulate_uni(spec, opt.sim_n, seed + 100 + static_cast<std::uint64_t>(case_idx));
        std::string suffix = "_case" + std::to_string(case_idx + 1);
        for (int lag = 1; lag <= 3; ++lag) {
            QuantileDependence model =
                lag == 1 ? quantile_dependence(
                               [&](double x, double yv) { return spec.pair_uni(1).cdf(x, yv); },
                               alphas)
                         : empirical_quantile_dependence(sim, lag, alphas);
            QuantileDependence emp = empirical_quantile_dependence(u, lag, alphas);

            std::vector<std::vector<double>> rows;
            double worst_low = 0.0, worst_up = 0.0;
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                rows.push_back({alphas[i], model.lambda_low[i], emp.lambda_low[i],
                                model.lambda_up[i], emp.lambda_up[i]});
                worst_low = std::max(worst_low, std::abs(model.lambda_low[i] - emp.lambda_low[i]));
                worst_up = std::max(worst_up, std::abs(model.lambda_up[i] - emp.lambda_up[i]));
            }
            detail::maybe_write_csv(out_dir, "lambda_lag" + std::to_string(lag) + suffix + ".csv",
                                    {"alpha", "lambda_low_model", "lambda_low_empirical",
                                     "lambda_up_model", "lambda_up_empirical"},
                                    rows);
            if (case_idx == 0) {
                rep.checks.push_back(detail::check_less(
                    "lag" + std::to_string(lag) + ".max_abs_gap_lambda_low", worst_low, opt.tol));
                rep.checks.push_back(detail::check_less(
                    "lag" + std::to_string(lag) + ".max_abs_gap_lambda_up", worst_up, opt.tol));
            }
        }
    }

    Json j;
    j["schema"] = kSchemaVersion;
    j["study"] = "arch3";
    j["checks"] = Json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back(
            {{"name", c.name}, {"value", c.value}, {"hi", c.hi}, {"pass", c.pass}});
    detail::maybe_write_json(out_dir, "summary.json", j);
    return rep;
}

// ---------------------------------------------------------------------------
// Reduced misspecification study (Table 5 direction)
// ---------------------------------------------------------------------------

struct SimStudyOptions {
    int replicates = 10;
    std::size_t T = 3669;
    std::size_t rho_sim_n = 1000000;  // path length for rho_v of a fitted model
    unsigned threads = 1;
};

namespace detail {

/// rho_v at lags 1..5 of an ARCH(1) model, by one long simulated path.
inline std::vector<double> rho_v_of_arch(const ArchParams& par, std::size_t n,
                                         std::uint64_t seed) {
    auto y = simulate_arch(par, n, seed);
    std::vector<double> out;
    for (int lag = 1; lag <= 5; ++lag) out.push_back(empirical_rho_v_lag(y, lag));
    return out;
}

/// rho_v at lags 1..5 of a fitted copula model (vine + margin).
inline std::vector<double> rho_v_of_copula_model(const DVineSpec& spec, const Margin& margin,
                                                 std::size_t n, std::uint64_t seed) {
    auto y = simulate_copula_model(spec, margin, n, seed);
    std::vector<double> out;
    for (int lag = 1; lag <= 5; ++lag) out.push_back(empirical_rho_v_lag(y, lag));
    return out;
}

}  // namespace detail

inline StudyReport replicate_simstudy(const std::string& out_dir, std::uint64_t seed,
                                      const SimStudyOptions& opt = {}) {
    StudyReport rep;
    rep.study = "simstudy";

    // the two data-generating models: a medium-persistence ARCH(1), and a
    // Copula B1 model fitted to one sample from it
    ArchParams arch_true{0.01, {0.5}};
    VineLayout b1_layout{1, 1, "mixture_cgumbel"};

    auto y_base = simulate_arch(arch_true, 50000, seed);
    auto b1_margin = std::make_shared<KdeMargin>(fit_margin(y_base));
    MleOptions mle;
    mle.threads = opt.threads;
    mle.seed = seed;
    FitReport b1_base_fit =
        fit_mle(b1_layout, CopulaData::univariate(pit(*b1_margin, y_base)), mle);
    DVineSpec b1_true = b1_base_fit.spec();

    auto rho_true_arch = detail::rho_v_of_arch(arch_true, opt.rho_sim_n, seed + 901);
    auto rho_true_b1 =
        detail::rho_v_of_copula_model(b1_true, *b1_margin, opt.rho_sim_n, seed + 902);

    // per replicate squared errors, lags 1..5
    std::vector<std::vector<double>> se_b1_on_arch(5), se_arch_on_arch(5), se_arch_on_b1(5),
        se_b1_on_b1(5);

    for (int r = 0; r < opt.replicates; ++r) {
        std::uint64_t rs = seed + 1000 + static_cast<std::uint64_t>(r);

        // direction 1: ARCH(1) data
        {
            auto y = simulate_arch(arch_true, opt.T, rs);
            Arch1Fit af = fit_arch1(y);
            ArchParams fitted{af.alpha0, {af.alpha1}};
            auto rv_correct = detail::rho_v_of_arch(fitted, opt.rho_sim_n, rs + 11);

            auto margin = std::make_shared<KdeMargin>(fit_margin(y));
            MleOptions m2 = mle;
            m2.seed = rs;
            FitReport b1 = fit_mle(b1_layout, CopulaData::univariate(pit(*margin, y)), m2);
            auto rv_mis =
                detail::rho_v_of_copula_model(b1.spec(), *margin, opt.rho_sim_n, rs + 12);
            for (int lag = 0; lag < 5; ++lag) {
                double e_c = rv_correct[lag] - rho_true_arch[lag];
                double e_m = rv_mis[lag] - rho_true_arch[lag];
                se_arch_on_arch[lag].push_back(e_c * e_c);
                se_b1_on_arch[lag].push_back(e_m * e_m);
            }
        }

        // direction 2: Copula B1 data
        {
            auto y = simulate_copula_model(b1_true, *b1_margin, opt.T, rs + 13);
            auto margin = std::make_shared<KdeMargin>(fit_margin(y));
            MleOptions m2 = mle;
            m2.seed = rs;
            FitReport b1 = fit_mle(b1_layout, CopulaData::univariate(pit(*margin, y)), m2);
            auto rv_correct =
                detail::rho_v_of_copula_model(b1.spec(), *margin, opt.rho_sim_n, rs + 14);

            Arch1Fit af = fit_arch1(y);
            ArchParams fitted{af.alpha0, {af.alpha1}};
            auto rv_mis = detail::rho_v_of_arch(fitted, opt.rho_sim_n, rs + 15);
            for (int lag = 0; lag < 5; ++lag) {
                double e_c = rv_correct[lag] - rho_true_b1[lag];
                double e_m = rv_mis[lag] - rho_true_b1[lag];
                se_b1_on_b1[lag].push_back(e_c * e_c);
                se_arch_on_b1[lag].push_back(e_m * e_m);
            }
        }
    }

    auto rmse = [](const std::vector<double>& se) {
        double s = std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());
        return std::sqrt(s);
    };

    std::vector<std::vector<double>> table;
    double ratio1_lag1 = 0.0, ratio2_lag1 = 0.0;
    for (int lag = 0; lag < 5; ++lag) {
        double r1 = rmse(se_b1_on_arch[lag]) / rmse(se_arch_on_arch[lag]);
        double r2 = rmse(se_arch_on_b1[lag]) / rmse(se_b1_on_b1[lag]);
        table.push_back({static_cast<double>(lag + 1), r1, r2});
        if (lag == 0) {
            ratio1_lag1 = r1;
            ratio2_lag1 = r2;
        }
    }
    detail::maybe_write_csv(out_dir, "rrmse.csv",
                            {"lag", "b1_fit_on_arch_data", "arch_fit_on_b1_data"}, table);

    StudyCheck c;
    c.name = "rho_v_1.rrmse_asymmetry(b1_on_arch < arch_on_b1)";
    c.value = ratio1_lag1;
    c.lo = -std::numeric_limits<double>::infinity();
    c.hi = ratio2_lag1;
    c.pass = ratio1_lag1 < ratio2_lag1;
    rep.checks.push_back(c);

    Json j;
    j["schema"] = kSchemaVersion;
    j["study"] = "simstudy";
    j["rrmse_ratio_b1_fit_on_arch_data_lag1"] = ratio1_lag1;
    j["rrmse_ratio_arch_fit_on_b1_data_lag1"] = ratio2_lag1;
    j["pass"] = rep.pass();
    detail::maybe_write_json(out_dir, "summary.json", j);
    return rep;
}

}  // namespace hetcop
