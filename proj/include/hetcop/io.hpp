#pragma once

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "hetcop/bicop.hpp"
#include "hetcop/dvine.hpp"
#include "hetcop/inference.hpp"
#include "hetcop/margins.hpp"

namespace hetcop {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// CSV (RFC 4180: header row, one column per series, '.' decimal, CRLF or LF)
// ---------------------------------------------------------------------------

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

inline void write_series_csv(const std::string& path, const std::vector<double>& y) {
    std::vector<std::vector<double>> rows(y.size(), std::vector<double>(1));
    for (std::size_t i = 0; i < y.size(); ++i) rows[i][0] = y[i];
    write_csv(path, {"series_1"}, rows);
}

inline void write_matrix_csv(const std::string& path, const std::vector<std::vector<double>>& y) {
    std::vector<std::string> header;
    std::size_t m = y.empty() ? 0 : y.front().size();
    for (std::size_t i = 1; i <= m; ++i) header.push_back("series_" + std::to_string(i));
    write_csv(path, header, y);
}

/// Reads a numeric CSV with a header row. Quoted fields are accepted but
/// never produced.
inline std::vector<std::vector<double>> read_csv(const std::string& path,
                                                 std::vector<std::string>* header = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool first = true;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        bool quoted = false;
        for (char c : s) {
            if (c == '"') {
                quoted = !quoted;
            } else if (c == ',' && !quoted) {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (first) {
            first = false;
            if (header) *header = cells;
            continue;
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) row[i] = std::stod(cells[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<double> read_series_csv(const std::string& path) {
    auto rows = read_csv(path);
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].at(0);
    return y;
}

// ---------------------------------------------------------------------------
// Pair-copula and vine model JSON
// ---------------------------------------------------------------------------

inline Json bicop_to_json(const BicopDesc& d);

namespace detail {
/// Collapse the generic mixture/rot90 descriptors into the named flat
/// families used throughout the file formats.
inline bool flatten_named(const BicopDesc& d, Json& j) {
    if (d.family == "mixture" && d.components.size() == 2) {
        const auto& a = d.components[0];
        const auto& b = d.components[1];
        if (a.family == "t" && b.family == "t") {
            j["family"] = "mixture_t";
            j["params"] = {{"w", d.params.at("w")},
                           {"zeta_a", a.params.at("zeta")},
                           {"nu_a", a.params.at("nu")},
                           {"zeta_b", b.params.at("zeta")},
                           {"nu_b", b.params.at("nu")}};
            return true;
        }
        if (a.family == "convex_gumbel" && b.family == "convex_gumbel") {
            j["family"] = "mixture_cgumbel";
            j["params"] = {{"w", d.params.at("w")},
                           {"tau_a", a.params.at("tau")},
                           {"delta_a", a.params.at("delta")},
                           {"tau_b", b.params.at("tau")},
                           {"delta_b", b.params.at("delta")}};
            return true;
        }
    }
    return false;
}
}  // namespace detail

inline Json bicop_to_json(const BicopDesc& d) {
    Json j;
    if (detail::flatten_named(d, j)) return j;
    j["family"] = d.family;
    j["params"] = Json::object();
    for (const auto& [k, v] : d.params) j["params"][k] = v;
    if (!d.components.empty()) {
        j["components"] = Json::array();
        for (const auto& c : d.components) j["components"].push_back(bicop_to_json(c));
    }
    return j;
}

inline Json bicop_to_json(const PairCopula& c) { return bicop_to_json(c.describe()); }

inline PairCopula bicop_from_json(const Json& j) {
    std::string family = j.at("family").get<std::string>();
    auto p = [&](const char* k) { return j.at("params").at(k).get<double>(); };
    if (family == "mixture_t")
        return make_mixture_t(p("w"), p("zeta_a"), p("nu_a"), p("zeta_b"), p("nu_b"));
    if (family == "mixture_cgumbel")
        return make_mixture_cgumbel(p("w"), p("tau_a"), p("delta_a"), p("tau_b"), p("delta_b"));
    BicopDesc d;
    d.family = family;
    if (j.contains("params"))
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
            d.params[it.key()] = it.value().get<double>();
    if (j.contains("components")) {
        for (const auto& c : j["components"]) {
            PairCopula pc = bicop_from_json(c);
            d.components.push_back(pc.describe());
        }
    }
    return make_from_desc(d);
}

inline Json vine_to_json(const DVineSpec& spec) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "vine";
    j["m"] = spec.m;
    j["p"] = spec.p;
    j["pairs"] = Json::array();
    auto push_pair = [&](int k, int l2, int l1) {
        Json pc = bicop_to_json(spec.pair(k, l2, l1));
        pc["k"] = k;
        pc["l1"] = l1;
        pc["l2"] = l2;
        j["pairs"].push_back(pc);
    };
    if (spec.m == 1) {
        for (int k = 1; k <= spec.p; ++k) push_pair(k, 1, 1);
    } else {
        for (int l1 = 1; l1 <= spec.m; ++l1)
            for (int l2 = 1; l2 < l1; ++l2) push_pair(0, l2, l1);
        for (int k = 1; k <= spec.p; ++k)
            for (int l2 = 1; l2 <= spec.m; ++l2)
                for (int l1 = 1; l1 <= spec.m; ++l1) push_pair(k, l2, l1);
    }
    return j;
}

inline DVineSpec vine_from_json(const Json& j) {
    int m = j.at("m").get<int>();
    int p = j.at("p").get<int>();
    std::vector<PairCopula> pairs(DVineSpec::pair_count(m, p));
    DVineSpec tmp;  // index helper
    tmp.m = m;
    tmp.p = p;
    for (const auto& pc : j.at("pairs")) {
        int k = pc.at("k").get<int>();
        int l1 = pc.at("l1").get<int>();
        int l2 = pc.at("l2").get<int>();
        pairs.at(tmp.pair_index(k, l2, l1)) = bicop_from_json(pc);
    }
    for (const auto& pc : pairs)
        if (!pc.valid()) throw invalid_parameter("vine_from_json: missing pair-copula entries");
    return DVineSpec(m, p, std::move(pairs));
}

// ---------------------------------------------------------------------------
// Margin JSON
// ---------------------------------------------------------------------------

inline Json margin_to_json(const KdeMargin& m) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "kde_margin";
    j["grid"] = m.grid();
    j["pdf"] = m.pdf_values();
    j["cdf"] = m.cdf_values();
    j["mean"] = m.mean();
    j["tails"] = {{"lower", {{"a", m.lower_tail().a}, {"m", m.lower_tail().m}, {"s", m.lower_tail().s}}},
                  {"upper", {{"a", m.upper_tail().a}, {"m", m.upper_tail().m}, {"s", m.upper_tail().s}}}};
    return j;
}

inline KdeMargin margin_from_json(const Json& j) {
    if (j.at("type").get<std::string>() != "kde_margin")
        throw invalid_parameter("margin_from_json: not a kde_margin file");
    GaussTail lo{j["tails"]["lower"]["a"].get<double>(), j["tails"]["lower"]["m"].get<double>(),
                 j["tails"]["lower"]["s"].get<double>()};
    GaussTail up{j["tails"]["upper"]["a"].get<double>(), j["tails"]["upper"]["m"].get<double>(),
                 j["tails"]["upper"]["s"].get<double>()};
    return KdeMargin(j["grid"].get<std::vector<double>>(), j["pdf"].get<std::vector<double>>(),
                     j["cdf"].get<std::vector<double>>(), j["mean"].get<double>(), lo, up);
}

// ---------------------------------------------------------------------------
// Fit reports and chains
// ---------------------------------------------------------------------------

inline Json fit_report_to_json(const FitReport& rep) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "fit_report";
    j["method"] = "mle";
    j["family"] = rep.layout.family;
    j["m"] = rep.layout.m;
    j["p"] = rep.layout.p;
    j["loglik"] = rep.loglik;
    j["evals"] = rep.evals;
    j["converged"] = rep.converged;
    j["params"] = Json::array();
    for (std::size_t i = 0; i < rep.estimate.size(); ++i) {
        j["params"].push_back({{"name", rep.names[i]},
                               {"estimate", rep.estimate[i]},
                               {"se", rep.se[i]},
                               {"ci90", {rep.ci90[i].first, rep.ci90[i].second}}});
    }
    return j;
}

inline Json mcmc_result_to_json(const McmcResult& res, const VineLayout& layout) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["type"] = "fit_report";
    j["method"] = "mcmc";
    j["family"] = layout.family;
    j["m"] = layout.m;
    j["p"] = layout.p;
    j["dic2"] = res.dic2;
    j["accept_rate"] = res.accept_rate;
    j["params"] = Json::array();
    for (const auto& s : res.params)
        j["params"].push_back(
            {{"name", s.name}, {"mean", s.mean}, {"q05", s.q05}, {"q95", s.q95}});
    j["metrics"] = Json::array();
    for (const auto& s : res.metrics)
        j["metrics"].push_back(
            {{"name", s.name}, {"mean", s.mean}, {"q05", s.q05}, {"q95", s.q95}});
    return j;
}

/// Chain CSV: one row per retained draw, natural parameters plus loglik.
inline void write_chain_csv(const std::string& path, const McmcResult& res) {
    std::vector<std::string> header = res.names;
    header.push_back("loglik");
    std::vector<std::vector<double>> rows(res.chain.size());
    for (std::size_t r = 0; r < res.chain.size(); ++r) {
        rows[r] = res.chain[r];
        rows[r].push_back(res.chain_loglik[r]);
    }
    write_csv(path, header, rows);
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

inline Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_json: cannot open " + path);
    Json j;
    in >> j;
    return j;
}

}  // namespace hetcop
