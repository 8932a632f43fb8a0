// SPDX-License-Identifier: MIT
#include "radner/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace radner::config {

namespace {

struct RawValue {
    std::string text;
    int line = 0;
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& key, int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ", key '" + key + "': " + what);
}

double parse_real(const std::string& key, const RawValue& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw.text, &used);
        if (used != raw.text.size()) fail(key, raw.line, "trailing characters in number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(key, raw.line, "expected a number, got '" + raw.text + "'");
    }
}

long long parse_int(const std::string& key, const RawValue& raw) {
    const double v = parse_real(key, raw);
    if (std::floor(v) != v) fail(key, raw.line, "expected an integer");
    return static_cast<long long>(v);
}

bool parse_bool(const std::string& key, const RawValue& raw) {
    if (raw.text == "true") return true;
    if (raw.text == "false") return false;
    fail(key, raw.line, "expected true or false");
}

Vec parse_array(const std::string& key, const RawValue& raw) {
    const std::string t = trim(raw.text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        fail(key, raw.line, "expected [a, b, ...]");
    Vec out;
    std::string inner = t.substr(1, t.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(key, raw.line, "empty array element");
        out.push_back(parse_real(key, RawValue{item, raw.line}));
    }
    return out;
}

std::string parse_string(const std::string& key, const RawValue& raw) {
    std::string t = trim(raw.text);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
    if (t.empty()) fail(key, raw.line, "expected a value");
    return t;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, RawValue> entries;
    {
        std::stringstream ss(text);
        std::string line;
        int line_no = 0;
        while (std::getline(ss, line)) {
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) +
                                               ": empty key");
            if (entries.count(key))
                throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  key + "'");
            entries[key] = RawValue{value, line_no};
        }
    }

    ExperimentConfig cfg;
    auto take = [&](const std::string& key) -> std::optional<RawValue> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        RawValue v = it->second;
        entries.erase(it);
        return v;
    };
    auto positive_int = [&](const std::string& key, const RawValue& raw, int min_value) {
        const long long v = parse_int(key, raw);
        if (v < min_value) fail(key, raw.line, "must be >= " + std::to_string(min_value));
        return static_cast<int>(v);
    };

    if (auto v = take("economy")) {
        const std::string name = parse_string("economy", *v);
        if (name == "gaussian") cfg.economy = EconomyKind::Gaussian;
        else if (name == "put_option") cfg.economy = EconomyKind::PutOption;
        else if (name == "tabulated") cfg.economy = EconomyKind::Tabulated;
        else fail("economy", v->line, "expected gaussian | put_option | tabulated");
    }
    if (auto v = take("deltas")) {
        cfg.deltas = parse_array("deltas", *v);
        if (cfg.deltas.empty()) fail("deltas", v->line, "needs at least one entry");
        for (double d : cfg.deltas)
            if (!(d > 0.0)) fail("deltas", v->line, "entries must be positive");
    }
    if (auto v = take("b0")) cfg.b0 = parse_array("b0", *v);
    {
        // agent rows b1, b2, ... (as many as provided, contiguous from 1)
        std::vector<Vec> agents;
        for (int i = 1;; ++i) {
            auto v = take("b" + std::to_string(i));
            if (!v) break;
            agents.push_back(parse_array("b" + std::to_string(i), *v));
        }
        if (!agents.empty()) cfg.b_agents = std::move(agents);
    }
    if (auto v = take("option_count")) cfg.option_count = positive_int("option_count", *v, 0);
    if (auto v = take("option_counts")) {
        cfg.option_counts.clear();
        for (double d : parse_array("option_counts", *v)) {
            if (std::floor(d) != d || d < 0) fail("option_counts", v->line, "integers >= 0");
            cfg.option_counts.push_back(static_cast<int>(d));
        }
    }
    if (auto v = take("sigma_w")) {
        cfg.sigma_w = parse_real("sigma_w", *v);
        if (!(cfg.sigma_w > 0.0)) fail("sigma_w", v->line, "must be positive");
    }
    if (auto v = take("delta1_sweep")) cfg.delta1_sweep = parse_array("delta1_sweep", *v);
    if (auto v = take("payoff_smoothing")) {
        cfg.payoff_smoothing = parse_real("payoff_smoothing", *v);
        if (cfg.payoff_smoothing < 0.0) fail("payoff_smoothing", v->line, "must be >= 0");
    }

    if (auto v = take("tab_lo")) cfg.tab_lo = parse_array("tab_lo", *v);
    if (auto v = take("tab_hi")) cfg.tab_hi = parse_array("tab_hi", *v);
    if (auto v = take("tab_nodes")) cfg.tab_nodes = positive_int("tab_nodes", *v, 2);
    if (auto v = take("tab_dividend")) cfg.tab_dividend = parse_array("tab_dividend", *v);
    {
        std::vector<Vec> endowments;
        for (int i = 1;; ++i) {
            auto v = take("tab_endow" + std::to_string(i));
            if (!v) break;
            endowments.push_back(parse_array("tab_endow" + std::to_string(i), *v));
        }
        if (!endowments.empty()) cfg.tab_endowments = std::move(endowments);
    }

    if (auto v = take("box_lo")) cfg.box_lo = parse_array("box_lo", *v);
    if (auto v = take("box_hi")) cfg.box_hi = parse_array("box_hi", *v);
    if (auto v = take("box_margin")) {
        cfg.box_margin = parse_real("box_margin", *v);
        if (!(cfg.box_margin > 0.0)) fail("box_margin", v->line, "must be positive");
    }
    if (auto v = take("n_x")) cfg.n_x = positive_int("n_x", *v, 3);
    if (auto v = take("n_t")) cfg.n_t = positive_int("n_t", *v, 1);
    if (auto v = take("reg_n")) {
        cfg.reg_n = parse_real("reg_n", *v);
        if (!(cfg.reg_n > 0.0)) fail("reg_n", v->line, "must be positive");
    }
    if (auto v = take("reg_ladder")) {
        cfg.reg_ladder = parse_array("reg_ladder", *v);
        for (double r : cfg.reg_ladder)
            if (!(r > 0.0)) fail("reg_ladder", v->line, "entries must be positive");
    }
    if (auto v = take("refine_resolutions")) {
        cfg.refine_resolutions.clear();
        for (double d : parse_array("refine_resolutions", *v)) {
            if (std::floor(d) != d || d < 3) fail("refine_resolutions", v->line, "integers >= 3");
            cfg.refine_resolutions.push_back(static_cast<int>(d));
        }
    }
    if (auto v = take("n_paths")) cfg.n_paths = positive_int("n_paths", *v, 1);
    if (auto v = take("n_steps")) cfg.n_steps = positive_int("n_steps", *v, 1);
    if (auto v = take("seed")) {
        const long long s = parse_int("seed", *v);
        if (s < 0) fail("seed", v->line, "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = take("strict")) cfg.strict = parse_bool("strict", *v);
    if (auto v = take("inject_corruption"))
        cfg.inject_corruption = parse_bool("inject_corruption", *v);
    if (auto v = take("eps_nodal")) {
        cfg.eps_nodal = parse_real("eps_nodal", *v);
        if (!(cfg.eps_nodal > 0.0)) fail("eps_nodal", v->line, "must be positive");
    }
    if (auto v = take("nodal_eps")) {
        cfg.nodal_eps = parse_real("nodal_eps", *v);
        if (!(cfg.nodal_eps > 0.0)) fail("nodal_eps", v->line, "must be positive");
    }
    if (auto v = take("quadrature_nodes"))
        cfg.quadrature_nodes = positive_int("quadrature_nodes", *v, 2);
    if (auto v = take("sweep_halfwidth_sigmas")) {
        cfg.sweep_halfwidth_sigmas = parse_real("sweep_halfwidth_sigmas", *v);
        if (!(cfg.sweep_halfwidth_sigmas > 0.0))
            fail("sweep_halfwidth_sigmas", v->line, "must be positive");
    }
    if (auto v = take("sweep_samples")) cfg.sweep_samples = positive_int("sweep_samples", *v, 2);
    if (auto v = take("out_dir")) cfg.out_dir = parse_string("out_dir", *v);
    if (auto v = take("write_report")) cfg.write_report = parse_bool("write_report", *v);

    if (!entries.empty()) {
        const auto& [key, raw] = *entries.begin();
        throw ConfigError("config line " + std::to_string(raw.line) + ": unknown key '" + key +
                          "'");
    }

    // cross-field validation
    if (cfg.economy == EconomyKind::Gaussian) {
        if (cfg.b_agents.size() != cfg.deltas.size())
            throw ConfigError("config: need one b<i> row per entry of 'deltas'");
        for (const Vec& b : cfg.b_agents)
            if (b.size() != cfg.b0.size())
                throw ConfigError("config: b<i> dimension differs from 'b0'");
    }
    if (cfg.economy == EconomyKind::PutOption && cfg.deltas.size() != 2)
        throw ConfigError("config: put_option economy requires exactly two 'deltas'");
    if (cfg.economy == EconomyKind::Tabulated) {
        if (cfg.tab_lo.empty() || cfg.tab_hi.size() != cfg.tab_lo.size() || cfg.tab_nodes < 2)
            throw ConfigError("config: tabulated economy needs tab_lo, tab_hi, tab_nodes");
        std::size_t expected = 1;
        for (std::size_t a = 0; a < cfg.tab_lo.size(); ++a) expected *= cfg.tab_nodes;
        if (cfg.tab_dividend.size() != expected)
            throw ConfigError("config: tab_dividend needs tab_nodes^d values");
        if (cfg.tab_endowments.size() != cfg.deltas.size())
            throw ConfigError("config: need one tab_endow<i> per entry of 'deltas'");
        for (const Vec& e : cfg.tab_endowments)
            if (e.size() != expected)
                throw ConfigError("config: tab_endow<i> needs tab_nodes^d values");
    }
    if (cfg.box_lo.has_value() != cfg.box_hi.has_value())
        throw ConfigError("config: box_lo and box_hi must be given together");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

economy::MarketModel build_economy(const ExperimentConfig& cfg) {
    switch (cfg.economy) {
        case EconomyKind::Gaussian:
            return economy::make_gaussian_economy(cfg.b0, cfg.b_agents, cfg.deltas);
        case EconomyKind::PutOption:
            return economy::make_put_option_economy(cfg.option_count, cfg.sigma_w, cfg.deltas,
                                                    cfg.payoff_smoothing);
        case EconomyKind::Tabulated: {
            const int d = static_cast<int>(cfg.tab_lo.size());
            economy::MarketModel m;
            m.dim_d = d;
            m.num_agents = static_cast<int>(cfg.deltas.size());
            m.deltas = cfg.deltas;
            m.x0.assign(d, 0.0);
            for (int a = 0; a < d; ++a) m.x0[a] = 0.5 * (cfg.tab_lo[a] + cfg.tab_hi[a]);
            m.drift = [](double, std::span<const double>, std::span<double> out) {
                for (double& v : out) v = 0.0;
            };
            const int dim = d;
            m.vol = [dim](double, std::span<const double>, std::span<double> out) {
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
                for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j) * dim + j] = 1.0;
            };
            economy::ConstantCoefficients cc;
            cc.drift.assign(d, 0.0);
            cc.sigma = RowMat(d, d);
            for (int j = 0; j < d; ++j) cc.sigma.at(j, j) = 1.0;
            m.constant_coeffs = std::move(cc);

            economy::TabulatedPayoff dividend{cfg.tab_lo, cfg.tab_hi, cfg.tab_nodes,
                                              cfg.tab_dividend};
            m.dividend = dividend;
            for (const Vec& values : cfg.tab_endowments) {
                economy::TabulatedPayoff payoff{cfg.tab_lo, cfg.tab_hi, cfg.tab_nodes, values};
                m.endowments.push_back(payoff);
            }
            economy::validate_model(m);
            return m;
        }
    }
    throw ConfigError("config: unreachable economy kind");
}

}  // namespace radner::config
