#pragma once

#include <cctype>
#include <string>

#include <json.hpp>

#include "contraction_lab/experiment.hpp"
#include "contraction_lab/io.hpp"

namespace clab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace toml_detail {

inline std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline nlohmann::json parse_scalar(const std::string& tok) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
        std::size_t used = 0;
        if (tok.find_first_of(".eE") == std::string::npos) {
            const long long v = std::stoll(tok, &used);
            if (used == tok.size()) return v;
        } else {
            const double v = std::stod(tok, &used);
            if (used == tok.size()) return v;
        }
    } catch (...) {
    }
    throw ConfigError("config: cannot parse value '" + tok + "'");
}

inline nlohmann::json parse_value(const std::string& tok) {
    if (!tok.empty() && tok.front() == '[') {
        if (tok.back() != ']') throw ConfigError("config: unterminated array: " + tok);
        nlohmann::json arr = nlohmann::json::array();
        std::string inner = tok.substr(1, tok.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char ch : inner) {
            if (ch == '"') in_str = !in_str;
            if (ch == ',' && !in_str) {
                if (!strip(cur).empty()) arr.push_back(parse_scalar(strip(cur)));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!strip(cur).empty()) arr.push_back(parse_scalar(strip(cur)));
        return arr;
    }
    return parse_scalar(tok);
}

}  // namespace toml_detail

// TOML subset: [section] headers, key = value lines with scalars (integer,
// float, string, bool) and flat arrays, # comments. Covers the experiment
// configs documented in the README; anything fancier should use JSON.
inline nlohmann::json parse_toml(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* section = &root;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = toml_detail::strip(toml_detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: bad section header at line " + std::to_string(lineno));
            const std::string name = toml_detail::strip(line.substr(1, line.size() - 2));
            section = &root[name];
            if (section->is_null()) *section = nlohmann::json::object();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = toml_detail::strip(line.substr(0, eq));
        const std::string val = toml_detail::strip(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
        (*section)[key] = toml_detail::parse_value(val);
    }
    return root;
}

inline nlohmann::json load_config_file(const std::string& path) {
    const std::string text = read_text_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return nlohmann::json::parse(text);
    return parse_toml(text);
}

// ---- typed accessors (missing keys name themselves) -----------------------------

template <class T>
inline T cfg_get(const nlohmann::json& j, const std::string& section, const std::string& key) {
    if (!j.contains(section) || !j.at(section).contains(key))
        throw ConfigError("config: missing required key [" + section + "] " + key);
    try {
        return j.at(section).at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config: bad type for key [" + section + "] " + key);
    }
}

template <class T>
inline T cfg_get_or(const nlohmann::json& j, const std::string& section, const std::string& key,
                    T fallback) {
    if (!j.contains(section) || !j.at(section).contains(key)) return fallback;
    try {
        return j.at(section).at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config: bad type for key [" + section + "] " + key);
    }
}

inline ForwardKind forward_kind_from_string(const std::string& s) {
    if (s == "linear") return ForwardKind::Linear;
    if (s == "diffusion") return ForwardKind::DiffusionCoefficient;
    if (s == "potential") return ForwardKind::EllipticPotential;
    if (s == "subdiffusion") return ForwardKind::SubdiffusionPotential;
    throw ConfigError("config: unknown problem kind '" + s +
                      "' (expected linear|diffusion|potential|subdiffusion)");
}

inline SourceSpec source_from_config(const nlohmann::json& j, const std::string& section,
                                     const std::string& prefix, SourceSpec fallback) {
    const std::string kind = cfg_get_or<std::string>(j, section, prefix + "_kind", "");
    if (kind.empty()) return fallback;
    if (kind == "constant")
        return SourceSpec::constant(cfg_get<double>(j, section, prefix + "_value"));
    if (kind == "sine") {
        SourceSpec s = SourceSpec::sine(cfg_get_or<double>(j, section, prefix + "_amplitude", 1.0),
                                        cfg_get_or<int>(j, section, prefix + "_k1", 1),
                                        cfg_get_or<int>(j, section, prefix + "_k2", 1));
        return s;
    }
    throw ConfigError("config: unknown source kind '" + kind + "' (expected constant|sine)");
}

inline ForwardProblem problem_from_config(const nlohmann::json& j) {
    ForwardProblem p;
    p.kind = forward_kind_from_string(cfg_get<std::string>(j, "problem", "kind"));
    p.dim = cfg_get_or<int>(j, "problem", "d", p.kind == ForwardKind::DiffusionCoefficient ? 2 : 1);
    p.grid_n = cfg_get_or<int>(j, "problem", "grid_n", 64);
    p.source = source_from_config(j, "problem", "source", SourceSpec::constant(1.0));
    if (p.kind == ForwardKind::SubdiffusionPotential) {
        p.frac_order = cfg_get_or<double>(j, "problem", "frac_order", 0.5);
        p.T = cfg_get_or<double>(j, "problem", "T", 1.0);
        p.boundary_value = cfg_get_or<double>(j, "problem", "m_g", 0.0);
        p.time_steps = cfg_get_or<int>(j, "problem", "time_steps", 256);
        p.u0 = source_from_config(j, "problem", "u0", SourceSpec::constant(p.boundary_value));
    }
    if (j.contains("problem") && j.at("problem").contains("u_bound"))
        p.u_bound = cfg_get<double>(j, "problem", "u_bound");
    p.validate();
    return p;
}

inline LinkSpec link_from_config(const nlohmann::json& j) {
    LinkSpec link;
    link.lambda_lo = cfg_get_or<double>(j, "problem", "lambda_lo", 1.0);
    link.lambda_hi = cfg_get_or<double>(j, "problem", "lambda_hi", 3.0);
    link.validate();
    return link;
}

// [prior]: alpha, h, N, J, optional M (conditioning radius)
inline PriorSpec prior_from_config(const nlohmann::json& j, int dim) {
    PriorSpec prior;
    prior.alpha = cfg_get_or<double>(j, "prior", "alpha", 3.0);
    prior.h = cfg_get_or<double>(j, "prior", "h", 0.0);
    prior.N = cfg_get_or<int>(j, "prior", "N", 1);
    const int J = cfg_get_or<int>(j, "prior", "J", 32);
    const int modes =
        (dim == 1) ? J : static_cast<int>(std::llround(std::sqrt(static_cast<double>(J))));
    require((dim == 1 ? modes : modes * modes) == J,
            "config: [prior] J must be a perfect square for d = 2");
    prior.basis = make_basis(dim, modes);
    if (j.contains("prior") && j.at("prior").contains("M"))
        prior.cond_radius = cfg_get<double>(j, "prior", "M");
    prior.validate();
    return prior;
}

inline ChainConfig chain_from_config(const nlohmann::json& j) {
    ChainConfig c;
    c.beta_p = cfg_get_or<double>(j, "inference", "beta_p", 0.2);
    c.iterations = cfg_get_or<int>(j, "inference", "iterations", 10000);
    c.burn_in = cfg_get_or<int>(j, "inference", "burn_in", 1000);
    c.thin = cfg_get_or<int>(j, "inference", "thin", 1);
    c.seed = cfg_get_or<std::uint64_t>(j, "inference", "seed", 1);
    c.adapt_beta = cfg_get_or<bool>(j, "inference", "adapt_beta", true);
    c.validate();
    return c;
}

inline VbConfig vb_from_config(const nlohmann::json& j) {
    VbConfig v;
    v.J_q = cfg_get_or<int>(j, "inference", "J_q", 2);
    v.steps = cfg_get_or<int>(j, "inference", "steps", 1500);
    v.mc_samples = cfg_get_or<int>(j, "inference", "mc_samples", 8);
    v.lr = cfg_get_or<double>(j, "inference", "lr", 0.05);
    v.warmup = cfg_get_or<int>(j, "inference", "warmup", 100);
    v.seed = cfg_get_or<std::uint64_t>(j, "inference", "seed", 1);
    v.validate();
    return v;
}

inline ExperimentPlan plan_from_config(const nlohmann::json& j) {
    ExperimentPlan plan;
    plan.n_grid = cfg_get<std::vector<int>>(j, "plan", "n_grid");
    plan.replicates = cfg_get_or<int>(j, "plan", "replicates", 3);
    plan.sigma = cfg_get<double>(j, "plan", "sigma");
    plan.problem = problem_from_config(j);
    plan.link = link_from_config(j);
    plan.prior_alpha = cfg_get_or<double>(j, "prior", "alpha", 3.0);
    plan.prior_h = cfg_get_or<double>(j, "prior", "h", 0.05);
    plan.basis_modes = cfg_get_or<int>(j, "plan", "basis_modes", 32);
    if (j.contains("plan") && j.at("plan").contains("cond_radius_mult"))
        plan.cond_radius_mult = cfg_get<double>(j, "plan", "cond_radius_mult");
    plan.truth_beta = cfg_get_or<double>(j, "plan", "truth_beta", 1.0);
    plan.truth_seed = cfg_get_or<std::uint64_t>(j, "plan", "truth_seed", 101);
    plan.rate_b = cfg_get_or<double>(j, "plan", "b", -0.15);
    plan.m_radius = cfg_get_or<double>(j, "plan", "m", 2.0);
    plan.eta_hat = cfg_get_or<double>(j, "plan", "eta_hat", 1.0);
    const std::string method = cfg_get_or<std::string>(j, "plan", "method", "pcn");
    if (method == "pcn")
        plan.method = InferenceMethod::Pcn;
    else if (method == "vb")
        plan.method = InferenceMethod::Vb;
    else if (method == "both")
        plan.method = InferenceMethod::Both;
    else
        throw ConfigError("config: unknown method '" + method + "' (expected pcn|vb|both)");
    plan.chain = chain_from_config(j);
    plan.vb = vb_from_config(j);
    plan.vb_jq_exponent = cfg_get_or<double>(j, "plan", "vb_jq_exponent", 0.0);
    plan.posterior_draws = cfg_get_or<int>(j, "plan", "posterior_draws", 200);
    plan.pcn_warm_start = cfg_get_or<bool>(j, "plan", "pcn_warm_start", true);
    plan.seed = cfg_get_or<std::uint64_t>(j, "plan", "seed", 20240914);
    plan.validate();
    return plan;
}

}  // namespace clab
