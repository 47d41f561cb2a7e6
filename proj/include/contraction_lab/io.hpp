#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contraction_lab/experiment.hpp"
#include "contraction_lab/inference.hpp"
#include "contraction_lab/metrics.hpp"

namespace clab {

// shortest round-trip decimal; bit-identical across reruns
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- JSON ---------------------------------------------------------------------

inline nlohmann::ordered_json field_to_json(const SpectralField& f) {
    nlohmann::ordered_json j;
    j["d"] = f.dim();
    j["J"] = f.size();
    j["coeffs"] = f.coeffs;
    return j;
}

inline SpectralField field_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    const int J = j.at("J").get<int>();
    std::vector<double> coeffs = j.at("coeffs").get<std::vector<double>>();
    require(static_cast<int>(coeffs.size()) == J, "field_from_json: J/coeffs mismatch");
    const int modes =
        (d == 1) ? J : static_cast<int>(std::llround(std::sqrt(static_cast<double>(J))));
    return SpectralField(make_basis(d, modes), std::move(coeffs));
}

inline nlohmann::ordered_json stability_to_json(const StabilityReport& r) {
    nlohmann::ordered_json j;
    j["eta_hat"] = r.eta_hat;
    j["log_c"] = r.log_c;
    j["r_squared"] = r.r_squared;
    auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& [l2, dg] : r.pairs) pairs.push_back({{"l2", l2}, {"d_g", dg}});
    return j;
}

inline nlohmann::ordered_json vbstate_to_json(const VariationalState& st) {
    nlohmann::ordered_json j;
    j["d"] = st.basis->dim;
    j["J"] = st.basis->size();
    j["J_q"] = st.J_q;
    j["mean"] = st.mean;
    j["log_sd"] = st.log_sd;
    j["prior_tau"] = st.prior_tau;
    j["elbo_trace"] = st.elbo_trace;
    j["elbo_trace_raw"] = st.elbo_trace_raw;
    return j;
}

inline VariationalState vbstate_from_json(const nlohmann::json& j) {
    VariationalState st;
    const int d = j.at("d").get<int>();
    const int J = j.at("J").get<int>();
    const int modes =
        (d == 1) ? J : static_cast<int>(std::llround(std::sqrt(static_cast<double>(J))));
    st.basis = make_basis(d, modes);
    st.J_q = j.at("J_q").get<int>();
    st.mean = j.at("mean").get<std::vector<double>>();
    st.log_sd = j.at("log_sd").get<std::vector<double>>();
    st.prior_tau = j.at("prior_tau").get<std::vector<double>>();
    if (j.contains("elbo_trace")) st.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
    if (j.contains("elbo_trace_raw"))
        st.elbo_trace_raw = j.at("elbo_trace_raw").get<std::vector<double>>();
    return st;
}

// ---- CSV ----------------------------------------------------------------------

inline std::string dataset_to_csv(const Dataset& ds) {
    std::string out = (ds.dim == 1) ? "x1,y\n" : "x1,x2,y\n";
    for (std::size_t i = 0; i < ds.points.size(); ++i) {
        out += fmt_double(ds.points[i][0]);
        if (ds.dim == 2) out += "," + fmt_double(ds.points[i][1]);
        out += "," + fmt_double(ds.values[i]) + "\n";
    }
    return out;
}

inline Dataset dataset_from_csv(const std::string& text, double sigma) {
    Dataset ds;
    ds.sigma = sigma;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    ds.dim = (line.find("x2") != std::string::npos) ? 2 : 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        Point x{0.0, 0.0};
        std::getline(ls, tok, ',');
        x[0] = std::stod(tok);
        if (ds.dim == 2) {
            std::getline(ls, tok, ',');
            x[1] = std::stod(tok);
        }
        std::getline(ls, tok, ',');
        ds.points.push_back(x);
        ds.values.push_back(std::stod(tok));
    }
    return ds;
}

inline std::string grid_to_csv(const GridFn& g) {
    std::string out = (g.dim == 1) ? "x,u\n" : "x,y,u\n";
    const int n = g.nodes_per_axis();
    const double h = g.h();
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i)
            out += fmt_double(i * h) + "," + fmt_double(g.at(i)) + "\n";
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                out += fmt_double(ix * h) + "," + fmt_double(iy * h) + "," +
                       fmt_double(g.at(ix, iy)) + "\n";
    }
    return out;
}

inline std::string chain_to_csv(const std::vector<SpectralField>& samples) {
    require(!samples.empty(), "chain_to_csv: empty chain");
    const int J = samples.front().size();
    std::string out = "iteration";
    for (int j = 1; j <= J; ++j) out += ",c_" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out += std::to_string(i);
        for (int j = 0; j < J; ++j)
            out += "," + fmt_double(samples[i].coeffs[static_cast<std::size_t>(j)]);
        out += "\n";
    }
    return out;
}

inline std::vector<SpectralField> chain_from_csv(const std::string& text, int dim) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    const int J = static_cast<int>(std::count(line.begin(), line.end(), ','));
    const int modes =
        (dim == 1) ? J : static_cast<int>(std::llround(std::sqrt(static_cast<double>(J))));
    auto basis = make_basis(dim, modes);
    std::vector<SpectralField> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');  // iteration index
        std::vector<double> c;
        c.reserve(static_cast<std::size_t>(J));
        while (std::getline(ls, tok, ',')) c.push_back(std::stod(tok));
        out.emplace_back(basis, std::move(c));
    }
    return out;
}

inline std::string rates_to_csv(const std::vector<CellResult>& cells, const std::string& method) {
    std::string out = "N,replicate,mass_outside_dG,mass_outside_L2,median_L2_err\n";
    for (const auto& c : cells) {
        if (c.method != method) continue;
        out += std::to_string(c.N) + "," + std::to_string(c.replicate) + "," +
               (c.failed ? "nan" : fmt_double(c.mass_outside_dg)) + "," +
               (c.failed ? "nan" : fmt_double(c.mass_outside_l2)) + "," +
               (c.failed ? "nan" : fmt_double(c.median_l2_err)) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json experiment_summary_json(const ExperimentResult& res) {
    nlohmann::ordered_json j;
    j["completeness"] = res.completeness;
    auto& arr = j["methods"] = nlohmann::ordered_json::array();
    for (const auto& s : res.summaries) {
        nlohmann::ordered_json m;
        m["method"] = s.method;
        m["slope"] = s.slope;
        m["slope_se"] = s.slope_se;
        m["slope_ci"] = {s.slope_ci_lo, s.slope_ci_hi};
        m["median_per_n"] = s.median_per_n;
        arr.push_back(std::move(m));
    }
    j["note"] = "whether the grid optimum touches the analytic feasibility frontier is "
                "recorded as a conjecture, not asserted";
    return j;
}

// ---- SVG ----------------------------------------------------------------------

// Minimal static log-log scatter of per-N medians with the fitted line.
inline std::string rates_svg(const ExperimentResult& res, const std::vector<int>& n_grid) {
    const int W = 560, H = 400, ML = 70, MB = 50, MT = 20, MR = 20;
    std::string s;
    s += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) + "' height='" +
         std::to_string(H) + "'>\n";
    s += "<rect width='100%' height='100%' fill='white'/>\n";

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& sum : res.summaries)
        for (std::size_t i = 0; i < sum.median_per_n.size(); ++i) {
            const double x = std::log(static_cast<double>(n_grid[i]));
            const double y = std::log(std::max(sum.median_per_n[i], 1e-300));
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) return s + "</svg>\n";
    if (!(ymax > ymin)) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const auto px = [&](double x) {
        return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    };
    const auto py = [&](double y) {
        return H - MB - (y - ymin) / (ymax - ymin) * (H - MB - MT);
    };
    s += "<line x1='" + std::to_string(ML) + "' y1='" + std::to_string(H - MB) + "' x2='" +
         std::to_string(W - MR) + "' y2='" + std::to_string(H - MB) + "' stroke='black'/>\n";
    s += "<line x1='" + std::to_string(ML) + "' y1='" + std::to_string(MT) + "' x2='" +
         std::to_string(ML) + "' y2='" + std::to_string(H - MB) + "' stroke='black'/>\n";
    s += "<text x='" + std::to_string(W / 2) + "' y='" + std::to_string(H - 12) +
         "' font-size='13'>log N</text>\n";
    s += "<text x='14' y='" + std::to_string(H / 2) +
         "' font-size='13' transform='rotate(-90 14 " + std::to_string(H / 2) +
         ")'>log median L2 error</text>\n";

    const char* colors[2] = {"#1f77b4", "#d62728"};
    int ci = 0;
    for (const auto& sum : res.summaries) {
        const char* col = colors[ci++ % 2];
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const std::size_t n = sum.median_per_n.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = std::log(static_cast<double>(n_grid[i]));
            const double y = std::log(std::max(sum.median_per_n[i], 1e-300));
            s += "<circle cx='" + fmt_double(px(x)) + "' cy='" + fmt_double(py(y)) +
                 "' r='4' fill='" + col + "'/>\n";
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double icept = (sy - slope * sx) / n;
        s += "<line x1='" + fmt_double(px(xmin)) + "' y1='" + fmt_double(py(icept + slope * xmin)) +
             "' x2='" + fmt_double(px(xmax)) + "' y2='" + fmt_double(py(icept + slope * xmax)) +
             "' stroke='" + col + "' stroke-dasharray='5,3'/>\n";
        s += "<text x='" + std::to_string(W - MR - 170) + "' y='" + std::to_string(MT + 18 * ci) +
             "' font-size='12' fill='" + std::string(col) + "'>" + sum.method +
             " slope " + fmt_double(slope) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace clab
