#pragma once

// Artifact writers: sweep CSV, verdict JSON, geometry reports, the run
// manifest and a minimal log-log SVG plot. All numbers print through
// format_double so identical runs produce identical bytes.

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "perfhom/rates.hpp"

namespace perfhom {

using nlohmann::json;

inline const char* theorem_name(Theorem t) { return t == Theorem::T1 ? "T1" : "T2"; }
inline const char* norm_name(NormKind n) { return n == NormKind::L2 ? "L2" : "W12"; }

inline std::string sweep_csv(const RateSweepResult& r) {
    std::string s = "eps,eta,mu,kappa,theta1,theta2,l2_norm,w12_norm,f_norm,triangles,newton_iters,wall_ms\n";
    for (const auto& rec : r.records) {
        s += format_double(rec.eps) + "," + format_double(rec.eta) + "," + format_double(rec.mu) + "," +
             format_double(rec.kappa_value) + "," + format_double(rec.theta1) + "," + format_double(rec.theta2) + "," +
             format_double(rec.l2) + "," + format_double(rec.w12) + "," + format_double(rec.f_norm) + "," +
             std::to_string(rec.triangles) + "," + std::to_string(rec.newton_iters) + "," +
             format_double(rec.wall_ms) + "\n";
    }
    return s;
}

inline json verdict_json(const NormVerdict& v, Theorem th) {
    json j;
    j["theorem"] = theorem_name(th);
    j["norm"] = norm_name(v.norm);
    j["fitted_slope"] = v.fitted_slope;
    j["residual"] = v.residual;
    j["slope_vs_eps"] = v.slope_vs_eps;
    j["predicted_exponent"] = v.predicted_exponent;
    j["pass"] = v.pass;
    if (v.informational) j["informational"] = true;
    if (v.degenerate) j["degenerate"] = true;
    if (v.insufficient_points) j["insufficient_points"] = true;
    return j;
}

inline json sweep_verdicts_json(const RateSweepResult& r) {
    json j;
    j["scenario"] = r.scenario_name;
    j["verdicts"] = json::array({verdict_json(r.v_l2, r.theorem), verdict_json(r.v_w12, r.theorem)});
    j["pass"] = r.all_pass();
    return j;
}

// solver-side metadata that is not pinned down by the CSV rows
inline json sweep_probe_json(const RateSweepResult& r) {
    json sc = json::array();
    for (const auto& rec : r.records)
        if (rec.self_convergence >= 0) sc.push_back({{"eps", rec.eps}, {"relative_change", rec.self_convergence}});
    json j;
    j["self_convergence"] = sc;
    return j;
}

// recompute the verdict block from saved CSV rows (the "report" command);
// bit-identical to the original by construction
inline RateSweepResult result_from_csv(const std::string& csv, const Scenario& sc) {
    RateSweepResult r;
    r.scenario_name = sc.name;
    r.theorem = sc.theorem;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty sweep CSV");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        SweepRecord rec;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        if (!(ls >> rec.eps >> rec.eta >> rec.mu >> rec.kappa_value >> rec.theta1 >> rec.theta2 >> rec.l2 >>
              rec.w12 >> rec.f_norm >> rec.triangles >> rec.newton_iters >> rec.wall_ms))
            throw ConfigError("malformed sweep CSV row: " + line);
        r.records.push_back(rec);
    }
    r.v_l2 = ratedetail::make_verdict(sc, r.records, NormKind::L2, sc.slope_tol_l2);
    r.v_w12 = ratedetail::make_verdict(sc, r.records, NormKind::W12, sc.slope_tol_w12);
    return r;
}

inline json geometry_report_json(const PerforationLayout& layout, const GeometryCheckReport& rep,
                                 const CoveringResult& cov) {
    json j;
    j["epsilon"] = layout.epsilon;
    j["eta"] = layout.eta;
    j["cavities"] = layout.cavities.size();
    j["radii"] = {layout.radii.R1, layout.radii.R2, layout.radii.R3, layout.radii.R4};
    j["a1_inclusions"] = rep.a1_inclusions;
    j["a1_separation"] = rep.a1_separation;
    j["a1_separation_ratio"] = rep.separation_ratio;
    j["a1_boundary_clearance"] = rep.a1_boundary_clearance;
    j["a1_boundary_clearance_ratio"] = rep.boundary_clearance_ratio;
    j["a1_connected"] = rep.a1_connected;
    j["a1_pass"] = rep.a1_pass();
    j["a3_covering"] = {{"pass", cov.pass},
                        {"certified", cov.certified},
                        {"worst_point", {cov.worst_point.x, cov.worst_point.y}},
                        {"worst_dist_ratio", cov.worst_dist / (layout.epsilon * layout.radii.R4)},
                        {"levels", cov.levels}};
    if (!rep.alpha_checks.empty()) {
        json a = json::array();
        for (const auto& ac : rep.alpha_checks)
            a.push_back({{"cavity", ac.cavity},
                         {"l2sq_ratio", ac.l2sq_ratio},
                         {"l1_ratio", ac.l1_ratio},
                         {"nonnegative", ac.nonnegative},
                         {"pass", ac.pass()}});
        j["alpha_bounds"] = a;
    }
    // the polygonal outer boundary stands in for the C2 boundary; recorded so
    // reports stay self-describing
    j["outer_boundary"] = layout.outer.kind == OuterDomain::Kind::Box ? "box-polygonal" : "disk-polygonal";
    return j;
}

inline json sharpness_json(const SharpnessResult& r, bool robin) {
    json j;
    j["kind"] = robin ? "robin" : "dirichlet";
    j["cell_area"] = r.cell_area;
    if (robin) {
        j["c4"] = r.c4;
    } else {
        j["cell_l2"] = r.cell_l2;
        j["cell_h1"] = r.cell_h1;
        j["target_l2"] = r.cell_l2 / std::sqrt(r.cell_area);
        j["target_w12"] = r.cell_h1 / std::sqrt(r.cell_area);
    }
    json rows = json::array();
    for (const auto& row : r.rows) {
        json x;
        x["eps"] = row.eps;
        if (robin) x["mu"] = row.mu;
        x["ratio_l2"] = row.ratio_l2;
        x["ratio_w12"] = row.ratio_w12;
        x["scaled_l2"] = row.scaled_l2;
        if (!robin) {
            x["scaled_w12"] = row.scaled_w12;
            x["target_l2"] = row.target_l2;
            x["target_w12"] = row.target_w12;
            x["dev_l2"] = std::abs(row.scaled_l2 / row.target_l2 - 1.0);
            x["dev_w12"] = std::abs(row.scaled_w12 / row.target_w12 - 1.0);
        } else {
            x["target_l2"] = row.target_l2;
            x["dev_l2"] = std::abs(row.scaled_l2 - 1.0);
            x["grad_coeff"] = row.grad_coeff;
        }
        rows.push_back(x);
    }
    j["rows"] = rows;
    return j;
}

inline std::string sharpness_csv(const SharpnessResult& r, bool robin) {
    std::string s = robin ? "eps,mu,ratio_l2,ratio_w12,scaled_l2,target_l2,grad_coeff\n"
                          : "eps,ratio_l2,ratio_w12,scaled_l2,scaled_w12,target_l2,target_w12\n";
    for (const auto& row : r.rows) {
        if (robin)
            s += format_double(row.eps) + "," + format_double(row.mu) + "," + format_double(row.ratio_l2) + "," +
                 format_double(row.ratio_w12) + "," + format_double(row.scaled_l2) + "," +
                 format_double(row.target_l2) + "," + format_double(row.grad_coeff) + "\n";
        else
            s += format_double(row.eps) + "," + format_double(row.ratio_l2) + "," + format_double(row.ratio_w12) +
                 "," + format_double(row.scaled_l2) + "," + format_double(row.scaled_w12) + "," +
                 format_double(row.target_l2) + "," + format_double(row.target_w12) + "\n";
    }
    return s;
}

// minimal log-log plot: data points, fitted line, predicted-slope reference
inline std::string loglog_svg(const std::vector<std::pair<double, double>>& pts, const FitResult& fit,
                              double reference_slope, const std::string& title) {
    const int W = 640, H = 480, M = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto [x, y] : pts) {
        xmin = std::min(xmin, std::log10(x));
        xmax = std::max(xmax, std::log10(x));
        ymin = std::min(ymin, std::log10(y));
        ymax = std::max(ymax, std::log10(y));
    }
    if (!(xmax > xmin)) xmax = xmin + 1;
    if (!(ymax > ymin)) ymax = ymin + 1;
    double padx = 0.08 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
    xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;
    auto px = [&](double lx) { return M + (lx - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto py = [&](double ly) { return H - M - (ly - ymin) / (ymax - ymin) * (H - 2 * M); };
    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";
    s << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title << "</text>\n";
    s << "<line x1='" << M << "' y1='" << H - M << "' x2='" << W - M << "' y2='" << H - M << "' stroke='black'/>\n";
    s << "<line x1='" << M << "' y1='" << M << "' x2='" << M << "' y2='" << H - M << "' stroke='black'/>\n";
    if (fit.ok) {
        auto ly = [&](double lx) { return (fit.intercept + fit.slope * lx * std::log(10.0)) / std::log(10.0); };
        s << "<line x1='" << px(xmin) << "' y1='" << py(ly(xmin)) << "' x2='" << px(xmax) << "' y2='" << py(ly(xmax))
          << "' stroke='#1f77b4' stroke-width='1.5'/>\n";
        // reference line with the predicted slope through the last point
        double lx0 = std::log10(pts.back().first), ly0 = std::log10(pts.back().second);
        auto ry = [&](double lx) { return ly0 + reference_slope * (lx - lx0); };
        s << "<line x1='" << px(xmin) << "' y1='" << py(ry(xmin)) << "' x2='" << px(xmax) << "' y2='" << py(ry(xmax))
          << "' stroke='#888888' stroke-dasharray='6,4'/>\n";
    }
    for (auto [x, y] : pts)
        s << "<circle cx='" << px(std::log10(x)) << "' cy='" << py(std::log10(y)) << "' r='4' fill='#d62728'/>\n";
    s << "<text x='" << W - M << "' y='" << H - M + 34 << "' text-anchor='end' font-size='12'>log10 eps</text>\n";
    s << "<text x='" << M << "' y='" << M - 8 << "' font-size='12'>log10 norm/f</text>\n";
    if (fit.ok)
        s << "<text x='" << W - M << "' y='" << M + 10 << "' text-anchor='end' font-size='12'>fit slope "
          << format_double(fit.slope) << ", reference " << format_double(reference_slope) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + path.string());
    os << bytes;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace perfhom
