#pragma once

// Command pipeline behind the CLI: one scenario file drives every command,
// each run writes its artifacts plus a manifest sufficient to reproduce it.

#include <chrono>

#include "perfhom/report.hpp"
#include "perfhom/scenario.hpp"

namespace perfhom {

constexpr const char* PERFHOM_VERSION = "0.1.0";

struct RunConfig {
    std::string command;  // check-geometry | mesh | solve | cell | sweep | sharpness | report
    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;  // 0: keep the scenario's seed
    int jobs = 1;
    double tol = -1.0;  // override for both slope tolerances when > 0
    bool plot = false;
};

// exit codes: 0 ok/pass, 1 failed verdicts, 2 config error, 3 non-convergence
inline int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    auto t_start = std::chrono::steady_clock::now();
    std::vector<std::string> artifacts;
    int exit_code = 0;
    try {
        std::string scenario_bytes = read_text_file(cfg.scenario_path);
        ScenarioFile file = parse_scenario(nlohmann::json::parse(scenario_bytes));
        Scenario& sc = file.scenario;
        if (cfg.seed != 0) sc.layout.seed = cfg.seed;
        if (cfg.tol > 0) {
            sc.slope_tol_l2 = cfg.tol;
            sc.slope_tol_w12 = cfg.tol;
        }
        fs::create_directories(cfg.out_dir);
        auto out_path = [&](const std::string& name) {
            artifacts.push_back(name);
            return fs::path(cfg.out_dir) / name;
        };

        if (cfg.command == "check-geometry") {
            json all = json::array();
            bool pass = true;
            for (double eps : sc.eps_list) {
                PerforationLayout layout = sc.layout_at(eps);
                GeometryCheckReport rep = check_assumption_a1(layout);
                CoveringResult cov = check_covering(layout);
                if (!layout.robin_definite_set().empty()) {
                    RobinModel rm = sc.robin.at(std::max(sc.mu_rule.mu_at(eps), 1.0));
                    rep.alpha_checks = check_alpha_bounds(
                        layout, [&rm](int k, Vec2 x) { return rm.alpha ? rm.alpha(k, x) : 1.0; }, rm.c2, rm.c3);
                }
                json jr = geometry_report_json(layout, rep, cov);
                bool ok = rep.a1_pass() && cov.pass;
                for (const auto& a : rep.alpha_checks) ok = ok && a.pass();
                jr["pass"] = ok;
                pass = pass && ok;
                all.push_back(jr);
            }
            json top;
            top["scenario"] = sc.name;
            top["reports"] = all;
            top["pass"] = pass;
            write_text_file(out_path("geometry_report.json"), top.dump(2) + "\n");
            exit_code = pass ? 0 : 1;
        } else if (cfg.command == "mesh") {
            for (double eps : sc.eps_list) {
                Mesh mesh = triangulate(sc.layout_at(eps), sc.mesh_opts);
                MeshQualityReport q = mesh_quality(mesh);
                std::ostringstream name;
                name << "mesh_eps_" << format_double(eps) << ".txt";
                std::ostringstream ms;
                write_mesh(mesh, ms);
                write_text_file(out_path(name.str()), ms.str());
                json jq = {{"eps", eps},
                           {"triangles", q.n_triangles},
                           {"vertices", q.n_vertices},
                           {"min_angle_deg", q.min_angle_deg},
                           {"max_aspect", q.max_aspect},
                           {"h_max", q.h_max},
                           {"h_boundary", q.h_boundary}};
                write_text_file(out_path("mesh_eps_" + format_double(eps) + ".json"), jq.dump(2) + "\n");
            }
        } else if (cfg.command == "solve") {
            json stats = json::array();
            for (double eps : sc.eps_list) {
                Mesh mesh = triangulate(sc.layout_at(eps), sc.mesh_opts);
                double mu = sc.mu_rule.mu_at(eps);
                ProblemData data;
                data.f = sc.f.evaluator();
                data.lambda = sc.lambda;
                SolveOptions sopt;
                sopt.tol = sc.solver_tol;
                Solution sol = solve(mesh, sc.coeffs, sc.robin.at(mu), data, sopt);
                Norms n = norms(sol);
                std::ostringstream ms;
                write_mesh(mesh, ms);
                write_text_file(out_path("solution_mesh_eps_" + format_double(eps) + ".txt"), ms.str());
                std::string vals = "perfhom-solution 1\nvalues " + std::to_string(sol.values.size()) + "\n";
                for (double v : sol.values) vals += format_double(v) + "\n";
                write_text_file(out_path("solution_values_eps_" + format_double(eps) + ".txt"), vals);
                stats.push_back({{"eps", eps},
                                 {"l2", n.l2},
                                 {"h1_semi", n.h1_semi},
                                 {"w12", n.w12},
                                 {"newton_iters", sol.iterations},
                                 {"residual", sol.residual},
                                 {"picard_fallback", sol.used_picard_fallback}});
            }
            json top = {{"scenario", sc.name}, {"solves", stats}};
            write_text_file(out_path("solve_report.json"), top.dump(2) + "\n");
        } else if (cfg.command == "cell") {
            double eps = sc.eps_list.front();
            double eta = sc.eta_rule.eta_at(eps);
            PeriodicCell cell(eta, sc.cell_opts);
            auto v0 = cell.solve_v0();
            auto v1 = cell.solve_v1();
            double epsmu = eps * std::max(sc.mu_rule.mu_at(eps), 1.0);
            json j;
            j["eta"] = eta;
            j["cell_area"] = cell.area();
            j["hole_perimeter"] = cell.hole_perimeter();
            j["c4_discrete"] = cell.c4_discrete();
            j["c4_analytic"] = cell.c4_analytic();
            Norms n0 = cell.cell_norms(v0.values);
            j["v0"] = {{"l2", n0.l2}, {"h1_semi", n0.h1_semi}, {"residual", v0.solve_residual}};
            Norms n1 = cell.cell_norms(v1.values);
            j["v1"] = {{"l2", n1.l2},
                       {"h1_semi", n1.h1_semi},
                       {"compat_residual", v1.compat_residual},
                       {"hole_mean", cell.hole_boundary_mean(v1.values)}};
            if (epsmu > 0 && epsmu < 1) {
                auto vm = cell.solve_vmu(epsmu);
                j["vmu"] = {{"epsmu", epsmu},
                            {"hole_mean", cell.hole_boundary_mean(vm.values)},
                            {"expansion_remainder_w12", verify_expansion(vm, v1, cell.c4_discrete(), epsmu)}};
            }
            std::ostringstream ms;
            write_mesh(cell.mesh(), ms);
            write_text_file(out_path("cell_mesh.txt"), ms.str());
            auto write_field = [&](const std::string& name, const std::vector<double>& vals) {
                std::string body = "perfhom-solution 1\nvalues " + std::to_string(vals.size()) + "\n";
                for (double v : vals) body += format_double(v) + "\n";
                write_text_file(out_path(name), body);
            };
            write_field("cell_v0_values.txt", v0.values);
            write_field("cell_v1_values.txt", v1.values);
            write_text_file(out_path("cell_report.json"), j.dump(2) + "\n");
        } else if (cfg.command == "sweep") {
            RateSweepResult res = run_sweep(sc, cfg.jobs);
            write_text_file(out_path("sweep.csv"), sweep_csv(res));
            write_text_file(out_path("sweep_verdicts.json"), sweep_verdicts_json(res).dump(2) + "\n");
            write_text_file(out_path("sweep_probe.json"), sweep_probe_json(res).dump(2) + "\n");
            if (cfg.plot) {
                for (NormKind nk : {NormKind::L2, NormKind::W12}) {
                    std::vector<std::pair<double, double>> pts;
                    for (const auto& r : res.records)
                        pts.push_back({r.eps, (nk == NormKind::L2 ? r.l2 : r.w12) / r.f_norm});
                    const NormVerdict& v = nk == NormKind::L2 ? res.v_l2 : res.v_w12;
                    FitResult fr;
                    fr.ok = !v.insufficient_points && !v.degenerate;
                    fr.slope = v.slope_vs_eps;
                    double ly = std::log(pts.back().second), lx = std::log(pts.back().first);
                    fr.intercept = ly - fr.slope * lx;
                    std::string name = std::string("sweep_") + norm_name(nk) + ".svg";
                    write_text_file(out_path(name),
                                    loglog_svg(pts, fr, v.predicted_exponent,
                                               std::string(theorem_name(res.theorem)) + " " + norm_name(nk)));
                }
            }
            exit_code = res.all_pass() ? 0 : 1;
        } else if (cfg.command == "sharpness") {
            if (!file.sharpness.enabled) throw ConfigError("scenario has no 'sharpness' block");
            SharpnessResult res = file.sharpness.robin ? sharpness_robin(sc, file.sharpness.bump)
                                                       : sharpness_dirichlet(sc, file.sharpness.bump);
            write_text_file(out_path("sharpness.csv"), sharpness_csv(res, file.sharpness.robin));
            write_text_file(out_path("sharpness.json"), sharpness_json(res, file.sharpness.robin).dump(2) + "\n");
        } else if (cfg.command == "report") {
            // recompute the verdict block from a saved sweep.csv
            std::string csv = read_text_file(fs::path(cfg.out_dir) / "sweep.csv");
            RateSweepResult res = result_from_csv(csv, sc);
            write_text_file(out_path("sweep_verdicts.json"), sweep_verdicts_json(res).dump(2) + "\n");
            exit_code = res.all_pass() ? 0 : 1;
        } else {
            throw ConfigError("unknown command '" + cfg.command + "'");
        }

        auto t_end = std::chrono::steady_clock::now();
        json manifest;
        manifest["command"] = cfg.command;
        manifest["scenario_path"] = cfg.scenario_path;
        manifest["scenario_fnv1a64"] = fnv1a64(scenario_bytes);
        manifest["seed"] = cfg.seed;
        manifest["jobs"] = cfg.jobs;
        manifest["tol_override"] = cfg.tol;
        manifest["version"] = PERFHOM_VERSION;
        manifest["wall_ms"] = std::chrono::duration<double, std::milli>(t_end - t_start).count();
        manifest["artifacts"] = artifacts;
        write_text_file(fs::path(cfg.out_dir) / ("manifest_" + cfg.command + ".json"), manifest.dump(2) + "\n");
        return exit_code;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "solver failed to converge: %s (iterations %d, residual %g)\n", e.what(), e.iterations,
                     e.last_residual);
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace perfhom
