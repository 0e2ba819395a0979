// Acceptance suite: one check per headline claim of the testbed, each
// printing a PASS/FAIL line with the measured quantities. Exits nonzero if
// any check fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <vector>

#include "oracles.hpp"
#include "perfhom/cli.hpp"

using namespace perfhom;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

Scenario theorem2_scenario() {
    Scenario sc;
    sc.name = "theorem2-dirichlet-lattice";
    sc.layout.generator = LayoutConfig::Generator::Periodic;
    sc.layout.outer = OuterDomain::box({0, 0}, {8, 8});
    sc.layout.shape.kind = ReferenceShape::Kind::Disk;
    sc.layout.shape.radius = 1.0;
    sc.layout.bc.kind = BcAssignment::Kind::AllDirichlet;
    sc.eps_list = {0.25, 0.125, 0.0625};
    sc.eta_rule = {ScaleRule::Kind::Fixed, 0.5};
    sc.f.kind = SourceSpec::Kind::Constant;
    sc.f.constant = 1.0;
    sc.lambda = 0.0;
    sc.theorem = Theorem::T2;
    sc.mesh_opts.h_target = 0.1;
    sc.mesh_opts.max_vertices = 1'500'000;
    return sc;
}

double sweep_l2_slope = 0.0;  // shared with the sharpness cross-check

// 1. T2 rate sweep: fitted L2 slope vs eps in [1.6, 2.4], W12 in [0.7, 1.3],
//    runtime within five minutes.
void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    Scenario sc = theorem2_scenario();
    RateSweepResult res = run_sweep(sc);
    double wall = seconds_since(t0);
    double sl2 = res.v_l2.slope_vs_eps, sw = res.v_w12.slope_vs_eps;
    sweep_l2_slope = sl2;
    bool monotone_ok = true;
    for (std::size_t i = 1; i < res.records.size(); ++i)
        if (res.records[i].theta2 < 0.1 && res.records[i - 1].theta2 < 0.1)
            monotone_ok = monotone_ok &&
                          res.records[i].l2 / res.records[i].f_norm <= res.records[i - 1].l2 / res.records[i - 1].f_norm;
    bool pass = sl2 >= 1.6 && sl2 <= 2.4 && sw >= 0.7 && sw <= 1.3 && wall <= 300.0 && res.v_l2.pass &&
                res.v_w12.pass && monotone_ok;
    report(1, pass,
           fmt("T2 rate sweep: L2 slope %.3f in [1.6,2.4], W12 slope %.3f in [0.7,1.3], "
               "slopes vs predicted %.3f/%.3f, self-convergence %.2e, %.0f s <= 300 s",
               sl2, sw, res.v_l2.fitted_slope, res.v_w12.fitted_slope, res.records[0].self_convergence, wall));
}

// 2. Dirichlet sharpness at eps = 1/16, eta = 1/2: the composed ratio over
//    eps^2 matches the cell norm target within 15% (L2 and W12); the decay
//    exponent cross-checks the sweep slope within 0.3.
void criterion2() {
    Scenario sc;
    sc.name = "sharpness-dirichlet";
    sc.layout.generator = LayoutConfig::Generator::Periodic;
    sc.layout.outer = OuterDomain::box({-10, -10}, {10, 10});
    sc.layout.offset_frac = {0, 0};
    sc.layout.shape.kind = ReferenceShape::Kind::Disk;
    sc.layout.shape.radius = 1.0;
    sc.layout.bc.kind = BcAssignment::Kind::Halfspace;
    sc.layout.bc.axis = 1;
    sc.layout.bc.threshold = 0.0;
    sc.eps_list = {0.125, 0.0625};
    sc.eta_rule = {ScaleRule::Kind::Fixed, 0.5};
    sc.cell_opts.h_target = 0.06;
    Bump f{{0, 6}, 2.5, 1.0};
    SharpnessResult res = sharpness_dirichlet(sc, f);
    const SharpnessRow& row = res.rows.back();  // eps = 1/16
    double dev_l2 = std::abs(row.scaled_l2 / row.target_l2 - 1.0);
    double dev_w12 = std::abs(row.scaled_w12 / row.target_w12 - 1.0);

    std::vector<std::pair<double, double>> pts;
    for (const auto& r : res.rows) pts.push_back({r.eps, r.ratio_l2});
    double sharp_exp = fit_slope(pts).slope;
    bool cross_ok = std::abs(sharp_exp - sweep_l2_slope) <= 0.3;

    bool pass = dev_l2 <= 0.15 && dev_w12 <= 0.15 && cross_ok;
    report(2, pass,
           fmt("Dirichlet sharpness at eps=1/16: L2 dev %.1f%% <= 15%%, W12 dev %.1f%% <= 15%% "
               "(targets %.4f/%.4f), decay exponent %.3f vs sweep slope %.3f (|diff| <= 0.3)",
               100 * dev_l2, 100 * dev_w12, row.target_l2, row.target_w12, sharp_exp, sweep_l2_slope));
}

// 3. Robin sharpness with mu = eps^{-1/2}: the L2 ratio over c4 eps/mu lies
//    in [0.8, 1.2] at the smallest eps and the deviation decreases.
void criterion3() {
    Scenario sc;
    sc.name = "sharpness-robin";
    sc.layout.generator = LayoutConfig::Generator::Periodic;
    sc.layout.outer = OuterDomain::box({-16, -16}, {16, 16});
    sc.layout.offset_frac = {0, 0};
    sc.layout.shape.kind = ReferenceShape::Kind::Disk;
    sc.layout.shape.radius = 1.0;
    sc.layout.bc.kind = BcAssignment::Kind::Halfspace;
    sc.layout.bc.axis = 1;
    sc.layout.bc.threshold = 0.0;
    sc.eps_list = {0.125, 0.0625, 0.03125};
    sc.eta_rule = {ScaleRule::Kind::Fixed, 1.0};
    sc.mu_rule = {ScaleRule::Kind::Power, 0.5};
    sc.robin.kind = RobinFamily::Kind::Linear;
    sc.theorem = Theorem::T1;
    sc.cell_opts.h_target = 0.1;
    Bump f{{0, -7}, 6.0, 1.0};
    SharpnessResult res = sharpness_robin(sc, f);
    bool window = res.rows.back().scaled_l2 >= 0.8 && res.rows.back().scaled_l2 <= 1.2;
    bool decreasing = true;
    for (std::size_t i = 1; i < res.rows.size(); ++i)
        decreasing = decreasing && std::abs(res.rows[i].scaled_l2 - 1.0) < std::abs(res.rows[i - 1].scaled_l2 - 1.0);
    report(3, window && decreasing,
           fmt("Robin sharpness: ratio/(c4 eps/mu) = %.3f, %.3f, %.3f; smallest-eps value in [0.8,1.2] %s, "
               "deviation decreasing %s (c4 = %.4f)",
               res.rows[0].scaled_l2, res.rows[1].scaled_l2, res.rows[2].scaled_l2, window ? "yes" : "no",
               decreasing ? "yes" : "no", res.c4));
}

// 4. Cell expansion: remainder ratio between eps*mu = 0.1 and 0.05 in
//    [1.5, 2.5] at eta = 1, within a minute.
void criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    PeriodicCell cell(1.0, CellMeshOptions{.h_target = 0.1});
    auto v1 = cell.solve_v1();
    double c4 = cell.c4_discrete();
    double ra = verify_expansion(cell.solve_vmu(0.1), v1, c4, 0.1);
    double rb = verify_expansion(cell.solve_vmu(0.05), v1, c4, 0.05);
    double wall = seconds_since(t0);
    double ratio = ra / rb;
    report(4, ratio >= 1.5 && ratio <= 2.5 && wall <= 60.0,
           fmt("cell expansion remainder ratio %.3f in [1.5,2.5] (%.3e vs %.3e), %.1f s <= 60 s", ratio, ra, rb,
               wall));
}

// 5. Local Poincare scaling: the Dirichlet-hole constant over
//    eps^2 (|ln eta| + 1) varies by less than a factor 3 across eta, and
//    scales by 4 within 1% when eps doubles.
void criterion5() {
    TriangulateOptions opt;
    opt.h_target = 0.1;
    double qmin = std::numeric_limits<double>::max(), qmax = 0;
    std::string qs;
    for (double eta : {0.5, 0.1, 0.02}) {
        auto r = local_poincare_annulus(1.9, eta, PoincareVariant::DirichletHole, opt);
        double q = r.constant / (std::abs(std::log(eta)) + 1.0);
        qs += fmt("%.3f ", q);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
    }
    TriangulateOptions opt2 = opt;
    opt2.h_target = 0.2;
    auto a = local_poincare_annulus(1.9, 0.5, PoincareVariant::DirichletHole, opt);
    auto b = local_poincare_annulus(2 * 1.9, 2 * 0.5, PoincareVariant::DirichletHole, opt2);
    double doubling = b.constant / a.constant;
    bool pass = qmax / qmin < 3.0 && std::abs(doubling / 4.0 - 1.0) <= 0.01;
    report(5, pass,
           fmt("Dirichlet-hole Poincare: C/(eps^2 kappa) = %s across eta {0.5,0.1,0.02}, spread factor %.2f < 3; "
               "eps-doubling ratio %.6f = 4 +- 1%%",
               qs.c_str(), qmax / qmin, doubling));
}

// 6. Averaging identity: with v = v0 and a fixed polynomial bump, the error
//    |lhs - leading| is required to halve (ratio in [1.6, 2.4]) under
//    eps -> eps/2.
void criterion6() {
    PeriodicCell cell(0.5, CellMeshOptions{.h_target = 0.08});
    auto v0 = cell.solve_v0();
    Bump h{{0.1, -0.2}, 2.0, 1.0};
    auto coarse = averaging_check(cell, v0, [&](Vec2 x) { return h.value(x); }, {-3, -3}, {3, 3}, 0.0625, h.integral());
    auto fine = averaging_check(cell, v0, [&](Vec2 x) { return h.value(x); }, {-3, -3}, {3, 3}, 0.03125, h.integral());
    double ratio = std::abs(coarse.error) / std::max(std::abs(fine.error), 1e-300);
    bool pass = ratio >= 1.6 && ratio <= 2.4;
    report(6, pass,
           fmt("averaging error ratio %.1f %s [1.6,2.4] (errors %.3e -> %.3e); the measured remainder decays at "
               "higher order than the first-order bound for a fixed smooth bump",
               ratio, pass ? "in" : "not in", coarse.error, fine.error));
    // the first-order remainder bound itself holds with a wide margin
    std::vector<double> absfield(v0.values.size());
    for (std::size_t i = 0; i < absfield.size(); ++i) absfield[i] = std::abs(v0.values[i]);
    double l1 = cell.integral(absfield);
    double gradmax = 0;
    for (int i = 0; i <= 400; ++i) gradmax = std::max(gradmax, h.grad({h.center.x + h.radius * i / 400.0, h.center.y}).norm());
    double bound_coarse = 0.0625 * (PI * h.radius * h.radius + 1.0) * l1 * gradmax;
    std::printf("       (first-order remainder bound at eps=1/16: |error| %.3e <= %.3e)\n", std::abs(coarse.error),
                bound_coarse);
}

// 7. Manufactured solution with the nonlinear Robin condition converges at
//    order >= 1.8 in L2; Newton reaches 1e-10 within 12 iterations.
void criterion7() {
    LayoutConfig cfg;
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{0.5, 0.5}};
    cfg.epsilon = 0.15;
    cfg.eta = 1.0;
    cfg.outer = OuterDomain::box({0, 0}, {1, 1});
    cfg.shape.kind = ReferenceShape::Kind::Disk;
    cfg.shape.radius = 1.0;
    cfg.bc.kind = BcAssignment::Kind::AllRobin;
    auto layout = build_layout(cfg);
    TriangulateOptions opt;
    opt.h_target = 0.07;
    opt.boundary_divisions = 48;
    Mesh mesh = triangulate(layout, opt);

    const double mu = 3.0;
    RobinModel robin = RobinModel::tanh_model(mu, 0.3);
    auto w = [](Vec2 x) { return std::sin(PI * x.x) * std::sin(PI * x.y); };
    auto grad_w = [](Vec2 x) {
        return Vec2{PI * std::cos(PI * x.x) * std::sin(PI * x.y), PI * std::sin(PI * x.x) * std::cos(PI * x.y)};
    };
    ProblemData data;
    data.f = [w](Vec2 x) { return 2.0 * PI * PI * w(x); };
    data.robin_rhs = [&](Vec2 x, Vec2 n) { return grad_w(x).dot(n) + robin.a(x, w(x)); };

    std::vector<double> errors;
    int max_iters = 0;
    double max_res = 0;
    for (int level = 0; level < 3; ++level) {
        Solution sol = solve(mesh, CoefficientField::laplace(), robin, data);
        max_iters = std::max(max_iters, sol.iterations);
        max_res = std::max(max_res, sol.residual);
        double err2 = 0;
        const auto& rule = quad::tri_order4();
        for (const auto& T : mesh.triangles) {
            Vec2 p[3] = {mesh.vertices[std::size_t(T[0])], mesh.vertices[std::size_t(T[1])], mesh.vertices[std::size_t(T[2])]};
            double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
            for (int q = 0; q < rule.n; ++q) {
                Vec2 x = p[0] * rule.bary[std::size_t(q)][0] + p[1] * rule.bary[std::size_t(q)][1] +
                         p[2] * rule.bary[std::size_t(q)][2];
                double uh = 0;
                for (int i = 0; i < 3; ++i)
                    uh += rule.bary[std::size_t(q)][std::size_t(i)] * sol.values[std::size_t(T[std::size_t(i)])];
                err2 += rule.w[std::size_t(q)] * area * (uh - w(x)) * (uh - w(x));
            }
        }
        errors.push_back(std::sqrt(err2));
        if (level < 2) mesh = refine_uniform(mesh);
    }
    double o1 = std::log2(errors[0] / errors[1]), o2 = std::log2(errors[1] / errors[2]);
    bool pass = o1 >= 1.8 && o2 >= 1.8 && max_iters <= 12 && max_res <= 1e-10;
    report(7, pass,
           fmt("manufactured nonlinear-Robin solve: L2 orders %.2f, %.2f >= 1.8; Newton <= %d iters <= 12, "
               "residual %.1e <= 1e-10",
               o1, o2, max_iters, max_res));
}

// 8. Radial oracles: the X problem and the mixed-condition annulus match the
//    closed-form radial solutions within 1% along a sampled ray.
void criterion8() {
    XField X = solve_X(0.5, 1.9, TriangulateOptions{.h_target = 0.05});
    P1Interpolator ix(*X.field.mesh);
    double xe = 0, xm = 0;
    for (int i = 0; i <= 60; ++i) {
        double r = 0.5 + (1.9 - 0.5) * (0.02 + 0.96 * i / 60.0);
        Vec2 p{r * std::cos(0.7), r * std::sin(0.7)};
        bool found;
        double uh = ix.eval(X.field.values, p, &found);
        if (!found) continue;
        double ue = oracles::annulus_neumann_inner(r, 0.5, 1.9);
        xe = std::max(xe, std::abs(uh - ue));
        xm = std::max(xm, std::abs(ue));
    }
    double x_rel = xe / xm;
    double flux_rel = std::abs(X.flux_R5 - X.flux_expected) / std::abs(X.flux_expected);

    LayoutConfig cfg;
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{0, 0}};
    cfg.epsilon = 0.5;
    cfg.eta = 1.0;
    cfg.outer = OuterDomain::disk({0, 0}, 1.0);
    cfg.shape.kind = ReferenceShape::Kind::Disk;
    cfg.shape.radius = 1.0;
    cfg.bc.kind = BcAssignment::Kind::AllDirichlet;
    auto layout = build_layout(cfg);
    Mesh mesh = triangulate(layout, TriangulateOptions{.h_target = 0.04});
    ProblemData data;
    data.f = [](Vec2) { return 1.0; };
    SolveOptions sopt;
    sopt.policy.outer_dirichlet = false;  // Neumann at the outer rim
    Solution sol = solve(mesh, CoefficientField::laplace(), RobinModel::none(), data, sopt);
    oracles::RadialPoisson fd{.a = 0.5, .b = 1.0, .dirichlet_inner = true};
    fd.solve();
    P1Interpolator ia(mesh);
    double ae = 0, am = 0;
    for (int i = 0; i <= 60; ++i) {
        double r = 0.5 + 0.5 * (0.02 + 0.96 * i / 60.0);
        Vec2 p{r * std::cos(0.3), r * std::sin(0.3)};
        bool found;
        double uh = ia.eval(sol.values, p, &found);
        if (!found) continue;
        double ue = fd.eval(r);
        ae = std::max(ae, std::abs(uh - ue));
        am = std::max(am, std::abs(ue));
    }
    double a_rel = ae / am;
    bool pass = x_rel <= 0.01 && a_rel <= 0.01 && flux_rel <= 0.01;
    report(8, pass,
           fmt("radial oracles: X-problem ray error %.2f%%, flux identity error %.2f%%, mixed annulus ray error "
               "%.2f%% (all <= 1%%)",
               100 * x_rel, 100 * flux_rel, 100 * a_rel));
}

// 9. Geometry audit: the periodic half-space example passes every check with
//    the default radii; perturbing one center flips exactly the separation
//    verdict.
void criterion9() {
    LayoutConfig cfg;
    cfg.generator = LayoutConfig::Generator::Periodic;
    cfg.epsilon = 0.125;
    cfg.eta = 0.5;
    cfg.outer = OuterDomain::box({-1, -1}, {1, 1});
    cfg.shape.kind = ReferenceShape::Kind::Disk;
    cfg.shape.radius = 1.0;
    cfg.bc.kind = BcAssignment::Kind::Halfspace;
    cfg.bc.axis = 1;
    cfg.bc.threshold = 0.0;
    cfg.bc.sign_definite = true;
    auto layout = build_layout(cfg);
    auto rep = check_assumption_a1(layout);
    auto cov = check_covering(layout);
    auto alphas = check_alpha_bounds(layout, [](int, Vec2) { return 1.0; }, 8.0, 6.0);
    bool alpha_ok = !alphas.empty();
    for (const auto& a : alphas) alpha_ok = alpha_ok && a.pass();
    bool base_ok = rep.a1_pass() && cov.pass && cov.certified && alpha_ok;

    // pull one center toward its neighbor just past the separation threshold
    PerforationLayout bent = layout;
    bent.cavities[0].center.x += 0.026;
    auto rep2 = check_assumption_a1(bent);
    auto cov2 = check_covering(bent);
    bool flip_ok = !rep2.a1_separation && rep2.a1_inclusions && rep2.a1_boundary_clearance && cov2.pass;
    report(9, base_ok && flip_ok,
           fmt("geometry audit: base layout passes (separation ratio %.3f, covering worst %.3f eps R4, "
               "alpha ratios ok); perturbed center flips separation only (ratio %.3f, covering still %s)",
               rep.separation_ratio, cov.worst_dist / (layout.epsilon * layout.radii.R4), rep2.separation_ratio,
               cov2.pass ? "pass" : "fail"));
}

} // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    void (*checks[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                          criterion6, criterion7, criterion8, criterion9};
    for (int i = 0; i < 9; ++i) {
        try {
            checks[i]();
        } catch (const std::exception& e) {
            report(i + 1, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d/9 criteria passed (%.0f s total)\n", 9 - failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
