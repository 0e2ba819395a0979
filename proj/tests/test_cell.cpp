#include <doctest.h>

#include "oracles.hpp"
#include "perfhom/cell.hpp"

using namespace perfhom;

TEST_CASE("periodic cell mesh: identification and exact periodicity") {
    PeriodicCell cell(0.5, CellMeshOptions{.h_target = 0.15});
    check_conforming(cell.mesh());
    auto v0 = cell.solve_v0();
    CHECK(cell.max_periodic_mismatch(v0.values) == 0.0);  // hard identification
    CHECK(v0.solve_residual < 1e-10);

    // discrete energy identity: ||grad v0||^2 = integral of v0
    Norms n = cell.cell_norms(v0.values);
    double iv = cell.integral(v0.values);
    CHECK(std::abs(n.h1_semi * n.h1_semi - iv) <= 1e-9 * iv);

    // area matches the perforated square up to polygonization
    CHECK(std::abs(cell.area() - (16.0 - PI * 0.25)) < 0.5 * cell.hole_perimeter() * cell.mesh().h_boundary);
}

TEST_CASE("v0: dihedral symmetry of probe values") {
    PeriodicCell cell(0.7, CellMeshOptions{.h_target = 0.12});
    auto v0 = cell.solve_v0();
    P1Interpolator interp(cell.mesh());
    double scale = 0;
    for (double v : v0.values) scale = std::max(scale, std::abs(v));
    for (Vec2 p : {Vec2{1.2, 0.4}, Vec2{0.9, 0.9}, Vec2{1.6, 0.0}}) {
        double a = interp.eval(v0.values, p);
        for (Vec2 q : {Vec2{-p.x, p.y}, Vec2{p.x, -p.y}, Vec2{p.y, p.x}, Vec2{-p.y, -p.x}}) {
            double b = interp.eval(v0.values, q);
            CHECK(std::abs(a - b) < 0.02 * scale);
        }
    }
}

TEST_CASE("v0: self-convergence of norms under mesh refinement") {
    double prev_l2 = 0, prev_diff = -1;
    std::vector<double> l2s;
    for (double h : {0.24, 0.12, 0.06}) {
        PeriodicCell cell(0.5, CellMeshOptions{.h_target = h});
        auto v0 = cell.solve_v0();
        l2s.push_back(cell.cell_norms(v0.values).l2);
    }
    prev_l2 = l2s[2];
    double d1 = std::abs(l2s[0] - prev_l2), d2 = std::abs(l2s[1] - prev_l2);
    CHECK(d2 < 0.45 * d1);  // roughly O(h^2) convergence of the norm
    (void)prev_diff;
}

TEST_CASE("v0 norm growth tracks the fundamental-solution scaling as eta -> 0") {
    double prev_dev = -1;
    for (double eta : {0.2, 0.05}) {
        PeriodicCell cell(eta, CellMeshOptions{.h_target = 0.12});
        auto v0 = cell.solve_v0();
        double l2sq = std::pow(cell.cell_norms(v0.values).l2, 2);
        double target = 16.0 * std::pow(G_fundamental(eta, 2), 2);
        double r = l2sq / target;
        INFO("eta ", eta, " ratio ", r);
        CHECK(r > 0.6);
        CHECK(r < 1.45);
        if (prev_dev >= 0) CHECK(std::abs(r - 1.0) < prev_dev);
        prev_dev = std::abs(r - 1.0);
    }
}

TEST_CASE("solve_X: radial oracle, flux identity, uniform W21 bound") {
    std::vector<double> w21s;
    for (double eta : {0.5, 0.2, 0.05}) {
        XField X = solve_X(eta, 1.9, TriangulateOptions{.h_target = 0.05});
        // exact radial solution X(r) = (R3^2 - r^2)/4 + (eta^2/2) ln(r/R3)
        P1Interpolator interp(*X.field.mesh);
        double max_err = 0, max_u = 0;
        for (int i = 0; i <= 40; ++i) {
            double r = eta + (1.9 - eta) * (0.02 + 0.96 * i / 40.0);
            Vec2 x{r * std::cos(0.7), r * std::sin(0.7)};
            bool found;
            double uh = interp.eval(X.field.values, x, &found);
            if (!found) continue;
            double ue = oracles::annulus_neumann_inner(r, eta, 1.9);
            max_err = std::max(max_err, std::abs(uh - ue));
            max_u = std::max(max_u, std::abs(ue));
        }
        CHECK(max_err / max_u < 0.01);
        CHECK(std::abs(X.flux_R5 - X.flux_expected) / std::abs(X.flux_expected) < 0.01);
        w21s.push_back(X.w21.w12);
    }
    double lo = *std::min_element(w21s.begin(), w21s.end());
    double hi = *std::max_element(w21s.begin(), w21s.end());
    CHECK(hi / lo < 2.0);  // uniform bound across eta
}

TEST_CASE("v1: compatible Neumann problem, c4, normalization") {
    PeriodicCell cell(1.0, CellMeshOptions{.h_target = 0.1});
    CHECK(cell.c4_analytic() == doctest::Approx((16.0 - PI) / (2.0 * PI)).epsilon(1e-14));
    CHECK(std::abs(cell.c4_discrete() - cell.c4_analytic()) / cell.c4_analytic() < 0.005);

    auto v1 = cell.solve_v1();
    CHECK(v1.solve_residual < 1e-10);
    double vmax = 0;
    for (double v : v1.values) vmax = std::max(vmax, std::abs(v));
    CHECK(std::abs(cell.hole_boundary_integral(v1.values)) <= 1e-10 * cell.hole_perimeter() * vmax);
    CHECK(v1.compat_residual <= 1e-10 * cell.area());
}

TEST_CASE("vmu: Robin cell problem") {
    PeriodicCell cell(1.0, CellMeshOptions{.h_target = 0.1});

    // small eps*mu: hole boundary mean approaches c4 / (eps mu)
    auto vm = cell.solve_vmu(0.1);
    CHECK(vm.solve_residual <= 1e-10);
    double mean = cell.hole_boundary_mean(vm.values);
    CHECK(std::abs(mean - cell.c4_discrete() / 0.1) / (cell.c4_discrete() / 0.1) < 0.1);

    // large eps*mu: boundary values are small relative to the gradient scale
    auto vbig = cell.solve_vmu(10.0);
    double bmax = 0;
    for (const auto& e : cell.mesh().boundary_edges)
        if (e.tag.kind == TagKind::CavityRobin) {
            bmax = std::max(bmax, std::abs(vbig.values[std::size_t(e.a)]));
            bmax = std::max(bmax, std::abs(vbig.values[std::size_t(e.b)]));
        }
    double gmax = 0;
    const Mesh& m = cell.mesh();
    for (const auto& T : m.triangles) {
        Vec2 g[3];
        double area;
        p1_gradients(m.vertices[std::size_t(T[0])], m.vertices[std::size_t(T[1])], m.vertices[std::size_t(T[2])], g, area);
        Vec2 grad = g[0] * vbig.values[std::size_t(T[0])] + g[1] * vbig.values[std::size_t(T[1])] + g[2] * vbig.values[std::size_t(T[2])];
        gmax = std::max(gmax, grad.norm());
    }
    CHECK(bmax <= gmax / 10.0 + 0.05 * gmax);

    CHECK_THROWS_AS(cell.solve_vmu(0.0), ConfigError);
}

TEST_CASE("verify_expansion: first-order remainder and shift invariance") {
    PeriodicCell cell(1.0, CellMeshOptions{.h_target = 0.1});
    auto v1 = cell.solve_v1();
    double c4 = cell.c4_discrete();

    auto va = cell.solve_vmu(0.1);
    auto vb = cell.solve_vmu(0.05);
    double ra = verify_expansion(va, v1, c4, 0.1);
    double rb = verify_expansion(vb, v1, c4, 0.05);
    INFO("remainders ", ra, " ", rb, " ratio ", ra / rb);
    CHECK(ra / rb > 1.5);
    CHECK(ra / rb < 2.5);

    CHECK_THROWS_AS(verify_expansion(va, v1, c4, 0.0), ConfigError);

    // shifting both fields by the same constant leaves the remainder intact
    CellField va_shift = va, v1_shift = v1;
    for (auto& x : va_shift.values) x += 3.25;
    for (auto& x : v1_shift.values) x += 3.25;
    CHECK(verify_expansion(va_shift, v1_shift, c4, 0.1) == doctest::Approx(ra).epsilon(1e-12));
}

TEST_CASE("v2 diagnostic solves with zero hole mean") {
    PeriodicCell cell(1.0, CellMeshOptions{.h_target = 0.12});
    auto v1 = cell.solve_v1();
    auto v2 = cell.solve_v2(v1);
    double vmax = 0;
    for (double v : v2.values) vmax = std::max(vmax, std::abs(v));
    CHECK(std::abs(cell.hole_boundary_integral(v2.values)) <= 1e-9 * cell.hole_perimeter() * std::max(vmax, 1e-30));
    CHECK(v2.compat_residual <= 1e-9 * cell.area());
}

TEST_CASE("averaging_check: constant field and zero h") {
    PeriodicCell cell(0.5, CellMeshOptions{.h_target = 0.15});
    CellField ones;
    ones.mesh = cell.mesh_ptr();
    ones.values.assign(cell.mesh().vertices.size(), 1.0);
    Bump h{{0, 0}, 2.0, 1.0};
    double eps = 1.0 / 16;

    auto res = averaging_check(cell, ones, [&](Vec2 x) { return h.value(x); }, {-2, -2}, {2, 2}, eps, h.integral());
    // v == 1: lhs = (perforated area / 16) * integral h up to the O(eps^2) term
    CHECK(res.leading == doctest::Approx(cell.area() / 16.0 * h.integral()).epsilon(1e-10));
    CHECK(std::abs(res.error) < 2e-3 * std::abs(res.leading));

    auto zero = averaging_check(cell, ones, [](Vec2) { return 0.0; }, {-2, -2}, {2, 2}, eps, 0.0);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.leading == 0.0);
    CHECK(zero.error == 0.0);

    CHECK_THROWS_AS(averaging_check(cell, ones, [](Vec2) { return 0.0; }, {-0.2, -0.2}, {0.2, 0.2}, eps, 0.0),
                    ConfigError);
}

TEST_CASE("G_fundamental") {
    CHECK(G_fundamental(1.0, 2) == 0.0);
    CHECK(G_fundamental(std::exp(1.0), 2) == doctest::Approx(8.0 / PI).epsilon(1e-12));
    CHECK(G_fundamental(1.0, 3) == doctest::Approx(-16.0 / PI).epsilon(1e-12));
    CHECK_THROWS_AS(G_fundamental(0.0, 2), ConfigError);
    CHECK_THROWS_AS(G_fundamental(-2.0, 2), ConfigError);
}
