#pragma once

// Declarative scenario files (JSON): one file drives every command. Parsing
// errors name the offending field.

#include <json.hpp>

#include "perfhom/rates.hpp"

namespace perfhom {

namespace scenariodetail {

using nlohmann::json;

inline ConfigError field_error(const std::string& field, const std::string& what) {
    return ConfigError("scenario field '" + field + "': " + what);
}

template <class T>
T get_required(const json& j, const std::string& key, const std::string& label = "") {
    const std::string& name = label.empty() ? key : label;
    if (!j.contains(key)) throw field_error(name, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw field_error(name, e.what());
    }
}

template <class T>
T get_or(const json& j, const std::string& field, T def) {
    if (!j.contains(field)) return def;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        throw field_error(field, e.what());
    }
}

inline Vec2 get_vec2(const json& j, const std::string& field) {
    auto a = get_required<std::vector<double>>(j, field);
    if (a.size() != 2) throw field_error(field, "expected [x, y]");
    return {a[0], a[1]};
}

inline ScaleRule parse_scale_rule(const json& j, const std::string& field, bool is_mu) {
    if (!j.contains(field)) return ScaleRule{ScaleRule::Kind::Fixed, 1.0};
    const json& r = j.at(field);
    std::string kind = get_required<std::string>(r, "kind", field + ".kind");
    ScaleRule out;
    if (kind == "fixed") {
        out.kind = ScaleRule::Kind::Fixed;
        out.value = get_required<double>(r, "value", field + ".value");
    } else if (kind == "power") {
        out.kind = ScaleRule::Kind::Power;
        out.value = get_required<double>(r, is_mu ? "beta" : "gamma", field + (is_mu ? ".beta" : ".gamma"));
    } else {
        throw field_error(field + ".kind", "expected 'fixed' or 'power', got '" + kind + "'");
    }
    return out;
}

} // namespace scenariodetail

struct SharpnessConfig {
    bool enabled = false;
    bool robin = false;
    Bump bump;
};

struct ScenarioFile {
    Scenario scenario;
    SharpnessConfig sharpness;
};

inline ScenarioFile parse_scenario(const nlohmann::json& j) {
    using namespace scenariodetail;
    ScenarioFile file;
    Scenario& sc = file.scenario;
    sc.name = get_or<std::string>(j, "name", "unnamed");

    // outer domain
    {
        if (!j.contains("outer")) throw field_error("outer", "missing");
        const json& o = j.at("outer");
        std::string kind = get_required<std::string>(o, "kind", "outer.kind");
        if (kind == "box")
            sc.layout.outer = OuterDomain::box(get_vec2(o, "lo"), get_vec2(o, "hi"));
        else if (kind == "disk")
            sc.layout.outer = OuterDomain::disk(get_vec2(o, "center"), get_required<double>(o, "radius"));
        else
            throw field_error("outer.kind", "expected 'box' or 'disk'");
    }
    // generator
    {
        const json& g = j.contains("generator") ? j.at("generator") : json{{"kind", "periodic"}};
        std::string kind = get_or<std::string>(g, "kind", "periodic");
        if (kind == "periodic") {
            sc.layout.generator = LayoutConfig::Generator::Periodic;
            sc.layout.spacing_factor = get_or<double>(g, "spacing_factor", 4.0);
            if (g.contains("offset")) sc.layout.offset_frac = get_vec2(g, "offset");
        } else if (kind == "explicit") {
            sc.layout.generator = LayoutConfig::Generator::Explicit;
            auto cs = get_required<std::vector<std::vector<double>>>(g, "centers", "generator.centers");
            for (const auto& c : cs) {
                if (c.size() != 2) throw field_error("generator.centers", "expected [x, y] pairs");
                sc.layout.explicit_centers.push_back({c[0], c[1]});
            }
        } else if (kind == "jittered") {
            sc.layout.generator = LayoutConfig::Generator::Jittered;
            sc.layout.spacing_factor = get_or<double>(g, "spacing_factor", 4.0);
            sc.layout.jitter_frac = get_or<double>(g, "jitter", 0.2);
            sc.layout.seed = get_or<std::uint64_t>(g, "seed", 1);
        } else {
            throw field_error("generator.kind", "expected 'periodic', 'explicit' or 'jittered'");
        }
    }
    // shape
    if (j.contains("shape")) {
        const json& s = j.at("shape");
        std::string kind = get_or<std::string>(s, "kind", "disk");
        if (kind == "disk") {
            sc.layout.shape.kind = ReferenceShape::Kind::Disk;
            sc.layout.shape.radius = get_or<double>(s, "radius", 1.0);
        } else if (kind == "polygon") {
            sc.layout.shape.kind = ReferenceShape::Kind::Polygon;
            auto vs = get_required<std::vector<std::vector<double>>>(s, "vertices", "shape.vertices");
            for (const auto& v : vs) {
                if (v.size() != 2) throw field_error("shape.vertices", "expected [x, y] pairs");
                sc.layout.shape.vertices.push_back({v[0], v[1]});
            }
            sc.layout.shape.star_shaped = get_or<bool>(s, "star_shaped", true);
        } else {
            throw field_error("shape.kind", "expected 'disk' or 'polygon' (other shapes are rejected at config time)");
        }
    }
    // boundary-condition assignment
    if (j.contains("bc")) {
        const json& b = j.at("bc");
        std::string kind = get_required<std::string>(b, "kind", "bc.kind");
        if (kind == "all_dirichlet") {
            sc.layout.bc.kind = BcAssignment::Kind::AllDirichlet;
        } else if (kind == "all_robin") {
            sc.layout.bc.kind = BcAssignment::Kind::AllRobin;
            sc.layout.bc.sign_definite = get_or<bool>(b, "sign_definite", true);
        } else if (kind == "halfspace") {
            sc.layout.bc.kind = BcAssignment::Kind::Halfspace;
            sc.layout.bc.axis = get_or<int>(b, "axis", 1);
            sc.layout.bc.threshold = get_or<double>(b, "threshold", 0.0);
            sc.layout.bc.sign_definite = get_or<bool>(b, "sign_definite", true);
        } else {
            throw field_error("bc.kind", "expected 'all_dirichlet', 'all_robin' or 'halfspace'");
        }
    }
    if (j.contains("radii")) {
        auto r = get_required<std::vector<double>>(j, "radii");
        if (r.size() != 4) throw field_error("radii", "expected [R1, R2, R3, R4]");
        sc.layout.radii = Radii{r[0], r[1], r[2], r[3]};
    }

    sc.eps_list = get_required<std::vector<double>>(j, "eps_list");
    sc.eta_rule = parse_scale_rule(j, "eta", false);
    if (sc.eta_rule.kind == ScaleRule::Kind::Fixed && !j.contains("eta")) sc.eta_rule.value = 1.0;
    sc.mu_rule = parse_scale_rule(j, "mu", true);

    if (j.contains("robin")) {
        const json& r = j.at("robin");
        std::string kind = get_required<std::string>(r, "kind", "robin.kind");
        if (kind == "none")
            sc.robin.kind = RobinFamily::Kind::None;
        else if (kind == "linear")
            sc.robin.kind = RobinFamily::Kind::Linear;
        else if (kind == "tanh") {
            sc.robin.kind = RobinFamily::Kind::Tanh;
            sc.robin.tanh_coeff = get_or<double>(r, "coeff", 0.3);
        } else
            throw field_error("robin.kind", "expected 'none', 'linear' or 'tanh'");
    }
    if (j.contains("f")) {
        const json& f = j.at("f");
        std::string kind = get_required<std::string>(f, "kind", "f.kind");
        if (kind == "constant") {
            sc.f.kind = SourceSpec::Kind::Constant;
            sc.f.constant = get_or<double>(f, "value", 1.0);
        } else if (kind == "bump") {
            sc.f.kind = SourceSpec::Kind::BumpFn;
            sc.f.bump.center = get_vec2(f, "center");
            sc.f.bump.radius = get_required<double>(f, "radius");
            sc.f.bump.amplitude = get_or<double>(f, "amplitude", 1.0);
        } else {
            throw field_error("f.kind", "expected 'constant' or 'bump'");
        }
    }
    sc.lambda = get_or<double>(j, "lambda", 0.0);
    {
        std::string th = get_or<std::string>(j, "theorem", "T2");
        if (th == "T1")
            sc.theorem = Theorem::T1;
        else if (th == "T2")
            sc.theorem = Theorem::T2;
        else
            throw field_error("theorem", "expected 'T1' or 'T2'");
    }
    if (j.contains("mesh")) {
        const json& m = j.at("mesh");
        sc.mesh_opts.h_target = get_or<double>(m, "h_target", sc.mesh_opts.h_target);
        sc.mesh_opts.boundary_divisions = get_or<int>(m, "boundary_divisions", 0);
        sc.mesh_opts.min_angle_deg = get_or<double>(m, "min_angle_deg", 20.0);
        sc.mesh_opts.max_vertices = get_or<std::size_t>(m, "max_vertices", sc.mesh_opts.max_vertices);
    }
    if (j.contains("cell")) {
        const json& c = j.at("cell");
        sc.cell_opts.h_target = get_or<double>(c, "h_target", sc.cell_opts.h_target);
        sc.cell_opts.hole_divisions = get_or<int>(c, "hole_divisions", 0);
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        sc.slope_tol_l2 = get_or<double>(t, "slope_l2", sc.slope_tol_l2);
        sc.slope_tol_w12 = get_or<double>(t, "slope_w12", sc.slope_tol_w12);
        sc.solver_tol = get_or<double>(t, "solver", sc.solver_tol);
        sc.theta2_gate = get_or<double>(t, "theta2_gate", sc.theta2_gate);
    }
    if (j.contains("sharpness")) {
        const json& s = j.at("sharpness");
        file.sharpness.enabled = true;
        std::string kind = get_required<std::string>(s, "kind", "sharpness.kind");
        if (kind == "dirichlet")
            file.sharpness.robin = false;
        else if (kind == "robin")
            file.sharpness.robin = true;
        else
            throw field_error("sharpness.kind", "expected 'dirichlet' or 'robin'");
        file.sharpness.bump.center = get_vec2(s, "center");
        file.sharpness.bump.radius = get_required<double>(s, "radius");
        file.sharpness.bump.amplitude = get_or<double>(s, "amplitude", 1.0);
    }
    sc.validate();
    return file;
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open scenario file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

} // namespace perfhom
