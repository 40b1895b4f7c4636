#include "congruence/report.hpp"

#include <cmath>
#include <cstdio>

namespace congruence {

namespace {

void escape_string(const std::string& s, std::string& out) {
    out += '"';
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
}

void dump_value(const ordered_json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                escape_string(it.key(), out);
                out += ": ";
                dump_value(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_value(v, out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case ordered_json::value_t::string:
            escape_string(j.get_ref<const std::string&>(), out);
            return;
        case ordered_json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case ordered_json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            return;
        case ordered_json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            return;
        case ordered_json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += "null";
            return;
    }
}

ordered_json vector_json(const VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ordered_json matrix_json(const MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

ordered_json config_json(const AnalysisConfig& c) {
    ordered_json j;
    j["grid_geometry"] = c.grid_geometry;
    j["grid_profile"] = c.grid_profile;
    j["seed"] = c.seed;
    j["tol_scale"] = c.tol_scale;
    j["profile_tol"] = c.profile_tol();
    j["verdict_tol"] = c.verdict_tol();
    j["motion_tol"] = c.motion_tol();
    j["classify_tol"] = c.classify_tol();
    j["flatness_tol"] = c.flatness_tol();
    j["identity_tol"] = c.identity_tol();
    return j;
}

}  // namespace

std::string dump_report(const ordered_json& j) {
    std::string out;
    dump_value(j, out, 0);
    out += "\n";
    return out;
}

ordered_json checked(double value, double tol) {
    ordered_json j;
    j["value"] = value;
    j["tol"] = tol;
    j["pass"] = value <= tol;
    return j;
}

ordered_json motion_json(const Motion& m) {
    ordered_json j;
    j["linear"] = matrix_json(m.linear);
    j["translation"] = vector_json(m.translation);
    return j;
}

ordered_json surface_analysis_json(const SurfaceAnalysis& a, const AnalysisConfig& config) {
    ordered_json j;
    j["name"] = a.name;
    j["chart_dim"] = a.n;
    j["grid_points"] = a.grid_points;
    j["metric_indefinite"] = a.metric_indefinite;
    j["eps_normal"] = a.eps_normal;
    j["tau_min"] = a.tau_min;
    j["tau_max"] = a.tau_max;
    j["max_riemann_norm"] = a.max_riemann_norm;
    j["gauss_sign"] = a.gauss_sign;
    j["gauss_sign_consistent"] = a.gauss_sign_consistent;
    j["gauss_consistency"] = checked(a.max_gauss_residual, 1e-7 * config.tol_scale);
    j["codazzi"] = checked(a.max_codazzi_residual, 1e-7 * config.tol_scale);
    j["riemann_symmetries"] = checked(a.max_symmetry_residual, 1e-8 * config.tol_scale);
    j["weyl_traces"] = checked(a.max_weyl_trace_residual, 1e-8 * config.tol_scale);
    ordered_json cls;
    cls["umbilic_fraction"] = a.density.umbilic_fraction;
    cls["quasi_umbilic_fraction"] = a.density.quasi_umbilic_fraction;
    cls["generic_fraction"] = a.density.generic_fraction;
    cls["tol"] = config.classify_tol();
    j["classification"] = cls;
    ordered_json fl;
    fl["verdict"] = to_string(a.flatness.verdict);
    fl["criterion"] = a.flatness.used_cotton ? "cotton_n3" : "weyl";
    fl["max_ratio"] = a.flatness.max_ratio;
    fl["tol"] = a.flatness.tol;
    j["conformal_flatness"] = fl;
    return j;
}

ordered_json analyze_report(const SceneModel& scene, const std::string& scene_text,
                            const AnalysisConfig& config) {
    ordered_json j;
    j["tool_version"] = tool_version();
    j["command"] = "analyze";
    j["scene_digest"] = scene_digest(scene_text);
    j["config"] = config_json(config);
    ordered_json space;
    space["dim"] = scene.space.dim_total;
    space["signature"] = scene.space.neg_count;
    j["space"] = space;
    ordered_json surfaces = ordered_json::array();
    for (const SurfaceDef& def : scene.surfaces) {
        const ImmersionPatch patch(scene.space, def);
        const SurfaceAnalysis a = analyze_surface(patch, patch.grid(config.grid_geometry), config);
        surfaces.push_back(surface_analysis_json(a, config));
    }
    j["surfaces"] = surfaces;
    return j;
}

ordered_json check_map_report(const SceneModel& scene, const std::string& scene_text,
                              const std::string& map_name, const AnalysisConfig& config) {
    const MapDef* def = scene.find_map(map_name);
    if (!def) throw ParseError("unknown map '" + map_name + "'", 0);
    const ImmersionPatch source(scene.space, *scene.find_surface(def->from));
    const ImmersionPatch target(scene.space, *scene.find_surface(def->to));
    const PatchMap map(source, target, *def);

    ordered_json j;
    j["tool_version"] = tool_version();
    j["command"] = "check-map";
    j["scene_digest"] = scene_digest(scene_text);
    j["map"] = map_name;
    j["from"] = def->from;
    j["to"] = def->to;
    j["config"] = config_json(config);

    const CongruenceVerdict verdict = decide_congruence(map, config);
    ordered_json v;
    v["kind"] = to_string(verdict.kind);
    v["reason"] = verdict.reason;
    v["theorem_branch"] = verdict.theorem_branch;
    v["subtest_passed"] = verdict.subtest_passed;
    if (verdict.kind == VerdictKind::Congruence) {
        v["motion"] = motion_json(verdict.motion);
        v["fit_residual"] = checked(verdict.fit_residual, config.motion_tol());
        v["ortho_defect"] = checked(verdict.ortho_defect, config.motion_tol());
    }
    if (!verdict.component.empty())
        v["component_size"] = static_cast<int>(verdict.component.size());
    j["verdict"] = v;

    const ConformalProfile& profile = *verdict.profile;
    ordered_json p;
    p["conformal"] = profile.conformal;
    if (!profile.conformal) {
        p["failure"] = profile.failure;
        p["witness_u"] = vector_json(profile.witness_u);
        p["worst_residual"] = profile.worst_residual;
    } else {
        p["eps"] = profile.eps;
        p["sigma_mean"] = profile.sigma_mean;
        p["sigma_spread"] = profile.sigma_spread;
        p["max_abs_lambda"] = profile.max_abs_lambda;
        p["max_grad_sigma_norm"] = profile.max_grad_sigma_norm;
        p["residual_conformal"] = checked(profile.max_residual_conformal, config.profile_tol());
        p["residual_lemma3b"] = checked(profile.max_residual_lemma3b, config.profile_tol());
        p["residual_21"] = checked(profile.max_residual_21, config.verdict_tol());
        p["residual_22"] = checked(profile.max_residual_22, config.verdict_tol());
    }
    j["profile"] = p;

    ordered_json d;
    d["umbilic_fraction"] = verdict.density.umbilic_fraction;
    d["quasi_umbilic_fraction"] = verdict.density.quasi_umbilic_fraction;
    d["generic_fraction"] = verdict.density.generic_fraction;
    j["density"] = d;
    ordered_json fl;
    fl["verdict"] = to_string(verdict.flatness.verdict);
    fl["max_ratio"] = verdict.flatness.max_ratio;
    fl["tol"] = verdict.flatness.tol;
    j["conformal_flatness"] = fl;
    j["max_riemann_norm"] = verdict.max_riemann_norm;

    if (profile.conformal) {
        const IdentityResiduals ids =
            conformal_identity_residuals(map, profile, config.profile_tol());
        ordered_json c;
        c["eq_1_2"] = checked(ids.max_12, config.identity_tol());
        ordered_json l3c;
        l3c["applicable_points"] = ids.applicable_count;
        l3c["total_points"] = static_cast<int>(ids.res_3c.size());
        l3c["max_where_applicable"] = ids.max_3c_applicable;
        l3c["tol"] = config.identity_tol();
        l3c["pass"] = ids.max_3c_applicable <= config.identity_tol();
        c["lemma3c"] = l3c;
        j["conformal_identities"] = c;

        // bending and isotropic-limit samples on a spread of grid points
        const int total = profile.grid.total();
        const int n_samples = std::min(10, total);
        ordered_json bends = ordered_json::array();
        ordered_json limits = ordered_json::array();
        int evaluated = 0, skipped = 0;
        double worst_dev = 0.0, worst_limit_err = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            const int idx = (s * (total - 1)) / std::max(1, n_samples - 1);
            const ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
            const BendingReport br = check_bending_eq(map, pp, 20, 1e-10, config.seed + static_cast<std::uint64_t>(idx));
            worst_dev = std::max(worst_dev, br.max_deviation);
            ordered_json b;
            b["u"] = vector_json(pp.u);
            b["max_deviation"] = br.max_deviation;
            b["lambda_abs"] = br.lambda_abs;
            b["evaluated"] = br.evaluated;
            b["skipped"] = br.skipped;
            bends.push_back(b);
            ordered_json li;
            li["u"] = vector_json(pp.u);
            Eigen::SelfAdjointEigenSolver<MatrixXd> eig(pp.g);
            const bool indefinite =
                eig.eigenvalues().minCoeff() < 0 && eig.eigenvalues().maxCoeff() > 0;
            if (!indefinite) {
                li["skipped"] = true;
                li["reason"] = "definite metric: no isotropic directions";
            } else {
                const IsotropicSample xi =
                    sample_isotropic(pp.g, 1, config.seed + static_cast<std::uint64_t>(idx));
                const IsoLimitReport rep = check_isotropic_limit(map, pp, xi.vectors[0]);
                li["skipped"] = rep.skipped;
                if (rep.skipped) {
                    li["reason"] = rep.reason;
                    ++skipped;
                } else {
                    li["limit"] = rep.limit;
                    li["limit_error"] = checked(rep.limit_error, config.isolimit_tol());
                    li["pointwise_identity_residual"] = rep.pointwise_identity_residual;
                    ++evaluated;
                    worst_limit_err = std::max(worst_limit_err, rep.limit_error);
                }
            }
            limits.push_back(li);
        }
        ordered_json bsum;
        bsum["max_deviation"] = worst_dev;
        bsum["samples"] = bends;
        j["bending"] = bsum;
        ordered_json lsum;
        lsum["evaluated"] = evaluated;
        lsum["skipped"] = skipped;
        lsum["max_limit_error"] = worst_limit_err;
        lsum["samples"] = limits;
        j["isotropic_limit"] = lsum;

        // Lemma 4 diagnostic over the profile grid
        std::vector<PointKind> kinds;
        std::vector<double> rnorms;
        kinds.reserve(profile.points.size());
        CurvatureOptions copts;
        copts.with_gauss = false;
        copts.with_weyl = false;
        copts.with_cotton = false;
        for (const ProfilePoint& pp : profile.points) {
            const PointGeometry pg = point_geometry(source, pp.u, 2);
            kinds.push_back(classify_point(pg, config.classify_tol()).kind);
            rnorms.push_back(curvature_pack(source, pp.u, copts).riemann.frobenius_norm());
        }
        const Lemma4Report l4 = lemma4_diagnostic(profile, kinds, rnorms, config.verdict_tol());
        ordered_json l4j;
        l4j["U_count"] = l4.U_count;
        l4j["violations"] = l4.violations;
        l4j["consistent"] = l4.consistent;
        j["lemma4"] = l4j;
    }
    return j;
}

}  // namespace congruence
