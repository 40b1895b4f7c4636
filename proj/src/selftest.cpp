#include "congruence/selftest.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <map>

#include "congruence/analysis.hpp"
#include "congruence/bundled_scenes.hpp"
#include "congruence/rng.hpp"

namespace congruence {

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct LoadedScene {
    std::string name;
    SceneModel model;
    std::vector<ImmersionPatch> patches;

    LoadedScene(std::string name_, SceneModel model_)
        : name(std::move(name_)), model(std::move(model_)) {
        patches.reserve(model.surfaces.size());
        for (const SurfaceDef& def : model.surfaces) patches.emplace_back(model.space, def);
    }

    const ImmersionPatch& patch(const std::string& surf) const {
        for (const ImmersionPatch& p : patches)
            if (p.name() == surf) return p;
        throw GeometryError("selftest: no surface '" + surf + "' in scene " + name);
    }

    PatchMap make_map(const std::string& map_name) const {
        const MapDef* def = model.find_map(map_name);
        if (!def) throw GeometryError("selftest: no map '" + map_name + "' in scene " + name);
        return PatchMap(patch(def->from), patch(def->to), *def);
    }
};

MatrixXd random_indefinite_metric(int n, int s, Rng& rng) {
    MatrixXd raw(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
    const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(raw).householderQ();
    VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        const double mag = rng.uniform(0.5, 2.0);
        d[i] = (i < s ? -mag : mag);
    }
    return Q * d.asDiagonal() * Q.transpose();
}

MatrixXd random_symmetric(int n, Rng& rng) {
    MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            m(i, j) = rng.normal();
            m(j, i) = m(i, j);
        }
    return m;
}

}  // namespace

std::vector<SelftestResult> run_selftest(const AnalysisConfig& config) {
    std::vector<SelftestResult> results;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    };
    const double ts = config.tol_scale;

    std::map<std::string, LoadedScene> scenes;
    for (const auto& [name, text] : bundled_scenes())
        scenes.emplace(name, LoadedScene(name, parse_scene(text)));

    // ---- full-surface sweep: curvature consistency identities ----
    struct SweepEntry {
        std::string where;
        SurfaceAnalysis a;
    };
    std::vector<SweepEntry> sweep;
    for (const auto& [name, scene] : scenes)
        for (const ImmersionPatch& patch : scene.patches)
            sweep.push_back({name + "/" + patch.name(),
                             analyze_surface(patch, patch.grid(config.grid_geometry), config)});

    {
        double worst = 0.0;
        std::string where;
        for (const auto& e : sweep)
            if (e.a.max_gauss_residual > worst) {
                worst = e.a.max_gauss_residual;
                where = e.where;
            }
        add("gauss_consistency", worst <= 1e-7 * ts,
            "max ||R_intrinsic - eps (h^h)||/||R|| = " + sci(worst) + " at " + where +
                " (tol " + sci(1e-7 * ts) + ")");
    }
    {
        double worst = 0.0;
        std::string where;
        for (const auto& e : sweep)
            if (e.a.max_codazzi_residual > worst) {
                worst = e.a.max_codazzi_residual;
                where = e.where;
            }
        add("codazzi", worst <= 1e-7 * ts,
            "max residual/scale = " + sci(worst) + " at " + where + " (tol " + sci(1e-7 * ts) + ")");
    }
    {
        double worst_sym = 0.0, worst_trace = 0.0;
        bool signs_ok = true;
        for (const auto& e : sweep) {
            worst_sym = std::max(worst_sym, e.a.max_symmetry_residual);
            worst_trace = std::max(worst_trace, e.a.max_weyl_trace_residual);
            signs_ok = signs_ok && e.a.gauss_sign_consistent;
        }
        add("riemann_symmetries",
            worst_sym <= 1e-8 * ts && worst_trace <= 1e-8 * ts && signs_ok,
            "symmetry+Bianchi " + sci(worst_sym) + ", Weyl traces " + sci(worst_trace) +
                ", Gauss sign consistent " + (signs_ok ? "yes" : "NO") + " (tol " +
                sci(1e-8 * ts) + ")");
    }

    // ---- constant-curvature values ----
    {
        auto find = [&](const std::string& where) -> const SurfaceAnalysis& {
            for (const auto& e : sweep)
                if (e.where == where) return e.a;
            throw GeometryError("selftest: missing sweep entry " + where);
        };
        const SurfaceAnalysis& s1 = find("sphere_r1/sphere");
        const SurfaceAnalysis& s2 = find("sphere_r2/sphere");
        const SurfaceAnalysis& ds = find("desitter/desitter");
        const SurfaceAnalysis& ads = find("ads_like/ads");
        bool ok = true;
        std::string detail;
        auto check_tau = [&](const SurfaceAnalysis& a, double expect, const char* label) {
            const double err =
                std::max(std::abs(a.tau_min - expect), std::abs(a.tau_max - expect));
            if (err > 1e-8 * ts) ok = false;
            detail += std::string(label) + " |tau-" + sci(expect) + "| = " + sci(err) + "; ";
        };
        check_tau(s1, 6.0, "sphere r=1");
        check_tau(s2, 1.5, "sphere r=2");
        check_tau(ds, 6.0, "de Sitter");
        check_tau(ads, -6.0, "AdS-like");
        const double weyl3 = std::max(s1.max_weyl_ratio, s2.max_weyl_ratio);
        if (weyl3 > 1e-8 * ts) ok = false;
        detail += "n=3 Weyl ratio " + sci(weyl3) + "; ";
        const double cotton = std::max(s1.max_flatness_ratio, s2.max_flatness_ratio);
        if (cotton > 1e-8 * ts) ok = false;
        detail += "sphere flatness-tensor ratio " + sci(cotton) + "; ";
        if (s1.flatness.verdict != FlatnessVerdict::ConformallyFlat ||
            s1.density.umbilic_fraction != 1.0)
            ok = false;
        if (ds.gauss_sign != 1.0 || ds.eps_normal != 1.0) ok = false;
        if (ads.gauss_sign != -1.0 || ads.eps_normal != -1.0) ok = false;
        detail += "Gauss sign (dS " + sci(ds.gauss_sign) + ", AdS " + sci(ads.gauss_sign) + ")";
        add("constant_curvature", ok, detail);
    }

    // ---- isotropic-restriction lemma ----
    {
        bool ok = true;
        std::string detail;
        double worst_c_err = 0.0, worst_violation = 1.0;
        for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
            Rng rng(seed * 2654435761ull + 17);
            const int n = 3 + static_cast<int>(seed % 2);
            const int s = 1 + static_cast<int>(seed % static_cast<std::uint64_t>(n - 1));
            const MatrixXd g = random_indefinite_metric(n, s, rng);
            const IsotropicSample samples = sample_isotropic(g, 64, seed);
            // proportional case
            const double c = rng.normal() * 3.0;
            const Lemma1Result prop = lemma1_fit(c * g, g, samples, 1e-8);
            if (!prop.proportional) {
                ok = false;
                detail = "proportional case flagged non-proportional at seed " + std::to_string(seed);
                break;
            }
            worst_c_err = std::max(worst_c_err,
                                   std::abs(prop.c - c) / std::max(std::abs(c), 1e-300));
            // non-proportional case with relative defect >= 0.1
            MatrixXd L = c * g + random_symmetric(n, rng);
            const double cfit = (g.inverse() * L).trace() / n;
            MatrixXd D = L - cfit * g;
            const double defect = D.cwiseAbs().maxCoeff() / L.cwiseAbs().maxCoeff();
            if (defect < 0.1) {
                D *= (0.15 / defect) * L.cwiseAbs().maxCoeff() / D.cwiseAbs().maxCoeff();
                L = cfit * g + D;
            }
            const Lemma1Result nonprop = lemma1_fit(L, g, samples, 1e-8);
            if (nonprop.proportional) {
                ok = false;
                detail = "non-proportional case passed the cone test at seed " + std::to_string(seed);
                break;
            }
            worst_violation = std::min(worst_violation, nonprop.violation);
        }
        if (ok) {
            ok = worst_c_err <= 1e-10 && worst_violation >= 1e-3;
            detail = "c recovery error " + sci(worst_c_err) + " (tol 1e-10); weakest witness violation " +
                     sci(worst_violation) + " (need >= 1e-3)";
        }
        add("lemma1", ok, detail);
    }

    // ---- conformal profiles of motion-induced maps ----
    {
        bool ok = true;
        std::string detail;
        const std::pair<const char*, const char*> combos[] = {
            {"sphere_r1", "motion"}, {"ellipsoid", "motion"},   {"desitter", "motion"},
            {"ads_like", "motion"},  {"lorentz_graph", "motion"},
        };
        for (const auto& [scene_name, map_name] : combos) {
            const LoadedScene& sc = scenes.at(scene_name);
            const PatchMap map = sc.make_map(map_name);
            const ConformalProfile profile = conformal_extract(
                map, map.source().grid(config.grid_profile), config.profile_tol());
            double qmax = 0.0;
            for (const ProfilePoint& pp : profile.points)
                qmax = std::max(qmax, pp.Q.cwiseAbs().maxCoeff());
            const bool here = profile.conformal && profile.eps == 1 &&
                              profile.max_residual_conformal <= 1e-8 * ts &&
                              profile.max_residual_lemma3b <= 1e-8 * ts &&
                              std::abs(profile.sigma_mean) <= 1e-8 * ts &&
                              profile.sigma_spread <= 1e-8 * ts &&
                              profile.max_abs_lambda <= 1e-8 * ts &&
                              profile.max_grad_sigma_norm <= 1e-8 * ts && qmax <= 1e-8 * ts &&
                              profile.max_residual_21 <= 1e-8 * ts &&
                              profile.max_residual_22 <= 1e-8 * ts;
            if (!here) {
                ok = false;
                detail += std::string(scene_name) + ": residuals (conf " +
                          sci(profile.max_residual_conformal) + ", 3b " +
                          sci(profile.max_residual_lemma3b) + ", sigma " + sci(profile.sigma_mean) +
                          ", lambda " + sci(profile.max_abs_lambda) + ", Q " + sci(qmax) + "); ";
            }
        }
        if (ok) detail = "sigma, lambda, grad sigma, Q and all residual fields <= " + sci(1e-8 * ts);
        add("conformal_profiles", ok, detail);
    }

    // ---- conformal curvature identities ----
    {
        bool ok = true;
        std::string detail;
        struct Combo {
            const char* scene;
            const char* map;
            bool expect_3b_everywhere;
        };
        const Combo combos[] = {
            {"ellipsoid", "motion", true},
            {"ellipsoid", "dilation", false},  // nonumbilic target: the h-law must fail
            {"desitter", "motion", true},
            {"desitter", "dilation", true},    // umbilic target: the h-law holds
        };
        for (const Combo& cb : combos) {
            const LoadedScene& sc = scenes.at(cb.scene);
            const PatchMap map = sc.make_map(cb.map);
            const ConformalProfile profile = conformal_extract(
                map, map.source().grid(config.grid_profile), config.profile_tol());
            if (!profile.conformal) {
                ok = false;
                detail += std::string(cb.scene) + "/" + cb.map + ": not conformal; ";
                continue;
            }
            const IdentityResiduals ids =
                conformal_identity_residuals(map, profile, config.profile_tol());
            const int total = static_cast<int>(ids.res_12.size());
            bool here = ids.max_12 <= config.identity_tol();
            if (cb.expect_3b_everywhere)
                here = here && ids.applicable_count == total &&
                       ids.max_3c_applicable <= config.identity_tol();
            else
                here = here && ids.applicable_count == 0;
            if (!here) {
                ok = false;
                detail += std::string(cb.scene) + "/" + cb.map + ": eq(1.2) " + sci(ids.max_12) +
                          ", 3c " + sci(ids.max_3c_applicable) + ", applicable " +
                          std::to_string(ids.applicable_count) + "/" + std::to_string(total) + "; ";
            }
        }
        if (ok)
            detail = "curvature transformation laws within " + sci(config.identity_tol()) +
                     "; h-law applicability as predicted";
        add("conformal_identities", ok, detail);
    }

    // ---- isotropic bending limit ----
    {
        bool ok = true;
        std::string detail;
        // umbilic indefinite scene: every isotropic direction has h(xi,xi) = 0,
        // so every sample must be reported skipped
        {
            const LoadedScene& sc = scenes.at("desitter");
            const PatchMap map = sc.make_map("motion");
            const GridSpec grid = map.source().grid(config.grid_profile);
            const ConformalProfile profile = conformal_extract(map, grid, config.profile_tol());
            int skipped = 0, evaluated = 0;
            for (int s = 0; s < 10; ++s) {
                const int idx = (s * (grid.total() - 1)) / 9;
                const ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
                const IsotropicSample xi = sample_isotropic(pp.g, 1, config.seed + static_cast<std::uint64_t>(s));
                const IsoLimitReport rep = check_isotropic_limit(map, pp, xi.vectors[0]);
                (rep.skipped ? skipped : evaluated)++;
            }
            if (skipped != 10) {
                ok = false;
                detail += "de Sitter: expected all 10 points skipped (umbilic), got " +
                          std::to_string(evaluated) + " evaluated; ";
            }
        }
        // nonumbilic indefinite scene: the limit must extrapolate to 1
        {
            const LoadedScene& sc = scenes.at("lorentz_graph");
            const PatchMap map = sc.make_map("motion");
            const GridSpec grid = map.source().grid(config.grid_profile);
            const ConformalProfile profile = conformal_extract(map, grid, config.profile_tol());
            int evaluated = 0;
            double worst = 0.0;
            for (int s = 0; s < 20 && evaluated < 10; ++s) {
                const int idx = (s * (grid.total() - 1)) / 19;
                const ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
                const IsotropicSample xi = sample_isotropic(pp.g, 1, config.seed + static_cast<std::uint64_t>(s));
                const IsoLimitReport rep = check_isotropic_limit(map, pp, xi.vectors[0]);
                if (rep.skipped) continue;
                ++evaluated;
                worst = std::max(worst, rep.limit_error);
            }
            if (evaluated < 10 || worst > config.isolimit_tol()) {
                ok = false;
                detail += "graph: " + std::to_string(evaluated) + " evaluated, worst |limit-1| = " +
                          sci(worst) + " (tol " + sci(config.isolimit_tol()) + "); ";
            } else {
                detail += "de Sitter samples all reported skipped; graph worst |limit-1| = " +
                          sci(worst) + " over " + std::to_string(evaluated) + " points";
            }
        }
        add("isotropic_limit", ok, detail);
    }

    // ---- end-to-end verdicts ----
    {
        bool ok = true;
        std::string detail;
        auto verdict_of = [&](const char* scene_name, const char* map_name) {
            return decide_congruence(scenes.at(scene_name).make_map(map_name), config);
        };
        {
            const CongruenceVerdict v = verdict_of("ellipsoid", "motion");
            if (v.kind != VerdictKind::Congruence || v.fit_residual > 1e-8 * ts) {
                ok = false;
                detail += "ellipsoid/motion: " + std::string(to_string(v.kind)) +
                          " fit " + sci(v.fit_residual) + "; ";
            }
        }
        {
            const CongruenceVerdict v = verdict_of("ellipsoid", "dilation");
            const double sigma_err =
                v.profile ? std::abs(v.profile->sigma_mean - std::log(2.0)) : 1.0;
            if (v.kind != VerdictKind::ConformalOnly || sigma_err > 1e-8 * ts) {
                ok = false;
                detail += "ellipsoid/dilation: " + std::string(to_string(v.kind)) +
                          " |sigma-log2| = " + sci(sigma_err) + "; ";
            }
        }
        {
            const CongruenceVerdict v = verdict_of("ellipsoid", "shear");
            if (v.kind != VerdictKind::NotConformal || !v.profile ||
                v.profile->witness_u.size() == 0) {
                ok = false;
                detail += "ellipsoid/shear: " + std::string(to_string(v.kind)) + "; ";
            }
        }
        {
            const CongruenceVerdict v = verdict_of("sphere_r1", "motion");
            if (v.kind != VerdictKind::HypothesesUnmet ||
                v.reason.find("umbilic") == std::string::npos || !v.subtest_passed) {
                ok = false;
                detail += "sphere/motion: " + std::string(to_string(v.kind)) + " (" + v.reason + "); ";
            }
        }
        {
            const CongruenceVerdict v = verdict_of("lorentz_graph", "motion");
            if (v.kind != VerdictKind::Congruence) {
                ok = false;
                detail += "graph/motion: " + std::string(to_string(v.kind)) + " (" + v.reason + "); ";
            }
        }
        if (ok)
            detail = "congruence / conformal_only / not_conformal / hypotheses_unmet as expected";
        add("verdicts", ok, detail);
    }

    return results;
}

}  // namespace congruence
