// Command-line front end: load a scene, run the requested analysis, write a
// deterministic report and a human summary.
//
// Exit codes: 0 success, 1 selftest failure, 2 parse/usage error,
// 3 geometry error, 4 I/O error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "congruence/report.hpp"
#include "congruence/selftest.hpp"

namespace {

using namespace congruence;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

struct CommonOpts {
    std::string scene_path;
    std::string out_path = "report.json";
    int grid = 0;  // 0 = defaults (5 geometry / 9 profile)
    double tol = 1.0;
    std::uint64_t seed = 0;
    bool quiet = false;
};

AnalysisConfig make_config(const CommonOpts& opts) {
    AnalysisConfig config;
    if (opts.grid > 0) {
        config.grid_geometry = opts.grid;
        config.grid_profile = opts.grid;
    }
    config.tol_scale = opts.tol;
    config.seed = opts.seed;
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_scene) {
    if (with_scene)
        cmd->add_option("scene", opts.scene_path, "scene file")->required();
    cmd->add_option("--grid", opts.grid, "grid points per chart axis (default 5 geometry, 9 profile)");
    cmd->add_option("--tol", opts.tol, "tolerance scale factor (1.0 = spec defaults)");
    cmd->add_option("--seed", opts.seed, "seed for sampling");
    cmd->add_option("--out", opts.out_path, "report output path");
    cmd->add_flag("--quiet", opts.quiet, "suppress the stdout summary");
}

int run_analyze(const CommonOpts& opts) {
    const std::string text = read_file(opts.scene_path);
    const SceneModel scene = parse_scene(text);
    const AnalysisConfig config = make_config(opts);
    const ordered_json report = analyze_report(scene, text, config);
    write_file(opts.out_path, dump_report(report));
    if (!opts.quiet) {
        std::printf("scene %s (digest %s): %zu surface(s)\n", opts.scene_path.c_str(),
                    report["scene_digest"].get<std::string>().c_str(), scene.surfaces.size());
        for (const auto& s : report["surfaces"]) {
            std::printf(
                "  %-18s n=%d  tau=[%.6g, %.6g]  flatness=%s  classes(u/q/g)=%.2f/%.2f/%.2f\n",
                s["name"].get<std::string>().c_str(), s["chart_dim"].get<int>(),
                s["tau_min"].get<double>(), s["tau_max"].get<double>(),
                s["conformal_flatness"]["verdict"].get<std::string>().c_str(),
                s["classification"]["umbilic_fraction"].get<double>(),
                s["classification"]["quasi_umbilic_fraction"].get<double>(),
                s["classification"]["generic_fraction"].get<double>());
            std::printf("  %-18s gauss=%.3g codazzi=%.3g symmetries=%.3g\n", "",
                        s["gauss_consistency"]["value"].get<double>(),
                        s["codazzi"]["value"].get<double>(),
                        s["riemann_symmetries"]["value"].get<double>());
        }
        std::printf("report written to %s\n", opts.out_path.c_str());
    }
    return 0;
}

int run_check_map(const CommonOpts& opts, const std::string& map_name,
                  const std::string& point_arg) {
    const std::string text = read_file(opts.scene_path);
    const SceneModel scene = parse_scene(text);
    AnalysisConfig config = make_config(opts);
    if (!point_arg.empty()) {
        std::vector<double> coords;
        std::stringstream ss(point_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            coords.push_back(std::strtod(tok.c_str(), nullptr));
        VectorXd p(static_cast<Eigen::Index>(coords.size()));
        for (std::size_t i = 0; i < coords.size(); ++i) p[static_cast<Eigen::Index>(i)] = coords[i];
        config.point_p = p;
    }
    const ordered_json report = check_map_report(scene, text, map_name, config);
    write_file(opts.out_path, dump_report(report));
    if (!opts.quiet) {
        const auto& v = report["verdict"];
        std::printf("map '%s' (%s -> %s): %s\n", map_name.c_str(),
                    report["from"].get<std::string>().c_str(),
                    report["to"].get<std::string>().c_str(),
                    v["kind"].get<std::string>().c_str());
        std::printf("  branch %s; %s\n", v["theorem_branch"].get<std::string>().c_str(),
                    v["reason"].get<std::string>().c_str());
        if (v.contains("fit_residual"))
            std::printf("  motion fit residual %.3g, pseudo-orthogonality defect %.3g\n",
                        v["fit_residual"]["value"].get<double>(),
                        v["ortho_defect"]["value"].get<double>());
        std::printf("report written to %s\n", opts.out_path.c_str());
    }
    return 0;
}

int run_selftest_cmd(const CommonOpts& opts) {
    const AnalysisConfig config = make_config(opts);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<SelftestResult> results = run_selftest(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ordered_json report;
    report["tool_version"] = tool_version();
    report["command"] = "selftest";
    report["tol_scale"] = opts.tol;
    report["seed"] = opts.seed;
    ordered_json suites = ordered_json::array();
    bool all_pass = true;
    for (const SelftestResult& r : results) {
        ordered_json s;
        s["name"] = r.name;
        s["pass"] = r.pass;
        s["detail"] = r.detail;
        suites.push_back(s);
        all_pass = all_pass && r.pass;
        if (!opts.quiet)
            std::printf("%-24s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                        r.detail.c_str());
    }
    report["suites"] = suites;
    report["all_pass"] = all_pass;
    write_file(opts.out_path, dump_report(report));
    if (!opts.quiet)
        std::printf("%s (%zu suites, %.1f s)\n", all_pass ? "all suites passed" : "FAILURES present",
                    results.size(), seconds);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypersurface geometry and congruence analysis"};
    app.require_subcommand(1);

    CommonOpts analyze_opts, map_opts, selftest_opts;
    std::string map_name, point_arg;

    CLI::App* analyze = app.add_subcommand("analyze", "per-surface geometry of a scene");
    add_common(analyze, analyze_opts, true);

    CLI::App* check = app.add_subcommand("check-map", "congruence analysis of a named map");
    add_common(check, map_opts, true);
    check->add_option("--map", map_name, "map name in the scene")->required();
    check->add_option("--point", point_arg, "chart point p for the local theorem (comma-separated)");

    CLI::App* selftest = app.add_subcommand("selftest", "run the bundled invariant suites");
    add_common(selftest, selftest_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (analyze->parsed()) return run_analyze(analyze_opts);
        if (check->parsed()) return run_check_map(map_opts, map_name, point_arg);
        if (selftest->parsed()) return run_selftest_cmd(selftest_opts);
    } catch (const congruence::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const congruence::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const congruence::GeometryError& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 3;
    }
    return 2;
}
