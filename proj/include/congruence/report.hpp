#pragma once

#include <json.hpp>
#include <string>

#include "congruence/analysis.hpp"
#include "congruence/scene.hpp"

namespace congruence {

using ordered_json = nlohmann::ordered_json;

inline const char* tool_version() { return "0.1.0"; }

// Serializes with stable key order and floats at 17 significant digits, so
// reports are byte-stable golden files.
std::string dump_report(const ordered_json& j);

// {value, tol, pass} triple for a residual tested against a tolerance.
ordered_json checked(double value, double tol);

ordered_json motion_json(const Motion& m);

ordered_json surface_analysis_json(const SurfaceAnalysis& a, const AnalysisConfig& config);

// Full `analyze` report: every surface of the scene.
ordered_json analyze_report(const SceneModel& scene, const std::string& scene_text,
                            const AnalysisConfig& config);

// Full `check-map` report: decide_congruence plus profile residuals,
// conformal identities, bending and isotropic-limit samples.
ordered_json check_map_report(const SceneModel& scene, const std::string& scene_text,
                              const std::string& map_name, const AnalysisConfig& config);

}  // namespace congruence
