#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "congruence/ambient.hpp"
#include "congruence/expr.hpp"

namespace congruence {

struct SurfaceDef {
    std::string name;
    std::vector<std::string> vars;                    // length n
    std::vector<Expr> embed;                          // length n+1
    std::vector<std::pair<double, double>> domain;    // length n, lo < hi
};

struct MapDef {
    std::string name;
    std::string from;
    std::string to;
    std::vector<Expr> rule;  // length n, in the source chart variables
};

struct SceneModel {
    AmbientSpace space;
    std::vector<SurfaceDef> surfaces;
    std::vector<MapDef> maps;

    const SurfaceDef* find_surface(const std::string& name) const;
    const MapDef* find_map(const std::string& name) const;
};

// Sectioned text format:
//   [space] dim=<n+1> signature=<s>
//   [surface.<name>] vars=u1,...  embed=<expr>;...;<expr>  domain=lo:hi,...
//   [map.<name>] from=<surface> to=<surface> rule=<expr>;...;<expr>
// '#' starts a comment; whitespace is insignificant.
SceneModel parse_scene(const std::string& text);

SceneModel load_scene_file(const std::string& path);

// FNV-1a hash of the scene text, for report provenance.
std::string scene_digest(const std::string& text);

}  // namespace congruence
