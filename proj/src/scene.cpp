#include "congruence/scene.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace congruence {

const SurfaceDef* SceneModel::find_surface(const std::string& name) const {
    for (const auto& s : surfaces)
        if (s.name == name) return &s;
    return nullptr;
}

const MapDef* SceneModel::find_map(const std::string& name) const {
    for (const auto& m : maps)
        if (m.name == name) return &m;
    return nullptr;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ParseError("scene line " + std::to_string(line) + ": " + msg, line);
}

double parse_number(const std::string& s, std::size_t line, const char* what) {
    char* end = nullptr;
    const std::string t = trim(s);
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        fail(line, std::string("invalid ") + what + " '" + t + "'");
    return v;
}

long parse_integer(const std::string& s, std::size_t line, const char* what) {
    char* end = nullptr;
    const std::string t = trim(s);
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        fail(line, std::string("invalid ") + what + " '" + t + "'");
    return v;
}

struct RawSection {
    std::string kind;  // "space" | "surface" | "map"
    std::string name;
    std::map<std::string, std::string> keys;
    std::size_t line;
};

}  // namespace

SceneModel parse_scene(const std::string& text) {
    std::vector<RawSection> sections;
    RawSection* current = nullptr;

    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "unterminated section header");
            const std::string inner = trim(line.substr(1, line.size() - 2));
            RawSection sec;
            sec.line = lineno;
            const auto dot = inner.find('.');
            if (dot == std::string::npos) {
                sec.kind = inner;
            } else {
                sec.kind = inner.substr(0, dot);
                sec.name = trim(inner.substr(dot + 1));
            }
            if (sec.kind != "space" && sec.kind != "surface" && sec.kind != "map")
                fail(lineno, "unknown section '" + inner + "'");
            if (sec.kind != "space" && sec.name.empty())
                fail(lineno, sec.kind + " section requires a name");
            sections.push_back(std::move(sec));
            current = &sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key=value");
        if (!current) fail(lineno, "key=value before any section header");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (current->keys.count(key)) fail(lineno, "duplicate key '" + key + "'");
        current->keys[key] = value;
    }

    // space
    const RawSection* space_sec = nullptr;
    for (const auto& s : sections)
        if (s.kind == "space") {
            if (space_sec) fail(s.line, "duplicate [space] section");
            space_sec = &s;
        }
    if (!space_sec) throw ParseError("scene: missing [space] section", 0);
    auto require = [](const RawSection& s, const char* key) -> const std::string& {
        auto it = s.keys.find(key);
        if (it == s.keys.end())
            fail(s.line, std::string("missing key '") + key + "'");
        return it->second;
    };
    const long dim = parse_integer(require(*space_sec, "dim"), space_sec->line, "dim");
    const long sig = parse_integer(require(*space_sec, "signature"), space_sec->line, "signature");
    if (dim < 4) fail(space_sec->line, "dim must be >= 4");
    if (sig < 0 || sig > dim) fail(space_sec->line, "signature out of range");

    SceneModel model{AmbientSpace(static_cast<int>(dim), static_cast<int>(sig)), {}, {}};
    const int n = model.space.surface_dim();

    std::set<std::string> surface_names, map_names;
    for (const auto& sec : sections) {
        if (sec.kind == "surface") {
            if (!surface_names.insert(sec.name).second)
                fail(sec.line, "duplicate surface name '" + sec.name + "'");
            SurfaceDef def;
            def.name = sec.name;
            def.vars = split(require(sec, "vars"), ',');
            if (static_cast<int>(def.vars.size()) != n)
                fail(sec.line, "surface needs exactly " + std::to_string(n) +
                                   " chart variables, got " + std::to_string(def.vars.size()));
            std::set<std::string> seen_vars;
            for (const auto& v : def.vars) {
                if (v.empty()) fail(sec.line, "empty variable name");
                if (!seen_vars.insert(v).second)
                    fail(sec.line, "duplicate variable '" + v + "'");
            }
            for (const auto& comp : split(require(sec, "embed"), ';')) {
                try {
                    def.embed.push_back(parse_expr(comp, def.vars));
                } catch (const ParseError& e) {
                    fail(sec.line, std::string("embed: ") + e.what());
                }
            }
            if (static_cast<int>(def.embed.size()) != model.space.dim_total)
                fail(sec.line, "embed needs " + std::to_string(model.space.dim_total) +
                                   " components, got " + std::to_string(def.embed.size()));
            for (const auto& range : split(require(sec, "domain"), ',')) {
                const auto parts = split(range, ':');
                if (parts.size() != 2) fail(sec.line, "domain range must be lo:hi");
                const double lo = parse_number(parts[0], sec.line, "domain bound");
                const double hi = parse_number(parts[1], sec.line, "domain bound");
                if (!(lo < hi)) fail(sec.line, "empty domain range");
                def.domain.emplace_back(lo, hi);
            }
            if (static_cast<int>(def.domain.size()) != n)
                fail(sec.line, "domain needs " + std::to_string(n) + " ranges");
            model.surfaces.push_back(std::move(def));
        } else if (sec.kind == "map") {
            if (!map_names.insert(sec.name).second)
                fail(sec.line, "duplicate map name '" + sec.name + "'");
            MapDef def;
            def.name = sec.name;
            def.from = require(sec, "from");
            def.to = require(sec, "to");
            // rule is parsed after all surfaces are known
            model.maps.push_back(std::move(def));
        }
    }

    // second pass for map rules (need source chart variables)
    std::size_t map_idx = 0;
    for (const auto& sec : sections) {
        if (sec.kind != "map") continue;
        MapDef& def = model.maps[map_idx++];
        const SurfaceDef* src = model.find_surface(def.from);
        const SurfaceDef* dst = model.find_surface(def.to);
        if (!src) fail(sec.line, "map '" + def.name + "': unknown source surface '" + def.from + "'");
        if (!dst) fail(sec.line, "map '" + def.name + "': unknown target surface '" + def.to + "'");
        for (const auto& comp : split(require(sec, "rule"), ';')) {
            try {
                def.rule.push_back(parse_expr(comp, src->vars));
            } catch (const ParseError& e) {
                fail(sec.line, std::string("rule: ") + e.what());
            }
        }
        if (def.rule.size() != dst->vars.size())
            fail(sec.line, "rule needs " + std::to_string(dst->vars.size()) +
                               " components, got " + std::to_string(def.rule.size()));
    }

    return model;
}

SceneModel load_scene_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

std::string scene_digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace congruence
