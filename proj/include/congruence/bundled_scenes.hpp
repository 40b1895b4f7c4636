#pragma once

#include <string>
#include <utility>
#include <vector>

namespace congruence {

// Scene texts compiled in from scenes/*.scene at build time.
const std::vector<std::pair<std::string, std::string>>& bundled_scenes();

const std::string& bundled_scene(const std::string& name);

}  // namespace congruence
