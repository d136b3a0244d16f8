#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "metacenter/hydrostatics.hpp"

namespace metacenter {

// Accepts either an explicit mesh
//   {"vertices": [[x,y,z],...], "faces": [[i,j,k],...], "mass_kg": m,
//    "water_density": rho, "cog": [x,y,z]}
// or a box shorthand
//   {"box": {"length": L, "beam": B, "depth": D}, "mass_kg": m}.
// Throws ConfigurationError on malformed input or an invalid hull.
HullSpec hull_from_json(const nlohmann::json& doc);
HullSpec load_hull(const std::filesystem::path& path);

nlohmann::json hull_to_json(const HullSpec& hull);

}  // namespace metacenter
