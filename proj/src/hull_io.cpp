#include "metacenter/hull_io.hpp"

#include <fstream>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

Vec3 point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigurationError("expected a 3-element point");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

HullSpec hull_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ConfigurationError("hull file must contain a JSON object");
    if (!doc.contains("mass_kg")) throw ConfigurationError("hull file is missing mass_kg");
    const double mass = doc.at("mass_kg").get<double>();
    const double rho = doc.value("water_density", kSeawaterDensity);

    if (doc.contains("box")) {
      const auto& box = doc.at("box");
      HullSpec hull = make_box_hull(box.at("length").get<double>(), box.at("beam").get<double>(),
                                    box.at("depth").get<double>(), mass, rho);
      if (doc.contains("cog")) hull.cog = point_from_json(doc.at("cog"));
      return hull;
    }

    HullSpec hull;
    hull.mass = mass;
    hull.water_density = rho;
    for (const auto& v : doc.at("vertices")) hull.vertices.push_back(point_from_json(v));
    for (const auto& f : doc.at("faces")) {
      if (!f.is_array() || f.size() != 3) throw ConfigurationError("faces must be index triples");
      hull.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    if (doc.contains("cog")) hull.cog = point_from_json(doc.at("cog"));
    validate_hull(hull);
    return hull;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed hull specification: ") + e.what());
  }
}

HullSpec load_hull(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open hull file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("hull file " + path.string() + " is not valid JSON: " + e.what());
  }
  return hull_from_json(doc);
}

nlohmann::json hull_to_json(const HullSpec& hull) {
  nlohmann::json doc;
  doc["mass_kg"] = hull.mass;
  doc["water_density"] = hull.water_density;
  doc["cog"] = {hull.cog.x(), hull.cog.y(), hull.cog.z()};
  auto& vs = doc["vertices"] = nlohmann::json::array();
  for (const auto& v : hull.vertices) vs.push_back({v.x(), v.y(), v.z()});
  auto& fs = doc["faces"] = nlohmann::json::array();
  for (const auto& f : hull.faces) fs.push_back({f[0], f[1], f[2]});
  return doc;
}

}  // namespace metacenter
