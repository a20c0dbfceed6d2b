#include <sstream>

#include "fiblab/cli.hpp"
#include "fiblab/error.hpp"

namespace fiblab::cli {

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"square", "f(x,y) = (x^2 - y^2, 2xy), the real form of z^2",
       R"({"name":"square","n":2,"p":2,"components":[[{"c":1,"e":[2,0]},{"c":-1,"e":[0,2]}],[{"c":2,"e":[1,1]}]]})",
       1.0, 0.05},
      {"nondreg-4-3", "f(x,y,z,w) = (x^2 - y^2 z, y, w), not d-regular",
       R"({"name":"nondreg-4-3","n":4,"p":3,"components":[[{"c":1,"e":[2,0,0,0]},{"c":-1,"e":[0,2,1,0]}],[{"c":1,"e":[0,1,0,0]}],[{"c":1,"e":[0,0,0,1]}]]})",
       0.5, 0.005},
      {"quadrics-3-2", "f = (x1^2 - x2^2 - x3^2, x2^2 - x3^2), diagonal quadrics with (a,b) = (1,0), (-1,1), (-1,-1)",
       R"({"name":"quadrics-3-2","n":3,"p":2,"components":[[{"c":1,"e":[2,0,0]},{"c":-1,"e":[0,2,0]},{"c":-1,"e":[0,0,2]}],[{"c":1,"e":[0,2,0]},{"c":-1,"e":[0,0,2]}]]})",
       0.5, 0.005},
      {"identity-2", "f(x,y) = (x, y)",
       R"({"name":"identity-2","n":2,"p":2,"components":[[{"c":1,"e":[1,0]}],[{"c":1,"e":[0,1]}]]})", 1.0,
       0.05},
      {"projection-3-2", "f(x,y,z) = (x, y)",
       R"({"name":"projection-3-2","n":3,"p":2,"components":[[{"c":1,"e":[1,0,0]}],[{"c":1,"e":[0,1,0]}]]})",
       1.0, 0.05},
  };
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog_entries())
    if (e.name == name) return e;
  std::ostringstream msg;
  msg << "map: unknown catalog entry '" << name << "'; catalog:";
  for (const auto& e : catalog_entries()) msg << ' ' << e.name;
  throw InputError(msg.str());
}

PolynomialMap catalog_map(const std::string& name) { return parse_map(catalog_entry(name).map_json); }

}  // namespace fiblab::cli
