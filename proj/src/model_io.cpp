#include "trussqaoa/model_io.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "trussqaoa/error.hpp"

namespace trussqaoa {

namespace {

using nlohmann::json;

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + byte, '\n'));
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InputError(fmt::format("{}: missing field '{}'", where, key));
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number()) {
    throw InputError(fmt::format("{}.{}: expected a number", where, key));
  }
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) {
    throw InputError(fmt::format("{}.{}: expected an integer", where, key));
  }
  return v.get<int>();
}

template <typename T>
std::array<T, 2> pair_of(const json& obj, const char* key,
                         const std::string& where, std::array<T, 2> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw InputError(
        fmt::format("{}.{}: expected a two-element array", where, key));
  }
  std::array<T, 2> out{};
  for (std::size_t k = 0; k < 2; ++k) {
    if constexpr (std::is_same_v<T, bool>) {
      if (v[k].is_boolean()) {
        out[k] = v[k].get<bool>();
      } else if (v[k].is_number_integer()) {
        out[k] = v[k].get<int>() != 0;
      } else {
        throw InputError(
            fmt::format("{}.{}[{}]: expected a boolean", where, key, k));
      }
    } else {
      if (!v[k].is_number()) {
        throw InputError(
            fmt::format("{}.{}[{}]: expected a number", where, key, k));
      }
      out[k] = v[k].get<T>();
    }
  }
  return out;
}

}  // namespace

TrussModel parse_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("malformed model file: {}", e.what()),
                     line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw InputError("model file must hold a JSON object");

  const auto& jnodes = field(doc, "nodes", "model");
  const auto& jrods = field(doc, "rods", "model");
  const auto& jmat = field(doc, "material", "model");
  if (!jnodes.is_array() || !jrods.is_array()) {
    throw InputError("model: 'nodes' and 'rods' must be arrays");
  }

  std::vector<Node2D> nodes;
  for (std::size_t k = 0; k < jnodes.size(); ++k) {
    const std::string where = fmt::format("nodes[{}]", k);
    Node2D node;
    node.id = integer(jnodes[k], "id", where);
    node.x = number(jnodes[k], "x", where);
    node.y = number(jnodes[k], "y", where);
    const auto fix = pair_of<bool>(jnodes[k], "fix", where, {false, false});
    const auto load = pair_of<double>(jnodes[k], "load", where, {0.0, 0.0});
    node.fixed_x = fix[0];
    node.fixed_y = fix[1];
    node.load_x = load[0];
    node.load_y = load[1];
    nodes.push_back(node);
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const Node2D& a, const Node2D& b) { return a.id < b.id; });

  std::vector<Rod> rods;
  for (std::size_t k = 0; k < jrods.size(); ++k) {
    const std::string where = fmt::format("rods[{}]", k);
    Rod rod;
    rod.id = integer(jrods[k], "id", where);
    rod.node_i = integer(jrods[k], "i", where);
    rod.node_j = integer(jrods[k], "j", where);
    rods.push_back(rod);
  }
  std::sort(rods.begin(), rods.end(),
            [](const Rod& a, const Rod& b) { return a.id < b.id; });

  const double e = number(jmat, "E", "material");
  const double a0 = number(jmat, "A0", "material");
  try {
    return make_truss_model(std::move(nodes), std::move(rods), e, a0);
  } catch (const InvalidGeometry& err) {
    throw InputError(fmt::format("invalid model: {}", err.what()));
  }
}

TrussModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(fmt::format("cannot open model file '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model_json(buf.str());
  } catch (const InputError& err) {
    throw InputError(fmt::format("{}: {}", path.string(), err.what()));
  }
}

std::string model_to_json(const TrussModel& model) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : model.nodes) {
    doc["nodes"].push_back({{"id", n.id},
                            {"x", n.x},
                            {"y", n.y},
                            {"fix", {n.fixed_x, n.fixed_y}},
                            {"load", {n.load_x, n.load_y}}});
  }
  doc["rods"] = json::array();
  for (const auto& r : model.rods) {
    doc["rods"].push_back({{"id", r.id}, {"i", r.node_i}, {"j", r.node_j}});
  }
  doc["material"] = {{"E", model.young_modulus}, {"A0", model.initial_area}};
  return doc.dump(2);
}

}  // namespace trussqaoa
