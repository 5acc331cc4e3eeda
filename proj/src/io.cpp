#include "funcineq/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "funcineq/errors.hpp"

namespace funcineq::io {

namespace {

const Json& require_key(const Json& doc, const char* key, const char* what) {
  if (!doc.is_object()) throw InputError(std::string(what) + ": document must be a JSON object");
  auto it = doc.find(key);
  if (it == doc.end()) throw InputError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

Eigen::VectorXd number_array(const Json& node, const std::string& field) {
  if (!node.is_array()) throw InputError("field '" + field + "' must be an array of numbers");
  Eigen::VectorXd out(static_cast<Index>(node.size()));
  for (std::size_t k = 0; k < node.size(); ++k) {
    if (!node[k].is_number())
      throw InputError("field '" + field + "' entry " + std::to_string(k) + " is not a number");
    out[static_cast<Index>(k)] = node[k].get<double>();
  }
  return out;
}

Eigen::MatrixXd number_matrix(const Json& node, const std::string& field) {
  if (!node.is_array() || node.empty())
    throw InputError("field '" + field + "' must be a non-empty array of rows");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].is_array() || node[i].size() != cols)
      throw InputError("field '" + field + "' row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!node[i][j].is_number())
        throw InputError("field '" + field + "' entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") is not a number");
      out(static_cast<Index>(i), static_cast<Index>(j)) = node[i][j].get<double>();
    }
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw InputError(what + ": '" + text + "' is not a number");
  return v;
}

}  // namespace

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

MetricMeasureSpace space_from_json(const Json& doc) {
  const Json& pts = require_key(doc, "points", "space");
  if (!pts.is_array()) throw InputError("field 'points' must be an array of strings");
  std::vector<std::string> points;
  for (const auto& p : pts) {
    if (!p.is_string()) throw InputError("field 'points' must contain strings");
    points.push_back(p.get<std::string>());
  }
  const Eigen::VectorXd weights = number_array(require_key(doc, "weights", "space"), "weights");

  std::vector<Edge> edges;
  if (auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) throw InputError("field 'edges' must be an array of [i, j] pairs");
    for (const auto& e : *it) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw InputError("field 'edges' must contain [i, j] integer pairs");
      const auto i = e[0].get<Index>(), j = e[1].get<Index>();
      const auto n = static_cast<Index>(points.size());
      if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw InputError("field 'edges' has an invalid pair [" + std::to_string(i) + ", " +
                         std::to_string(j) + "]");
      edges.emplace_back(i, j);
    }
  }

  const bool has_dist = doc.contains("dist"), has_coords = doc.contains("coords");
  if (has_dist == has_coords)
    throw InputError("space: exactly one of 'dist' or 'coords' must be given");
  if (has_dist)
    return MetricMeasureSpace::from_distances(std::move(points),
                                              number_matrix(doc.at("dist"), "dist"), weights,
                                              std::move(edges));
  const Json& metric = require_key(doc, "metric", "space");
  if (!metric.is_string() || (metric != "l1" && metric != "l2"))
    throw InputError("field 'metric' must be \"l1\" or \"l2\"");
  return MetricMeasureSpace::from_coordinates(
      std::move(points), number_matrix(doc.at("coords"), "coords"),
      metric == "l1" ? Combine::l1 : Combine::l2, weights, std::move(edges));
}

Json space_to_json(const MetricMeasureSpace& space) {
  Json doc;
  doc["points"] = space.points();
  if (space.coordinates() && !space.is_dense()) {
    const Eigen::MatrixXd& c = *space.coordinates();
    Json rows = Json::array();
    for (Index i = 0; i < c.rows(); ++i) {
      Json row = Json::array();
      for (Index j = 0; j < c.cols(); ++j) row.push_back(c(i, j));
      rows.push_back(row);
    }
    doc["coords"] = rows;
    doc["metric"] = space.coordinate_metric() == Combine::l1 ? "l1" : "l2";
  } else {
    if (space.size() > 2000) throw InputError("space_to_json: dense output limited to 2000 points");
    Json rows = Json::array();
    for (Index i = 0; i < space.size(); ++i) {
      Json row = Json::array();
      for (Index j = 0; j < space.size(); ++j) row.push_back(space.distance(i, j));
      rows.push_back(row);
    }
    doc["dist"] = rows;
  }
  doc["weights"] = to_json(space.weights());
  if (space.has_edges()) {
    Json edges = Json::array();
    for (const auto& [i, j] : space.edges()) edges.push_back({i, j});
    doc["edges"] = edges;
  }
  return doc;
}

MetricMeasureSpace read_space(const std::string& path) {
  try {
    return space_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

ScalarField field_from_json(const Json& doc) {
  ScalarField field;
  field.values = number_array(require_key(doc, "values", "field"), "values");
  if (auto it = doc.find("positive"); it != doc.end()) {
    if (!it->is_boolean()) throw InputError("field 'positive' must be a boolean");
    field.positive = it->get<bool>();
  }
  return field;
}

ScalarField read_field(const std::string& path) {
  try {
    return field_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

ScalarField read_field(const std::string& path, const MetricMeasureSpace& space) {
  ScalarField field = read_field(path);
  try {
    check_field(space, field.values, field.positive, "values");
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return field;
}

Eigen::VectorXd read_measure(const std::string& path, const MetricMeasureSpace& space) {
  try {
    const Json doc = read_json(path);
    Eigen::VectorXd w = number_array(require_key(doc, "weights", "measure"), "weights");
    if (w.size() != space.size())
      throw InputError("field 'weights' has length " + std::to_string(w.size()) + ", expected " +
                       std::to_string(space.size()));
    if (w.minCoeff() < 0.0) throw InputError("field 'weights' has a negative entry");
    if (std::abs(w.sum() - 1.0) > kMassTolerance)
      throw InputError("field 'weights' does not sum to 1");
    return w;
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

ConvexProfile profile_from_json(const Json& doc) {
  const Json& kind_node = require_key(doc, "kind", "profile");
  if (!kind_node.is_string()) throw InputError("field 'kind' must be a string");
  const std::string kind = kind_node.get<std::string>();
  // params is either a positional array or an object keyed by parameter name.
  Eigen::VectorXd params(0);
  if (doc.contains("params")) {
    const Json& node = doc.at("params");
    if (node.is_object()) {
      auto pick = [&](std::initializer_list<const char*> names) {
        for (const char* name : names)
          if (auto it = node.find(name); it != node.end()) {
            if (!it->is_number()) throw InputError(std::string("params.") + name + " must be a number");
            return it->get<double>();
          }
        throw InputError("profile '" + kind + "': params needs '" + *names.begin() + "'");
      };
      if (kind == "quadratic" || kind == "phi1") {
        params = Eigen::VectorXd::Constant(1, pick({"lambda", "lambda_t1", "lambda_2"}));
      } else if (kind == "linear_offset") {
        params.resize(2);
        params << pick({"M", "offset"}), pick({"lambda_exp", "lambda", "slope"});
      }
    } else {
      params = number_array(node, "params");
    }
  }
  auto need = [&](Index count) {
    if (params.size() != count)
      throw InputError("profile '" + kind + "' needs " + std::to_string(count) +
                       " entries in 'params'");
  };
  try {
    if (kind == "identity") return ConvexProfile::identity();
    if (kind == "quadratic") return need(1), ConvexProfile::quadratic(params[0]);
    if (kind == "phi1") return need(1), ConvexProfile::phi1_scaled(params[0]);
    if (kind == "linear_offset") return need(2), ConvexProfile::linear_offset(params[0], params[1]);
    if (kind == "grid") {
      const Eigen::VectorXd k = number_array(require_key(doc, "knots", "profile"), "knots");
      const Eigen::VectorXd v = number_array(require_key(doc, "values", "profile"), "values");
      return ConvexProfile::grid(std::vector<double>(k.begin(), k.end()),
                                 std::vector<double>(v.begin(), v.end()));
    }
  } catch (const std::domain_error& e) {
    throw InputError(std::string("profile: ") + e.what());
  }
  throw InputError("field 'kind' has unknown value '" + kind + "'");
}

ConvexProfile parse_profile(const std::string& spec) {
  if (spec.ends_with(".json")) {
    try {
      return profile_from_json(read_json(spec));
    } catch (const InputError& e) {
      throw InputError(spec + ": " + e.what());
    }
  }
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw InputError("empty profile specification");
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t k) { return parse_number(parts[k], "profile '" + spec + "'"); };
  auto need = [&](std::size_t count) {
    if (parts.size() != count + 1)
      throw InputError("profile '" + spec + "': '" + kind + "' takes " + std::to_string(count) +
                       " parameter(s)");
  };
  try {
    if (kind == "identity" || kind == "id") return need(0), ConvexProfile::identity();
    if (kind == "quadratic") return need(1), ConvexProfile::quadratic(arg(1));
    if (kind == "phi1") return need(1), ConvexProfile::phi1_scaled(arg(1));
    if (kind == "linear_offset") return need(2), ConvexProfile::linear_offset(arg(1), arg(2));
  } catch (const std::domain_error& e) {
    throw InputError("profile '" + spec + "': " + e.what());
  }
  throw InputError("unknown profile '" + spec +
                   "' (expected identity, quadratic:<l>, phi1:<l>, linear_offset:<M>:<l> or a "
                   ".json file)");
}

Json to_json(Extended e) {
  if (e.is_infinite()) return "inf";
  return e.value();
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename into '" + path + "': " + ec.message());
  }
}

}  // namespace funcineq::io
