#pragma once

#include <json.hpp>
#include <string>

#include "funcineq/convex.hpp"
#include "funcineq/extended.hpp"
#include "funcineq/space.hpp"

namespace funcineq::io {

using Json = nlohmann::ordered_json;

/// Space document: points, dist | (coords, metric), weights, optional edges.
MetricMeasureSpace space_from_json(const Json& doc);
Json space_to_json(const MetricMeasureSpace& space);
MetricMeasureSpace read_space(const std::string& path);

/// Field document: {"values": [...], "positive": bool}.
ScalarField field_from_json(const Json& doc);
ScalarField read_field(const std::string& path);
/// Reads a field and checks it against the host space.
ScalarField read_field(const std::string& path, const MetricMeasureSpace& space);

/// Measure document: {"weights": [...]} (an optional "id" labels it in reports).
Eigen::VectorXd read_measure(const std::string& path, const MetricMeasureSpace& space);

/// Profile document: {"kind": identity|quadratic|phi1|linear_offset|grid, "params": [...],
/// "knots": [...], "values": [...]}.
ConvexProfile profile_from_json(const Json& doc);

/// Inline profile: identity, quadratic:<l>, phi1:<l>, linear_offset:<M>:<l>, or a path
/// to a profile document.
ConvexProfile parse_profile(const std::string& spec);

/// Finite values as numbers, +inf as the string "inf".
Json to_json(Extended e);
Json to_json(const Eigen::VectorXd& v);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

Json read_json(const std::string& path);

}  // namespace funcineq::io
