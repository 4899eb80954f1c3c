#pragma once

#include <string>

#include <json.hpp>

#include "detloop/bell.hpp"
#include "detloop/quantum.hpp"
#include "detloop/solver.hpp"

// JSON wire formats. Expressions: {nA, nB, cJoint (row-major), cA, cB,
// constant}; tables: {nA, nB, joint, margA, margB}; states: {dim, lambda,
// noise}; settings: {dim, vectors} with one row per setting.
namespace detloop {

void to_json(nlohmann::json& j, const BellExpression& e);
void from_json(const nlohmann::json& j, BellExpression& e);

void to_json(nlohmann::json& j, const CorrelationTable& t);
void from_json(const nlohmann::json& j, CorrelationTable& t);

void to_json(nlohmann::json& j, const SchmidtState& s);
void from_json(const nlohmann::json& j, SchmidtState& s);

void to_json(nlohmann::json& j, const MeasurementSettings& m);
void from_json(const nlohmann::json& j, MeasurementSettings& m);

void to_json(nlohmann::json& j, const DeterministicStrategy& s);
void from_json(const nlohmann::json& j, DeterministicStrategy& s);

void to_json(nlohmann::json& j, const ThresholdResult& r);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace detloop
