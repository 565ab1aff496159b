#pragma once

#include <nlohmann/json.hpp>

#include "recurtune/bandit.h"
#include "recurtune/cost.h"
#include "recurtune/domain.h"
#include "recurtune/sim.h"

namespace recurtune {

// JSON mappings for the value types. Absent optionals and unbounded values
// (flat prior variance, infinite window) are written as null.

void to_json(nlohmann::json& j, const JobSpec& v);
void from_json(const nlohmann::json& j, JobSpec& v);

void to_json(nlohmann::json& j, const Config& v);
void from_json(const nlohmann::json& j, Config& v);

void to_json(nlohmann::json& j, const CostSample& v);
void from_json(const nlohmann::json& j, CostSample& v);

void to_json(nlohmann::json& j, const Optimum& v);
void from_json(const nlohmann::json& j, Optimum& v);

void to_json(nlohmann::json& j, const ArmState& v);
void from_json(const nlohmann::json& j, ArmState& v);

void to_json(nlohmann::json& j, const RecurrenceRecord& v);
void from_json(const nlohmann::json& j, RecurrenceRecord& v);

void to_json(nlohmann::json& j, const ExperimentResult& v);
void from_json(const nlohmann::json& j, ExperimentResult& v);

}  // namespace recurtune
