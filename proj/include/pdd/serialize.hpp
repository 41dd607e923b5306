#pragma once
// JSON forms of the library's result types (nlohmann::json, found by ADL).

#include "json.hpp"

#include "pdd/dual_process.hpp"
#include "pdd/frequencies.hpp"
#include "pdd/partition.hpp"
#include "pdd/stats.hpp"
#include "pdd/transition.hpp"
#include "pdd/urns.hpp"

namespace pdd {

void to_json(nlohmann::json& j, const Partition& p);      // [2,1]
void from_json(const nlohmann::json& j, Partition& p);
void to_json(nlohmann::json& j, const Frequencies& x);    // {"atoms": [...], "residual": r}
void to_json(nlohmann::json& j, const DeathPath& path);
void to_json(nlohmann::json& j, const DeathProbTable& table);
void to_json(nlohmann::json& j, const DensityEval& d);
void to_json(nlohmann::json& j, const MCReport& r);
void to_json(nlohmann::json& j, const ChiSquareResult& r);
void to_json(nlohmann::json& j, const ChiSquareReport& r);
void to_json(nlohmann::json& j, const FamilyReport& r);
void to_json(nlohmann::json& j, const RepresentationReport& r);
void to_json(nlohmann::json& j, const TwoSampleReport& r);
void to_json(nlohmann::json& j, const SplitUrnDraw& d);

const char* to_string(DensityForm form);

}  // namespace pdd
