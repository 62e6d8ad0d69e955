#pragma once

// Persisted JSON form of the domain types. from_json here trusts its input
// (store snapshots, fixtures); untrusted model output goes through
// grow/profile_schema.hpp instead.

#include <nlohmann/json.hpp>

#include "grow/domain.hpp"

namespace grow {

using json = nlohmann::json;

void to_json(json& j, const Demographic& d);
void to_json(json& j, const MentalHealthProfile& m);
void to_json(json& j, const Goal& g);
void to_json(json& j, const BevsAssessment& a);
void to_json(json& j, const BevsRecord& b);
void to_json(json& j, const CommunicationStyle& s);
void to_json(json& j, const UserProfile& p);

void from_json(const json& j, Goal& g);
void from_json(const json& j, BevsRecord& b);
void from_json(const json& j, CommunicationStyle& s);
void from_json(const json& j, UserProfile& p);

json traits_to_json(const std::map<Trait, TraitLevel>& traits);

}  // namespace grow
