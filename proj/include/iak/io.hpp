#pragma once

#include "iak/apu.hpp"
#include "iak/cps.hpp"
#include "iak/mdp.hpp"

#include <json.hpp>

#include <string>

namespace iak {

using Json = nlohmann::json;

Json mdp_to_json(const TwoAgentMDP& mdp);
TwoAgentMDP mdp_from_json(const Json& j);

Json policy_to_json(const TabularPolicy& pi);
TabularPolicy policy_from_json(const Json& j);

CpsConfig cps_config_from_json(const Json& j);
Json cps_config_to_json(const CpsConfig& cfg);

ApuConfig apu_config_from_json(const Json& j);
Json apu_config_to_json(const ApuConfig& cfg);

/// CSV rows "iter,gap,cost,objective", one per iterate.
std::string cps_trace_to_csv(const CpsTrace& trace);
/// CSV rows "epoch,cost,dist,objective".
std::string apu_trace_to_csv(const ApuTrace& trace);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Fixed-width repeatable float formatting for machine-read CSV output.
std::string format_double(double v);

} // namespace iak
