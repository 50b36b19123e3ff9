#pragma once

#include <iosfwd>
#include <json.hpp>

#include "obd/campaign.hpp"

namespace obd {

using Json = nlohmann::ordered_json;

/// Version of the CSV and JSON layouts written by this library.
constexpr int kSchemaVersion = 1;

/// {"n": N, "re": [...], "im": [...]}.
Json state_to_json(const TwoModeState& state);
TwoModeState state_from_json(const Json& j);

/// Every key is optional and defaults to the CampaignConfig default. Unknown
/// keys and type errors raise DomainError naming the offending key path.
CampaignConfig config_from_json(const Json& j);
Json config_to_json(const CampaignConfig& config);

Json stats_to_json(const SampleStats& s);

/// Config echo, state summary, statistics and prediction. No timing data, so
/// equal seeds give equal documents.
Json result_to_json(const CampaignResult& result);

/// repetition,estimate,deviation,ambiguous
void write_estimates_csv(std::ostream& os, const CampaignResult& result);

/// "inf", "undefined" or the number.
Json extended_to_json(const ExtendedReal& v);

}  // namespace obd
