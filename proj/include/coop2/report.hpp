// JSON serialization of certification, invariant-set and orbit results.
#pragma once

#include <json.hpp>

#include "coop2/certify.hpp"
#include "coop2/sim.hpp"

namespace coop2 {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const CertificationReport& rep);
nlohmann::json to_json(const InvariantSetCert& cert);
nlohmann::json to_json(const InvarianceReport& rep);
nlohmann::json to_json(const PeriodEstimate& est);
nlohmann::json params_json(const SystemModel& model);

}  // namespace coop2
