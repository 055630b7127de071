#pragma once

#include "cohaudit/bounds.hpp"
#include "cohaudit/coherence.hpp"
#include "cohaudit/rip.hpp"
#include "cohaudit/separation.hpp"
#include "cohaudit/trials.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cohaudit {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

/// Canonical text: keys sorted, no whitespace beyond a newline per object
/// member, floats printed with "%.12g", non-finite numbers as null.
/// Identical Json values always produce identical bytes.
std::string canonical_json(const Json& value);

Json to_json(const CoherenceProfile& p);
Json to_json(const FitReport& f);
Json to_json(const BoundReport<double>& b);
Json to_json(const SeparationCondition<double>& c);
Json to_json(const TailCheckRow& row);
Json to_json(const PhasePoint& p);
Json to_json(const SeparationStats& s);
Json to_json(const JointRipReport& r);

std::string histogram_csv(const CoherenceProfile& p);
std::string phase_csv(const std::vector<PhasePoint>& curve);
/// One value per line under a single-column header.
std::string values_csv(const std::string& header, const std::vector<double>& values);

/// "%.12g" with non-finite values spelled nan/inf.
std::string format_number(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cohaudit
