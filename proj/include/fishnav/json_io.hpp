#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fishnav/control.hpp"
#include "fishnav/diagnostics.hpp"
#include "fishnav/recurrence.hpp"

namespace fishnav {

using json = nlohmann::json;

void to_json(json& j, const Vec& v);
void from_json(const json& j, Vec& v);

void to_json(json& j, const CorrectorEstimate& e);
void to_json(json& j, const DriftReport& r);
void to_json(json& j, const AlphaSweepRow& r);
void to_json(json& j, const InvarianceReport& r);
void to_json(json& j, const PushforwardReport& r);
void to_json(json& j, const RecurrenceReport& r);
void to_json(json& j, const ContinuousReturnReport& r);
void to_json(json& j, const PoissonScanReport& r);
void to_json(json& j, const NearReturn& r);
void to_json(json& j, const ControlSchedule& s);
void from_json(const json& j, ControlSchedule& s);
void to_json(json& j, const ReachSpec& s);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const json& j, ReachSpec& s);
void to_json(json& j, const ReachResult& r);
void to_json(json& j, const VerifyResult& r);

/// Reads a JSON document; InputError on I/O or syntax failure.
json read_json_file(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);

/// Comma-separated reals, e.g. "1,0" or "-2.5,1e-3".
Vec parse_vec_arg(const std::string& text);
std::vector<double> parse_list_arg(const std::string& text);

/// %.17g
std::string format_double(double v);

}  // namespace fishnav
