#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "tgqa/eval/metrics.hpp"

namespace tgqa::eval {

nlohmann::json report_to_json(const EvalReport& report);
/// Reads aggregates and records back. Aggregates are recomputed from the
/// records and must agree with the stored ones, else FormatError.
EvalReport report_from_json(const nlohmann::json& j);

void write_report(const EvalReport& report, const std::string& path);
EvalReport read_report(const std::string& path);

void write_annotations(const std::vector<ErrorAnnotation>& rows, const std::string& path);
/// Rejects unknown categories and malformed lines with FormatError.
std::vector<ErrorAnnotation> read_annotations(const std::string& path);

}  // namespace tgqa::eval
