#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "savcd/engine.hpp"

namespace savcd {

// One JSONL line per decode step. Keys serialize alphabetically and floats
// shortest-roundtrip, so identical runs give byte-identical files.

nlohmann::json trace_line_json(const StepTrace& trace);

// Top-scoring (token, score) pairs, score descending then index ascending.
std::vector<std::pair<TokenId, double>> top_scores(const LogitVector& l,
                                                   std::size_t limit);

std::string trace_to_jsonl(const std::vector<StepTrace>& traces);
void write_trace_jsonl(const std::string& path,
                       const std::vector<StepTrace>& traces);

// Structural check mirroring the shipped trace-line schema document; returns
// false and fills `why` when a field is missing or mistyped.
bool matches_trace_schema(const nlohmann::json& line, std::string* why);

}  // namespace savcd
