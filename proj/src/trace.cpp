#include "savcd/trace.hpp"

#include <algorithm>
#include <fstream>

#include "savcd/errors.hpp"

namespace savcd {

std::vector<std::pair<TokenId, double>> top_scores(const LogitVector& l,
                                                   std::size_t limit) {
    const auto& scores = l.scores();
    std::vector<TokenId> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<TokenId>(i);
    }
    std::size_t keep = std::min(limit, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(), [&](TokenId a, TokenId b) {
                          double sa = scores[static_cast<std::size_t>(a)];
                          double sb = scores[static_cast<std::size_t>(b)];
                          if (sa != sb) {
                              return sa > sb;
                          }
                          return a < b;
                      });
    std::vector<std::pair<TokenId, double>> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.emplace_back(order[i], scores[static_cast<std::size_t>(order[i])]);
    }
    return out;
}

namespace {

nlohmann::json top5_json(const LogitVector& l) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [token, score] : top_scores(l, 5)) {
        arr.push_back(nlohmann::json::array({token, score}));
    }
    return arr;
}

}  // namespace

nlohmann::json trace_line_json(const StepTrace& trace) {
    nlohmann::json j;
    j["t"] = trace.t;
    j["beta_t"] = trace.beta_t;
    j["entropy_bits"] = trace.expert_entropy_bits;
    j["candidates"] = trace.candidates.members;
    j["chosen"] = trace.chosen_token;
    j["expert_top5"] = top5_json(trace.expert_logits);
    j["amateur_top5"] = top5_json(trace.amateur_logits);
    j["contrasted_top5"] = top5_json(trace.contrasted_logits);
    return j;
}

std::string trace_to_jsonl(const std::vector<StepTrace>& traces) {
    std::string out;
    for (const StepTrace& trace : traces) {
        out += trace_line_json(trace).dump();
        out += '\n';
    }
    return out;
}

void write_trace_jsonl(const std::string& path,
                       const std::vector<StepTrace>& traces) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot open trace file: " + path);
    }
    out << trace_to_jsonl(traces);
    if (!out.good()) {
        throw ConfigError("cannot write trace file: " + path);
    }
}

bool matches_trace_schema(const nlohmann::json& line, std::string* why) {
    auto fail = [&](const std::string& message) {
        if (why != nullptr) {
            *why = message;
        }
        return false;
    };
    if (!line.is_object()) {
        return fail("line is not an object");
    }
    const char* int_fields[] = {"t", "chosen"};
    for (const char* field : int_fields) {
        if (!line.contains(field) || !line.at(field).is_number_integer()) {
            return fail(std::string(field) + " must be an integer");
        }
    }
    const char* float_fields[] = {"beta_t", "entropy_bits"};
    for (const char* field : float_fields) {
        if (!line.contains(field) || !line.at(field).is_number()) {
            return fail(std::string(field) + " must be a number");
        }
    }
    if (!line.contains("candidates") || !line.at("candidates").is_array()) {
        return fail("candidates must be an array");
    }
    for (const auto& c : line.at("candidates")) {
        if (!c.is_number_integer()) {
            return fail("candidates entries must be integers");
        }
    }
    const char* pair_fields[] = {"expert_top5", "amateur_top5", "contrasted_top5"};
    for (const char* field : pair_fields) {
        if (!line.contains(field) || !line.at(field).is_array()) {
            return fail(std::string(field) + " must be an array");
        }
        for (const auto& pair : line.at(field)) {
            if (!pair.is_array() || pair.size() != 2 ||
                !pair[0].is_number_integer() || !pair[1].is_number()) {
                return fail(std::string(field) + " entries must be [int, float]");
            }
        }
    }
    if (line.size() != 8) {
        return fail("line must have exactly the eight schema fields");
    }
    return true;
}

}  // namespace savcd
