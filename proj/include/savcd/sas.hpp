#pragma once

#include <array>
#include <string>

#include "savcd/augment.hpp"
#include "savcd/backend.hpp"

namespace savcd {

// Prompt variants for the selection pass. Full carries the augmentation
// definitions, reasoning instruction, and in-context examples; the others
// strip the reasoning requirement, the examples block, or both.
enum class SasTemplate { Full, NoReasoning, NoIcl, Minimal };

std::string to_string(SasTemplate t);
SasTemplate sas_template_from_string(const std::string& name);

struct SasPrompt {
    SasTemplate template_id;
    std::string rendered_text;
};

struct SasOutcome {
    std::string reason;
    AugmentationKind choice;
    bool valid = false;  // false means the parser fell back
    std::string raw_output;
};

// One in-context example: question, reasoning text, and the choice exactly
// as it appears after "Choice:".
struct SasExample {
    const char* question;
    const char* reason;
    const char* choice_text;
    AugmentationKind kind;
};

const std::array<SasExample, 6>& sas_examples();

// Substitutes the query into the template's Question slot.
// Throws std::invalid_argument on an empty query.
SasPrompt render_prompt(SasTemplate template_id, const std::string& query);

// The template with the literal "{text}" placeholder left in place; what
// ships as the prompt asset file.
std::string template_text(SasTemplate template_id);

// Splits model output into (reason, choice). The last line starting with
// "Choice:" (case-insensitive, leading whitespace allowed) wins; the value is
// normalized and mapped through the augmentation synonym table. Never throws:
// unparseable output yields (raw text, fallback, valid=false).
SasOutcome parse_g(const std::string& raw, AugmentationKind fallback);

// Generation budget for the selection pass: reasoning variants get room for
// the trace, choice-only variants need just a few tokens.
int sas_generation_cap(SasTemplate t);

// Renders the prompt, runs one greedy text-only pass, parses the result.
// Transport errors propagate; parse failures resolve to the fallback.
SasOutcome select_augmentation(Backend& backend, const std::string& query,
                               SasTemplate template_id, AugmentationKind fallback);

}  // namespace savcd
