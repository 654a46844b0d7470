#include "savcd/sas.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace savcd {

namespace {

constexpr const char* kPreambleTask =
    "You are an expert data augmentation analyst. Your task is to select the "
    "single most semantically disruptive image augmentation that most "
    "effectively invalidates the question's premise or prevents a confident "
    "answer.";
constexpr const char* kPreambleReason =
    " Provide a clear reason explaining why the augmentation is chosen, then "
    "state your final choice.";
constexpr const char* kPreambleNoReason = " State your final choice.";

constexpr const char* kAugmentationBlock =
    "## Augmentations and Their Effects ##\n"
    "\n"
    "- Vertical flip: Flips image top-to-bottom. Disrupts questions about "
    "\"above\", \"below\", \"under\" or reading orientation.\n"
    "\n"
    "- Color inversion: Replaces each color with its complement. Disrupts "
    "questions relying on accurate color identification.\n"
    "\n"
    "- Random crop: Removes random parts of the image. Disrupts questions "
    "requiring global context or peripheral objects.\n"
    "\n"
    "- Random mask: Occludes portions of the image. Disrupts object presence, "
    "count, or attribute recognition.\n"
    "\n"
    "- Noise: Adds visual distortion. Disrupts questions requiring small "
    "details, texture, or text clarity.\n"
    "\n"
    "- Horizontal flip: Flips the image left-to-right. Disrupts questions "
    "about left/right positioning and left-to-right text reading.";

constexpr const char* kAnswerRules =
    "If multiple augmentations could disrupt the question, select the one "
    "whose effect is most direct and unambiguous. You must choose one of the "
    "given augmentations following the ";

const std::array<SasExample, 6> kExamples = {{
    {"Is the mirror above the TV?",
     "The question focuses on vertical positioning. Vertical flip reverses "
     "top and bottom, making \"above\" mean \"below,\" invalidating the "
     "question. Other augmentations don't affect vertical relationships.",
     "vertical flip", AugmentationKind::VerticalFlip},
    {"Is this photo taken indoors?",
     "The question requires identifying a specific environmental context. "
     "Random crop may exclude key background elements like trees, "
     "invalidating the question. Flips, color inversion, noise, and random "
     "mask don't directly affect scene context.",
     "random crop", AugmentationKind::RandomCrop},
    {"Are there any green beans in the image?",
     "The question requires identifying a specific color. Color inversion "
     "changes green to its complement, invalidating the question. Flips, "
     "noise, random mask, and random crop don't target color directly.",
     "color inversion", AugmentationKind::ColorInversion},
    {"How many people are in the image?",
     "The question requires counting visible people. Random mask can "
     "completely obscure one or more people, making the exact count "
     "impossible. Noise obscures details but typically doesn't hide entire "
     "objects, allowing approximate counting. Flips and color inversion "
     "don't affect object visibility or count.",
     "random mask", AugmentationKind::RandomMask},
    {"Is the cat on the right side of the laptop?",
     "The question relies on horizontal positioning. Horizontal flip "
     "reverses left and right, making \"right\" mean \"left\", invalidating "
     "the question. Other augmentations don't target horizontal positions.",
     "horizontal flip", AugmentationKind::HorizontalFlip},
    {"Does this artwork exist in the form of painting?",
     "The question requires identifying the texture of the artwork. Noise "
     "obscures fine details, making it hard to identify the medium. Other "
     "augmentations don't target texture details.",
     "noise", AugmentationKind::Noise},
}};

bool wants_reasoning(SasTemplate t) {
    return t == SasTemplate::Full || t == SasTemplate::NoIcl;
}

bool wants_examples(SasTemplate t) {
    return t == SasTemplate::Full || t == SasTemplate::NoReasoning;
}

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

// Matches a line of the form "<ws><marker><rest>" case-insensitively and
// returns rest on success.
bool match_marker(std::string_view line, std::string_view marker,
                  std::string_view* rest) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
    }
    if (line.size() - i < marker.size()) {
        return false;
    }
    for (std::size_t k = 0; k < marker.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(line[i + k])) !=
            std::tolower(static_cast<unsigned char>(marker[k]))) {
            return false;
        }
    }
    *rest = line.substr(i + marker.size());
    return true;
}

struct Line {
    std::size_t begin;  // offset of first char
    std::size_t end;    // offset one past last char (before the newline)
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t nl = text.find('\n', begin);
        if (nl == std::string_view::npos) {
            lines.push_back({begin, text.size()});
            break;
        }
        lines.push_back({begin, nl});
        begin = nl + 1;
    }
    return lines;
}

}  // namespace

std::string to_string(SasTemplate t) {
    switch (t) {
        case SasTemplate::Full: return "full";
        case SasTemplate::NoReasoning: return "no-reasoning";
        case SasTemplate::NoIcl: return "no-icl";
        case SasTemplate::Minimal: return "minimal";
    }
    throw std::invalid_argument("unknown sas template");
}

SasTemplate sas_template_from_string(const std::string& name) {
    if (name == "full") return SasTemplate::Full;
    if (name == "no-reasoning") return SasTemplate::NoReasoning;
    if (name == "no-icl") return SasTemplate::NoIcl;
    if (name == "minimal") return SasTemplate::Minimal;
    throw std::invalid_argument("unknown sas template: " + name);
}

const std::array<SasExample, 6>& sas_examples() { return kExamples; }

std::string template_text(SasTemplate template_id) {
    const bool reasoning = wants_reasoning(template_id);
    std::string out = kPreambleTask;
    out += reasoning ? kPreambleReason : kPreambleNoReason;
    out += "\n\n";
    out += kAugmentationBlock;
    out += "\n\n";
    if (wants_examples(template_id)) {
        out += "## Examples ##\n";
        for (const SasExample& ex : kExamples) {
            out += "\nQuestion: \"";
            out += ex.question;
            out += "\"\n";
            if (reasoning) {
                out += "Reason: ";
                out += ex.reason;
                out += "\n";
            }
            out += "Choice: ";
            out += ex.choice_text;
            out += "\n";
        }
        out += "\n";
    }
    out += "## Your Answer ##\n\n";
    out += kAnswerRules;
    if (reasoning) {
        out += "\"Reason:\" and \"Choice:\" format.";
    } else {
        out += "\"Choice:\" format.";
    }
    out += "\n\nQuestion: \"{text}\"\n";
    return out;
}

SasPrompt render_prompt(SasTemplate template_id, const std::string& query) {
    if (query.empty()) {
        throw std::invalid_argument("sas query must be nonempty");
    }
    std::string text = template_text(template_id);
    const std::string slot = "{text}";
    std::size_t pos = text.find(slot);
    text.replace(pos, slot.size(), query);
    return SasPrompt{template_id, std::move(text)};
}

SasOutcome parse_g(const std::string& raw, AugmentationKind fallback) {
    std::vector<Line> lines = split_lines(raw);

    // Last "Choice:" line wins; models often restate the examples first.
    std::ptrdiff_t choice_line = -1;
    std::string_view choice_value;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(lines.size()) - 1; i >= 0;
         --i) {
        std::string_view line(raw.data() + lines[static_cast<std::size_t>(i)].begin,
                              lines[static_cast<std::size_t>(i)].end -
                                  lines[static_cast<std::size_t>(i)].begin);
        std::string_view rest;
        if (match_marker(line, "choice:", &rest)) {
            choice_line = i;
            choice_value = rest;
            break;
        }
    }
    if (choice_line < 0) {
        return SasOutcome{raw, fallback, false, raw};
    }
    std::optional<AugmentationKind> kind = augmentation_from_string(choice_value);
    if (!kind) {
        return SasOutcome{raw, fallback, false, raw};
    }

    // Reason: text after the last "Reason:" marker before the choice line,
    // or everything before the choice line if there is no marker.
    std::size_t reason_start = 0;
    for (std::ptrdiff_t i = choice_line - 1; i >= 0; --i) {
        std::string_view line(raw.data() + lines[static_cast<std::size_t>(i)].begin,
                              lines[static_cast<std::size_t>(i)].end -
                                  lines[static_cast<std::size_t>(i)].begin);
        std::string_view rest;
        if (match_marker(line, "reason:", &rest)) {
            reason_start = lines[static_cast<std::size_t>(i)].end - rest.size();
            break;
        }
    }
    std::size_t reason_end = lines[static_cast<std::size_t>(choice_line)].begin;
    std::string reason =
        trim(std::string_view(raw).substr(reason_start, reason_end - reason_start));
    return SasOutcome{std::move(reason), *kind, true, raw};
}

int sas_generation_cap(SasTemplate t) { return wants_reasoning(t) ? 256 : 16; }

SasOutcome select_augmentation(Backend& backend, const std::string& query,
                               SasTemplate template_id, AugmentationKind fallback) {
    SasPrompt prompt = render_prompt(template_id, query);
    ScopedSession session(backend, std::nullopt);  // text-only pass
    std::string raw =
        backend.generate_text(session.id(), prompt.rendered_text,
                              sas_generation_cap(template_id), /*greedy=*/true);
    return parse_g(raw, fallback);
}

}  // namespace savcd
