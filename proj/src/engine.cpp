#include "savcd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "savcd/errors.hpp"

namespace savcd {

namespace {

// Shared plausibility filter: keep tokens whose mass reaches ratio * max.
CandidateSet filter_by_ratio(const ProbVector& p, double ratio) {
    const auto& probs = p.probs();
    double max_prob = *std::max_element(probs.begin(), probs.end());
    double cutoff = ratio * max_prob;
    CandidateSet cs;
    cs.threshold_used = ratio;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] >= cutoff) {
            cs.members.push_back(static_cast<TokenId>(i));
        }
    }
    return cs;
}

CandidateSet full_vocabulary(int vocab_size) {
    CandidateSet cs;
    cs.threshold_used = 0.0;
    cs.members.resize(static_cast<std::size_t>(vocab_size));
    for (int i = 0; i < vocab_size; ++i) {
        cs.members[static_cast<std::size_t>(i)] = i;
    }
    return cs;
}

}  // namespace

std::string to_string(ThresholdMode mode) {
    switch (mode) {
        case ThresholdMode::None: return "none";
        case ThresholdMode::Apc: return "apc";
        case ThresholdMode::Sat: return "sat";
        case ThresholdMode::Hns: return "hns";
    }
    throw std::invalid_argument("unknown threshold mode");
}

std::string to_string(SamplingMode mode) {
    switch (mode) {
        case SamplingMode::Greedy: return "greedy";
        case SamplingMode::Multinomial: return "multinomial";
    }
    throw std::invalid_argument("unknown sampling mode");
}

ThresholdMode threshold_mode_from_string(const std::string& name) {
    if (name == "none") return ThresholdMode::None;
    if (name == "apc") return ThresholdMode::Apc;
    if (name == "sat") return ThresholdMode::Sat;
    if (name == "hns") return ThresholdMode::Hns;
    throw std::invalid_argument("unknown threshold mode: " + name);
}

SamplingMode sampling_mode_from_string(const std::string& name) {
    if (name == "greedy") return SamplingMode::Greedy;
    if (name == "multinomial") return SamplingMode::Multinomial;
    throw std::invalid_argument("unknown sampling mode: " + name);
}

void DecodingParams::validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw std::invalid_argument("alpha must be finite and >= 0");
    }
    if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) {
        throw std::invalid_argument("beta must lie in [0, 1]");
    }
    if (threshold_mode == ThresholdMode::Sat && !(gamma < 0.0)) {
        throw std::invalid_argument("sat truncation requires gamma < 0");
    }
    if (threshold_mode == ThresholdMode::Hns &&
        (!std::isfinite(gamma) || gamma == 0.0)) {
        throw std::invalid_argument("hns truncation requires nonzero gamma");
    }
    if (max_tokens < 1) {
        throw std::invalid_argument("max_tokens must be >= 1");
    }
}

bool CandidateSet::contains(TokenId token) const {
    return std::binary_search(members.begin(), members.end(), token);
}

CandidateSet apc_candidates(const ProbVector& p, double beta) {
    if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) {
        throw std::invalid_argument("apc beta must lie in [0, 1]");
    }
    return filter_by_ratio(p, beta);
}

CandidateSet sat_candidates(const LogitVector& expert_logits, double gamma) {
    ProbVector p = softmax(expert_logits);
    return filter_by_ratio(p, h_decay(p, gamma));
}

CandidateSet hns_candidates(const LogitVector& expert_logits, double gamma) {
    ProbVector p = softmax(expert_logits);
    return filter_by_ratio(p, h_ns(p, gamma));
}

LogitVector contrast(const LogitVector& l, const LogitVector& l_prime, double alpha) {
    if (l.vocab_size() != l_prime.vocab_size()) {
        throw std::invalid_argument("contrast requires matching vocab sizes");
    }
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw std::invalid_argument("contrast alpha must be finite and >= 0");
    }
    const auto& a = l.scores();
    const auto& b = l_prime.scores();
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw std::invalid_argument(
                "contrast requires fully finite logits; mask after contrast");
        }
        // (1+alpha)*a - alpha*b, written as a + alpha*(a - b) so that
        // identical inputs cancel exactly before the scale-up.
        out[i] = a[i] + alpha * (a[i] - b[i]);
    }
    return LogitVector(std::move(out));
}

LogitVector mask_to_candidates(const LogitVector& l_cd, const CandidateSet& cs) {
    if (cs.members.empty()) {
        throw std::invalid_argument("candidate set must be nonempty");
    }
    const auto& in = l_cd.scores();
    if (cs.members.size() == in.size()) {
        return l_cd;  // full vocabulary, nothing to mask
    }
    std::vector<double> out(in.size(), kMaskSentinel);
    for (TokenId token : cs.members) {
        if (token < 0 || static_cast<std::size_t>(token) >= in.size()) {
            throw std::invalid_argument("candidate index outside vocabulary");
        }
        out[static_cast<std::size_t>(token)] = in[static_cast<std::size_t>(token)];
    }
    return LogitVector(std::move(out));
}

TokenId sample(const LogitVector& l_final, SamplingMode mode, SampleRng& rng) {
    if (mode == SamplingMode::Greedy) {
        return argmax(l_final);
    }
    ProbVector p = softmax(l_final);
    const auto& probs = p.probs();
    double u = rng.next_unit();
    double acc = 0.0;
    TokenId last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) {
            continue;
        }
        last_positive = static_cast<TokenId>(i);
        acc += probs[i];
        if (u < acc) {
            return last_positive;
        }
    }
    // u fell into the rounding tail past the accumulated sum.
    return last_positive;
}

namespace {

LogitVector step_logits(Backend& backend, const std::string& session_id,
                        const std::vector<TokenId>& tokens, int vocab_size,
                        int step, const char* role) {
    LogitVector logits = [&] {
        try {
            return backend.next_logits(session_id, tokens);
        } catch (const BackendError& e) {
            if (e.step() >= 0) {
                throw;
            }
            throw BackendError(std::string(e.what()) + " (" + role + " pass, step " +
                                   std::to_string(step) + ")",
                               step);
        }
    }();
    if (logits.vocab_size() != vocab_size) {
        throw BackendError(std::string(role) + " logits length " +
                               std::to_string(logits.vocab_size()) +
                               " does not match session vocab " +
                               std::to_string(vocab_size) + " at step " +
                               std::to_string(step),
                           step);
    }
    return logits;
}

}  // namespace

DecodeResult decode(Backend& backend, const std::optional<RasterImage>& image,
                    const std::optional<RasterImage>& augmented_image,
                    const std::vector<TokenId>& prompt_tokens,
                    const DecodingParams& params) {
    params.validate();
    if (prompt_tokens.empty()) {
        throw std::invalid_argument("decode requires a nonempty prompt context");
    }
    if (image && augmented_image && !image->same_dimensions(*augmented_image)) {
        throw std::invalid_argument("clean and augmented images must share dimensions");
    }

    ScopedSession expert(backend, image);
    ScopedSession amateur(backend, augmented_image);
    const int vocab_size = expert.info().vocab_size;
    if (amateur.info().vocab_size != vocab_size) {
        throw BackendError("expert and amateur sessions disagree on vocab size");
    }
    const TokenId end_token = expert.info().end_token;

    SampleRng rng(params.seed);
    std::vector<TokenId> context = prompt_tokens;
    DecodeResult result;
    result.stop_reason = StopReason::MaxTokens;

    for (int t = 0; t < params.max_tokens; ++t) {
        LogitVector expert_logits =
            step_logits(backend, expert.id(), context, vocab_size, t, "expert");
        LogitVector amateur_logits =
            step_logits(backend, amateur.id(), context, vocab_size, t, "amateur");

        ProbVector expert_probs = softmax(expert_logits);
        double entropy = entropy_bits(expert_probs).value;

        LogitVector contrasted = contrast(expert_logits, amateur_logits, params.alpha);

        CandidateSet candidates;
        switch (params.threshold_mode) {
            case ThresholdMode::None:
                candidates = full_vocabulary(vocab_size);
                break;
            case ThresholdMode::Apc:
                candidates = apc_candidates(expert_probs, params.beta);
                break;
            case ThresholdMode::Sat:
                candidates = filter_by_ratio(expert_probs,
                                             h_decay(expert_probs, params.gamma));
                break;
            case ThresholdMode::Hns:
                candidates = filter_by_ratio(expert_probs,
                                             h_ns(expert_probs, params.gamma));
                break;
        }

        LogitVector masked = mask_to_candidates(contrasted, candidates);
        TokenId chosen = sample(masked, params.sampling, rng);

        double beta_t = candidates.threshold_used;
        result.traces.push_back(StepTrace{t, std::move(expert_logits),
                                          std::move(amateur_logits),
                                          std::move(contrasted), beta_t, entropy,
                                          std::move(candidates), chosen});

        result.tokens.push_back(chosen);
        context.push_back(chosen);
        if (chosen == end_token) {
            result.stop_reason = StopReason::EndToken;
            break;
        }
    }
    return result;
}

}  // namespace savcd
