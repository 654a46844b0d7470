#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "savcd/backend.hpp"
#include "savcd/dist.hpp"
#include "savcd/image.hpp"
#include "savcd/rng.hpp"

namespace savcd {

enum class ThresholdMode { None, Apc, Sat, Hns };
enum class SamplingMode { Greedy, Multinomial };

std::string to_string(ThresholdMode mode);
std::string to_string(SamplingMode mode);
ThresholdMode threshold_mode_from_string(const std::string& name);
SamplingMode sampling_mode_from_string(const std::string& name);

struct DecodingParams {
    double alpha = 1.0;          // amplification of the expert/amateur gap
    double beta = 0.1;           // static plausibility cutoff (apc mode)
    double gamma = -0.5;         // steepness of the entropy-adaptive cutoff
    ThresholdMode threshold_mode = ThresholdMode::Sat;
    SamplingMode sampling = SamplingMode::Multinomial;
    int max_tokens = 64;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

// Tokens surviving truncation at one step, ascending order. Always contains
// the expert argmax (no threshold above 1 is ever applied to the max itself).
struct CandidateSet {
    std::vector<TokenId> members;
    double threshold_used = 0.0;

    bool contains(TokenId token) const;
    int size() const { return static_cast<int>(members.size()); }
};

// {y : p(y) >= beta * max_w p(w)}. beta in [0,1]; beta=0 keeps everything.
CandidateSet apc_candidates(const ProbVector& p, double beta);

// Per-step cutoff from the expert distribution's own entropy: the sharper the
// distribution, the higher the bar. gamma < 0.
CandidateSet sat_candidates(const LogitVector& expert_logits, double gamma);

// Ablation comparator: normalized-entropy power rule, clamped to [1e-6, 1].
CandidateSet hns_candidates(const LogitVector& expert_logits, double gamma);

// (1+alpha)*l - alpha*l_prime, elementwise. Both inputs must be fully finite
// (masking happens after contrast) and share vocab_size.
LogitVector contrast(const LogitVector& l, const LogitVector& l_prime, double alpha);

// Entries outside the candidate set get the mask sentinel; members pass through.
LogitVector mask_to_candidates(const LogitVector& l_cd, const CandidateSet& cs);

// Greedy takes the argmax and consumes no generator state. Multinomial draws
// from softmax(l_final) using exactly one uniform variate.
TokenId sample(const LogitVector& l_final, SamplingMode mode, SampleRng& rng);

// Aggregate; construct with all fields (LogitVector has no empty state).
struct StepTrace {
    int t;
    LogitVector expert_logits;
    LogitVector amateur_logits;
    LogitVector contrasted_logits;  // pre-mask
    double beta_t;                  // 0.0 when no truncation was applied
    double expert_entropy_bits;
    CandidateSet candidates;
    TokenId chosen_token;

    int candidate_count() const { return candidates.size(); }
};

enum class StopReason { MaxTokens, EndToken };

struct DecodeResult {
    std::vector<TokenId> tokens;  // generated only, prompt excluded
    std::vector<StepTrace> traces;
    StopReason stop_reason = StopReason::MaxTokens;
};

// Full decoding loop: per step, expert logits on the clean image and amateur
// logits on the augmented one, contrast, truncate per threshold_mode, mask,
// sample. Stops on the backend's end token or after max_tokens. Backend
// failures surface as BackendError carrying the step index.
DecodeResult decode(Backend& backend, const std::optional<RasterImage>& image,
                    const std::optional<RasterImage>& augmented_image,
                    const std::vector<TokenId>& prompt_tokens,
                    const DecodingParams& params);

}  // namespace savcd
