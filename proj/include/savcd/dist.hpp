#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace savcd {

using TokenId = std::int32_t;

// Logit value that excludes a token from the distribution: softmax maps it
// to exactly zero probability.
inline constexpr double kMaskSentinel =
    -std::numeric_limits<double>::infinity();

// Dense real-valued scores over the vocabulary. Elements are finite or the
// mask sentinel (-inf); +inf and NaN are rejected, as is a vector with no
// finite entry.
class LogitVector {
public:
    explicit LogitVector(std::vector<double> scores);

    std::size_t vocab_size() const noexcept { return scores_.size(); }
    const std::vector<double>& scores() const noexcept { return scores_; }
    double operator[](std::size_t i) const { return scores_[i]; }

private:
    std::vector<double> scores_;
};

// Normalized distribution: elements in [0, 1], summing to 1 within 1e-9.
class ProbVector {
public:
    explicit ProbVector(std::vector<double> probs);

    std::size_t vocab_size() const noexcept { return probs_.size(); }
    const std::vector<double>& probs() const noexcept { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }

private:
    std::vector<double> probs_;
};

// Shannon entropy in bits; bounded by log2 of the vocabulary size.
struct EntropyBits {
    double value = 0.0;
};

double sigmoid(double x) noexcept;

// Max-subtracted softmax. Sentinel entries map to exactly 0.
ProbVector softmax(const LogitVector& l);

// -sum p_i log2 p_i with the 0 log 0 = 0 convention.
EntropyBits entropy_bits(const ProbVector& p);

// Inverse-entropy threshold sigmoid(gamma * H(p)), gamma < 0. Range (0, 0.5],
// hitting 0.5 exactly on a zero-entropy distribution.
double h_decay(const ProbVector& p, double gamma);

// Normalized scaled entropy (H(p) / log2 |V|)^(1/gamma), clamped to
// [1e-6, 1]. Ablation comparator for the direct-proportional rule; the
// clamp absorbs the divergence at zero entropy.
double h_ns(const ProbVector& p, double gamma);

// Lowest index attaining the maximum finite score.
TokenId argmax(const LogitVector& l);

} // namespace savcd
