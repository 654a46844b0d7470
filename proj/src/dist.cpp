#include "savcd/dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace savcd {

LogitVector::LogitVector(std::vector<double> scores)
    : scores_(std::move(scores)) {
    if (scores_.empty()) {
        throw std::invalid_argument("LogitVector: empty score vector");
    }
    bool any_finite = false;
    for (const double s : scores_) {
        if (std::isnan(s)) {
            throw std::invalid_argument("LogitVector: NaN score");
        }
        if (std::isinf(s) && s > 0.0) {
            throw std::invalid_argument("LogitVector: +inf score");
        }
        if (std::isfinite(s)) {
            any_finite = true;
        }
    }
    if (!any_finite) {
        throw std::invalid_argument("LogitVector: all entries are masked");
    }
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("ProbVector: empty");
    }
    double sum = 0.0;
    for (const double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("ProbVector: element outside [0, 1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "ProbVector: mass sums to " + std::to_string(sum));
    }
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ProbVector softmax(const LogitVector& l) {
    const auto& s = l.scores();
    const double m = *std::max_element(s.begin(), s.end());
    std::vector<double> out(s.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == kMaskSentinel) {
            continue; // exact zero
        }
        out[i] = std::exp(s[i] - m);
        sum += out[i];
    }
    for (double& p : out) {
        p /= sum;
    }
    return ProbVector(std::move(out));
}

EntropyBits entropy_bits(const ProbVector& p) {
    double h = 0.0;
    for (const double pi : p.probs()) {
        if (pi > 0.0) {
            h -= pi * std::log2(pi);
        }
    }
    const double bound =
        std::log2(static_cast<double>(p.vocab_size())) + 1e-9;
    if (h < 0.0 || h > bound) {
        throw std::domain_error("entropy_bits: value outside [0, log2 |V|]");
    }
    return EntropyBits{h};
}

double h_decay(const ProbVector& p, double gamma) {
    if (!(gamma < 0.0)) {
        throw std::invalid_argument(
            "h_decay: gamma must be strictly negative");
    }
    return sigmoid(gamma * entropy_bits(p).value);
}

double h_ns(const ProbVector& p, double gamma) {
    if (gamma == 0.0) {
        throw std::invalid_argument("h_ns: gamma must be nonzero");
    }
    const double h = entropy_bits(p).value;
    const double normalized = h / std::log2(static_cast<double>(p.vocab_size()));
    const double raw = std::pow(normalized, 1.0 / gamma);
    if (std::isnan(raw)) {
        return 1.0; // |V| = 1 gives 0/0; the lone token must survive
    }
    return std::clamp(raw, 1e-6, 1.0);
}

TokenId argmax(const LogitVector& l) {
    const auto& s = l.scores();
    TokenId best = -1;
    double best_score = kMaskSentinel;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::isfinite(s[i]) && s[i] > best_score) {
            best_score = s[i];
            best = static_cast<TokenId>(i);
        }
    }
    if (best < 0) {
        throw std::invalid_argument("argmax: no finite entry");
    }
    return best;
}

} // namespace savcd
