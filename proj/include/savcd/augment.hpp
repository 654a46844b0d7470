#pragma once

#include "savcd/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace savcd {

// The six supported visual degradations. Crop and mask act on a random
// half-size patch; noise runs the forward diffusion process at step 500.
enum class AugmentationKind {
    RandomCrop,
    RandomMask,
    Noise,
    ColorInversion,
    HorizontalFlip,
    VerticalFlip,
};

inline constexpr int kAugmentationKindCount = 6;
inline constexpr int kNoiseDiffusionStep = 500;

const char* to_string(AugmentationKind kind);

// Accepts the canonical names plus common spellings ("random_mask",
// "Random-Mask", "noise addition", ...). Nullopt when nothing matches.
std::optional<AugmentationKind> augmentation_from_string(std::string_view text);

// Applies one augmentation. Output dimensions always equal input dimensions;
// the result is a pure function of (kind, image, seed).
RasterImage apply(AugmentationKind kind, const RasterImage& v,
                  std::uint64_t seed);

// Forward diffusion under a linear beta schedule (1e-4 to 0.02 over 1000
// steps): map pixels to [-1, 1], form sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
// with standard Gaussian eps, clamp, and map back to [0, 255].
// step must lie in [1, 1000].
RasterImage add_diffusion_noise(const RasterImage& v, int step,
                                std::uint64_t seed);

} // namespace savcd
