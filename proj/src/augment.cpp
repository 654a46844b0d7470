#include "savcd/augment.hpp"

#include "savcd/rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace savcd {

namespace {

struct Patch {
    int top, left, height, width;
};

// Half-size patch (ceil per axis) placed uniformly, fully inside the image.
// Top is drawn before left.
Patch draw_patch(const RasterImage& v, SampleRng& rng) {
    Patch p;
    p.height = (v.height + 1) / 2;
    p.width = (v.width + 1) / 2;
    p.top = static_cast<int>(rng.next_below(v.height - p.height + 1));
    p.left = static_cast<int>(rng.next_below(v.width - p.width + 1));
    return p;
}

RasterImage flip_horizontal(const RasterImage& v) {
    RasterImage out = make_image(v.height, v.width);
    for (int y = 0; y < v.height; ++y) {
        for (int x = 0; x < v.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = v.at(y, v.width - 1 - x, c);
            }
        }
    }
    return out;
}

RasterImage flip_vertical(const RasterImage& v) {
    RasterImage out = make_image(v.height, v.width);
    for (int y = 0; y < v.height; ++y) {
        for (int x = 0; x < v.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = v.at(v.height - 1 - y, x, c);
            }
        }
    }
    return out;
}

RasterImage invert_colors(const RasterImage& v) {
    RasterImage out = v;
    for (auto& b : out.pixels) {
        b = static_cast<std::uint8_t>(255 - b);
    }
    return out;
}

RasterImage mask_patch(const RasterImage& v, std::uint64_t seed) {
    SampleRng rng(seed);
    const Patch p = draw_patch(v, rng);
    RasterImage out = v;
    for (int y = p.top; y < p.top + p.height; ++y) {
        for (int x = p.left; x < p.left + p.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = 0;
            }
        }
    }
    return out;
}

// Keep the patch and rescale it back to the full size with bilinear
// interpolation, so downstream consumers always see a constant input size.
RasterImage crop_and_rescale(const RasterImage& v, std::uint64_t seed) {
    SampleRng rng(seed);
    const Patch p = draw_patch(v, rng);
    RasterImage out = make_image(v.height, v.width);
    const double sy = static_cast<double>(p.height) / v.height;
    const double sx = static_cast<double>(p.width) / v.width;
    for (int y = 0; y < v.height; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(p.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, p.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < v.width; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(p.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, p.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double v00 = v.at(p.top + y0, p.left + x0, c);
                const double v01 = v.at(p.top + y0, p.left + x1, c);
                const double v10 = v.at(p.top + y1, p.left + x0, c);
                const double v11 = v.at(p.top + y1, p.left + x1, c);
                const double interp = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                                      wy * ((1 - wx) * v10 + wx * v11);
                out.at(y, x, c) = static_cast<std::uint8_t>(
                    std::clamp(std::lround(interp), 0L, 255L));
            }
        }
    }
    return out;
}

double alpha_bar(int step) {
    constexpr int kSteps = 1000;
    constexpr double kBetaStart = 1e-4;
    constexpr double kBetaEnd = 0.02;
    double abar = 1.0;
    for (int s = 0; s < step; ++s) {
        const double beta =
            kBetaStart + (kBetaEnd - kBetaStart) * s / (kSteps - 1);
        abar *= 1.0 - beta;
    }
    return abar;
}

} // namespace

const char* to_string(AugmentationKind kind) {
    switch (kind) {
    case AugmentationKind::RandomCrop: return "random crop";
    case AugmentationKind::RandomMask: return "random mask";
    case AugmentationKind::Noise: return "noise";
    case AugmentationKind::ColorInversion: return "color inversion";
    case AugmentationKind::HorizontalFlip: return "horizontal flip";
    case AugmentationKind::VerticalFlip: return "vertical flip";
    }
    return "unknown";
}

std::optional<AugmentationKind> augmentation_from_string(
    std::string_view text) {
    std::string norm;
    norm.reserve(text.size());
    bool pending_space = false;
    for (const char ch : text) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isspace(u) || ch == '_' || ch == '-') {
            pending_space = !norm.empty();
            continue;
        }
        if (pending_space) {
            norm.push_back(' ');
            pending_space = false;
        }
        norm.push_back(static_cast<char>(std::tolower(u)));
    }

    static const std::array<std::pair<std::string_view, AugmentationKind>, 13>
        kSynonyms = {{
            {"random crop", AugmentationKind::RandomCrop},
            {"crop", AugmentationKind::RandomCrop},
            {"random mask", AugmentationKind::RandomMask},
            {"mask", AugmentationKind::RandomMask},
            {"noise", AugmentationKind::Noise},
            {"noise addition", AugmentationKind::Noise},
            {"color inversion", AugmentationKind::ColorInversion},
            {"color invert", AugmentationKind::ColorInversion},
            {"inversion", AugmentationKind::ColorInversion},
            {"horizontal flip", AugmentationKind::HorizontalFlip},
            {"hflip", AugmentationKind::HorizontalFlip},
            {"vertical flip", AugmentationKind::VerticalFlip},
            {"vflip", AugmentationKind::VerticalFlip},
        }};
    for (const auto& [name, kind] : kSynonyms) {
        if (norm == name) {
            return kind;
        }
    }
    return std::nullopt;
}

RasterImage apply(AugmentationKind kind, const RasterImage& v,
                  std::uint64_t seed) {
    validate_image(v);
    switch (kind) {
    case AugmentationKind::RandomCrop: return crop_and_rescale(v, seed);
    case AugmentationKind::RandomMask: return mask_patch(v, seed);
    case AugmentationKind::Noise:
        return add_diffusion_noise(v, kNoiseDiffusionStep, seed);
    case AugmentationKind::ColorInversion: return invert_colors(v);
    case AugmentationKind::HorizontalFlip: return flip_horizontal(v);
    case AugmentationKind::VerticalFlip: return flip_vertical(v);
    }
    throw std::invalid_argument("apply: unknown augmentation kind");
}

RasterImage add_diffusion_noise(const RasterImage& v, int step,
                                std::uint64_t seed) {
    validate_image(v);
    if (step < 1 || step > 1000) {
        throw std::invalid_argument(
            "add_diffusion_noise: step outside [1, 1000]");
    }
    const double abar = alpha_bar(step);
    const double signal = std::sqrt(abar);
    const double noise = std::sqrt(1.0 - abar);
    SampleRng rng(seed);
    RasterImage out = make_image(v.height, v.width);
    for (std::size_t i = 0; i < v.pixels.size(); ++i) {
        const double x0 = v.pixels[i] / 127.5 - 1.0;
        double xt = signal * x0 + noise * rng.next_gaussian();
        xt = std::clamp(xt, -1.0, 1.0);
        out.pixels[i] = static_cast<std::uint8_t>(
            std::clamp(std::lround((xt + 1.0) * 127.5), 0L, 255L));
    }
    return out;
}

} // namespace savcd
