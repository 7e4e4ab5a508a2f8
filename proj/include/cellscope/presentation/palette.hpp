#ifndef CELLSCOPE_PRESENTATION_PALETTE_HPP
#define CELLSCOPE_PRESENTATION_PALETTE_HPP

#include <array>
#include <cmath>
#include <vector>

namespace cellscope::presentation {

using Rgb = std::array<double, 3>;

inline constexpr double inverse_golden_ratio = 0.6180339887498949;
inline constexpr double palette_saturation = 0.75;
inline constexpr double palette_value = 0.95;

/// HSV to RGB with hue in degrees [0, 360) and s, v in [0, 1].
inline Rgb hsv_to_rgb(double hue, double s, double v) {
    const double c = v * s;
    const double hp = hue / 60.0;
    const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
    Rgb rgb{};
    if (hp < 1) rgb = {c, x, 0};
    else if (hp < 2) rgb = {x, c, 0};
    else if (hp < 3) rgb = {0, c, x};
    else if (hp < 4) rgb = {0, x, c};
    else if (hp < 5) rgb = {x, 0, c};
    else rgb = {c, 0, x};
    const double m = v - c;
    return {rgb[0] + m, rgb[1] + m, rgb[2] + m};
}

/// Hue of category k in degrees: golden-ratio stepping around the wheel.
inline double category_hue(std::size_t k) {
    const double turns = static_cast<double>(k) * inverse_golden_ratio;
    return (turns - std::floor(turns)) * 360.0;
}

inline std::vector<Rgb> categorical_palette(std::size_t n) {
    std::vector<Rgb> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(hsv_to_rgb(category_hue(k), palette_saturation, palette_value));
    }
    return out;
}

}

#endif
