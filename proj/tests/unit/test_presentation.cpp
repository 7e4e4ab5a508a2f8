#include <gtest/gtest.h>

#include "cellscope/presentation/normalize.hpp"
#include "cellscope/presentation/palette.hpp"
#include "cellscope/presentation/view_state.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

#include <algorithm>
#include <cmath>

using namespace cellscope;
using namespace cellscope::presentation;
using cellscope_test::throws_kind;

namespace {

/// Sector formulation of HSV to RGB (h in turns), as in Python's colorsys.
Rgb sector_hsv(double h, double s, double v) {
    const int i = static_cast<int>(h * 6.0);
    const double f = h * 6.0 - i;
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    switch (i % 6) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

/// Percentile by full sort: the ceil(0.99 m)-th smallest value.
double sorted_p99(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(v.size()))) - 1];
}

}

TEST(Normalize, SmallVectorUsesMax) {
    const std::vector<double> v{0, 1, 2, 4};
    const auto n = normalize_expression(v, "GENE");
    EXPECT_EQ(n.values, (std::vector<double>{0, 0.25, 0.5, 1.0}));
    EXPECT_EQ(n.info, (NormalizationInfo{"GENE", 0, 4, 4}));
    const auto q = quantize_u16(n.values);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(dequantize_u16(q[i]), v[i] / 4, 1.0 / 65535);
    }
}

TEST(Normalize, AllZero) {
    const auto n = normalize_expression(std::vector<double>(7, 0.0));
    EXPECT_EQ(n.values, std::vector<double>(7, 0.0));
    EXPECT_EQ(n.info.clip_value, 1);
    EXPECT_EQ(n.info.raw_min, 0);
    EXPECT_EQ(n.info.raw_max, 0);
}

TEST(Normalize, PercentileClipsOutliers) {
    std::vector<double> v(990, 1.0);
    v.insert(v.end(), 10, 100.0);
    v.insert(v.begin() + 40, 500, 0.0);
    const auto n = normalize_expression(v);
    EXPECT_EQ(n.info.clip_value, 1);
    EXPECT_EQ(n.info.raw_max, 100);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_EQ(n.values[i], v[i] == 0 ? 0.0 : 1.0);
    }
}

// Property: the clip value matches a sort-based percentile, outputs stay in
// [0, 1], and the order of values is preserved.
TEST(Normalize, MatchesSortOracle) {
    cellscope_test::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = rng.below(3000);
        std::vector<double> v(n, 0.0), nonzero;
        for (auto& x : v) {
            if (rng.chance(0.3)) {
                x = std::exp(rng.normal() * 2);
                nonzero.push_back(x);
            }
        }
        const auto out = normalize_expression(v);
        if (nonzero.empty()) {
            EXPECT_EQ(out.info.clip_value, 1);
        } else if (nonzero.size() < 100) {
            EXPECT_EQ(out.info.clip_value, *std::max_element(nonzero.begin(), nonzero.end()));
        } else {
            EXPECT_EQ(out.info.clip_value, sorted_p99(nonzero));
        }
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_GE(out.values[i], 0);
            EXPECT_LE(out.values[i], 1);
            if (i > 0 && v[i] < v[i - 1]) {
                EXPECT_LE(out.values[i], out.values[i - 1]);
            }
        }
    }
}

TEST(Normalize, Errors) {
    EXPECT_TRUE(throws_kind(ErrorKind::NegativeExpression, [] { normalize_expression(std::vector<double>{1, -0.5}); }));
    EXPECT_TRUE(throws_kind(ErrorKind::InvalidData, [] { normalize_expression(std::vector<double>{std::nan("")}); }));
}

TEST(Quantize, RoundsToNearest) {
    const std::vector<double> v{0, 1, 0.5, 1.0 / 65535, 0.49 / 65535};
    EXPECT_EQ(quantize_u16(v), (std::vector<std::uint16_t>{0, 65535, 32768, 1, 0}));
}

TEST(Palette, Examples) {
    EXPECT_EQ(category_hue(0), 0);
    EXPECT_NEAR(category_hue(1), 222.49223594996216, 1e-9);
    EXPECT_NEAR(category_hue(1), 222.5, 0.01);
    const auto p = categorical_palette(5);
    EXPECT_EQ(p, categorical_palette(5));
    EXPECT_NEAR(p[0][0], 0.95, 1e-15);
    EXPECT_NEAR(p[0][1], 0.95 * 0.25, 1e-15);
    EXPECT_NEAR(p[0][2], 0.95 * 0.25, 1e-15);
}

TEST(Palette, MatchesSectorConversion) {
    const auto p = categorical_palette(64);
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double turns = std::fmod(static_cast<double>(k) * 0.6180339887498949, 1.0);
        const auto expected = sector_hsv(turns, 0.75, 0.95);
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(p[k][c], expected[c], 1e-12) << "k=" << k;
            EXPECT_GE(p[k][c], 0);
            EXPECT_LE(p[k][c], 1);
        }
    }
}

TEST(ViewState, Transitions) {
    ViewState s;
    s.annotation_count = 2;
    s = step_view(s, view_action::ToggleMode{});
    EXPECT_EQ(s.mode, ViewMode::Expression);
    s = step_view(s, view_action::ToggleMode{});
    EXPECT_EQ(s.mode, ViewMode::Metadata);

    s = step_view(s, view_action::NextAnnotation{});
    EXPECT_EQ(s.active_annotation, 1u);
    s = step_view(s, view_action::NextAnnotation{});
    EXPECT_EQ(s.active_annotation, 0u);

    EXPECT_EQ(step_view(s, view_action::NextGene{}), s);
    EXPECT_EQ(step_view(s, view_action::PrevGene{}), s);
    EXPECT_FALSE(current_gene(s));

    s = step_view(s, view_action::LoadGeneSet{{4, 9, 2}});
    EXPECT_EQ(s.gene_cursor, 0u);
    s = step_view(step_view(s, view_action::NextGene{}), view_action::NextGene{});
    EXPECT_EQ(s.gene_cursor, 2u);
    EXPECT_EQ(current_gene(s), 2u);
    s = step_view(s, view_action::NextGene{});
    EXPECT_EQ(s.gene_cursor, 0u);
    s = step_view(s, view_action::PrevGene{});
    EXPECT_EQ(s.gene_cursor, 2u);
    s = step_view(s, view_action::LoadGeneSet{{1}});
    EXPECT_EQ(s.gene_cursor, 0u);
    EXPECT_EQ(current_gene(s), 1u);
}
