#include "octgate/features.hpp"
#include "octgate/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace octgate;

namespace {

PreppedImage image_of(const Grid& g) { return PreppedImage{{g, g, g}}; }

Grid random_grid(int r, int c, std::uint64_t seed) {
    Rng rng(seed);
    Grid g(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) g(i, j) = rng.normal();
    return g;
}

double at_clamped(const Grid& g, int r, int c) {
    r = std::clamp(r, 0, static_cast<int>(g.rows()) - 1);
    c = std::clamp(c, 0, static_cast<int>(g.cols()) - 1);
    return g(r, c);
}

std::array<double, 6> naive_features(const Grid& g) {
    const int R = static_cast<int>(g.rows()), C = static_cast<int>(g.cols());
    const double n = static_cast<double>(R) * C;
    double mean = 0.0;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) mean += g(r, c);
    mean /= n;
    double var = 0.0, dx = 0.0, dy = 0.0, lap = 0.0, hp = 0.0;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            var += (g(r, c) - mean) * (g(r, c) - mean);
            if (c + 1 < C) dx += std::abs(g(r, c + 1) - g(r, c));
            if (r + 1 < R) dy += std::abs(g(r + 1, c) - g(r, c));
            lap += std::abs(at_clamped(g, r - 1, c) + at_clamped(g, r + 1, c) + at_clamped(g, r, c - 1) +
                            at_clamped(g, r, c + 1) - 4.0 * g(r, c));
            double box = 0.0;
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b) box += at_clamped(g, r + a, c + b);
            hp += std::abs(g(r, c) - box / 9.0);
        }
    return {mean, std::sqrt(var / n), dx / (R * (C - 1.0)), dy / ((R - 1.0) * C), lap / n, hp / n};
}

}  // namespace

TEST_CASE("constant grid features") {
    const auto f = builtin_level_features(Grid::Constant(16, 20, 3.25));
    CHECK(f.size() == 6);
    CHECK(f[0] == doctest::Approx(3.25));
    for (int i = 1; i < 6; ++i) CHECK(std::abs(f[i]) < 1e-12);
}

TEST_CASE("horizontal ramp gradients") {
    const double s = -0.75;
    Grid g(12, 30);
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 30; ++c) g(r, c) = s * c;
    const auto f = builtin_level_features(g);
    CHECK(f[2] == std::abs(s));
    CHECK(f[3] == 0.0);
}

TEST_CASE("level features match a naive double loop") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = random_grid(9 + static_cast<int>(seed), 13 + 2 * static_cast<int>(seed), seed);
        const auto f = builtin_level_features(g);
        const auto o = naive_features(g);
        for (int i = 0; i < 6; ++i) CHECK(f[i] == doctest::Approx(o[i]).epsilon(1e-9));
    }
}

TEST_CASE("pyramid shapes and constants") {
    const auto levels = builtin_pyramid_levels(image_of(Grid::Constant(64, 224, -1.5)), 4);
    REQUIRE(levels.size() == 4);
    const int expect[4][2] = {{64, 224}, {32, 112}, {16, 56}, {8, 28}};
    for (int k = 0; k < 4; ++k) {
        CHECK(levels[k].rows() == expect[k][0]);
        CHECK(levels[k].cols() == expect[k][1]);
        CHECK((levels[k].array() + 1.5).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("impulse mass after one smoothing and decimation") {
    const double k1[3] = {0.25, 0.5, 0.25};
    for (auto [r0, c0] : {std::pair{20, 40}, std::pair{11, 40}, std::pair{20, 41}, std::pair{31, 77}}) {
        Grid g = Grid::Zero(64, 224);
        g(r0, c0) = 1.0;
        const auto level1 = smooth_and_decimate(g);
        double expect = 0.0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                if ((r0 + a) % 2 == 0 && (c0 + b) % 2 == 0) expect += k1[a + 1] * k1[b + 1];
        CHECK(level1.sum() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(level1(r0 / 2, c0 / 2) > 0.0);
    }
}

TEST_CASE("builtin extractor") {
    BuiltinPyramidExtractor ex;
    CHECK(ex.descriptor().scales == 4);
    CHECK(ex.descriptor().dims == std::vector<std::size_t>{6, 6, 6, 6});

    const auto c = ex.extract(image_of(Grid::Constant(64, 224, 0.8)));
    CHECK(c.dims() == std::vector<std::size_t>{6, 6, 6, 6});
    for (const auto& v : c.vectors) {
        CHECK(v[0] == doctest::Approx(0.8));
        for (int i = 1; i < 6; ++i) CHECK(std::abs(v[i]) < 1e-12);
    }

    const auto img = image_of(random_grid(64, 224, 9));
    const auto a = ex.extract(img);
    const auto b = ex.extract(img);
    for (std::size_t k = 0; k < a.scales(); ++k) CHECK(a.vectors[k] == b.vectors[k]);
    CHECK(a.concatenated().size() == 24);
}

TEST_CASE("builtin descriptor digest depends on K only") {
    CHECK(BuiltinPyramidExtractor(4).descriptor().config_digest == BuiltinPyramidExtractor(4).descriptor().config_digest);
    CHECK(BuiltinPyramidExtractor(3).descriptor().config_digest != BuiltinPyramidExtractor(4).descriptor().config_digest);
    CHECK_THROWS(BuiltinPyramidExtractor(0));
    CHECK_THROWS(builtin_pyramid_levels(image_of(Grid::Zero(64, 224)), 12));
}

TEST_CASE("fnv1a") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
