#include "octgate/errors.hpp"
#include "octgate/rng.hpp"
#include "octgate/scan.hpp"
#include "onnx_fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

using namespace octgate;

namespace {

MScan random_mscan(std::size_t w, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> d(w * p);
    for (auto& v : d) v = static_cast<float>(rng.uniform(-1000.0, 1000.0));
    return MScan(w, p, std::move(d));
}

std::vector<AScan> numbered_ascans(std::size_t n, std::size_t p) {
    std::vector<AScan> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].samples.assign(p, static_cast<float>(i));
    return out;
}

// Catmull-Rom written out piecewise, independent of bicubic.hpp.
double catmull_rom(double x) {
    x = std::abs(x);
    if (x < 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
    if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
    return 0.0;
}

}  // namespace

TEST_CASE("container round trip") {
    std::vector<MScan> in{random_mscan(10, 674, 1), random_mscan(10, 674, 2)};
    std::stringstream buf;
    write_mscan_container(buf, in);
    const auto bytes = buf.str();
    CHECK(bytes.size() == kContainerHeaderBytes + 2 * 10 * 674 * 4);
    CHECK(bytes.substr(0, 4) == "MSCN");
    const auto out = read_mscan_container(buf);
    REQUIRE(out.size() == 2);
    CHECK(out[0].width() == 10);
    CHECK(out[0].depth() == 674);
    CHECK(out[0] == in[0]);
    CHECK(out[1] == in[1]);

    const auto path = testing::temp_path("rt.mscn");
    write_mscan_container(path, in);
    CHECK(read_mscan_container(path)[1] == in[1]);
}

TEST_CASE("all-zero scan writes header plus zero bytes") {
    std::vector<MScan> in{MScan::zeros(10, 674)};
    std::stringstream buf;
    write_mscan_container(buf, in);
    const auto bytes = buf.str();
    REQUIRE(bytes.size() == kContainerHeaderBytes + 10 * 674 * 4);
    std::uint32_t n = 0, w = 0, p = 0;
    std::memcpy(&n, bytes.data() + 6, 4);
    std::memcpy(&w, bytes.data() + 10, 4);
    std::memcpy(&p, bytes.data() + 14, 4);
    CHECK(n == 1);
    CHECK(w == 10);
    CHECK(p == 674);
    CHECK(bytes.find_first_not_of('\0', kContainerHeaderBytes) == std::string::npos);
}

TEST_CASE("container errors") {
    SUBCASE("bad magic") {
        std::stringstream buf;
        write_mscan_container(buf, std::vector<MScan>{MScan::zeros(10, 674)});
        auto bytes = buf.str();
        bytes.replace(0, 4, "XXXX");
        std::stringstream bad(bytes);
        CHECK_THROWS_AS(read_mscan_container(bad), FormatError);
    }
    SUBCASE("truncated payload reports the offset") {
        std::stringstream buf;
        write_mscan_container(buf, std::vector<MScan>{MScan::zeros(10, 674), MScan::zeros(10, 674)});
        auto bytes = buf.str();
        const std::uint32_t three = 3;
        std::memcpy(bytes.data() + 6, &three, 4);
        std::stringstream bad(bytes);
        try {
            read_mscan_container(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == kContainerHeaderBytes + 2 * 10 * 674 * 4);
        }
    }
    SUBCASE("mixed depths") {
        std::stringstream buf;
        std::vector<MScan> mixed{MScan::zeros(10, 674), MScan::zeros(10, 512)};
        CHECK_THROWS_AS(write_mscan_container(buf, mixed), std::invalid_argument);
    }
}

TEST_CASE("csv A-scans") {
    std::stringstream csv("1,2,3\n4.5, 5 ,6\n");
    const auto a = read_ascans_csv(csv);
    REQUIRE(a.size() == 2);
    CHECK(a[1].samples == std::vector<float>{4.5f, 5.0f, 6.0f});
    std::stringstream ragged("1,2,3\n4,5\n");
    CHECK_THROWS(read_ascans_csv(ragged));
}

TEST_CASE("window_stream") {
    auto a = numbered_ascans(25, 4);
    auto w = window_stream(a, 10, 10);
    REQUIRE(w.size() == 2);
    CHECK(w[0](0, 0) == 0.0f);
    CHECK(w[1](0, 0) == 10.0f);
    CHECK(w[1](9, 0) == 19.0f);
    CHECK(window_stream(a, 10, 5).size() == 4);
    CHECK(window_stream(numbered_ascans(9, 4), 10, 10).empty());
}

TEST_CASE("rescale_to_byte_range") {
    MScan m(2, 3, {-1.0f, 0.0f, 1.0f, -0.5f, 0.5f, 1.0f});
    auto r = rescale_to_byte_range(m);
    CHECK(r(0, 0) == doctest::Approx(0.0));
    CHECK(r(0, 1) == doctest::Approx(127.5));
    CHECK(r(0, 2) == doctest::Approx(255.0));
    CHECK(r(1, 0) == doctest::Approx(63.75));

    MScan c(2, 3, std::vector<float>(6, 42.0f));
    const auto zeroed = rescale_to_byte_range(c);
    for (float v : zeroed.data()) CHECK(v == 0.0f);

    MScan full(1, 3, {0.0f, 127.5f, 255.0f});
    CHECK(rescale_to_byte_range(full) == full);
}

TEST_CASE("bicubic reproduces constants") {
    MScan m(10, 674, std::vector<float>(6740, 7.0f));
    const auto g = resize_bicubic(m, 64, 224);
    CHECK(g.rows() == 64);
    CHECK(g.cols() == 224);
    CHECK((g.array() - 7.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("bicubic follows a bilinear ramp away from the clamped border") {
    const int rows = 10, cols = 674, out_r = 64, out_c = 224;
    Grid in(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) in(r, c) = 3.0 * r + 0.25 * c + 0.01 * r * c;
    const auto g = resize_bicubic(in, out_r, out_c);
    double worst = 0.0;
    for (int i = 0; i < out_r; ++i) {
        const double y = (i + 0.5) * rows / out_r - 0.5;
        if (y < 1.0 || y > rows - 2.0) continue;
        for (int j = 0; j < out_c; ++j) {
            const double x = (j + 0.5) * cols / out_c - 0.5;
            if (x < 1.0 || x > cols - 2.0) continue;
            worst = std::max(worst, std::abs(g(i, j) - (3.0 * y + 0.25 * x + 0.01 * y * x)));
        }
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("bicubic 2x2 to 4x4 matches hand weights") {
    Grid in(2, 2);
    in << 1.0, 2.0, 3.0, 5.0;
    const auto g = resize_bicubic(in, 4, 4);
    auto axis = [](int i) {
        const double x = (i + 0.5) * 0.5 - 0.5;
        const double base = std::floor(x);
        std::array<double, 2> w{0.0, 0.0};
        for (int k = -1; k <= 2; ++k) {
            const int idx = std::clamp(static_cast<int>(base) + k, 0, 1);
            w[idx] += catmull_rom(x - (base + k));
        }
        return w;
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto wy = axis(i), wx = axis(j);
            double expect = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) expect += wy[r] * wx[c] * in(r, c);
            CHECK(g(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("normalize_channels") {
    PreprocConfig cfg;
    Grid g = Grid::Constant(4, 4, 0.485 * 255.0);
    CHECK(std::abs(normalize_channels(g, cfg).channels[0](2, 2)) < 1e-12);

    const auto zero = normalize_channels(Grid::Zero(4, 4), cfg);
    const auto full = normalize_channels(Grid::Constant(4, 4, 255.0), cfg);
    for (int c = 0; c < 3; ++c) {
        CHECK(zero.channels[c](1, 3) == doctest::Approx(-cfg.channel_means[c] / cfg.channel_stds[c]));
        CHECK(full.channels[c](3, 0) == doctest::Approx((1.0 - cfg.channel_means[c]) / cfg.channel_stds[c]));
    }
}

TEST_CASE("preprocess shape and config validation") {
    const auto img = preprocess(random_mscan(10, 674, 5));
    CHECK(img.height() == 64);
    CHECK(img.width() == 224);
    PreprocConfig bad;
    bad.channel_stds[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
