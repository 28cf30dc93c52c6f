#include "octgate/datagen.hpp"
#include "octgate/errors.hpp"
#include "octgate/model_io.hpp"
#include "onnx_fixtures.hpp"

#include <doctest.h>

#include <cctype>
#include <fstream>
#include <iterator>
#include <memory>

using namespace octgate;

namespace {

const Detector& calibrated_detector() {
    static const Detector det = [] {
        const auto train = mscans_of(synth_dataset(80, {}, 3));
        const auto d = Detector::train(train, std::make_shared<BuiltinPyramidExtractor>());
        return d.calibrated(mscans_of(synth_dataset(40, {}, 4)), 0.95);
    }();
    return det;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("round trip scores bit-identically") {
    const auto& det = calibrated_detector();
    const auto path = testing::temp_path("model.json");
    save_model(det.model(), path);
    const Detector loaded(load_model(path));
    CHECK(loaded.model().threshold_tau == det.model().threshold_tau);
    CHECK(loaded.model().calibration_quantile == 0.95);
    CHECK(loaded.model().training_sample_count == 80);
    CHECK(loaded.model().preproc == det.model().preproc);
    const auto probe = mscans_of(synth_dataset(50, {}, 5));
    double worst = 0.0;
    for (const auto& m : probe) worst = std::max(worst, std::abs(loaded.score(m) - det.score(m)));
    CHECK(worst == 0.0);
    CHECK(serialize_model(loaded.model()) == serialize_model(det.model()));
}

TEST_CASE("uncalibrated models keep an empty tau") {
    auto m = calibrated_detector().model();
    m.threshold_tau.reset();
    CHECK_FALSE(parse_model(serialize_model(m)).calibrated());
}

TEST_CASE("tampered payload fails the checksum") {
    auto text = serialize_model(calibrated_detector().model());
    auto pos = text.find("\"chol_lower\"");
    REQUIRE(pos != std::string::npos);
    pos = text.find_first_of("123456789", pos);
    text[pos] = text[pos] == '9' ? '8' : static_cast<char>(text[pos] + 1);
    CHECK_THROWS_AS(parse_model(text), ChecksumError);

    const auto path = testing::temp_path("tampered.json");
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_model(path), ChecksumError);
}

TEST_CASE("envelope errors") {
    CHECK_THROWS_AS(parse_model("{not json"), ModelError);
    CHECK_THROWS_AS(parse_model(R"({"format":"something.else","format_version":1,"payload":{}})"), ModelError);
    CHECK_THROWS_AS(load_model(testing::temp_path("absent.json")), ModelError);
}

TEST_CASE("K mismatch against the configured extractor") {
    const auto& model = calibrated_detector().model();
    try {
        Detector d(model, std::make_shared<BuiltinPyramidExtractor>(3));
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("K=4") != std::string::npos);
        CHECK(msg.find('3') != std::string::npos);
    }
}

TEST_CASE("saving twice is byte-identical") {
    const auto a = testing::temp_path("a.json"), b = testing::temp_path("b.json");
    save_model(calibrated_detector().model(), a);
    save_model(calibrated_detector().model(), b);
    CHECK(slurp(a) == slurp(b));
}
