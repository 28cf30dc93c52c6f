#include "octgate/baselines.hpp"
#include "octgate/errors.hpp"
#include "octgate/eval.hpp"
#include "onnx_fixtures.hpp"

#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <memory>

using namespace octgate;

namespace {

class PeakEstimator final : public HeatmapEstimator {
public:
    explicit PeakEstimator(double peak) : peak_(peak) {}
    Heatmap heatmap(std::span<const float> ascan) const override {
        Heatmap h{std::vector<double>(ascan.size(), 0.0)};
        h.probs[ascan.size() / 2] = peak_;
        return h;
    }
    std::string name() const override { return "peak"; }

private:
    double peak_;
};

MScan random_small(std::size_t w, std::size_t p, Rng& rng) {
    std::vector<float> d(w * p);
    for (auto& v : d) v = static_cast<float>(rng.uniform(0.0, 255.0));
    return MScan(w, p, std::move(d));
}

}  // namespace

TEST_CASE("snr formula and sentinel") {
    std::vector<float> d(100);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = i % 2 ? 150.0f : 50.0f;
    CHECK(snr_score(MScan(10, 10, d)) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(snr_score(MScan(10, 10, std::vector<float>(100, 3.0f))) == DBL_MAX);
}

TEST_CASE("noise raises the snr score on mid-gray fixtures") {
    Rng rng(8);
    for (std::uint64_t i = 0; i < 20; ++i) {
        std::vector<float> d(10 * 674);
        for (auto& v : d) v = static_cast<float>(rng.uniform(100.0, 155.0));
        const MScan m(10, 674, std::move(d));
        CHECK(snr_score(corrupt(m, {CorruptionKind::noise, i, {}})) > snr_score(m));
    }
}

TEST_CASE("pool_depth") {
    std::vector<float> d(2 * 25);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<float>(i);
    const auto v = pool_depth(MScan(2, 25, d), 10);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == doctest::Approx(4.5));
    CHECK(v[1] == doctest::Approx(14.5));
    CHECK(v[2] == doctest::Approx(29.5));
    CHECK(v[3] == doctest::Approx(39.5));
    CHECK(pool_depth(MScan::zeros(10, 674)).size() == 670);
}

TEST_CASE("raw mahaad") {
    Rng rng(12);
    std::vector<MScan> train;
    for (int i = 0; i < 40; ++i) train.push_back(random_small(2, 20, rng));

    SUBCASE("training mean scores zero") {
        const auto model = raw_mahaad_fit(train, 10);
        std::vector<float> mean(40, 0.0f);
        std::vector<double> acc(40, 0.0);
        for (const auto& m : train)
            for (std::size_t k = 0; k < 40; ++k) acc[k] += m.data()[k];
        for (std::size_t k = 0; k < 40; ++k) mean[k] = static_cast<float>(acc[k] / 40.0);
        CHECK(raw_mahaad_score(MScan(2, 20, mean), model) < 1e-5);
    }
    SUBCASE("identity covariance, unit offset") {
        RawMahaadModel model;
        model.pool_factor = 10;
        model.width = 2;
        model.depth = 20;
        model.gaussian.mean = Eigen::VectorXd::Zero(4);
        model.gaussian.covariance = Eigen::MatrixXd::Identity(4, 4);
        model.gaussian.chol_lower = Eigen::MatrixXd::Identity(4, 4);
        std::vector<float> d(40, 0.0f);
        for (std::size_t k = 10; k < 20; ++k) d[k] = 1.0f;
        CHECK(raw_mahaad_score(MScan(2, 20, d), model) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("shares the core distance") {
        const auto model = raw_mahaad_fit(train, 5);
        std::vector<Eigen::VectorXd> pooled;
        for (const auto& m : train) pooled.push_back(pool_depth(m, 5));
        const auto g = fit_gaussian(pooled);
        for (int i = 0; i < 10; ++i) {
            const auto probe = random_small(2, 20, rng);
            CHECK(raw_mahaad_score(probe, model) == mahalanobis(pool_depth(probe, 5), g));
        }
    }
    CHECK_THROWS(raw_mahaad_score(MScan::zeros(3, 20), raw_mahaad_fit(train, 10)));
}

TEST_CASE("uncertainty") {
    const auto m = MScan::zeros(10, 50);
    CHECK(uncertainty_score(m, PeakEstimator(1.0)) == 0.0);
    CHECK(uncertainty_score(m, PeakEstimator(0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(uncertainty_score(m, PeakEstimator(0.9)) == doctest::Approx(0.3251).epsilon(1e-4).scale(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(0.9) == doctest::Approx(-0.9 * std::log(0.9) - 0.1 * std::log(0.1)));
    CHECK_THROWS(uncertainty_score(m, PeakEstimator(1.3)));
}

TEST_CASE("logistic regression separates separable data") {
    Eigen::MatrixXd x(40, 2);
    Eigen::VectorXd y(40);
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
        const bool pos = i % 2 == 0;
        x(i, 0) = rng.normal(pos ? 2.0 : -2.0, 0.5);
        x(i, 1) = rng.normal();
        y(i) = pos ? 1.0 : 0.0;
    }
    Eigen::VectorXd w;
    double b = 0.0;
    logistic_fit(x, y, 1e-2, 30, w, b);
    CHECK(w[0] > 1.0);
    CHECK(std::abs(w[1]) < w[0]);
}

TEST_CASE("supervised lite") {
    const auto clean = mscans_of(synth_dataset(120, {}, 21));
    const auto ex = std::make_shared<BuiltinPyramidExtractor>();
    const auto model = supervised_lite_fit(clean, *ex, 5);
    SupervisedLiteScorer scorer(model, ex);
    CHECK(model.training_corruptions.size() == 4);

    SUBCASE("held-in AUROC") {
        const auto seen = supervised_lite_training_set(clean, 5);
        std::vector<double> s;
        std::vector<bool> l;
        for (const auto& x : seen) {
            s.push_back(scorer.score(x.mscan));
            l.push_back(x.is_corrupted);
        }
        CHECK(auroc(s, l) > 0.95);
    }
    SUBCASE("same seed, same weights") {
        const auto again = supervised_lite_fit(clean, *ex, 5);
        CHECK((again.weights - model.weights).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(std::abs(again.bias - model.bias) <= 1e-8);
    }
    SUBCASE("corrupted validation scans score higher") {
        const auto val = synth_dataset(60, {}, 22);
        const auto mixed = corrupt_fraction(val, 0.5, kSupervisedCorruptions, 23);
        double pos = 0.0, neg = 0.0;
        for (const auto& x : mixed) (x.is_corrupted ? pos : neg) += scorer.score(x.mscan);
        CHECK(pos / 30.0 > neg / 30.0);
    }
    SUBCASE("zero weights give one half") {
        auto zero = model;
        zero.weights.setZero();
        zero.bias = 0.0;
        SupervisedLiteScorer z(zero, ex);
        CHECK(z.score(clean[0]) == 0.5);
        CHECK(z.score(clean[1]) == 0.5);
    }
    SUBCASE("persistence") {
        const auto path = testing::temp_path("sup.json");
        save_supervised_lite(model, path);
        const auto back = load_supervised_lite(path);
        CHECK(back.weights == model.weights);
        CHECK(back.bias == model.bias);
        CHECK(back.training_corruptions == model.training_corruptions);
        CHECK(serialize_supervised_lite(back) == serialize_supervised_lite(model));
    }
    CHECK_THROWS_AS(supervised_lite_fit(std::span(clean).first(10), *ex, 5), FitError);
}

TEST_CASE("sigmoid is monotone and stable") {
    double prev = -1.0;
    for (double z = -800.0; z <= 800.0; z += 0.5) {
        const double s = sigmoid(z);
        CHECK(s >= prev);
        CHECK(std::isfinite(s));
        prev = s;
    }
    CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("reference scorers") {
    NoRejectionScorer none;
    CHECK_FALSE(none.rejects());
    FunctionScorer f("w", [](const MScan& m) { return static_cast<double>(m.width()); });
    CHECK(f.score(MScan::zeros(7, 3)) == 7.0);
    CHECK(f.name() == "w");
    CHECK(f.rejects());
}
