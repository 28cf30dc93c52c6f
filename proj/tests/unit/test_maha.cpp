#include "octgate/datagen.hpp"
#include "octgate/errors.hpp"
#include "octgate/maha.hpp"
#include "octgate/rng.hpp"
#include "binomial.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

using namespace octgate;

namespace {

std::vector<Eigen::VectorXd> gaussian_samples(int dim, int n, Rng& rng) {
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
    std::vector<Eigen::VectorXd> out;
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd z(dim);
        for (int i = 0; i < dim; ++i) z[i] = rng.normal();
        out.emplace_back(a * z + Eigen::VectorXd::Constant(dim, 2.0));
    }
    return out;
}

double explicit_inverse_distance(const Eigen::VectorXd& f, const ScaleGaussian& g) {
    const Eigen::MatrixXd inv = g.regularized_covariance().inverse();
    const Eigen::VectorXd d = f - g.mean;
    return std::sqrt(d.dot(inv * d));
}

}  // namespace

TEST_CASE("two-point singular fit") {
    std::vector<Eigen::VectorXd> s{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2)};
    const auto g = fit_gaussian(s);
    CHECK(g.mean.isApprox(Eigen::Vector2d(1, 1)));
    Eigen::Matrix2d expect;
    expect << 1, 1, 1, 1;
    CHECK((g.covariance - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(g.loading == 1.0);
    CHECK(std::isfinite(mahalanobis(Eigen::Vector2d(3, -1), g)));
    CHECK((g.chol_lower * g.chol_lower.transpose() - g.regularized_covariance()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical samples fall back to unit loading") {
    std::vector<Eigen::VectorXd> s(5, Eigen::Vector3d(4, -1, 2));
    const auto g = fit_gaussian(s, 1e-3);
    CHECK(g.covariance.isZero(0.0));
    CHECK(g.loading == 1.0);
    const Eigen::MatrixXd expect = std::sqrt(1e-3) * Eigen::MatrixXd::Identity(3, 3);
    CHECK((g.chol_lower - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("fit matches brute-force 1/N sums") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 1 + trial % 8, n = 2 + trial * 3;
        const auto s = gaussian_samples(dim, n, rng);
        const auto g = fit_gaussian(s);
        for (int i = 0; i < dim; ++i) {
            double m = 0.0;
            for (const auto& x : s) m += x[i];
            m /= n;
            CHECK(std::abs(g.mean[i] - m) <= 1e-9 * std::max(1.0, std::abs(m)));
        }
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double c = 0.0;
                for (const auto& x : s) c += (x[i] - g.mean[i]) * (x[j] - g.mean[j]);
                c /= n;
                CHECK(std::abs(g.covariance(i, j) - c) <= 1e-9 * std::max(1.0, std::abs(c)));
            }
        CHECK(g.loading == doctest::Approx(g.covariance.diagonal().mean()));
    }
}

TEST_CASE("recovers a known 3D Gaussian") {
    Eigen::Matrix3d l;
    l << 2.0, 0, 0, 0.5, 1.0, 0, -0.3, 0.4, 0.7;
    const Eigen::Matrix3d sigma = l * l.transpose();
    const Eigen::Vector3d mu(1.0, -2.0, 0.5);
    Rng rng(99);
    std::vector<Eigen::VectorXd> s;
    for (int k = 0; k < 500; ++k) {
        Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
        s.emplace_back(mu + l * z);
    }
    const auto g = fit_gaussian(s);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(g.mean[i] - mu[i]) < 3.0 * std::sqrt(sigma(i, i) / 500.0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(sigma(i, j)) > 0.3) CHECK(std::abs(g.covariance(i, j) / sigma(i, j) - 1.0) < 0.15);
}

TEST_CASE("distance examples") {
    ScaleGaussian g;
    g.mean = Eigen::Vector2d::Zero();
    g.covariance = Eigen::Matrix2d::Identity();
    g.epsilon_used = 0.0;
    g.chol_lower = Eigen::Matrix2d::Identity();
    CHECK(mahalanobis(Eigen::Vector2d(3, 4), g) == doctest::Approx(5.0));
    CHECK(mahalanobis(Eigen::Vector2d(0, 0), g) == 0.0);
    CHECK_THROWS_AS(mahalanobis(Eigen::Vector3d(0, 0, 0), g), std::invalid_argument);
}

TEST_CASE("distance equals the explicit-inverse oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + trial % 8;
        const auto g = fit_gaussian(gaussian_samples(dim, dim + 3 + trial % 11, rng));
        Eigen::VectorXd f(dim);
        for (int i = 0; i < dim; ++i) f[i] = rng.normal(2.0, 3.0);
        const double lib = mahalanobis(f, g), ref = explicit_inverse_distance(f, g);
        CHECK(std::abs(lib - ref) <= 1e-9 * std::max(ref, 1e-300));
    }
}

TEST_CASE("fit errors") {
    std::vector<Eigen::VectorXd> one{Eigen::Vector2d(1, 2)};
    try {
        fit_gaussian(one);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(std::string(e.what()).find("need at least 2 samples") != std::string::npos);
    }
    std::vector<Eigen::VectorXd> bad{Eigen::Vector2d(1, 2), Eigen::Vector2d(NAN, 0)};
    CHECK_THROWS_AS(fit_gaussian(bad), FitError);
    std::vector<Eigen::VectorXd> ragged{Eigen::Vector2d(1, 2), Eigen::Vector3d(0, 0, 0)};
    CHECK_THROWS_AS(fit_gaussian(ragged), FitError);
}

TEST_CASE("verdict sums per-scale distances") {
    const auto v = make_verdict({1.0, 2.0, 3.0}, 5.5, 10);
    CHECK(v.score == 6.0);
    CHECK(v.is_ood);
    CHECK(v.classified);
    CHECK(v.ascan_flags == std::vector<bool>(10, true));
    CHECK_FALSE(make_verdict({1.0, 2.0, 3.0}, 6.0, 10).is_ood);
    CHECK_FALSE(make_verdict({1.0}, std::nullopt, 10).classified);
}

TEST_CASE("quantile") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(quantile_linear(v, 0.5) == 50.5);
    CHECK(quantile_linear(v, 1.0) == 100.0);
    CHECK(quantile_linear(v, 0.99) == doctest::Approx(99.01));
    CHECK_THROWS(quantile_linear(v, 0.0));
    CHECK_THROWS(quantile_linear({}, 0.5));
}

TEST_CASE("detector on synthetic scans") {
    const auto train = mscans_of(synth_dataset(kTrainPresetSize, {}, 1));
    auto det = std::make_shared<Detector>(Detector::train(train, std::make_shared<BuiltinPyramidExtractor>()));
    CHECK(det->model().scales.size() == 4);
    CHECK(det->model().training_sample_count == kTrainPresetSize);
    CHECK_THROWS_AS(det->verdict(train[0]), std::logic_error);
    CHECK_FALSE(det->verdict(train[0], false).classified);

    SUBCASE("features at the scale means score zero") {
        FeatureSet at_mean;
        for (const auto& s : det->model().scales) at_mean.vectors.push_back(s.mean);
        const auto d = det->distances(at_mean);
        CHECK(std::accumulate(d.begin(), d.end(), 0.0) == 0.0);
        CHECK_FALSE(make_verdict(d, 1e-9, 10).is_ood);
    }

    SUBCASE("q = 1 flags nothing in the holdout") {
        const auto cal = det->calibrated(train, 1.0);
        const auto scores = det->scores(train);
        CHECK(*cal.model().threshold_tau == *std::max_element(scores.begin(), scores.end()));
        for (const auto& m : train) CHECK_FALSE(cal.verdict(m).is_ood);
    }

    SUBCASE("noise sigma 50 lands above the clean 99th percentile") {
        const auto clean = det->scores(train);
        const double p99 = quantile_linear(clean, 0.99);
        const auto fresh = synth_dataset(200, {}, 77);
        int above = 0;
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            const auto noisy = corrupt(fresh[i].mscan, {CorruptionKind::noise, 1000 + i, {}});
            above += det->score(noisy) > p99 ? 1 : 0;
        }
        CHECK(above >= 190);
    }

    SUBCASE("q = 0.99 flags about one percent of fresh scans") {
        const auto holdout = mscans_of(synth_dataset(1000, {}, 31));
        const auto cal = det->calibrated(holdout, 0.99);
        const auto fresh = mscans_of(synth_dataset(2000, {}, 32));
        std::size_t flagged = 0;
        for (const auto& m : fresh) flagged += cal.verdict(m).is_ood ? 1 : 0;
        const auto [lo, hi] = testing::binomial_interval(fresh.size(), 0.01, 0.95);
        INFO("flagged " << flagged << " of " << fresh.size());
        CHECK(flagged >= lo);
        CHECK(flagged <= hi);
    }
}
