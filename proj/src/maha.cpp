#include "octgate/maha.hpp"

#include "octgate/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace octgate {

Eigen::MatrixXd ScaleGaussian::regularized_covariance() const {
    Eigen::MatrixXd reg = covariance;
    reg.diagonal().array() += epsilon_used * loading;
    return reg;
}

double ScaleGaussian::condition_estimate() const {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(regularized_covariance(), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    if (ev.size() == 0) return 1.0;
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

ScaleGaussian fit_gaussian(std::span<const Eigen::VectorXd> samples, double epsilon, std::size_t scale_index) {
    const std::string where = "scale " + std::to_string(scale_index) + ": ";
    if (samples.size() < 2)
        throw FitError(where + "need at least 2 samples, got " + std::to_string(samples.size()));
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw FitError(where + "epsilon must be finite and >= 0");
    const Eigen::Index dim = samples.front().size();
    if (dim == 0) throw FitError(where + "empty feature vectors");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dim)
            throw FitError(where + "sample " + std::to_string(i) + " has dimension " +
                           std::to_string(samples[i].size()) + ", expected " + std::to_string(dim));
        if (!samples[i].allFinite()) throw FitError(where + "sample " + std::to_string(i) + " has non-finite features");
    }

    const double n = static_cast<double>(samples.size());
    ScaleGaussian g;
    g.mean = Eigen::VectorXd::Zero(dim);
    for (const auto& s : samples) g.mean += s;
    g.mean /= n;

    Eigen::MatrixXd centered(dim, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) centered.col(static_cast<Eigen::Index>(i)) = samples[i] - g.mean;
    g.covariance = (centered * centered.transpose()) / n;
    // exact symmetry
    g.covariance = 0.5 * (g.covariance + g.covariance.transpose()).eval();

    g.epsilon_used = epsilon;
    const double c = g.covariance.diagonal().mean();
    g.loading = c > 0.0 ? c : 1.0;

    Eigen::LLT<Eigen::MatrixXd> llt(g.regularized_covariance());
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << where << "Cholesky factorization failed after regularization (epsilon=" << epsilon
            << ", condition estimate " << g.condition_estimate() << ")";
        throw FitError(msg.str());
    }
    g.chol_lower = llt.matrixL();
    return g;
}

double mahalanobis(const Eigen::VectorXd& feature, const ScaleGaussian& gaussian) {
    if (feature.size() != gaussian.dim())
        throw std::invalid_argument("mahalanobis: feature has dimension " + std::to_string(feature.size()) +
                                    ", Gaussian has " + std::to_string(gaussian.dim()));
    const Eigen::VectorXd z =
        gaussian.chol_lower.triangularView<Eigen::Lower>().solve(feature - gaussian.mean);
    return z.norm();
}

Verdict make_verdict(std::vector<double> per_scale_distances, std::optional<double> tau, std::size_t ascans) {
    Verdict v;
    v.per_scale_distances = std::move(per_scale_distances);
    for (double d : v.per_scale_distances) v.score += d;
    if (tau) {
        v.classified = true;
        v.is_ood = v.score > *tau;
    }
    v.ascan_flags.assign(ascans, v.is_ood);
    return v;
}

DetectorModel fit(std::span<const FeatureSet> feature_sets, const ExtractorDescriptor& extractor,
                  const PreprocConfig& preproc, double epsilon) {
    if (feature_sets.size() < 2)
        throw FitError("need at least 2 samples, got " + std::to_string(feature_sets.size()));
    const auto dims = feature_sets.front().dims();
    if (dims.empty()) throw FitError("feature sets have no scales");
    for (std::size_t i = 1; i < feature_sets.size(); ++i)
        if (feature_sets[i].dims() != dims)
            throw FitError("feature set " + std::to_string(i) + " has different scale dimensions");

    DetectorModel model;
    model.extractor = extractor;
    model.extractor.scales = static_cast<int>(dims.size());
    model.extractor.dims = dims;
    model.preproc = preproc;
    model.training_sample_count = feature_sets.size();
    model.epsilon = epsilon;

    std::vector<Eigen::VectorXd> column(feature_sets.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        for (std::size_t i = 0; i < feature_sets.size(); ++i) column[i] = feature_sets[i].vectors[k];
        model.scales.push_back(fit_gaussian(column, epsilon, k));
    }
    return model;
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile_linear: empty input");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_linear: q must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

// --- Detector ---------------------------------------------------------------------------------

Detector::Detector(DetectorModel model, std::shared_ptr<const FeatureExtractor> extractor, const WarningSink& warn)
    : model_(std::move(model)), extractor_(std::move(extractor)) {
    if (!extractor_) throw std::invalid_argument("Detector: null extractor");
    if (model_.scales.empty()) throw ModelError("detector model has no scales");
    const auto& live = extractor_->descriptor();
    if (static_cast<std::size_t>(live.scales) != model_.scales.size())
        throw ModelError("model has K=" + std::to_string(model_.scales.size()) + " scales but the configured " +
                         std::string(to_string(live.kind)) + " extractor produces K=" + std::to_string(live.scales));
    if (!live.dims.empty()) {
        for (std::size_t k = 0; k < model_.scales.size(); ++k)
            if (live.dims[k] != static_cast<std::size_t>(model_.scales[k].dim()))
                throw ModelError("scale " + std::to_string(k) + ": model dimension " +
                                 std::to_string(model_.scales[k].dim()) + " but extractor produces " +
                                 std::to_string(live.dims[k]));
    }
    if (warn && !model_.extractor.config_digest.empty() && live.config_digest != model_.extractor.config_digest)
        warn("extractor digest mismatch: model was fitted with " + model_.extractor.config_digest +
             ", configured extractor is " + live.config_digest);
}

Detector::Detector(DetectorModel model, const WarningSink& warn)
    : Detector(model, std::shared_ptr<const FeatureExtractor>(make_extractor(model.extractor)), warn) {}

Detector Detector::train(std::span<const MScan> training, std::shared_ptr<const FeatureExtractor> extractor,
                         const PreprocConfig& preproc, double epsilon) {
    if (!extractor) throw std::invalid_argument("Detector::train: null extractor");
    std::vector<FeatureSet> features;
    features.reserve(training.size());
    for (const auto& m : training) features.push_back(extractor->extract(preprocess(m, preproc)));
    auto model = fit(features, extractor->descriptor(), preproc, epsilon);
    return Detector(std::move(model), std::move(extractor));
}

FeatureSet Detector::features(const MScan& mscan) const {
    return extractor_->extract(preprocess(mscan, model_.preproc));
}

std::vector<double> Detector::distances(const FeatureSet& features) const {
    if (features.scales() != model_.scales.size())
        throw std::invalid_argument("Detector: feature set has " + std::to_string(features.scales()) +
                                    " scales, model has " + std::to_string(model_.scales.size()));
    std::vector<double> d;
    d.reserve(model_.scales.size());
    for (std::size_t k = 0; k < model_.scales.size(); ++k) d.push_back(mahalanobis(features.vectors[k], model_.scales[k]));
    return d;
}

double Detector::score(const MScan& mscan) const {
    return make_verdict(distances(features(mscan)), std::nullopt, 0).score;
}

std::vector<double> Detector::scores(std::span<const MScan> mscans) const {
    std::vector<double> out;
    out.reserve(mscans.size());
    for (const auto& m : mscans) out.push_back(score(m));
    return out;
}

Verdict Detector::verdict(const MScan& mscan, bool classify) const {
    if (classify && !model_.calibrated())
        throw std::logic_error("classification requested but the detector model is uncalibrated (no tau)");
    return make_verdict(distances(features(mscan)), classify ? model_.threshold_tau : std::nullopt, mscan.width());
}

Detector Detector::calibrated(std::span<const MScan> holdout, double q) const {
    return Detector(calibrate_threshold(*this, holdout, q), extractor_);
}

DetectorModel calibrate_threshold(const Detector& detector, std::span<const MScan> holdout, double q) {
    if (holdout.empty()) throw std::invalid_argument("calibrate_threshold: empty holdout set");
    DetectorModel model = detector.model();
    model.threshold_tau = quantile_linear(detector.scores(holdout), q);
    model.calibration_quantile = q;
    return model;
}

}  // namespace octgate
