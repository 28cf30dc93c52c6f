#pragma once

#include "octgate/features.hpp"
#include "octgate/scan.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace octgate {

inline constexpr double kDefaultEpsilon = 1e-3;
inline constexpr double kDefaultQuantile = 0.99;

/// One multivariate Gaussian over the pooled features of a single scale.
///
/// `covariance` is the plain 1/N estimate. Distances only ever use
/// `chol_lower`, the Cholesky factor of the diagonally loaded matrix
///     covariance + epsilon_used * loading * I
/// where `loading` is the mean of the covariance diagonal (1 when that is 0).
struct ScaleGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd chol_lower;
    double epsilon_used = kDefaultEpsilon;
    double loading = 1.0;

    Eigen::Index dim() const { return mean.size(); }
    /// covariance + epsilon_used * loading * I
    Eigen::MatrixXd regularized_covariance() const;
    /// Ratio of extreme eigenvalues of the regularized covariance.
    double condition_estimate() const;
};

/// Fit one Gaussian with the 1/N mean and covariance estimators.
/// `scale_index` only labels error messages.
ScaleGaussian fit_gaussian(std::span<const Eigen::VectorXd> samples, double epsilon = kDefaultEpsilon,
                           std::size_t scale_index = 0);

/// sqrt((f - mean)^T Sigma_reg^-1 (f - mean)) by forward substitution on the
/// stored factor.
double mahalanobis(const Eigen::VectorXd& feature, const ScaleGaussian& gaussian);

struct Verdict {
    double score = 0.0;                     // sum of per-scale distances
    bool is_ood = false;
    bool classified = false;                // false when no threshold was applied
    std::vector<double> per_scale_distances;
    std::vector<bool> ascan_flags;          // W copies of is_ood
};

/// Sum the distances and apply the threshold rule `score > tau`.
Verdict make_verdict(std::vector<double> per_scale_distances, std::optional<double> tau, std::size_t ascans);

struct DetectorModel {
    std::vector<ScaleGaussian> scales;
    std::optional<double> threshold_tau;    // empty = uncalibrated
    double calibration_quantile = kDefaultQuantile;
    ExtractorDescriptor extractor;
    PreprocConfig preproc;
    std::size_t training_sample_count = 0;  // N
    double epsilon = kDefaultEpsilon;

    bool calibrated() const { return threshold_tau.has_value(); }
};

/// Fit K Gaussians, one per feature scale. Needs N >= 2 homogeneous,
/// finite feature sets. The returned model is uncalibrated.
DetectorModel fit(std::span<const FeatureSet> feature_sets, const ExtractorDescriptor& extractor,
                  const PreprocConfig& preproc = {}, double epsilon = kDefaultEpsilon);

/// Empirical quantile with linear interpolation between order statistics
/// (position (n - 1) * q). q must lie in (0, 1].
double quantile_linear(std::vector<double> values, double q);

using WarningSink = std::function<void(const std::string&)>;

/// A fitted model bound to a live feature extractor. Immutable and safe to
/// share between threads once constructed.
class Detector {
public:
    /// Checks that the extractor matches the model (K, dims). A differing
    /// configuration digest is reported through `warn` but is not fatal.
    Detector(DetectorModel model, std::shared_ptr<const FeatureExtractor> extractor, const WarningSink& warn = {});

    /// Rebuilds the extractor recorded in the model.
    explicit Detector(DetectorModel model, const WarningSink& warn = {});

    /// Preprocess, extract and fit on in-distribution M-scans.
    static Detector train(std::span<const MScan> training, std::shared_ptr<const FeatureExtractor> extractor,
                          const PreprocConfig& preproc = {}, double epsilon = kDefaultEpsilon);

    FeatureSet features(const MScan& mscan) const;
    std::vector<double> distances(const FeatureSet& features) const;
    double score(const MScan& mscan) const;
    std::vector<double> scores(std::span<const MScan> mscans) const;

    /// Full verdict. Throws std::logic_error when `classify` is requested on
    /// an uncalibrated model.
    Verdict verdict(const MScan& mscan, bool classify = true) const;

    /// Copy of this detector with tau set to the q-quantile of the holdout
    /// scores.
    Detector calibrated(std::span<const MScan> holdout, double q = kDefaultQuantile) const;

    const DetectorModel& model() const { return model_; }
    const FeatureExtractor& extractor() const { return *extractor_; }
    std::shared_ptr<const FeatureExtractor> extractor_ptr() const { return extractor_; }

private:
    DetectorModel model_;
    std::shared_ptr<const FeatureExtractor> extractor_;
};

/// Calibrated copy of `detector`'s model.
DetectorModel calibrate_threshold(const Detector& detector, std::span<const MScan> holdout,
                                  double q = kDefaultQuantile);

}  // namespace octgate
