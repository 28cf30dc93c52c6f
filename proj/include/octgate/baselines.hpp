#pragma once

#include "octgate/datagen.hpp"
#include "octgate/downstream.hpp"
#include "octgate/features.hpp"
#include "octgate/maha.hpp"
#include "octgate/scan.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace octgate {

/// Common contract: higher score == more out-of-distribution.
class OodScorer {
public:
    virtual ~OodScorer() = default;
    virtual double score(const MScan& mscan) const = 0;
    virtual std::string name() const = 0;
    /// False for the no-rejection reference, which never discards scans.
    virtual bool rejects() const { return true; }

    std::vector<double> scores(std::span<const MScan> mscans) const;
};

inline constexpr std::array<std::string_view, 6> kScorerNames = {"mahaad", "raw-mahaad", "snr", "uncertainty",
                                                                 "supervised-lite", "no-rejection"};

// --- MahaAD ---------------------------------------------------------------------------------

class MahaadScorer final : public OodScorer {
public:
    explicit MahaadScorer(std::shared_ptr<const Detector> detector) : detector_(std::move(detector)) {}
    double score(const MScan& mscan) const override { return detector_->score(mscan); }
    std::string name() const override { return "mahaad"; }
    const Detector& detector() const { return *detector_; }

private:
    std::shared_ptr<const Detector> detector_;
};

// --- SNR ------------------------------------------------------------------------------------

/// -mean/std over all samples (population std). A constant M-scan returns
/// the largest finite double.
double snr_score(const MScan& mscan);

class SnrScorer final : public OodScorer {
public:
    double score(const MScan& mscan) const override { return snr_score(mscan); }
    std::string name() const override { return "snr"; }
};

// --- Raw-MahaAD -------------------------------------------------------------------------------

inline constexpr std::size_t kDefaultRawPool = 10;

/// Average-pool every A-scan along depth in blocks of `factor` (a short
/// trailing block is dropped) and flatten A-scan major.
Eigen::VectorXd pool_depth(const MScan& mscan, std::size_t factor = kDefaultRawPool);

struct RawMahaadModel {
    ScaleGaussian gaussian;
    std::size_t pool_factor = kDefaultRawPool;
    std::size_t width = 0;
    std::size_t depth = 0;
};

RawMahaadModel raw_mahaad_fit(std::span<const MScan> mscans, std::size_t pool_factor = kDefaultRawPool,
                              double epsilon = kDefaultEpsilon);
double raw_mahaad_score(const MScan& mscan, const RawMahaadModel& model);

class RawMahaadScorer final : public OodScorer {
public:
    explicit RawMahaadScorer(RawMahaadModel model) : model_(std::move(model)) {}
    double score(const MScan& mscan) const override { return raw_mahaad_score(mscan, model_); }
    std::string name() const override { return "raw-mahaad"; }
    const RawMahaadModel& model() const { return model_; }

private:
    RawMahaadModel model_;
};

// --- Uncertainty ---------------------------------------------------------------------------------

/// -p ln p - (1 - p) ln(1 - p), zero at p in {0, 1}.
double binary_entropy(double p);

/// Mean over A-scans of the binary entropy of each heatmap maximum.
double uncertainty_score(const MScan& mscan, const HeatmapEstimator& estimator);

class UncertaintyScorer final : public OodScorer {
public:
    explicit UncertaintyScorer(std::shared_ptr<const HeatmapEstimator> estimator) : estimator_(std::move(estimator)) {}
    double score(const MScan& mscan) const override { return uncertainty_score(mscan, *estimator_); }
    std::string name() const override { return "uncertainty"; }

private:
    std::shared_ptr<const HeatmapEstimator> estimator_;
};

// --- Supervised (linear head on frozen features) -------------------------------------------------

struct SupervisedLiteConfig {
    double l2 = 1e-2;               // penalty on standardized weights
    int iterations = 30;            // Newton steps
    double corrupted_fraction = 0.5;
};

struct SupervisedLiteModel {
    Eigen::VectorXd weights;        // over the concatenated feature set
    double bias = 0.0;
    std::vector<CorruptionKind> training_corruptions;
    ExtractorDescriptor extractor;
    PreprocConfig preproc;
    SupervisedLiteConfig config;
};

/// The labeled set supervised_lite_fit trains on.
std::vector<LabeledMScan> supervised_lite_training_set(std::span<const MScan> clean, std::uint64_t seed,
                                                       const SupervisedLiteConfig& config = {});

/// Corrupts round(fraction * N) training scans with the four supervised
/// kinds, labels them 1 and fits an L2-regularized logistic regression.
SupervisedLiteModel supervised_lite_fit(std::span<const MScan> clean, const FeatureExtractor& extractor,
                                        std::uint64_t seed, const SupervisedLiteConfig& config = {},
                                        const PreprocConfig& preproc = {});

/// Logistic regression on precomputed rows; exposed for tests.
void logistic_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2, int iterations,
                  Eigen::VectorXd& weights, double& bias);

double sigmoid(double z);
double supervised_lite_score(const FeatureSet& features, const SupervisedLiteModel& model);

class SupervisedLiteScorer final : public OodScorer {
public:
    SupervisedLiteScorer(SupervisedLiteModel model, std::shared_ptr<const FeatureExtractor> extractor);
    double score(const MScan& mscan) const override;
    std::string name() const override { return "supervised-lite"; }
    const SupervisedLiteModel& model() const { return model_; }

private:
    SupervisedLiteModel model_;
    std::shared_ptr<const FeatureExtractor> extractor_;
};

std::string serialize_supervised_lite(const SupervisedLiteModel& model);
SupervisedLiteModel parse_supervised_lite(std::string_view text);
void save_supervised_lite(const SupervisedLiteModel& model, const std::string& path);
SupervisedLiteModel load_supervised_lite(const std::string& path);

// --- references -----------------------------------------------------------------------------------

/// Keeps every scan.
class NoRejectionScorer final : public OodScorer {
public:
    double score(const MScan&) const override { return 0.0; }
    std::string name() const override { return "no-rejection"; }
    bool rejects() const override { return false; }
};

/// Wraps an arbitrary scoring function.
class FunctionScorer final : public OodScorer {
public:
    FunctionScorer(std::string name, std::function<double(const MScan&)> fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}
    double score(const MScan& mscan) const override { return fn_(mscan); }
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::function<double(const MScan&)> fn_;
};

}  // namespace octgate
