#pragma once

#include "octgate/baselines.hpp"
#include "octgate/datagen.hpp"
#include "octgate/downstream.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace octgate {

// --- rejection protocol ----------------------------------------------------------------

/// {0, 0.1, ..., 0.9}
std::vector<double> default_p_grid();

/// Outcome of discarding the top round(p * n) scores once.
struct RejectionPoint {
    std::optional<double> mae_px;         // over retained A-scans; empty when nothing is retained
    std::optional<double> clean_floor_px; // over the uncorrupted scans, nothing rejected
    std::size_t retained = 0;
    std::size_t corrupted = 0;
    std::size_t corrupted_retained = 0;
};

/// Indices of the discarded scans: the top round(p * n) by score, ties
/// broken by input order (earlier index is discarded first).
std::vector<std::size_t> top_fraction(std::span<const double> scores, double p);

/// Core of the protocol. `estimates[i]` and `truths[i]` hold one value per
/// A-scan of scan i. With `reject == false` every scan is retained.
RejectionPoint rejection_point(std::span<const double> scores, std::span<const std::vector<double>> estimates,
                               std::span<const std::vector<double>> truths, const std::vector<bool>& is_corrupted,
                               double p, bool reject = true);

/// One corrupted copy of the test set with its downstream estimates.
struct RejectionTrial {
    double p = 0.0;
    std::vector<LabeledMScan> data;
    std::vector<std::vector<double>> estimates;
};

/// Builds the corrupted dataset for every p. The corruption seed depends
/// only on (seed, p), so every scorer sees the same data.
std::vector<RejectionTrial> prepare_rejection_trials(std::span<const LabeledMScan> clean,
                                                     const HeatmapEstimator& estimator, std::span<const double> p_grid,
                                                     std::uint64_t seed,
                                                     std::span<const CorruptionKind> kinds = kAllCorruptions,
                                                     std::size_t threads = 0);

struct RejectionCurve {
    std::string scorer_name;
    std::vector<double> p_grid;
    std::vector<std::optional<double>> mae_px;
    std::vector<std::size_t> retained_counts;
    std::vector<std::size_t> corrupted_counts;
    std::vector<std::size_t> corrupted_retained;
    std::vector<std::optional<double>> clean_floor_px;
    std::size_t n = 0;
    double resolution_um = kDepthResolutionUm;
};

RejectionCurve rejection_curve(std::span<const RejectionTrial> trials, const OodScorer& scorer,
                               std::size_t threads = 0);

/// prepare_rejection_trials followed by rejection_curve.
RejectionCurve rejection_experiment(std::span<const LabeledMScan> clean, const OodScorer& scorer,
                                    const HeatmapEstimator& estimator, std::span<const double> p_grid,
                                    std::uint64_t seed, std::size_t threads = 0);

// --- detection metrics -------------------------------------------------------------------

/// Mann-Whitney AUROC: P(pos > neg) + 0.5 P(tie). Labels: true = positive
/// (OoD). Throws std::invalid_argument unless both classes are present.
double auroc(std::span<const double> scores, const std::vector<bool>& labels);

/// Step-wise average precision over descending score thresholds, with
/// equal scores entering together.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels);

struct DetectionReport {
    std::string scorer_name;
    double auroc = 0.0;
    double ap = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::map<std::string, double> per_corruption;  // kind name -> AUROC
};

DetectionReport detection_report(std::string scorer_name, std::span<const double> scores,
                                 const std::vector<bool>& labels);

/// Clean half and, per kind, the other half corrupted with that kind
/// (balanced counts, p = 0.5 semantics).
struct PerCorruptionBenchmark {
    std::vector<MScan> clean;
    std::map<CorruptionKind, std::vector<MScan>> corrupted;
};

PerCorruptionBenchmark make_per_corruption_benchmark(std::span<const LabeledMScan> dataset, std::uint64_t seed,
                                                     std::span<const CorruptionKind> kinds = kAllCorruptions);

std::map<CorruptionKind, double> per_corruption_auroc(std::span<const MScan> clean,
                                                      const std::map<CorruptionKind, std::vector<MScan>>& corrupted,
                                                      const OodScorer& scorer,
                                                      std::span<const CorruptionKind> required = {},
                                                      std::size_t threads = 0);

/// Mean AUROC over `kinds`; each must be present in `per_kind`.
double mean_auroc(const std::map<CorruptionKind, double>& per_kind, std::span<const CorruptionKind> kinds);

/// Scores of every scan, computed in parallel.
std::vector<double> score_all(const OodScorer& scorer, std::span<const MScan> mscans, std::size_t threads = 0);

// --- reports ------------------------------------------------------------------------------

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Header: scorer,p,n,retained,corrupted,corrupted_retained,mae_px,mae_um,clean_floor_px
/// Undefined MAE values are written as NA.
std::string curve_to_csv(const RejectionCurve& curve);
/// One JSON object per p.
std::string curve_to_ndjson(const RejectionCurve& curve);
/// Header: scorer,kind,auroc
std::string per_corruption_to_csv(const DetectionReport& report);
/// Header: scorer,auroc,ap,n_pos,n_neg
std::string detection_to_csv(const DetectionReport& report);
/// A single JSON object with every field.
std::string detection_to_ndjson(const DetectionReport& report);

enum class ReportFormat { csv, ndjson };
void emit_report(const RejectionCurve& curve, const std::string& path, ReportFormat format);
void emit_report(const DetectionReport& report, const std::string& path, ReportFormat format);

}  // namespace octgate
