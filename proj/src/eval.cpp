#include "octgate/eval.hpp"

#include "octgate/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace octgate {

namespace {

constexpr std::uint64_t kStreamTrial = 0x5452494c;     // "TRIL"
constexpr std::uint64_t kStreamKind = 0x4b494e44;      // "KIND"

void check_labels(std::span<const double> scores, const std::vector<bool>& labels, std::size_t& pos,
                  std::size_t& neg) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
    pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw std::invalid_argument("both classes must be present");
    for (double s : scores)
        if (std::isnan(s)) throw std::invalid_argument("scores contain NaN");
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

std::vector<double> default_p_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 9; ++i) g.push_back(i / 10.0);
    return g;
}

std::vector<std::size_t> top_fraction(std::span<const double> scores, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("top_fraction: p must lie in [0, 1]");
    const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(scores.size())));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

RejectionPoint rejection_point(std::span<const double> scores, std::span<const std::vector<double>> estimates,
                               std::span<const std::vector<double>> truths, const std::vector<bool>& is_corrupted,
                               double p, bool reject) {
    const std::size_t n = scores.size();
    if (estimates.size() != n || truths.size() != n || is_corrupted.size() != n)
        throw std::invalid_argument("rejection_point: input lengths differ");
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("rejection_point: p must lie in [0, 1)");
    std::vector<bool> keep(n, true);
    if (reject)
        for (std::size_t i : top_fraction(scores, p)) keep[i] = false;

    RejectionPoint out;
    double err = 0.0, clean_err = 0.0;
    std::size_t count = 0, clean_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (estimates[i].size() != truths[i].size())
            throw std::invalid_argument("rejection_point: estimate/truth length mismatch for scan " + std::to_string(i));
        double e = 0.0;
        for (std::size_t j = 0; j < truths[i].size(); ++j) e += std::abs(estimates[i][j] - truths[i][j]);
        if (is_corrupted[i]) ++out.corrupted;
        if (!is_corrupted[i]) {
            clean_err += e;
            clean_count += truths[i].size();
        }
        if (keep[i]) {
            ++out.retained;
            if (is_corrupted[i]) ++out.corrupted_retained;
            err += e;
            count += truths[i].size();
        }
    }
    if (count > 0) out.mae_px = err / static_cast<double>(count);
    if (clean_count > 0) out.clean_floor_px = clean_err / static_cast<double>(clean_count);
    return out;
}

std::vector<RejectionTrial> prepare_rejection_trials(std::span<const LabeledMScan> clean,
                                                     const HeatmapEstimator& estimator, std::span<const double> p_grid,
                                                     std::uint64_t seed, std::span<const CorruptionKind> kinds,
                                                     std::size_t threads) {
    std::vector<RejectionTrial> trials;
    trials.reserve(p_grid.size());
    for (double p : p_grid) {
        if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("p values must lie in [0, 1)");
        RejectionTrial t;
        t.p = p;
        const auto tag = static_cast<std::uint64_t>(std::llround(p * 1e6));
        t.data = corrupt_fraction(clean, p, kinds, derive_seed(seed, kStreamTrial, tag));
        t.estimates.resize(t.data.size());
        parallel_for(
            t.data.size(), [&](std::size_t i) { t.estimates[i] = estimate_ilm(t.data[i].mscan, estimator); },
            threads);
        trials.push_back(std::move(t));
    }
    return trials;
}

std::vector<double> score_all(const OodScorer& scorer, std::span<const MScan> mscans, std::size_t threads) {
    std::vector<double> s(mscans.size());
    parallel_for(mscans.size(), [&](std::size_t i) { s[i] = scorer.score(mscans[i]); }, threads);
    return s;
}

RejectionCurve rejection_curve(std::span<const RejectionTrial> trials, const OodScorer& scorer, std::size_t threads) {
    RejectionCurve c;
    c.scorer_name = scorer.name();
    for (const auto& t : trials) {
        const std::size_t n = t.data.size();
        std::vector<double> scores(n, 0.0);
        if (scorer.rejects())
            parallel_for(n, [&](std::size_t i) { scores[i] = scorer.score(t.data[i].mscan); }, threads);
        std::vector<std::vector<double>> truths(n);
        std::vector<bool> corrupted(n);
        for (std::size_t i = 0; i < n; ++i) {
            truths[i] = t.data[i].ilm_truth;
            corrupted[i] = t.data[i].is_corrupted;
        }
        const auto pt = rejection_point(scores, t.estimates, truths, corrupted, t.p, scorer.rejects());
        c.p_grid.push_back(t.p);
        c.mae_px.push_back(pt.mae_px);
        c.retained_counts.push_back(pt.retained);
        c.corrupted_counts.push_back(pt.corrupted);
        c.corrupted_retained.push_back(pt.corrupted_retained);
        c.clean_floor_px.push_back(pt.clean_floor_px);
        c.n = n;
    }
    return c;
}

RejectionCurve rejection_experiment(std::span<const LabeledMScan> clean, const OodScorer& scorer,
                                    const HeatmapEstimator& estimator, std::span<const double> p_grid,
                                    std::uint64_t seed, std::size_t threads) {
    const auto trials = prepare_rejection_trials(clean, estimator, p_grid, seed, kAllCorruptions, threads);
    return rejection_curve(trials, scorer, threads);
}

// --- metrics ---------------------------------------------------------------------------------

double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
    std::size_t pos = 0, neg = 0;
    check_labels(scores, labels, pos, neg);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // twice the Mann-Whitney U, kept integral: each positive counts 2 per
    // lower negative and 1 per tied negative
    std::uint64_t twice_u = 0;
    std::size_t neg_below = 0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t h = g;
        std::size_t gp = 0, gn = 0;
        while (h < order.size() && scores[order[h]] == scores[order[g]]) {
            (labels[order[h]] ? gp : gn) += 1;
            ++h;
        }
        twice_u += static_cast<std::uint64_t>(gp) * (2 * neg_below + gn);
        neg_below += gn;
        g = h;
    }
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
    std::size_t pos = 0, neg = 0;
    check_labels(scores, labels, pos, neg);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t h = g;
        std::size_t gp = 0;
        while (h < order.size() && scores[order[h]] == scores[order[g]]) {
            if (labels[order[h]]) ++gp; else ++fp;
            ++h;
        }
        tp += gp;
        if (gp > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
            ap += (static_cast<double>(gp) / static_cast<double>(pos)) * precision;
        }
        g = h;
    }
    return ap;
}

DetectionReport detection_report(std::string scorer_name, std::span<const double> scores,
                                 const std::vector<bool>& labels) {
    DetectionReport r;
    r.scorer_name = std::move(scorer_name);
    r.auroc = auroc(scores, labels);
    r.ap = average_precision(scores, labels);
    r.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    r.n_neg = labels.size() - r.n_pos;
    return r;
}

PerCorruptionBenchmark make_per_corruption_benchmark(std::span<const LabeledMScan> dataset, std::uint64_t seed,
                                                     std::span<const CorruptionKind> kinds) {
    if (dataset.size() < 2) throw std::invalid_argument("per-corruption benchmark needs at least 2 scans");
    const std::size_t half = dataset.size() / 2;
    PerCorruptionBenchmark b;
    for (std::size_t i = 0; i < half; ++i) b.clean.push_back(dataset[i].mscan);
    for (auto kind : kinds) {
        auto& dst = b.corrupted[kind];
        for (std::size_t i = half; i < 2 * half; ++i) {
            Rng rng(derive_seed(seed, kStreamKind + static_cast<std::uint64_t>(kind), i));
            const auto params = sample_corruption(kind, dataset[i].mscan.width(), dataset[i].mscan.depth(), rng);
            dst.push_back(apply_corruption(dataset[i].mscan, params));
        }
    }
    return b;
}

std::map<CorruptionKind, double> per_corruption_auroc(std::span<const MScan> clean,
                                                      const std::map<CorruptionKind, std::vector<MScan>>& corrupted,
                                                      const OodScorer& scorer,
                                                      std::span<const CorruptionKind> required, std::size_t threads) {
    if (clean.empty()) throw std::invalid_argument("per_corruption_auroc: empty clean set");
    for (auto k : required)
        if (!corrupted.contains(k) || corrupted.at(k).empty())
            throw std::invalid_argument("per_corruption_auroc: missing corrupted set for " + std::string(to_string(k)));
    const auto clean_scores = score_all(scorer, clean, threads);
    std::map<CorruptionKind, double> out;
    for (const auto& [kind, set] : corrupted) {
        if (set.empty()) throw std::invalid_argument("per_corruption_auroc: empty set for " + std::string(to_string(kind)));
        auto scores = clean_scores;
        const auto bad = score_all(scorer, set, threads);
        scores.insert(scores.end(), bad.begin(), bad.end());
        std::vector<bool> labels(clean_scores.size(), false);
        labels.resize(scores.size(), true);
        out[kind] = auroc(scores, labels);
    }
    return out;
}

double mean_auroc(const std::map<CorruptionKind, double>& per_kind, std::span<const CorruptionKind> kinds) {
    if (kinds.empty()) throw std::invalid_argument("mean_auroc: no kinds");
    double s = 0.0;
    for (auto k : kinds) {
        const auto it = per_kind.find(k);
        if (it == per_kind.end()) throw std::invalid_argument("mean_auroc: missing " + std::string(to_string(k)));
        s += it->second;
    }
    return s / static_cast<double>(kinds.size());
}

// --- reports ------------------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string curve_to_csv(const RejectionCurve& c) {
    std::string s = "scorer,p,n,retained,corrupted,corrupted_retained,mae_px,mae_um,clean_floor_px\n";
    for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
        const auto um = c.mae_px[i] ? std::optional<double>(*c.mae_px[i] * c.resolution_um) : std::nullopt;
        s += c.scorer_name + "," + format_number(c.p_grid[i]) + "," + std::to_string(c.n) + "," +
             std::to_string(c.retained_counts[i]) + "," + std::to_string(c.corrupted_counts[i]) + "," +
             std::to_string(c.corrupted_retained[i]) + "," + optional_csv(c.mae_px[i]) + "," + optional_csv(um) + "," +
             optional_csv(c.clean_floor_px[i]) + "\n";
    }
    return s;
}

std::string curve_to_ndjson(const RejectionCurve& c) {
    std::string s;
    for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
        nlohmann::ordered_json j;
        j["scorer"] = c.scorer_name;
        j["p"] = c.p_grid[i];
        j["n"] = c.n;
        j["retained"] = c.retained_counts[i];
        j["corrupted"] = c.corrupted_counts[i];
        j["corrupted_retained"] = c.corrupted_retained[i];
        j["mae_px"] = optional_json(c.mae_px[i]);
        j["mae_um"] = c.mae_px[i] ? nlohmann::ordered_json(*c.mae_px[i] * c.resolution_um) : nlohmann::ordered_json();
        j["clean_floor_px"] = optional_json(c.clean_floor_px[i]);
        s += j.dump() + "\n";
    }
    return s;
}

std::string per_corruption_to_csv(const DetectionReport& r) {
    std::string s = "scorer,kind,auroc\n";
    for (auto kind : kAllCorruptions) {
        const auto it = r.per_corruption.find(std::string(to_string(kind)));
        if (it == r.per_corruption.end()) continue;
        s += r.scorer_name + "," + it->first + "," + format_number(it->second) + "\n";
    }
    return s;
}

std::string detection_to_csv(const DetectionReport& r) {
    return "scorer,auroc,ap,n_pos,n_neg\n" + r.scorer_name + "," + format_number(r.auroc) + "," + format_number(r.ap) +
           "," + std::to_string(r.n_pos) + "," + std::to_string(r.n_neg) + "\n";
}

std::string detection_to_ndjson(const DetectionReport& r) {
    nlohmann::ordered_json j;
    j["scorer"] = r.scorer_name;
    j["auroc"] = r.auroc;
    j["ap"] = r.ap;
    j["n_pos"] = r.n_pos;
    j["n_neg"] = r.n_neg;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (auto kind : kAllCorruptions) {
        const auto it = r.per_corruption.find(std::string(to_string(kind)));
        if (it != r.per_corruption.end()) per[it->first] = it->second;
    }
    j["per_corruption"] = per;
    return j.dump() + "\n";
}

void emit_report(const RejectionCurve& curve, const std::string& path, ReportFormat format) {
    write_text(path, format == ReportFormat::csv ? curve_to_csv(curve) : curve_to_ndjson(curve));
}

void emit_report(const DetectionReport& report, const std::string& path, ReportFormat format) {
    if (format == ReportFormat::csv)
        write_text(path, report.per_corruption.empty() ? detection_to_csv(report) : per_corruption_to_csv(report));
    else
        write_text(path, detection_to_ndjson(report));
}

}  // namespace octgate
