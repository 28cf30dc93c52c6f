#include "octgate/baselines.hpp"

#include "octgate/errors.hpp"

#include "envelope.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace octgate {

namespace {
constexpr std::string_view kSupervisedFormat = "octgate.supervised_lite";
constexpr std::uint64_t kStreamSupervised = 0x53555056;  // "SUPV"
}  // namespace

std::vector<double> OodScorer::scores(std::span<const MScan> mscans) const {
    std::vector<double> out;
    out.reserve(mscans.size());
    for (const auto& m : mscans) out.push_back(score(m));
    return out;
}

// --- SNR ----------------------------------------------------------------------------------------

double snr_score(const MScan& mscan) {
    if (mscan.empty()) throw std::invalid_argument("snr_score: empty M-scan");
    if (!mscan.all_finite()) throw std::invalid_argument("snr_score: non-finite samples");
    const auto data = mscan.data();
    double sum = 0.0;
    for (float v : data) sum += v;
    const double mu = sum / static_cast<double>(data.size());
    double ss = 0.0;
    for (float v : data) ss += (v - mu) * (v - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(data.size()));
    if (sigma == 0.0) return std::numeric_limits<double>::max();
    return -mu / sigma;
}

// --- Raw-MahaAD ----------------------------------------------------------------------------------

Eigen::VectorXd pool_depth(const MScan& mscan, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("pool_depth: factor must be >= 1");
    const std::size_t blocks = mscan.depth() / factor;
    if (blocks == 0) throw std::invalid_argument("pool_depth: factor exceeds the A-scan depth");
    Eigen::VectorXd v(static_cast<Eigen::Index>(mscan.width() * blocks));
    for (std::size_t j = 0; j < mscan.width(); ++j) {
        const auto a = mscan.ascan(j);
        for (std::size_t b = 0; b < blocks; ++b) {
            double s = 0.0;
            for (std::size_t i = b * factor; i < (b + 1) * factor; ++i) s += a[i];
            v(static_cast<Eigen::Index>(j * blocks + b)) = s / static_cast<double>(factor);
        }
    }
    return v;
}

RawMahaadModel raw_mahaad_fit(std::span<const MScan> mscans, std::size_t pool_factor, double epsilon) {
    if (mscans.size() < 2) throw FitError("need at least 2 samples, got " + std::to_string(mscans.size()));
    RawMahaadModel model;
    model.pool_factor = pool_factor;
    model.width = mscans.front().width();
    model.depth = mscans.front().depth();
    std::vector<Eigen::VectorXd> pooled;
    pooled.reserve(mscans.size());
    for (std::size_t i = 0; i < mscans.size(); ++i) {
        if (mscans[i].width() != model.width || mscans[i].depth() != model.depth)
            throw FitError("M-scan " + std::to_string(i) + " has a different shape");
        pooled.push_back(pool_depth(mscans[i], pool_factor));
    }
    model.gaussian = fit_gaussian(pooled, epsilon, 0);
    return model;
}

double raw_mahaad_score(const MScan& mscan, const RawMahaadModel& model) {
    if (mscan.width() != model.width || mscan.depth() != model.depth)
        throw std::invalid_argument("raw_mahaad_score: M-scan shape differs from the fitted shape");
    return mahalanobis(pool_depth(mscan, model.pool_factor), model.gaussian);
}

// --- Uncertainty -----------------------------------------------------------------------------------

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0, 1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

double uncertainty_score(const MScan& mscan, const HeatmapEstimator& estimator) {
    if (mscan.width() == 0) throw std::invalid_argument("uncertainty_score: empty M-scan");
    double total = 0.0;
    for (std::size_t j = 0; j < mscan.width(); ++j) {
        const auto hm = estimator.heatmap(mscan.ascan(j));
        double peak = 0.0;
        for (double v : hm.probs) {
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("uncertainty_score: heatmap value outside [0, 1]");
            peak = std::max(peak, v);
        }
        total += binary_entropy(peak);
    }
    return total / static_cast<double>(mscan.width());
}

// --- Supervised --------------------------------------------------------------------------------------

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void logistic_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2, int iterations,
                  Eigen::VectorXd& weights, double& bias) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n == 0 || y.size() != n) throw FitError("logistic_fit: empty or mismatched data");
    const double positives = y.sum();
    if (positives <= 0.0 || positives >= static_cast<double>(n))
        throw FitError("logistic_fit: training labels contain a single class");

    // augmented design [x, 1]; the bias is not penalized
    Eigen::MatrixXd a(n, d + 1);
    a.leftCols(d) = x;
    a.col(d).setOnes();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, l2);
    penalty(d) = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd z = a * theta;
        Eigen::VectorXd p(n), s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = sigmoid(z(i));
            s(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        const Eigen::VectorXd grad = inv_n * (a.transpose() * (p - y)) + penalty.cwiseProduct(theta);
        Eigen::MatrixXd hess = inv_n * (a.transpose() * s.asDiagonal() * a);
        hess.diagonal() += penalty;
        hess.diagonal().array() += 1e-10;
        theta -= hess.ldlt().solve(grad);
    }
    weights = theta.head(d);
    bias = theta(d);
}

std::vector<LabeledMScan> supervised_lite_training_set(std::span<const MScan> clean, std::uint64_t seed,
                                                       const SupervisedLiteConfig& config) {
    std::vector<LabeledMScan> labeled;
    labeled.reserve(clean.size());
    for (const auto& m : clean) labeled.push_back({m, {}, false, std::nullopt});
    return corrupt_fraction(labeled, config.corrupted_fraction, kSupervisedCorruptions,
                            derive_seed(seed, kStreamSupervised, 0));
}

SupervisedLiteModel supervised_lite_fit(std::span<const MScan> clean, const FeatureExtractor& extractor,
                                        std::uint64_t seed, const SupervisedLiteConfig& config,
                                        const PreprocConfig& preproc) {
    if (clean.size() < 20) throw FitError("supervised_lite_fit: need at least 20 scans, got " +
                                          std::to_string(clean.size()));
    const auto corrupted = supervised_lite_training_set(clean, seed, config);

    std::vector<Eigen::VectorXd> rows;
    rows.reserve(corrupted.size());
    for (const auto& l : corrupted) rows.push_back(extractor.extract(preprocess(l.mscan, preproc)).concatenated());
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = rows.front().size();
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = rows[static_cast<std::size_t>(i)].transpose();
        y(i) = corrupted[static_cast<std::size_t>(i)].is_corrupted ? 1.0 : 0.0;
    }

    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    Eigen::VectorXd scale(d);
    for (Eigen::Index c = 0; c < d; ++c) {
        const double var = (x.col(c).array() - mean(c)).square().mean();
        scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    const Eigen::MatrixXd xs = (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();

    Eigen::VectorXd w;
    double b = 0.0;
    logistic_fit(xs, y, config.l2, config.iterations, w, b);

    SupervisedLiteModel model;
    model.weights = w.cwiseQuotient(scale);
    model.bias = b - model.weights.dot(mean);
    model.training_corruptions.assign(kSupervisedCorruptions.begin(), kSupervisedCorruptions.end());
    model.extractor = extractor.descriptor();
    model.preproc = preproc;
    model.config = config;
    if (!model.weights.allFinite() || !std::isfinite(model.bias))
        throw FitError("supervised_lite_fit: optimizer produced non-finite weights");
    return model;
}

double supervised_lite_score(const FeatureSet& features, const SupervisedLiteModel& model) {
    const Eigen::VectorXd f = features.concatenated();
    if (f.size() != model.weights.size())
        throw std::invalid_argument("supervised_lite_score: feature length " + std::to_string(f.size()) +
                                    " != weight length " + std::to_string(model.weights.size()));
    return sigmoid(model.weights.dot(f) + model.bias);
}

SupervisedLiteScorer::SupervisedLiteScorer(SupervisedLiteModel model, std::shared_ptr<const FeatureExtractor> extractor)
    : model_(std::move(model)), extractor_(std::move(extractor)) {
    if (!extractor_) throw std::invalid_argument("SupervisedLiteScorer: null extractor");
}

double SupervisedLiteScorer::score(const MScan& mscan) const {
    return supervised_lite_score(extractor_->extract(preprocess(mscan, model_.preproc)), model_);
}

std::string serialize_supervised_lite(const SupervisedLiteModel& model) {
    using nlohmann::json;
    json kinds = json::array();
    for (auto k : model.training_corruptions) kinds.push_back(std::string(to_string(k)));
    const json payload = {{"weights", detail::vector_to_json(model.weights)},
                          {"bias", model.bias},
                          {"training_corruptions", kinds},
                          {"extractor", detail::descriptor_to_json(model.extractor)},
                          {"preproc", detail::preproc_to_json(model.preproc)},
                          {"l2", model.config.l2},
                          {"iterations", model.config.iterations},
                          {"corrupted_fraction", model.config.corrupted_fraction}};
    return detail::write_envelope(kSupervisedFormat, payload);
}

SupervisedLiteModel parse_supervised_lite(std::string_view text) {
    const auto payload = detail::read_envelope(text, kSupervisedFormat);
    SupervisedLiteModel model;
    try {
        model.weights = detail::vector_from_json(payload.at("weights"));
        model.bias = payload.at("bias").get<double>();
        for (const auto& k : payload.at("training_corruptions"))
            model.training_corruptions.push_back(corruption_from_string(k.get<std::string>()));
        model.extractor = detail::descriptor_from_json(payload.at("extractor"));
        model.preproc = detail::preproc_from_json(payload.at("preproc"));
        model.config.l2 = payload.at("l2").get<double>();
        model.config.iterations = payload.at("iterations").get<int>();
        model.config.corrupted_fraction = payload.at("corrupted_fraction").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed supervised model payload: ") + e.what());
    }
    return model;
}

void save_supervised_lite(const SupervisedLiteModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << serialize_supervised_lite(model);
    if (!out) throw std::runtime_error("failed writing " + path);
}

SupervisedLiteModel load_supervised_lite(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file " + path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_supervised_lite(text);
}

}  // namespace octgate
