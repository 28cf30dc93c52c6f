#include "commands.hpp"

#include "octgate/baselines.hpp"
#include "octgate/downstream.hpp"
#include "octgate/gate.hpp"
#include "octgate/maha.hpp"
#include "octgate/model_io.hpp"
#include "octgate/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace octgate::cli {

namespace {

constexpr std::uint64_t kStreamCorruptAll = 0x43414c4c;  // "CALL"

std::vector<CorruptionKind> parse_kinds(const std::vector<std::string>& names) {
    if (names.empty()) return {kAllCorruptions.begin(), kAllCorruptions.end()};
    std::vector<CorruptionKind> out;
    for (const auto& n : names) out.push_back(corruption_from_string(n));
    return out;
}

std::shared_ptr<const FeatureExtractor> build_extractor(const ExtractorOptions& o) {
    if (o.kind == "builtin") return std::make_shared<BuiltinPyramidExtractor>(o.scales);
    if (o.kind == "exported") {
        if (o.onnx_path.empty() || o.taps.empty())
            throw std::invalid_argument("exported extractor needs --onnx and --taps");
        return std::make_shared<ExportedNetworkExtractor>(o.onnx_path, o.taps, o.input_name);
    }
    throw std::invalid_argument("unknown extractor \"" + o.kind + "\" (valid: builtin, exported)");
}

std::vector<FeatureSet> extract_all(const FeatureExtractor& ex, std::span<const MScan> mscans,
                                    const PreprocConfig& preproc, std::size_t threads) {
    std::vector<FeatureSet> out(mscans.size());
    parallel_for(mscans.size(), [&](std::size_t i) { out[i] = ex.extract(preprocess(mscans[i], preproc)); }, threads);
    return out;
}

Detector train_detector(std::span<const MScan> train, std::shared_ptr<const FeatureExtractor> ex, double epsilon,
                        std::size_t threads) {
    const PreprocConfig preproc;
    const auto features = extract_all(*ex, train, preproc, threads);
    auto model = fit(features, ex->descriptor(), preproc, epsilon);
    return Detector(std::move(model), std::move(ex));
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty() || path == "-") return fallback;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    return file;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
    return s;
}

std::string valid_scorers() {
    std::vector<std::string> v(kScorerNames.begin(), kScorerNames.end());
    return join(v, ", ");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

// --- labels ------------------------------------------------------------------------------------

void write_labels_csv(const std::string& path, std::span<const LabeledMScan> labeled) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const std::size_t w = labeled.empty() ? kDefaultWindow : labeled.front().mscan.width();
    out << "index,is_corrupted,kind";
    for (std::size_t j = 0; j < w; ++j) out << ",ilm_" << j;
    out << "\n";
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const auto& l = labeled[i];
        out << i << "," << (l.is_corrupted ? 1 : 0) << ","
            << (l.corruption_kind ? std::string(to_string(*l.corruption_kind)) : std::string("none"));
        for (std::size_t j = 0; j < w; ++j)
            out << "," << (j < l.ilm_truth.size() ? format_number(l.ilm_truth[j]) : std::string("NA"));
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<LabeledMScan> read_labeled(const std::string& mscn_path, const std::string& labels_path) {
    const auto mscans = read_mscan_container(mscn_path);
    std::vector<LabeledMScan> out;
    out.reserve(mscans.size());
    for (const auto& m : mscans) out.push_back({m, {}, false, std::nullopt});
    if (labels_path.empty()) return out;

    std::ifstream in(labels_path);
    if (!in) throw std::runtime_error("cannot open labels file " + labels_path);
    std::string line;
    std::getline(in, line);  // header
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() < 3) throw std::runtime_error("labels row " + std::to_string(row) + " is too short");
        const auto idx = static_cast<std::size_t>(std::stoull(cells[0]));
        if (idx >= out.size()) throw std::runtime_error("labels row refers to missing M-scan " + cells[0]);
        auto& l = out[idx];
        l.is_corrupted = cells[1] == "1";
        l.corruption_kind = l.is_corrupted && cells[2] != "none" && cells[2] != "real"
                                ? std::optional<CorruptionKind>(corruption_from_string(cells[2]))
                                : std::nullopt;
        l.ilm_truth.clear();
        bool have = true;
        for (std::size_t j = 3; j < cells.size(); ++j) {
            if (cells[j] == "NA") {
                have = false;
                break;
            }
            l.ilm_truth.push_back(std::stod(cells[j]));
        }
        if (!have) l.ilm_truth.clear();
        ++row;
    }
    return out;
}

// --- commands ------------------------------------------------------------------------------------

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto train = read_mscan_container(o.train_path);
        auto ex = build_extractor(o.extractor);
        const auto det = train_detector(train, ex, o.epsilon, o.threads);
        const auto& m = det.model();
        save_model(m, o.out_model);
        out << "N=" << m.training_sample_count << " K=" << m.scales.size() << " dims=";
        for (std::size_t k = 0; k < m.scales.size(); ++k) out << (k ? "," : "") << m.scales[k].dim();
        out << "\n";
        for (std::size_t k = 0; k < m.scales.size(); ++k)
            out << "scale " << k << ": condition " << format_number(m.scales[k].condition_estimate()) << "\n";
        out << "wrote " << o.out_model << "\n";
        return 0;
    });
}

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Detector det(load_model(o.model_path), [&](const std::string& w) { err << "warning: " << w << "\n"; });
        const auto holdout = read_mscan_container(o.holdout_path);
        if (holdout.empty()) throw std::runtime_error("holdout set is empty");
        const MahaadScorer scorer(std::make_shared<Detector>(det));
        const auto scores = score_all(scorer, holdout, o.threads);
        DetectorModel m = det.model();
        m.threshold_tau = quantile_linear(scores, o.q);
        m.calibration_quantile = o.q;
        save_model(m, o.out_model);
        out << "tau=" << format_number(*m.threshold_tau) << " q=" << format_number(o.q) << " n=" << holdout.size()
            << "\nwrote " << o.out_model << "\n";
        return 0;
    });
}

int cmd_score(const ScoreOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto det = std::make_shared<Detector>(load_model(o.model_path),
                                                    [&](const std::string& w) { err << "warning: " << w << "\n"; });
        const auto mscans = read_mscan_container(o.input_path);
        std::vector<Verdict> verdicts(mscans.size());
        const bool classify = det->model().calibrated();
        parallel_for(mscans.size(), [&](std::size_t i) { verdicts[i] = det->verdict(mscans[i], classify); }, o.threads);
        std::ofstream file;
        auto& dst = open_out(o.out_path, file, out);
        for (std::size_t i = 0; i < verdicts.size(); ++i) {
            nlohmann::ordered_json j;
            j["index"] = i;
            j["score"] = verdicts[i].score;
            j["per_scale"] = verdicts[i].per_scale_distances;
            if (classify) {
                j["tau"] = *det->model().threshold_tau;
                j["decision"] = verdicts[i].is_ood ? "reject" : "accept";
            }
            dst << j.dump() << "\n";
        }
        return 0;
    });
}

int cmd_gate(const GateOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto det = std::make_shared<Detector>(load_model(o.model_path),
                                                    [&](const std::string& w) { err << "warning: " << w << "\n"; });
        GateConfig cfg;
        cfg.window = o.window;
        cfg.stride = o.stride;
        cfg.depth = o.depth;
        cfg.workers = o.workers;
        cfg.queue_capacity = o.queue_capacity;
        const Gate gate(det, cfg);
        auto in = open_gate_input(o.input);
        std::ofstream file;
        auto& dst = open_out(o.out_path, file, out);
        const auto stats = gate.run(*in, dst);
        err << "windows=" << stats.windows << " rejected=" << stats.rejected << " errors=" << stats.errors
            << " elapsed_s=" << format_number(stats.elapsed_s)
            << " max_latency_us=" << stats.max_latency_us << "\n";
        return 0;
    });
}

int cmd_corrupt(const CorruptOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto data = read_labeled(o.input_path, o.labels_in);
        std::vector<LabeledMScan> result;
        if (o.p >= 0.0) {
            if (!o.kind.empty()) throw std::invalid_argument("use either --kind or --p, not both");
            const auto kinds = parse_kinds(o.kinds);
            result = corrupt_fraction(data, o.p, kinds, o.seed);
        } else {
            if (o.kind.empty()) throw std::invalid_argument("corrupt needs --kind or --p");
            const auto kind = corruption_from_string(o.kind);
            result = data;
            for (std::size_t i = 0; i < result.size(); ++i) {
                CorruptionSpec spec{kind, derive_seed(o.seed, kStreamCorruptAll, i), {}};
                result[i].mscan = corrupt(result[i].mscan, spec);
                result[i].is_corrupted = true;
                result[i].corruption_kind = kind;
            }
        }
        write_mscan_container(o.out_path, mscans_of(result));
        if (!o.labels_out.empty()) write_labels_csv(o.labels_out, result);
        const auto n_bad = std::count_if(result.begin(), result.end(), [](const auto& l) { return l.is_corrupted; });
        out << "corrupted " << n_bad << " of " << result.size() << " M-scans\nwrote " << o.out_path << "\n";
        return 0;
    });
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::size_t n = o.n;
        double p = o.p;
        if (o.preset == "train") {
            n = kTrainPresetSize;
        } else if (o.preset == "test") {
            n = kTestPresetSize;
        } else if (o.preset == "real-ood") {
            n = 2 * kRealOodPresetSize;
            p = 0.5;
        } else if (!o.preset.empty()) {
            throw std::invalid_argument("unknown preset \"" + o.preset + "\" (valid: train, test, real-ood)");
        }
        auto data = synth_dataset(n, o.params, o.seed);
        if (p > 0.0) data = corrupt_fraction(data, p, parse_kinds(o.kinds), derive_seed(o.seed, kStreamCorruptAll, 1));
        write_mscan_container(o.out_path, mscans_of(data));
        if (!o.labels_out.empty()) write_labels_csv(o.labels_out, data);
        if (!o.frames_out.empty()) {
            std::ofstream f(o.frames_out, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot open " + o.frames_out + " for writing");
            for (const auto& l : data)
                for (std::size_t j = 0; j < l.mscan.width(); ++j) write_frame(f, l.mscan.ascan(j));
        }
        out << "wrote " << n << " M-scans to " << o.out_path << "\n";
        return 0;
    });
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    for (const auto& s : o.scorers) {
        if (std::find(kScorerNames.begin(), kScorerNames.end(), s) == kScorerNames.end()) {
            err << "error: unknown scorer \"" << s << "\" (valid: " << valid_scorers() << ")\n";
            return 2;
        }
    }
    if (o.protocol != "rejection" && o.protocol != "detection" && o.protocol != "per-corruption") {
        err << "error: unknown protocol \"" << o.protocol << "\" (valid: rejection, detection, per-corruption)\n";
        return 2;
    }
    if (o.format != "csv" && o.format != "ndjson") {
        err << "error: unknown format \"" << o.format << "\" (valid: csv, ndjson)\n";
        return 2;
    }
    return guarded(err, [&] {
        const auto data = read_labeled(o.dataset_path, o.labels_path);
        std::vector<MScan> train;
        if (!o.train_path.empty()) train = read_mscan_container(o.train_path);
        std::shared_ptr<const HeatmapEstimator> estimator;
        if (o.heatmap_onnx.empty())
            estimator = std::make_shared<ReferenceEstimator>();
        else
            estimator = std::make_shared<ExportedHeatmapEstimator>(o.heatmap_onnx);
        auto need_train = [&](const std::string& who) {
            if (train.empty()) throw std::invalid_argument(who + " needs --train");
        };

        auto make = [&](const std::string& name) -> std::unique_ptr<OodScorer> {
            if (name == "mahaad") {
                if (!o.model_path.empty())
                    return std::make_unique<MahaadScorer>(std::make_shared<Detector>(
                        load_model(o.model_path), [&](const std::string& w) { err << "warning: " << w << "\n"; }));
                need_train("mahaad without --model");
                return std::make_unique<MahaadScorer>(std::make_shared<Detector>(
                    train_detector(train, std::make_shared<BuiltinPyramidExtractor>(), kDefaultEpsilon, o.threads)));
            }
            if (name == "raw-mahaad") {
                need_train(name);
                return std::make_unique<RawMahaadScorer>(raw_mahaad_fit(train));
            }
            if (name == "snr") return std::make_unique<SnrScorer>();
            if (name == "uncertainty") return std::make_unique<UncertaintyScorer>(estimator);
            if (name == "supervised-lite") {
                auto ex = std::make_shared<BuiltinPyramidExtractor>();
                if (!o.supervised_model.empty())
                    return std::make_unique<SupervisedLiteScorer>(load_supervised_lite(o.supervised_model), ex);
                need_train(name);
                return std::make_unique<SupervisedLiteScorer>(supervised_lite_fit(train, *ex, o.seed), ex);
            }
            return std::make_unique<NoRejectionScorer>();
        };

        std::filesystem::create_directories(o.out_dir);
        const auto fmt = o.format == "csv" ? ReportFormat::csv : ReportFormat::ndjson;
        const std::string ext = o.format == "csv" ? ".csv" : ".ndjson";

        std::vector<RejectionTrial> trials;
        if (o.protocol == "rejection") {
            std::vector<LabeledMScan> clean;
            for (const auto& l : data) {
                if (l.is_corrupted) continue;
                if (l.ilm_truth.size() != l.mscan.width())
                    throw std::invalid_argument("rejection protocol needs ILM truths (--labels)");
                clean.push_back(l);
            }
            if (clean.empty()) throw std::invalid_argument("no clean M-scans in the dataset");
            const auto grid = o.p_grid.empty() ? default_p_grid() : o.p_grid;
            trials = prepare_rejection_trials(clean, *estimator, grid, o.seed, kAllCorruptions, o.threads);
        }
        PerCorruptionBenchmark bench;
        if (o.protocol == "per-corruption") bench = make_per_corruption_benchmark(data, o.seed);

        for (const auto& name : o.scorers) {
            const auto scorer = make(name);
            const std::string path = (std::filesystem::path(o.out_dir) / (o.protocol + "_" + name + ext)).string();
            if (o.protocol == "rejection") {
                emit_report(rejection_curve(trials, *scorer, o.threads), path, fmt);
            } else if (o.protocol == "detection") {
                std::vector<bool> labels;
                for (const auto& l : data) labels.push_back(l.is_corrupted);
                const auto scores = score_all(*scorer, mscans_of(data), o.threads);
                emit_report(detection_report(name, scores, labels), path, fmt);
            } else {
                const auto per = per_corruption_auroc(bench.clean, bench.corrupted, *scorer, kAllCorruptions, o.threads);
                DetectionReport r;
                r.scorer_name = name;
                for (const auto& [k, v] : per) r.per_corruption[std::string(to_string(k))] = v;
                std::vector<double> all_scores;
                std::vector<bool> labels;
                const auto cs = score_all(*scorer, bench.clean, o.threads);
                all_scores = cs;
                labels.assign(cs.size(), false);
                for (const auto& [k, set] : bench.corrupted) {
                    const auto s = score_all(*scorer, set, o.threads);
                    all_scores.insert(all_scores.end(), s.begin(), s.end());
                    labels.resize(all_scores.size(), true);
                }
                const auto overall = detection_report(name, all_scores, labels);
                r.auroc = overall.auroc;
                r.ap = overall.ap;
                r.n_pos = overall.n_pos;
                r.n_neg = overall.n_neg;
                emit_report(r, path, fmt);
            }
            out << "wrote " << path << "\n";
        }
        return 0;
    });
}

// --- argument parsing --------------------------------------------------------------------------------

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"octgate: Mahalanobis out-of-distribution gate for OCT M-scans"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file mirroring the command-line flags");
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("--seed", seed, "top-level random seed");
    app.add_option("--threads", threads, "worker threads (0: all cores)");

    FitOptions fit_o;
    auto* fit_cmd = app.add_subcommand("fit", "fit an uncalibrated detector on in-distribution M-scans");
    fit_cmd->add_option("--train", fit_o.train_path, "training .mscn container")->required();
    fit_cmd->add_option("--out", fit_o.out_model, "output model file")->required();
    fit_cmd->add_option("--extractor", fit_o.extractor.kind, "builtin | exported");
    fit_cmd->add_option("--levels", fit_o.extractor.scales, "builtin pyramid levels (K)");
    fit_cmd->add_option("--onnx", fit_o.extractor.onnx_path, "exported network file");
    fit_cmd->add_option("--taps", fit_o.extractor.taps, "tapped value names")->delimiter(',');
    fit_cmd->add_option("--input-name", fit_o.extractor.input_name, "graph input to feed");
    fit_cmd->add_option("--epsilon", fit_o.epsilon, "diagonal loading factor");

    CalibrateOptions cal_o;
    auto* cal_cmd = app.add_subcommand("calibrate", "set tau from held-out in-distribution scores");
    cal_cmd->add_option("--model", cal_o.model_path)->required();
    cal_cmd->add_option("--holdout", cal_o.holdout_path)->required();
    cal_cmd->add_option("--out", cal_o.out_model)->required();
    cal_cmd->add_option("--q", cal_o.q, "quantile in (0, 1]");

    ScoreOptions score_o;
    auto* score_cmd = app.add_subcommand("score", "score every M-scan of a container (NDJSON)");
    score_cmd->add_option("--model", score_o.model_path)->required();
    score_cmd->add_option("--input", score_o.input_path)->required();
    score_cmd->add_option("--out", score_o.out_path, "output path (default stdout)");

    GateOptions gate_o;
    auto* gate_cmd = app.add_subcommand("gate", "gate a framed A-scan stream in real time (NDJSON)");
    gate_cmd->add_option("--model", gate_o.model_path)->required();
    gate_cmd->add_option("--input", gate_o.input, "frame file, - for stdin, or tcp://host:port");
    gate_cmd->add_option("--out", gate_o.out_path, "output path (default stdout)");
    gate_cmd->add_option("--window", gate_o.window);
    gate_cmd->add_option("--stride", gate_o.stride);
    gate_cmd->add_option("--depth", gate_o.depth, "samples per A-scan");
    gate_cmd->add_option("--workers", gate_o.workers, "scoring threads");
    gate_cmd->add_option("--queue", gate_o.queue_capacity, "hand-off queue capacity");

    CorruptOptions cor_o;
    std::string cor_kinds;
    auto* cor_cmd = app.add_subcommand("corrupt", "apply corruptions to a container");
    cor_cmd->add_option("--input", cor_o.input_path)->required();
    cor_cmd->add_option("--out", cor_o.out_path)->required();
    cor_cmd->add_option("--labels", cor_o.labels_in, "labels to carry over");
    cor_cmd->add_option("--labels-out", cor_o.labels_out);
    cor_cmd->add_option("--kind", cor_o.kind, "corrupt every scan with this kind");
    cor_cmd->add_option("--p", cor_o.p, "corrupt this fraction instead");
    cor_cmd->add_option("--kinds", cor_o.kinds, "kind set for --p (default all)")->delimiter(',');

    SynthOptions syn_o;
    auto* syn_cmd = app.add_subcommand("synth", "generate synthetic labelled M-scans");
    syn_cmd->add_option("--n", syn_o.n);
    syn_cmd->add_option("--preset", syn_o.preset, "train (334) | test (2000) | real-ood (258 + 258)");
    syn_cmd->add_option("--out", syn_o.out_path)->required();
    syn_cmd->add_option("--labels-out", syn_o.labels_out);
    syn_cmd->add_option("--frames-out", syn_o.frames_out, "also write every A-scan as a stream frame");
    syn_cmd->add_option("--p", syn_o.p, "fraction to corrupt");
    syn_cmd->add_option("--kinds", syn_o.kinds)->delimiter(',');
    syn_cmd->add_option("--width", syn_o.params.width);
    syn_cmd->add_option("--depth", syn_o.params.depth);
    syn_cmd->add_option("--ilm-min", syn_o.params.ilm_depth_min);
    syn_cmd->add_option("--ilm-max", syn_o.params.ilm_depth_max);
    syn_cmd->add_option("--speckle", syn_o.params.speckle_contrast);
    syn_cmd->add_option("--drift", syn_o.params.drift_rate);
    syn_cmd->add_option("--background", syn_o.params.background_level);

    EvalOptions ev_o;
    ev_o.scorers.clear();
    auto* ev_cmd = app.add_subcommand("eval", "run an evaluation protocol");
    ev_cmd->add_option("--dataset", ev_o.dataset_path)->required();
    ev_cmd->add_option("--labels", ev_o.labels_path);
    ev_cmd->add_option("--protocol", ev_o.protocol, "rejection | detection | per-corruption");
    ev_cmd->add_option("--scorer", ev_o.scorers, "comma-separated scorer names")->delimiter(',');
    ev_cmd->add_option("--model", ev_o.model_path, "fitted MahaAD model");
    ev_cmd->add_option("--train", ev_o.train_path, "training container for fitted baselines");
    ev_cmd->add_option("--supervised-model", ev_o.supervised_model);
    ev_cmd->add_option("--heatmap-onnx", ev_o.heatmap_onnx, "exported downstream model");
    ev_cmd->add_option("--out-dir", ev_o.out_dir);
    ev_cmd->add_option("--format", ev_o.format, "csv | ndjson");
    ev_cmd->add_option("--p-grid", ev_o.p_grid)->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code;
    }

    if (fit_cmd->parsed()) {
        fit_o.threads = threads;
        return cmd_fit(fit_o, out, err);
    }
    if (cal_cmd->parsed()) {
        cal_o.threads = threads;
        return cmd_calibrate(cal_o, out, err);
    }
    if (score_cmd->parsed()) {
        score_o.threads = threads;
        return cmd_score(score_o, out, err);
    }
    if (gate_cmd->parsed()) return cmd_gate(gate_o, out, err);
    if (cor_cmd->parsed()) {
        cor_o.seed = seed;
        return cmd_corrupt(cor_o, out, err);
    }
    if (syn_cmd->parsed()) {
        syn_o.seed = seed;
        return cmd_synth(syn_o, out, err);
    }
    if (ev_cmd->parsed()) {
        ev_o.seed = seed;
        ev_o.threads = threads;
        if (ev_o.scorers.empty()) ev_o.scorers = {"mahaad"};
        return cmd_eval(ev_o, out, err);
    }
    return 2;
}

}  // namespace octgate::cli
