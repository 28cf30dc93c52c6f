#pragma once

#include "octgate/datagen.hpp"
#include "octgate/eval.hpp"
#include "octgate/features.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace octgate::cli {

struct ExtractorOptions {
    std::string kind = "builtin";           // builtin | exported
    int scales = 4;                         // builtin K
    std::string onnx_path;
    std::vector<std::string> taps;
    std::string input_name;
};

struct FitOptions {
    std::string train_path;
    std::string out_model;
    ExtractorOptions extractor;
    double epsilon = 1e-3;
    std::size_t threads = 0;
};

struct CalibrateOptions {
    std::string model_path;
    std::string holdout_path;
    std::string out_model;
    double q = 0.99;
    std::size_t threads = 0;
};

struct ScoreOptions {
    std::string model_path;
    std::string input_path;
    std::string out_path;                   // empty: stdout
    std::size_t threads = 0;
};

struct GateOptions {
    std::string model_path;
    std::string input = "-";                // file, "-" or tcp://host:port
    std::string out_path;                   // empty: stdout
    std::size_t window = 10;
    std::size_t stride = 10;
    std::size_t depth = 674;
    std::size_t workers = 1;
    std::size_t queue_capacity = 64;
};

struct CorruptOptions {
    std::string input_path;
    std::string out_path;
    std::string labels_in;                  // optional truths to carry over
    std::string labels_out;
    std::string kind;                       // single kind applied to every scan
    double p = -1.0;                        // fraction mode when >= 0
    std::vector<std::string> kinds;         // fraction mode kind set (empty: all)
    std::uint64_t seed = 0;
};

struct SynthOptions {
    std::size_t n = 334;
    std::string preset;                     // train | test | real-ood (overrides n)
    std::string out_path;
    std::string labels_out;
    std::string frames_out;                 // optional A-scan frame stream
    double p = 0.0;
    std::vector<std::string> kinds;
    std::uint64_t seed = 0;
    SynthParams params;
};

struct EvalOptions {
    std::string dataset_path;
    std::string labels_path;
    std::string protocol = "rejection";     // rejection | detection | per-corruption
    std::vector<std::string> scorers{"mahaad"};
    std::string model_path;                 // mahaad detector
    std::string train_path;                 // fits raw-mahaad and supervised-lite (and mahaad without a model)
    std::string supervised_model;           // optional pre-fitted supervised-lite
    std::string heatmap_onnx;               // optional exported downstream model
    std::string out_dir = ".";
    std::string format = "csv";             // csv | ndjson
    std::vector<double> p_grid;             // empty: default grid
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err);
int cmd_score(const ScoreOptions& o, std::ostream& out, std::ostream& err);
int cmd_gate(const GateOptions& o, std::ostream& out, std::ostream& err);
int cmd_corrupt(const CorruptOptions& o, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);

/// Sidecar label table: index,is_corrupted,kind,ilm_0..ilm_{W-1}
void write_labels_csv(const std::string& path, std::span<const LabeledMScan> labeled);
/// Attaches labels to the M-scans of a container.
std::vector<LabeledMScan> read_labeled(const std::string& mscn_path, const std::string& labels_path);

/// Parses the command line and dispatches; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace octgate::cli
