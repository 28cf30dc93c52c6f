#include "octgate/baselines.hpp"
#include "octgate/datagen.hpp"
#include "octgate/downstream.hpp"
#include "octgate/eval.hpp"
#include "octgate/features.hpp"
#include "octgate/maha.hpp"
#include "octgate/model_io.hpp"
#include "octgate/onnx_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>

namespace py = pybind11;
using namespace octgate;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

MScan to_mscan(const FloatArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a (W, P) array");
    const auto w = static_cast<std::size_t>(a.shape(0));
    const auto p = static_cast<std::size_t>(a.shape(1));
    std::vector<float> data(a.data(), a.data() + w * p);
    return MScan(w, p, std::move(data));
}

std::vector<MScan> to_mscans(const FloatArray& a) {
    if (a.ndim() != 3) throw std::invalid_argument("expected an (N, W, P) array");
    const auto n = static_cast<std::size_t>(a.shape(0));
    const auto w = static_cast<std::size_t>(a.shape(1));
    const auto p = static_cast<std::size_t>(a.shape(2));
    std::vector<MScan> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* src = a.data() + i * w * p;
        out.emplace_back(w, p, std::vector<float>(src, src + w * p));
    }
    return out;
}

FloatArray from_mscan(const MScan& m) {
    FloatArray a({m.width(), m.depth()});
    std::memcpy(a.mutable_data(), m.data().data(), m.size() * sizeof(float));
    return a;
}

class PyDetector {
public:
    explicit PyDetector(std::shared_ptr<const Detector> d) : d_(std::move(d)) {}

    static PyDetector train(const FloatArray& mscans, int levels, double epsilon) {
        const auto data = to_mscans(mscans);
        return PyDetector(std::make_shared<Detector>(
            Detector::train(data, std::make_shared<BuiltinPyramidExtractor>(levels), PreprocConfig{}, epsilon)));
    }
    static PyDetector load(const std::string& path) { return PyDetector(std::make_shared<Detector>(load_model(path))); }

    double score(const FloatArray& mscan) const { return d_->score(to_mscan(mscan)); }
    std::vector<double> scores(const FloatArray& mscans) const { return d_->scores(to_mscans(mscans)); }
    PyDetector calibrate(const FloatArray& holdout, double q) const {
        return PyDetector(std::make_shared<Detector>(d_->calibrated(to_mscans(holdout), q)));
    }
    std::optional<double> tau() const { return d_->model().threshold_tau; }
    std::size_t scales() const { return d_->model().scales.size(); }
    void save(const std::string& path) const { save_model(d_->model(), path); }
    std::string to_json() const { return serialize_model(d_->model()); }

private:
    std::shared_ptr<const Detector> d_;
};

}  // namespace

PYBIND11_MODULE(_octgate, m) {
    m.doc() = "Mahalanobis out-of-distribution gate for OCT M-scans";

    m.def("corruption_kinds", [] {
        std::vector<std::string> names;
        for (auto k : kAllCorruptions) names.emplace_back(to_string(k));
        return names;
    });

    m.def(
        "synth_dataset",
        [](std::size_t n, std::uint64_t seed, std::size_t width, std::size_t depth) {
            SynthParams params;
            params.width = width;
            params.depth = depth;
            const auto data = synth_dataset(n, params, seed);
            py::array_t<float> scans({n, width, depth});
            py::array_t<double> truths({n, width});
            auto s = scans.mutable_unchecked<3>();
            auto t = truths.mutable_unchecked<2>();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < width; ++j) {
                    t(i, j) = data[i].ilm_truth[j];
                    for (std::size_t k = 0; k < depth; ++k) s(i, j, k) = data[i].mscan(j, k);
                }
            return py::make_tuple(scans, truths);
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("width") = kDefaultWindow, py::arg("depth") = kDefaultDepth,
        "Synthetic M-scans (N, W, P) and their ILM indices (N, W).");

    m.def(
        "corrupt",
        [](const FloatArray& mscan, const std::string& kind, std::uint64_t seed) {
            return from_mscan(corrupt(to_mscan(mscan), CorruptionSpec{corruption_from_string(kind), seed, {}}));
        },
        py::arg("mscan"), py::arg("kind"), py::arg("seed") = 0);

    m.def(
        "mahalanobis",
        [](const Eigen::VectorXd& feature, const Eigen::MatrixXd& samples, double epsilon) {
            std::vector<Eigen::VectorXd> rows;
            for (Eigen::Index i = 0; i < samples.rows(); ++i) rows.emplace_back(samples.row(i).transpose());
            return mahalanobis(feature, fit_gaussian(rows, epsilon));
        },
        py::arg("feature"), py::arg("samples"), py::arg("epsilon") = kDefaultEpsilon,
        "Distance of `feature` to the Gaussian fitted on the rows of `samples`.");

    m.def("auroc", [](const std::vector<double>& s, const std::vector<bool>& l) { return auroc(s, l); });
    m.def("average_precision",
          [](const std::vector<double>& s, const std::vector<bool>& l) { return average_precision(s, l); });
    m.def("snr_score", [](const FloatArray& mscan) { return snr_score(to_mscan(mscan)); });

    m.def("reference_heatmap", [](const std::vector<float>& ascan) { return reference_heatmap(ascan).probs; });
    m.def("estimate_ilm", [](const FloatArray& mscan) { return estimate_ilm(to_mscan(mscan), ReferenceEstimator{}); });

    m.def(
        "onnx_run",
        [](const std::string& path, const std::string& input_name,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& input,
           const std::vector<std::string>& outputs) {
            const auto model = OnnxModel::load(path);
            std::vector<std::int64_t> shape(input.shape(), input.shape() + input.ndim());
            Tensor t(shape, std::vector<float>(input.data(), input.data() + input.size()));
            py::dict result;
            for (auto& [name, value] : model.run(input_name, t, outputs)) {
                py::array_t<float> a(std::vector<py::ssize_t>(value.shape.begin(), value.shape.end()));
                std::memcpy(a.mutable_data(), value.data.data(), value.data.size() * sizeof(float));
                result[py::str(name)] = a;
            }
            return result;
        },
        py::arg("path"), py::arg("input_name"), py::arg("input"), py::arg("outputs"),
        "Run an ONNX graph with the built-in interpreter and return the requested values.");

    py::class_<BuiltinPyramidExtractor>(m, "BuiltinPyramidExtractor")
        .def(py::init<int>(), py::arg("levels") = kDefaultPyramidLevels)
        .def("extract", [](const BuiltinPyramidExtractor& ex, const FloatArray& mscan) {
            return ex.extract(preprocess(to_mscan(mscan))).vectors;
        });

    py::class_<PyDetector>(m, "Detector")
        .def_static("train", &PyDetector::train, py::arg("mscans"), py::arg("levels") = kDefaultPyramidLevels,
                    py::arg("epsilon") = kDefaultEpsilon)
        .def_static("load", &PyDetector::load)
        .def("score", &PyDetector::score)
        .def("scores", &PyDetector::scores)
        .def("calibrate", &PyDetector::calibrate, py::arg("holdout"), py::arg("q") = kDefaultQuantile)
        .def_property_readonly("tau", &PyDetector::tau)
        .def_property_readonly("scales", &PyDetector::scales)
        .def("save", &PyDetector::save)
        .def("to_json", &PyDetector::to_json);
}
