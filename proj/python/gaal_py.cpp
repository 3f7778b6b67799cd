#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaal/classifier.hpp"
#include "gaal/config.hpp"
#include "gaal/data.hpp"
#include "gaal/errors.hpp"
#include "gaal/harness.hpp"
#include "gaal/strategy.hpp"

namespace py = pybind11;
using namespace gaal;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

LabeledSet labeled_from(const Matrix& x, const std::vector<int>& y) {
    if (x.ndim() != 2) throw DimensionError("x must be a 2-D array");
    if (static_cast<std::size_t>(x.shape(0)) != y.size()) throw DimensionError("x and y disagree on the row count");
    LabeledSet s;
    const auto cols = static_cast<std::size_t>(x.shape(1));
    for (py::ssize_t i = 0; i < x.shape(0); ++i)
        s.add(Tensor::vector(std::vector<double>(x.data(i, 0), x.data(i, 0) + cols)), y[static_cast<std::size_t>(i)]);
    return s;
}

py::tuple dataset_arrays(const Dataset& ds) {
    Matrix x({ds.size(), ds.feature_dim});
    auto m = x.mutable_unchecked<2>();
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.feature_dim; ++j) m(i, j) = ds.instances[i][j];
    return py::make_tuple(x, py::array_t<int>(static_cast<py::ssize_t>(ds.labels.size()), ds.labels.data()));
}

py::dict run_result(const RunResult& r) {
    py::list curve;
    for (const auto& p : r.curve.points) curve.append(py::make_tuple(p.labeled_count, p.accuracy));
    py::dict d;
    d["curve"] = curve;
    d["budget"] = r.budget;
    d["labeled"] = r.labeled;
    d["skipped"] = r.skipped;
    d["remaining"] = r.remaining;
    d["oracle_calls"] = r.oracle_calls;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Generative adversarial active learning core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

    m.def("normalize_config", [](const std::string& text) { return render_config(parse_config(text)); }, py::arg("text"),
          "Parse a config and render it back with every default filled in.");

    m.def(
        "run",
        [](const std::string& text, std::uint64_t seed) {
            const ExperimentConfig cfg = parse_config(text);
            RunResult r;
            {
                py::gil_scoped_release release;
                const Experiment exp = prepare_experiment(cfg, needs_generator(cfg));
                r = run_active_learning(cfg, exp, seed);
            }
            return run_result(r);
        },
        py::arg("config_text"), py::arg("seed") = 0, "One active-learning run; returns the curve and budget counters.");

    m.def(
        "two_gaussians",
        [](std::size_t n, std::vector<double> mean_pos, std::vector<double> mean_neg, double sigma, std::uint64_t seed) {
            return dataset_arrays(make_two_gaussians(n, mean_pos, mean_neg, sigma, seed));
        },
        py::arg("n"), py::arg("mean_pos") = std::vector<double>{0.5, 0.0}, py::arg("mean_neg") = std::vector<double>{-0.5, 0.0},
        py::arg("sigma") = 0.075, py::arg("seed") = 0);

    m.def(
        "svm_train",
        [](const Matrix& x, const std::vector<int>& y, double lambda, const std::string& solver) {
            SvmConfig cfg;
            cfg.lambda = lambda;
            if (solver == "pegasos") cfg.solver = SvmSolver::Pegasos;
            else if (solver != "dual") throw ConfigError("expected dual or pegasos, got " + solver, "svm_solver");
            const LinearClassifier clf = svm_train(labeled_from(x, y), cfg);
            return py::make_tuple(std::vector<double>(clf.weights().values()), clf.bias());
        },
        py::arg("x"), py::arg("y"), py::arg("lam") = 0.001, py::arg("solver") = "dual", "Returns (weights, bias).");

    m.def(
        "svm_objective",
        [](const std::vector<double>& w, double b, const Matrix& x, const std::vector<int>& y, double lambda) {
            return svm_objective(LinearClassifier(Tensor::vector(w), b), labeled_from(x, y), lambda);
        },
        py::arg("weights"), py::arg("bias"), py::arg("x"), py::arg("y"), py::arg("lam") = 0.001);

    m.def(
        "select_svm_active",
        [](const std::vector<double>& w, double b, const Matrix& x, std::size_t k) {
            std::vector<Tensor> rows;
            const auto cols = static_cast<std::size_t>(x.shape(1));
            for (py::ssize_t i = 0; i < x.shape(0); ++i)
                rows.push_back(Tensor::vector(std::vector<double>(x.data(i, 0), x.data(i, 0) + cols)));
            Pool pool(std::move(rows));
            std::vector<std::size_t> out;
            for (const auto& item : select_svm_active(LinearClassifier(Tensor::vector(w), b), pool, k).items)
                out.push_back(*item.pool_index);
            return out;
        },
        py::arg("weights"), py::arg("bias"), py::arg("x"), py::arg("k"), "Pool indices closest to the hyperplane.");

    m.def("mixed_schedule", [](std::size_t it) { return std::string(strategy_name(mixed_schedule(it))); }, py::arg("iteration"));

    m.def(
        "idx_round_trip",
        [](const py::bytes& data) {
            const std::string raw = data;
            const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
            const auto out = serialize_idx_images(parse_idx_images(bytes));
            return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
        },
        py::arg("data"), "Parse and re-serialize an IDX image file.");
}
