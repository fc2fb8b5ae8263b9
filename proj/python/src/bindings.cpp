// Python surface: PCA, GBDT, fill-period selection, subset enumeration,
// conditional accuracy, and the synth/backtest/report commands.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "earncast/commands.hpp"
#include "earncast/error.hpp"
#include "earncast/pca.hpp"

namespace py = pybind11;
using namespace earncast;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorKind::kDimensionMismatch, "expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

ExperimentConfig make_config(const std::optional<std::filesystem::path>& path,
                             const std::map<std::string, std::string>& settings,
                             const std::optional<std::filesystem::path>& base_dir) {
  ExperimentConfig c = path ? load_config(*path) : ExperimentConfig{};
  if (base_dir) c.base_dir = *base_dir;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  c.validate();
  return c;
}

py::dict conditional_dict(const ConditionalMetrics& m) {
  py::dict d;
  d["converge_model_acc"] = m.converge_model_acc;
  d["converge_consensus_acc"] = m.converge_consensus_acc;
  d["diverge_model_acc"] = m.diverge_model_acc;
  d["diverge_consensus_acc"] = m.diverge_consensus_acc;
  d["total_model_acc"] = m.total_model_acc;
  d["total_consensus_acc"] = m.total_consensus_acc;
  d["n_converge"] = m.n_converge;
  d["n_diverge"] = m.n_diverge;
  return d;
}

}  // namespace

PYBIND11_MODULE(_earncast, m) {
  m.doc() = "Quarterly earnings direction forecasting";
  py::register_exception<Error>(m, "EarncastError", PyExc_RuntimeError);

  // PCA
  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("scale", &PcaModel::scale)
      .def_readonly("eigenvalues", &PcaModel::eigenvalues)
      .def_readonly("explained_ratio", &PcaModel::explained_ratio)
      .def_readwrite("kept", &PcaModel::kept)
      .def_property_readonly("loadings", [](const PcaModel& p) { return to_array(p.loadings); })
      .def("choose_components", [](const PcaModel& p, double t) { return choose_components(p, t); })
      .def("transform", [](const PcaModel& p, const Array& x) { return to_array(transform(p, to_matrix(x))); })
      .def("reconstruct",
           [](const PcaModel& p, const Array& z) { return to_array(reconstruct(p, to_matrix(z))); });
  m.def(
      "fit_pca",
      [](const Array& x, bool standardize) { return fit_pca(to_matrix(x), PcaOptions{standardize}); },
      py::arg("x"), py::arg("standardize") = false);

  // GBDT
  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("learning_rate", &HyperParams::learning_rate)
      .def_readwrite("max_bin", &HyperParams::max_bin)
      .def_readwrite("num_leaves", &HyperParams::num_leaves)
      .def_readwrite("min_data_in_leaf", &HyperParams::min_data_in_leaf)
      .def_readwrite("feature_fraction", &HyperParams::feature_fraction)
      .def_readwrite("bagging_fraction", &HyperParams::bagging_fraction)
      .def_readwrite("bagging_freq", &HyperParams::bagging_freq)
      .def_readwrite("min_gain_to_split", &HyperParams::min_gain_to_split)
      .def_readwrite("lambda_l1", &HyperParams::lambda_l1)
      .def_readwrite("lambda_l2", &HyperParams::lambda_l2)
      .def_readwrite("n_rounds", &HyperParams::n_rounds)
      .def_readwrite("seed", &HyperParams::seed)
      .def_readwrite("max_depth", &HyperParams::max_depth)
      .def_property(
          "growth", [](const HyperParams& h) { return std::string(to_string(h.growth)); },
          [](HyperParams& h, const std::string& s) { h.growth = parse_growth_policy(s); });

  py::class_<GbdtModel>(m, "GbdtModel")
      .def_readonly("n_classes", &GbdtModel::n_classes)
      .def_readonly("best_iteration", &GbdtModel::best_iteration)
      .def_readonly("single_class", &GbdtModel::single_class)
      .def_readonly("train_loss", &GbdtModel::train_loss)
      .def_readonly("valid_loss", &GbdtModel::valid_loss)
      .def_property_readonly("rounds", &GbdtModel::rounds)
      .def("predict_proba", [](const GbdtModel& g, const Array& x) { return to_array(predict_proba(g, to_matrix(x))); })
      .def("predict",
           [](const GbdtModel& g, const Array& x) { return predict_class(predict_proba(g, to_matrix(x))); })
      .def(
          "feature_importance",
          [](const GbdtModel& g, const std::string& kind) {
            if (kind != "gain" && kind != "split") throw Error(ErrorKind::kInvalidParams, "kind is gain or split");
            return feature_importance(g, kind == "gain" ? ImportanceKind::kTotalGain : ImportanceKind::kSplitCount);
          },
          py::arg("kind") = "gain")
      .def("dumps", [](const GbdtModel& g) {
        std::ostringstream out;
        save_model(g, out);
        return out.str();
      });
  m.def(
      "fit_gbdt",
      [](const Array& x, const std::vector<int>& y, int n_classes, const HyperParams& params) {
        const auto binned = bin_features(to_matrix(x), params.max_bin);
        py::gil_scoped_release release;
        return fit(binned, y, n_classes, params);
      },
      py::arg("x"), py::arg("y"), py::arg("n_classes"), py::arg("params") = HyperParams{});
  m.def("loads_gbdt", [](const std::string& text) {
    std::istringstream in(text);
    return load_model(in);
  });

  // feature forge
  m.def(
      "select_fill_period",
      [](const std::vector<std::optional<double>>& series, int max_p) { return select_fill_period(series, max_p); },
      py::arg("series"), py::arg("max_p") = 20);
  m.def("lagged_column_count", &lagged_column_count, py::arg("lagged"), py::arg("unlagged"), py::arg("n_lags") = 20);

  // harness
  m.def(
      "enumerate_subsets",
      [](const std::vector<std::string>& quarters, int train_len) {
        std::vector<CalendarQuarter> q;
        for (const auto& s : quarters) q.push_back(CalendarQuarter::parse(s));
        py::list out;
        for (const auto& s : enumerate_subsets(q, train_len)) {
          py::dict d;
          d["index"] = s.index;
          d["first_train"] = s.first_train().to_string();
          d["last_train"] = s.last_train().to_string();
          d["test_quarter"] = s.test_quarter.to_string();
          out.append(d);
        }
        return out;
      },
      py::arg("quarters"), py::arg("train_len") = 80);
  m.def(
      "conditional_accuracy",
      [](const std::vector<std::optional<int>>& model, const std::vector<std::optional<int>>& consensus,
         const std::vector<std::optional<int>>& actual) {
        return conditional_dict(conditional_accuracy(model, consensus, actual));
      },
      py::arg("model"), py::arg("consensus"), py::arg("actual"));

  // commands
  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init(&make_config), py::arg("path") = std::nullopt,
           py::arg("settings") = std::map<std::string, std::string>{}, py::arg("base_dir") = std::nullopt)
      .def_readwrite("jobs", &ExperimentConfig::jobs)
      .def_readonly("base_dir", &ExperimentConfig::base_dir)
      .def("output_dir", [](const ExperimentConfig& c) { return c.resolve(c.output_dir); })
      .def("echo", &config_echo);
  m.def("synth", &cmd_synth, py::arg("config"));
  m.def(
      "backtest",
      [](const ExperimentConfig& c) {
        BacktestOutput out;
        {
          py::gil_scoped_release release;
          out = cmd_backtest(c);
        }
        std::vector<std::string> lines;
        for (const auto& r : out.records) lines.push_back(record_to_json(r));
        return py::make_tuple(out.dir, lines);
      },
      py::arg("config"));
  m.def("report", &cmd_report, py::arg("results_dir"));
}
