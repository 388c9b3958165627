#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fploc/eval.hpp"
#include "fploc/io.hpp"
#include "fploc/kfcm.hpp"
#include "fploc/locate.hpp"
#include "fploc/sde.hpp"
#include "fploc/sim.hpp"
#include "fploc/types.hpp"

namespace py = pybind11;
using namespace fploc;

namespace {

void register_exceptions(py::module_& m) {
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "WLAN fingerprint indoor localization: simulator, KFCM, CM-SDE and KNN matching";
    register_exceptions(m);

    py::class_<RssVector>(m, "RssVector")
        .def(py::init<>())
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def(py::init<std::vector<double>, std::vector<bool>>(), py::arg("values"),
             py::arg("missing"))
        .def_readwrite("values", &RssVector::values)
        .def_readwrite("missing", &RssVector::missing)
        .def("__len__", &RssVector::size);

    py::class_<ReferencePoint>(m, "ReferencePoint")
        .def_readonly("x", &ReferencePoint::x)
        .def_readonly("y", &ReferencePoint::y)
        .def_readonly("samples", &ReferencePoint::samples)
        .def_readonly("fingerprint", &ReferencePoint::fingerprint);

    py::class_<RadioMap>(m, "RadioMap")
        .def_readonly("ap_ids", &RadioMap::ap_ids)
        .def_readonly("rps", &RadioMap::rps)
        .def_readonly("grid_interval", &RadioMap::grid_interval)
        .def("ap_count", &RadioMap::ap_count)
        .def("rp_count", &RadioMap::rp_count)
        .def("fingerprint_matrix", &RadioMap::fingerprint_matrix)
        .def("coordinates", &RadioMap::coordinates)
        .def("validate", &RadioMap::validate);

    py::class_<TrainParams>(m, "TrainParams")
        .def(py::init<>())
        .def_readwrite("intrinsic_dim", &TrainParams::intrinsic_dim)
        .def_readwrite("n_clusters", &TrainParams::n_clusters)
        .def_readwrite("affinity_k", &TrainParams::affinity_k)
        .def_readwrite("heat_t", &TrainParams::heat_t)
        .def_readwrite("kernel_lambda", &TrainParams::kernel_lambda)
        .def_readwrite("reg_sigma", &TrainParams::reg_sigma)
        .def_readwrite("fuzzifier_m", &TrainParams::fuzzifier_m)
        .def_readwrite("converge_eps", &TrainParams::converge_eps)
        .def_readwrite("max_iter", &TrainParams::max_iter)
        .def_readwrite("match_eps", &TrainParams::match_eps)
        .def_readwrite("match_threshold", &TrainParams::match_threshold)
        .def_readwrite("update_ratio", &TrainParams::update_ratio)
        .def_readwrite("knn_k", &TrainParams::knn_k)
        .def_readwrite("fill_dbm", &TrainParams::fill_dbm)
        .def_readwrite("seed", &TrainParams::seed)
        .def("validate", &TrainParams::validate);

    py::class_<EmbeddingModel>(m, "EmbeddingModel")
        .def_readonly("ap_ids", &EmbeddingModel::ap_ids)
        .def_readonly("embedding", &EmbeddingModel::embedding)
        .def_readonly("drold", &EmbeddingModel::drold)
        .def_readonly("coords", &EmbeddingModel::coords)
        .def_readonly("labels", &EmbeddingModel::labels)
        .def_readonly("eigenvalues", &EmbeddingModel::eigenvalues)
        .def_readonly("params", &EmbeddingModel::params)
        .def_readonly("initial_labeled", &EmbeddingModel::initial_labeled)
        .def_readonly("admitted", &EmbeddingModel::admitted)
        .def("dim", &EmbeddingModel::dim)
        .def("validate", &EmbeddingModel::validate)
        .def("__eq__", [](const EmbeddingModel& a, const EmbeddingModel& b) { return a == b; });

    py::class_<ClusterModel>(m, "ClusterModel")
        .def_readonly("centers", &ClusterModel::centers)
        .def_readonly("membership", &ClusterModel::membership)
        .def_readonly("fuzzifier_m", &ClusterModel::fuzzifier_m)
        .def_readonly("kernel_lambda", &ClusterModel::kernel_lambda)
        .def_readonly("objective_trace", &ClusterModel::objective_trace)
        .def_readonly("iterations", &ClusterModel::iterations)
        .def_readonly("converged", &ClusterModel::converged);

    py::class_<PositionFix>(m, "PositionFix")
        .def_readonly("x", &PositionFix::x)
        .def_readonly("y", &PositionFix::y)
        .def_readonly("neighbor_ids", &PositionFix::neighbor_ids)
        .def_readonly("neighbor_distances", &PositionFix::neighbor_distances);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("hallway_length", &SimConfig::hallway_length)
        .def_readwrite("hallway_width", &SimConfig::hallway_width)
        .def_readwrite("grid_interval", &SimConfig::grid_interval)
        .def_readwrite("n_aps", &SimConfig::n_aps)
        .def_readwrite("pathloss_exponent", &SimConfig::pathloss_exponent)
        .def_readwrite("tx_power_at_1m", &SimConfig::tx_power_at_1m)
        .def_readwrite("shadowing_sigma", &SimConfig::shadowing_sigma)
        .def_readwrite("samples_per_rp", &SimConfig::samples_per_rp)
        .def_readwrite("dropout_prob", &SimConfig::dropout_prob)
        .def_readwrite("n_queries", &SimConfig::n_queries)
        .def_readwrite("query_samples", &SimConfig::query_samples)
        .def_readwrite("seed", &SimConfig::seed)
        .def("validate", &SimConfig::validate);

    py::class_<Query>(m, "Query")
        .def_readonly("x", &Query::x)
        .def_readonly("y", &Query::y)
        .def_readonly("rss", &Query::rss);

    py::class_<SyntheticData>(m, "SyntheticData")
        .def_readonly("map", &SyntheticData::map)
        .def_readonly("queries", &SyntheticData::queries);

    py::class_<Testbed>(m, "Testbed")
        .def_readonly("config", &Testbed::config)
        .def_readonly("map", &Testbed::map)
        .def_readonly("queries", &Testbed::queries)
        .def_readonly("unlabeled", &Testbed::unlabeled);

    py::class_<AdmissionResult>(m, "AdmissionResult")
        .def_readonly("accepted", &AdmissionResult::accepted)
        .def_readonly("labels", &AdmissionResult::labels)
        .def_readonly("scores", &AdmissionResult::scores)
        .def_readonly("rejected_count", &AdmissionResult::rejected_count);

    py::class_<CdfCurve>(m, "CdfCurve")
        .def_readonly("radii", &CdfCurve::radii)
        .def_readonly("accuracy", &CdfCurve::accuracy);

    py::class_<MethodResult>(m, "MethodResult")
        .def_readonly("name", &MethodResult::name)
        .def_readonly("curve", &MethodResult::curve)
        .def_readonly("median_error", &MethodResult::median_error)
        .def_readonly("mean_error", &MethodResult::mean_error)
        .def_readonly("macs_per_query", &MethodResult::macs_per_query)
        .def_readonly("runtime_sec", &MethodResult::runtime_sec);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("value", &SweepPoint::value)
        .def_readonly("ok", &SweepPoint::ok)
        .def_readonly("cholesky_ok", &SweepPoint::cholesky_ok)
        .def_readonly("error", &SweepPoint::error)
        .def_readonly("curve", &SweepPoint::curve)
        .def_readonly("median_error", &SweepPoint::median_error)
        .def_readonly("accuracy_at_1m", &SweepPoint::accuracy_at_1m);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("radii", &EvalReport::radii)
        .def_readonly("query_hash", &EvalReport::query_hash)
        .def_readonly("n_queries", &EvalReport::n_queries)
        .def_readonly("methods", &EvalReport::methods)
        .def_readonly("axis", &EvalReport::axis)
        .def_readonly("points", &EvalReport::points)
        .def("to_json", &report_to_json)
        .def("to_csv", &curves_to_csv);

    // io
    m.def("load_radio_map", &load_radio_map, py::arg("path"), py::arg("fill_dbm") = 0.0);
    m.def("save_radio_map", &save_radio_map, py::arg("map"), py::arg("path"));
    m.def("load_queries", &load_queries, py::arg("path"),
          py::arg("ap_ids") = std::vector<std::string>{});
    m.def("save_queries", &save_queries, py::arg("queries"), py::arg("ap_ids"), py::arg("path"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // sim
    m.def("build_synthetic_radio_map", &build_synthetic_radio_map, py::arg("config"));
    m.def("draw_observations", &draw_observations, py::arg("config"), py::arg("count"),
          py::arg("stream") = 0);
    m.def("make_testbed", &make_testbed, py::arg("config"), py::arg("n_unlabeled"));

    // kfcm
    m.def("run_kfcm", &run_kfcm, py::arg("x"), py::arg("n_clusters"), py::arg("params"));
    m.def("hard_labels", &hard_labels, py::arg("membership"));
    m.def("gaussian_kernel", &gaussian_kernel, py::arg("a"), py::arg("b"), py::arg("lambda"));

    // sde
    m.def("estimate_intrinsic_dim", &estimate_intrinsic_dim, py::arg("x"),
          py::arg("energy_threshold") = 0.95);
    m.def("class_match", &class_match, py::arg("unlabeled"), py::arg("clusters"),
          py::arg("match_eps"), py::arg("v_tau"));
    m.def(
        "train_sde",
        [](const RadioMap& map, const std::vector<RssVector>& unlabeled,
           const TrainParams& params) { return train_sde(map, unlabeled, params); },
        py::arg("map"), py::arg("unlabeled"), py::arg("params"));
    m.def("online_update", &online_update, py::arg("model"), py::arg("sample"),
          py::arg("clusters"), py::arg("params"));
    m.def("project",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&project),
          py::arg("embedding"), py::arg("x"));

    // locate
    m.def("fill_missing", &fill_missing, py::arg("sample"), py::arg("fill_dbm"));
    m.def(
        "knn_locate",
        [](const Eigen::VectorXd& query, const Eigen::MatrixXd& fingerprints,
           const std::vector<std::array<double, 2>>& coords, int k) {
            return knn_locate(query, fingerprints, coords, k);
        },
        py::arg("query"), py::arg("fingerprints"), py::arg("coords"), py::arg("k"));
    m.def(
        "locate_sde",
        [](const EmbeddingModel& model, const RssVector& query, int k, double fill_dbm) {
            return locate_sde(model, query, k, fill_dbm);
        },
        py::arg("model"), py::arg("query"), py::arg("k") = 3, py::arg("fill_dbm") = 0.0);

    // eval
    m.def("accuracy_at_radius", &accuracy_at_radius, py::arg("estimates"), py::arg("truths"),
          py::arg("radius"));
    m.def("error_cdf", &error_cdf, py::arg("estimates"), py::arg("truths"), py::arg("radii"));
    m.def("partition_subareas", &partition_subareas, py::arg("map"), py::arg("n_areas"),
          py::arg("seed") = 1);
    m.def("compare_methods", &compare_methods, py::arg("testbed"), py::arg("params"),
          py::arg("radii"), py::arg("n_areas") = 0,
          py::arg("methods") = std::vector<std::string>{});
    m.def(
        "run_sweep",
        [](const Testbed& tb, const std::string& axis, const std::vector<double>& values,
           const TrainParams& base, const std::vector<double>& radii) {
            return run_sweep(tb, sweep_axis_from_string(axis), values, base, radii);
        },
        py::arg("testbed"), py::arg("axis"), py::arg("values"), py::arg("base_params"),
        py::arg("radii"));
}
