#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fploc/sim.hpp"
#include "fploc/types.hpp"

namespace fploc {

struct CdfCurve {
    std::vector<double> radii;
    std::vector<double> accuracy;
};

/// Fraction of queries whose estimate lies within r metres of the truth.
double accuracy_at_radius(const std::vector<std::array<double, 2>>& estimates,
                          const std::vector<std::array<double, 2>>& truths, double r);

/// accuracy_at_radius at each radius; radii are sorted internally.
CdfCurve error_cdf(const std::vector<std::array<double, 2>>& estimates,
                   const std::vector<std::array<double, 2>>& truths, std::vector<double> radii);

/// Seeded k-means over reference-point coordinates; returns a 0-based area
/// id per reference point.
std::vector<int> partition_subareas(const RadioMap& map, int n_areas, std::int64_t seed = 1);

struct MethodResult {
    std::string name;
    CdfCurve curve;
    double median_error = 0.0;
    double mean_error = 0.0;
    std::uint64_t macs_per_query = 0;
    double runtime_sec = 0.0;  // diagnostics only, never serialized
    std::vector<double> area_median_error;
};

struct SweepPoint {
    double value = 0.0;
    bool ok = false;
    bool cholesky_ok = false;
    std::string error;
    CdfCurve curve;
    double median_error = 0.0;
    double accuracy_at_1m = 0.0;
};

struct EvalReport {
    std::vector<double> radii;
    std::string query_hash;
    int n_queries = 0;
    std::vector<MethodResult> methods;

    std::string axis;  // set for sweep reports
    std::vector<SweepPoint> points;
    bool has_best = false;
    double best_value = 0.0;
    double best_accuracy_at_1m = 0.0;

    int n_areas = 0;
    std::vector<int> area_sizes;
};

/// Simulator-backed testbed: labeled map, evaluation queries with ground
/// truth, and an unlabeled pool drawn from an independent stream.
struct Testbed {
    SimConfig config;
    RadioMap map;
    std::vector<Query> queries;
    std::vector<RssVector> unlabeled;
};

Testbed make_testbed(const SimConfig& config, int n_unlabeled);

enum class SweepAxis { IntrinsicDim, NClusters, AffinityK, RegSigma, UpdateRatio };

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

/// KNN vs LDE-KNN (ratio 1) vs SDE-KNN on the identical query set. methods
/// selects a subset of {"knn", "lde", "sde"}; empty means all three.
EvalReport compare_methods(const Testbed& testbed, const TrainParams& params,
                           const std::vector<double>& radii, int n_areas = 0,
                           const std::vector<std::string>& methods = {});

/// One model per axis value, everything else held at base_params; training
/// failures are recorded per point and the sweep continues.
EvalReport run_sweep(const Testbed& testbed, SweepAxis axis, const std::vector<double>& values,
                     const TrainParams& base_params, const std::vector<double>& radii);

/// Deterministic JSON (runtimes excluded so reruns are byte-identical).
std::string report_to_json(const EvalReport& report);

/// Long-format curve table: method/value, radius, accuracy.
std::string curves_to_csv(const EvalReport& report);

std::string hash_queries(const std::vector<Query>& queries);

}  // namespace fploc
