#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fploc/types.hpp"

namespace fploc {

/// Position estimate: unweighted centroid of the k matched reference
/// points, neighbor indices and distances sorted ascending.
struct PositionFix {
    double x = 0.0;
    double y = 0.0;
    std::vector<int> neighbor_ids;
    std::vector<double> neighbor_distances;
};

/// Multiply-accumulate tally for the complexity instrumentation.
struct OpCounter {
    std::uint64_t macs = 0;
};

double euclid(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Missing entries replaced by fill_dbm, the rest untouched.
std::vector<double> fill_missing(const RssVector& sample, double fill_dbm);

/// Brute-force k nearest fingerprints by Euclidean distance, exact ties
/// broken toward the lower index. fingerprints is dim x N, one column per
/// reference point.
PositionFix knn_locate(const Eigen::VectorXd& query, const Eigen::MatrixXd& fingerprints,
                       const std::vector<std::array<double, 2>>& coords, int k,
                       OpCounter* ops = nullptr);

/// fill -> project -> match against DROLD.
PositionFix locate_sde(const EmbeddingModel& model, const RssVector& raw_query, int k,
                       double fill_dbm, OpCounter* ops = nullptr);

}  // namespace fploc
