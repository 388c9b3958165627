#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fploc/kfcm.hpp"
#include "fploc/types.hpp"

namespace fploc {

/// Undirected neighbor graphs over sample indices: within joins equal-label
/// pairs under the mutual-kNN rule, between joins distinct-label pairs under
/// the union-kNN rule. Edges are stored once with first < second.
struct NeighborGraphs {
    std::vector<std::pair<int, int>> within;
    std::vector<std::pair<int, int>> between;
};

struct AffinityPair {
    Eigen::SparseMatrix<double> within;   // W
    Eigen::SparseMatrix<double> between;  // W'
    double heat_t = 1.0;
};

/// Unlabeled samples that passed class matching, with their assigned labels
/// and slope-agreement scores.
struct AdmissionResult {
    Eigen::MatrixXd accepted;  // n x k, one column per admitted sample
    std::vector<int> labels;
    std::vector<int> scores;
    int rejected_count = 0;
};

/// Smallest d whose top-d covariance eigenvalues capture at least
/// energy_threshold of the total variance; 1 for constant data.
int estimate_intrinsic_dim(const Eigen::MatrixXd& x, double energy_threshold = 0.95);

/// Criterion 1: nearest cluster center in kernel distance. Criterion 2: the
/// count of adjacent-AP slope agreements within match_eps must reach v_tau.
AdmissionResult class_match(const Eigen::MatrixXd& unlabeled, const ClusterModel& clusters,
                            double match_eps, int v_tau);

/// kNN in Euclidean input space over all samples; ties broken toward the
/// lower index. Requires affinity_k < sample count.
NeighborGraphs build_neighbor_graphs(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                     int affinity_k);

/// Heat-kernel weights exp(-||x_i - x_j||^2 / heat_t) on graph edges.
AffinityPair affinity_weights(const NeighborGraphs& graphs, const Eigen::MatrixXd& x,
                              double heat_t);

/// Mean squared distance over both edge sets; 1 when there are no edges.
double mean_edge_heat(const NeighborGraphs& graphs, const Eigen::MatrixXd& x);

/// Diagonal of the degree matrix, d_ii = sum_j w_ij.
Eigen::VectorXd degree_matrix(const Eigen::SparseMatrix<double>& w);
Eigen::VectorXd degree_matrix(const Eigen::MatrixXd& w);

/// X (D - W) X^T, symmetrized.
Eigen::MatrixXd laplacian_scatter(const Eigen::MatrixXd& x, const Eigen::SparseMatrix<double>& w);

struct EmbeddingSolution {
    Eigen::MatrixXd vectors;      // n x d, v^T B v = 1, first nonzero entry positive
    Eigen::VectorXd eigenvalues;  // descending
};

/// Solves X(D'-W')X^T v = lambda (X(D-W)X^T + reg_sigma I) v and keeps the
/// d leading eigenpairs. Throws SolverError when the right-hand matrix is
/// not positive definite even after regularization.
EmbeddingSolution solve_embedding(const Eigen::MatrixXd& x, const Eigen::SparseMatrix<double>& w,
                                  const Eigen::SparseMatrix<double>& w_between, int d,
                                  double reg_sigma);

Eigen::VectorXd project(const Eigen::MatrixXd& embedding, const Eigen::VectorXd& x);
Eigen::MatrixXd project(const Eigen::MatrixXd& embedding, const Eigen::MatrixXd& x);

struct TrainDiagnostics {
    ClusterModel clusters;
    int admitted = 0;
    int rejected = 0;    // failed the matching criteria
    int capped_out = 0;  // accepted but beyond the update-ratio budget
    int resolved_dim = 0;
    double resolved_kernel_lambda = 0.0;
    double resolved_heat_t = 0.0;
};

/// Offline pipeline: KFCM-label the map, admit unlabeled samples by class
/// matching (budget floor(m(1-r)/r) for ratio r), rebuild graphs over the
/// amalgamated set and solve for the embedding. DROLD keeps the labeled
/// fingerprints only.
EmbeddingModel train_sde(const RadioMap& map, const std::vector<RssVector>& unlabeled,
                         const TrainParams& params, TrainDiagnostics* diag = nullptr);

/// One-by-one refresh: re-embeds with the sample appended when it passes
/// class matching, otherwise returns the model unchanged.
EmbeddingModel online_update(const EmbeddingModel& model, const RssVector& sample,
                             const ClusterModel& clusters, const TrainParams& params);

}  // namespace fploc
