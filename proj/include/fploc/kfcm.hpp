#pragma once

#include <vector>

#include <Eigen/Core>

#include "fploc/types.hpp"

namespace fploc {

/// Kernel fuzzy c-means result. membership is c x M with unit column sums;
/// centers are input-space representatives (one column per cluster) used
/// for the convergence test and for class matching.
struct ClusterModel {
    Eigen::MatrixXd centers;     // n x c
    Eigen::MatrixXd membership;  // c x M
    double fuzzifier_m = 2.0;
    double kernel_lambda = 1.0;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

/// exp(-lambda * ||a - b||^2); both vectors complete and of equal length.
double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda);

/// M x M Gram matrix of the Gaussian kernel over the sample columns of x.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, double lambda);

/// Squared kernel-space distance of sample k to the implicit centroid of
/// cluster i under membership u: K(k,k) - 2 sum_j w_j K(k,j)
/// + sum_j sum_l w_j w_l K(j,l) with w_j = u_ji^m / sum_k u_ki^m.
double kernel_distance(int k, int i, const Eigen::MatrixXd& membership, double fuzzifier_m,
                       const Eigen::MatrixXd& gram);

/// All kernel distances at once (c x M); same definition as kernel_distance.
Eigen::MatrixXd kernel_distances(const Eigen::MatrixXd& membership, double fuzzifier_m,
                                 const Eigen::MatrixXd& gram);

/// u_ki = [sum_j (D_ki / D_kj)^(1/(m-1))]^-1; a zero distance makes the
/// column crisp on the lowest-index zero-distance cluster.
Eigen::MatrixXd update_membership(const Eigen::MatrixXd& distances, double fuzzifier_m);

/// v_i = sum_k u_ki^m x_k / sum_k u_ki^m.
Eigen::MatrixXd update_centers(const Eigen::MatrixXd& x, const Eigen::MatrixXd& membership,
                               double fuzzifier_m);

std::vector<int> hard_labels(const Eigen::MatrixXd& membership);

/// Median heuristic: 1 / (2 * median squared pairwise distance). Falls back
/// to 1 when the samples are all identical.
double median_kernel_lambda(const Eigen::MatrixXd& x);

/// Seeded farthest-point selection of c distinct sample indices.
std::vector<int> farthest_point_indices(const Eigen::MatrixXd& x, int c, std::int64_t seed);

ClusterModel run_kfcm(const Eigen::MatrixXd& x, int n_clusters, const TrainParams& params);

}  // namespace fploc
