#include "fploc/kfcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fploc {

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda) {
    if (a.size() != b.size()) throw ValidationError("gaussian_kernel: length mismatch");
    return std::exp(-lambda * (a - b).squaredNorm());
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, double lambda) {
    const Eigen::Index m = x.cols();
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double k = std::exp(-lambda * (x.col(i) - x.col(j)).squaredNorm());
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }
    return gram;
}

namespace {

// normalized weights w_j = u_ji^m / sum_j u_ji^m for cluster i
Eigen::VectorXd centroid_weights(const Eigen::MatrixXd& membership, double fuzzifier_m, int i) {
    Eigen::VectorXd w = membership.row(i).transpose().array().pow(fuzzifier_m);
    const double total = w.sum();
    if (total <= 0.0) throw SolverError("degenerate cluster: all memberships zero");
    return w / total;
}

}  // namespace

double kernel_distance(int k, int i, const Eigen::MatrixXd& membership, double fuzzifier_m,
                       const Eigen::MatrixXd& gram) {
    const Eigen::VectorXd w = centroid_weights(membership, fuzzifier_m, i);
    const double cross = w.dot(gram.col(k));
    const double within = w.dot(gram * w);
    // clamp: exact zeros (sample == centroid) may go epsilon-negative
    return std::max(gram(k, k) - 2.0 * cross + within, 0.0);
}

Eigen::MatrixXd kernel_distances(const Eigen::MatrixXd& membership, double fuzzifier_m,
                                 const Eigen::MatrixXd& gram) {
    const Eigen::Index c = membership.rows();
    const Eigen::Index m = membership.cols();
    Eigen::MatrixXd dist(c, m);
    for (Eigen::Index i = 0; i < c; ++i) {
        const Eigen::VectorXd w = centroid_weights(membership, fuzzifier_m, static_cast<int>(i));
        const Eigen::VectorXd gw = gram * w;
        const double within = w.dot(gw);
        for (Eigen::Index k = 0; k < m; ++k)
            dist(i, k) = std::max(gram(k, k) - 2.0 * gw(k) + within, 0.0);
    }
    return dist;
}

Eigen::MatrixXd update_membership(const Eigen::MatrixXd& distances, double fuzzifier_m) {
    const Eigen::Index c = distances.rows();
    const Eigen::Index m = distances.cols();
    const double expo = 1.0 / (fuzzifier_m - 1.0);
    Eigen::MatrixXd u(c, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::Index zero_at = -1;
        for (Eigen::Index i = 0; i < c && zero_at < 0; ++i)
            if (distances(i, k) == 0.0) zero_at = i;
        if (zero_at >= 0) {
            u.col(k).setZero();
            u(zero_at, k) = 1.0;
            continue;
        }
        for (Eigen::Index i = 0; i < c; ++i) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < c; ++j)
                sum += std::pow(distances(i, k) / distances(j, k), expo);
            u(i, k) = 1.0 / sum;
        }
    }
    return u;
}

Eigen::MatrixXd update_centers(const Eigen::MatrixXd& x, const Eigen::MatrixXd& membership,
                               double fuzzifier_m) {
    const Eigen::Index c = membership.rows();
    Eigen::MatrixXd centers(x.rows(), c);
    for (Eigen::Index i = 0; i < c; ++i) {
        const Eigen::VectorXd w = membership.row(i).transpose().array().pow(fuzzifier_m);
        const double total = w.sum();
        if (total <= 0.0) throw SolverError("degenerate cluster: zero membership mass");
        centers.col(i) = (x * w) / total;
    }
    return centers;
}

std::vector<int> hard_labels(const Eigen::MatrixXd& membership) {
    std::vector<int> labels(membership.cols());
    for (Eigen::Index k = 0; k < membership.cols(); ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < membership.rows(); ++i)
            if (membership(i, k) > membership(best, k)) best = i;  // ties keep the lower index
        labels[static_cast<std::size_t>(k)] = static_cast<int>(best);
    }
    return labels;
}

double median_kernel_lambda(const Eigen::MatrixXd& x) {
    const Eigen::Index m = x.cols();
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            d2.push_back((x.col(i) - x.col(j)).squaredNorm());
    if (d2.empty()) return 1.0;
    const std::size_t mid = (d2.size() - 1) / 2;
    std::nth_element(d2.begin(), d2.begin() + mid, d2.end());
    const double med = d2[mid];
    return med > 0.0 ? 1.0 / (2.0 * med) : 1.0;
}

std::vector<int> farthest_point_indices(const Eigen::MatrixXd& x, int c, std::int64_t seed) {
    const Eigen::Index m = x.cols();
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::vector<int> chosen;
    chosen.push_back(static_cast<int>(std::uniform_int_distribution<Eigen::Index>(0, m - 1)(rng)));

    Eigen::VectorXd min_d2 = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    while (static_cast<int>(chosen.size()) < c) {
        const Eigen::Index last = chosen.back();
        for (Eigen::Index k = 0; k < m; ++k)
            min_d2(k) = std::min(min_d2(k), (x.col(k) - x.col(last)).squaredNorm());
        Eigen::Index best = -1;
        double best_d2 = -1.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (std::find(chosen.begin(), chosen.end(), static_cast<int>(k)) != chosen.end())
                continue;
            if (min_d2(k) > best_d2) {
                best_d2 = min_d2(k);
                best = k;
            }
        }
        chosen.push_back(static_cast<int>(best));
    }
    return chosen;
}

ClusterModel run_kfcm(const Eigen::MatrixXd& x, int n_clusters, const TrainParams& params) {
    const Eigen::Index m = x.cols();
    if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
    if (n_clusters > m) throw ConfigError("n_clusters exceeds the sample count");

    ClusterModel model;
    model.fuzzifier_m = params.fuzzifier_m;
    model.kernel_lambda = params.kernel_lambda ? *params.kernel_lambda : median_kernel_lambda(x);

    const Eigen::MatrixXd gram = gram_matrix(x, model.kernel_lambda);

    // initial memberships from distances to c seeded sample centers;
    // the seeds double as the previous centers for the first convergence test
    const auto seeds = farthest_point_indices(x, n_clusters, params.seed);
    Eigen::MatrixXd dist(n_clusters, m);
    for (int i = 0; i < n_clusters; ++i)
        for (Eigen::Index k = 0; k < m; ++k)
            dist(i, k) = std::max(2.0 - 2.0 * gram(seeds[static_cast<std::size_t>(i)], k), 0.0);
    Eigen::MatrixXd u = update_membership(dist, params.fuzzifier_m);
    Eigen::MatrixXd prev_centers(x.rows(), n_clusters);
    for (int i = 0; i < n_clusters; ++i)
        prev_centers.col(i) = x.col(seeds[static_cast<std::size_t>(i)]);

    for (int iter = 1; iter <= params.max_iter; ++iter) {
        const Eigen::MatrixXd d = kernel_distances(u, params.fuzzifier_m, gram);
        u = update_membership(d, params.fuzzifier_m);
        const Eigen::MatrixXd centers = update_centers(x, u, params.fuzzifier_m);

        double objective = 0.0;
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index k = 0; k < m; ++k)
                objective += std::pow(u(i, k), params.fuzzifier_m) * d(i, k);
        model.objective_trace.push_back(objective);
        model.iterations = iter;

        const double shift = (centers - prev_centers).colwise().norm().maxCoeff();
        prev_centers = centers;
        if (shift <= params.converge_eps) {
            model.converged = true;
            break;
        }
    }

    model.centers = prev_centers;
    model.membership = u;
    return model;
}

}  // namespace fploc
