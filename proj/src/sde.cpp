#include "fploc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fploc/locate.hpp"

namespace fploc {

int estimate_intrinsic_dim(const Eigen::MatrixXd& x, double energy_threshold) {
    if (x.cols() < 2) throw ConfigError("intrinsic-dimension estimate needs at least 2 samples");
    if (!(energy_threshold > 0.0 && energy_threshold < 1.0))
        throw ConfigError("energy_threshold must be in (0, 1)");

    const Eigen::VectorXd mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - mean;
    const Eigen::MatrixXd cov =
        centered * centered.transpose() / static_cast<double>(x.cols() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw SolverError("covariance eigendecomposition failed");

    Eigen::VectorXd ev = es.eigenvalues().reverse();  // descending
    ev = ev.cwiseMax(0.0);
    const double total = ev.sum();
    if (total <= 0.0) return 1;

    double acc = 0.0;
    for (Eigen::Index d = 0; d < ev.size(); ++d) {
        acc += ev(d);
        if (acc >= energy_threshold * total) return static_cast<int>(d) + 1;
    }
    return static_cast<int>(ev.size());
}

AdmissionResult class_match(const Eigen::MatrixXd& unlabeled, const ClusterModel& clusters,
                            double match_eps, int v_tau) {
    const Eigen::Index n = clusters.centers.rows();
    if (unlabeled.cols() > 0 && unlabeled.rows() != n)
        throw ValidationError("class_match: sample length does not match cluster centers");

    AdmissionResult result;
    result.accepted.resize(n, unlabeled.cols());
    Eigen::Index taken = 0;
    for (Eigen::Index j = 0; j < unlabeled.cols(); ++j) {
        const Eigen::VectorXd x = unlabeled.col(j);

        // criterion 1: nearest center in kernel-space distance
        int label = 0;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < clusters.centers.cols(); ++i) {
            const double d =
                2.0 - 2.0 * gaussian_kernel(x, clusters.centers.col(i), clusters.kernel_lambda);
            if (d < best) {
                best = d;
                label = static_cast<int>(i);
            }
        }

        // criterion 2: slope agreement against the matched center
        const Eigen::VectorXd v = clusters.centers.col(label);
        int score = 0;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double slope_x = x(i + 1) - x(i);
            const double slope_v = v(i + 1) - v(i);
            if (std::abs(slope_x - slope_v) <= match_eps) ++score;
        }

        if (score >= v_tau) {
            result.accepted.col(taken++) = x;
            result.labels.push_back(label);
            result.scores.push_back(score);
        } else {
            ++result.rejected_count;
        }
    }
    result.accepted.conservativeResize(n, taken);
    return result;
}

NeighborGraphs build_neighbor_graphs(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                     int affinity_k) {
    const Eigen::Index m = x.cols();
    if (static_cast<Eigen::Index>(labels.size()) != m)
        throw ValidationError("labels are not aligned with the samples");
    if (affinity_k < 1) throw ConfigError("affinity_k must be >= 1");
    if (affinity_k >= m) throw ConfigError("affinity_k must be smaller than the sample count");

    // squared distances via Gram expansion; exact ties resolved by index
    const Eigen::VectorXd sq = x.colwise().squaredNorm();
    const Eigen::MatrixXd gram = x.transpose() * x;

    std::vector<std::vector<int>> knn(m);
    std::vector<std::pair<double, int>> order(m - 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        std::size_t w = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i) continue;
            const double d2 = std::max(sq(i) + sq(j) - 2.0 * gram(i, j), 0.0);
            order[w++] = {d2, static_cast<int>(j)};
        }
        std::partial_sort(order.begin(), order.begin() + affinity_k, order.end());
        auto& nb = knn[static_cast<std::size_t>(i)];
        nb.reserve(affinity_k);
        for (int t = 0; t < affinity_k; ++t) nb.push_back(order[static_cast<std::size_t>(t)].second);
        std::sort(nb.begin(), nb.end());
    }

    auto contains = [&](int i, int j) {
        const auto& nb = knn[static_cast<std::size_t>(i)];
        return std::binary_search(nb.begin(), nb.end(), j);
    };

    std::set<std::pair<int, int>> within, between;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int j : knn[static_cast<std::size_t>(i)]) {
            const int a = std::min<int>(static_cast<int>(i), j);
            const int b = std::max<int>(static_cast<int>(i), j);
            if (labels[a] == labels[b]) {
                if (contains(a, b) && contains(b, a)) within.insert({a, b});
            } else {
                between.insert({a, b});
            }
        }
    }

    NeighborGraphs graphs;
    graphs.within.assign(within.begin(), within.end());
    graphs.between.assign(between.begin(), between.end());
    return graphs;
}

namespace {

Eigen::SparseMatrix<double> edge_weights(const std::vector<std::pair<int, int>>& edges,
                                         const Eigen::MatrixXd& x, double heat_t) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edges.size() * 2);
    for (const auto& [i, j] : edges) {
        const double w = std::exp(-(x.col(i) - x.col(j)).squaredNorm() / heat_t);
        triplets.emplace_back(i, j, w);
        triplets.emplace_back(j, i, w);
    }
    Eigen::SparseMatrix<double> w(x.cols(), x.cols());
    w.setFromTriplets(triplets.begin(), triplets.end());
    return w;
}

}  // namespace

AffinityPair affinity_weights(const NeighborGraphs& graphs, const Eigen::MatrixXd& x,
                              double heat_t) {
    if (!(heat_t > 0.0)) throw ConfigError("heat_t must be > 0");
    AffinityPair pair;
    pair.heat_t = heat_t;
    pair.within = edge_weights(graphs.within, x, heat_t);
    pair.between = edge_weights(graphs.between, x, heat_t);
    return pair;
}

double mean_edge_heat(const NeighborGraphs& graphs, const Eigen::MatrixXd& x) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto* edges : {&graphs.within, &graphs.between}) {
        for (const auto& [i, j] : *edges) {
            sum += (x.col(i) - x.col(j)).squaredNorm();
            ++count;
        }
    }
    if (count == 0 || sum <= 0.0) return 1.0;
    return sum / static_cast<double>(count);
}

Eigen::VectorXd degree_matrix(const Eigen::SparseMatrix<double>& w) {
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(w.rows());
    for (int k = 0; k < w.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(w, k); it; ++it)
            deg(it.row()) += it.value();
    return deg;
}

Eigen::VectorXd degree_matrix(const Eigen::MatrixXd& w) {
    return w.rowwise().sum();
}

Eigen::MatrixXd laplacian_scatter(const Eigen::MatrixXd& x, const Eigen::SparseMatrix<double>& w) {
    const Eigen::VectorXd deg = degree_matrix(w);
    const Eigen::MatrixXd xd = x * deg.asDiagonal() * x.transpose();
    const Eigen::MatrixXd xw = x * w * x.transpose();
    Eigen::MatrixXd s = xd - xw;
    return 0.5 * (s + s.transpose());
}

EmbeddingSolution solve_embedding(const Eigen::MatrixXd& x, const Eigen::SparseMatrix<double>& w,
                                  const Eigen::SparseMatrix<double>& w_between, int d,
                                  double reg_sigma) {
    const Eigen::Index n = x.rows();
    if (d < 1) throw ConfigError("embedding dimension must be >= 1");
    if (d > n) throw ConfigError("embedding dimension exceeds the AP count");
    if (w.rows() != x.cols() || w_between.rows() != x.cols())
        throw ValidationError("affinity matrices are not aligned with the samples");

    const Eigen::MatrixXd a = laplacian_scatter(x, w_between);
    Eigen::MatrixXd b = laplacian_scatter(x, w);
    b.diagonal().array() += reg_sigma;

    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success)
        throw SolverError(
            "within-class scatter is not positive definite; increase reg_sigma");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(a, b);
    if (ges.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");

    // descending eigenvalues, stable under exact ties
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index lhs, Eigen::Index rhs) {
        return ges.eigenvalues()(lhs) > ges.eigenvalues()(rhs);
    });

    EmbeddingSolution sol;
    sol.vectors.resize(n, d);
    sol.eigenvalues.resize(d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd v = ges.eigenvectors().col(idx[static_cast<std::size_t>(k)]);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (v(i) != 0.0) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
        sol.vectors.col(k) = v;
        sol.eigenvalues(k) = ges.eigenvalues()(idx[static_cast<std::size_t>(k)]);
    }
    return sol;
}

Eigen::VectorXd project(const Eigen::MatrixXd& embedding, const Eigen::VectorXd& x) {
    if (x.size() != embedding.rows())
        throw ValidationError("project: input length does not match the embedding");
    return embedding.transpose() * x;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& embedding, const Eigen::MatrixXd& x) {
    if (x.rows() != embedding.rows())
        throw ValidationError("project: input length does not match the embedding");
    return embedding.transpose() * x;
}

namespace {

long admission_budget(long labeled, double ratio) {
    // ratio r caps the admitted count at m(1-r)/r, so r = 1 admits nothing
    return static_cast<long>(std::floor(static_cast<double>(labeled) * (1.0 - ratio) / ratio +
                                        1e-9));
}

struct Amalgam {
    Eigen::MatrixXd x;
    std::vector<int> labels;
};

// graph build + weights + eigensolve over the amalgamated set
EmbeddingSolution embed_amalgam(const Amalgam& am, const TrainParams& params, int d,
                                double* heat_out) {
    const NeighborGraphs graphs = build_neighbor_graphs(am.x, am.labels, params.affinity_k);
    const double heat = params.heat_t ? *params.heat_t : mean_edge_heat(graphs, am.x);
    if (heat_out) *heat_out = heat;
    const AffinityPair w = affinity_weights(graphs, am.x, heat);
    return solve_embedding(am.x, w.within, w.between, d, params.reg_sigma);
}

}  // namespace

EmbeddingModel train_sde(const RadioMap& map, const std::vector<RssVector>& unlabeled,
                         const TrainParams& params, TrainDiagnostics* diag) {
    map.validate();
    params.validate();

    const Eigen::MatrixXd labeled_x = map.fingerprint_matrix();
    const auto n = static_cast<Eigen::Index>(map.ap_count());
    const auto m = static_cast<long>(map.rp_count());

    TrainParams resolved = params;
    if (!resolved.kernel_lambda) resolved.kernel_lambda = median_kernel_lambda(labeled_x);

    ClusterModel clusters = run_kfcm(labeled_x, params.n_clusters, resolved);
    std::vector<int> labels = hard_labels(clusters.membership);

    Amalgam am;
    am.x = labeled_x;
    am.labels = labels;

    int admitted = 0, rejected = 0, capped_out = 0;
    const long budget = admission_budget(m, params.update_ratio);
    if (budget > 0 && !unlabeled.empty()) {
        Eigen::MatrixXd pool(n, static_cast<Eigen::Index>(unlabeled.size()));
        for (std::size_t j = 0; j < unlabeled.size(); ++j) {
            unlabeled[j].validate(map.ap_count());
            const auto filled = fill_missing(unlabeled[j], params.fill_dbm);
            for (Eigen::Index i = 0; i < n; ++i)
                pool(i, static_cast<Eigen::Index>(j)) = filled[static_cast<std::size_t>(i)];
        }
        AdmissionResult adm =
            class_match(pool, clusters, params.match_eps, params.match_threshold);
        rejected = adm.rejected_count;
        admitted = static_cast<int>(std::min<long>(budget, adm.accepted.cols()));
        capped_out = static_cast<int>(adm.accepted.cols()) - admitted;

        am.x.conservativeResize(n, static_cast<Eigen::Index>(m) + admitted);
        am.x.rightCols(admitted) = adm.accepted.leftCols(admitted);
        am.labels.insert(am.labels.end(), adm.labels.begin(), adm.labels.begin() + admitted);
    }

    const int d = params.intrinsic_dim != kAutoDim ? params.intrinsic_dim
                                                   : estimate_intrinsic_dim(labeled_x);
    if (d > n) throw ConfigError("intrinsic_dim exceeds the AP count");

    double heat = 0.0;
    const EmbeddingSolution sol = embed_amalgam(am, params, d, &heat);

    EmbeddingModel model;
    model.ap_ids = map.ap_ids;
    model.embedding = sol.vectors;
    model.eigenvalues = sol.eigenvalues;
    model.drold = project(sol.vectors, labeled_x);
    model.coords = map.coordinates();
    model.labels = labels;
    model.params = params;
    model.initial_labeled = static_cast<int>(m);
    model.admitted = admitted;
    model.train_x = am.x;
    model.train_labels = am.labels;

    if (diag) {
        diag->clusters = std::move(clusters);
        diag->admitted = admitted;
        diag->rejected = rejected;
        diag->capped_out = capped_out;
        diag->resolved_dim = d;
        diag->resolved_kernel_lambda = *resolved.kernel_lambda;
        diag->resolved_heat_t = heat;
    }
    return model;
}

EmbeddingModel online_update(const EmbeddingModel& model, const RssVector& sample,
                             const ClusterModel& clusters, const TrainParams& params) {
    sample.validate(model.ap_count());
    const auto filled = fill_missing(sample, params.fill_dbm);
    Eigen::MatrixXd one(model.train_x.rows(), 1);
    for (Eigen::Index i = 0; i < one.rows(); ++i) one(i, 0) = filled[static_cast<std::size_t>(i)];

    const AdmissionResult adm =
        class_match(one, clusters, params.match_eps, params.match_threshold);
    if (adm.accepted.cols() == 0) return model;

    Amalgam am;
    am.x.resize(model.train_x.rows(), model.train_x.cols() + 1);
    am.x << model.train_x, adm.accepted;
    am.labels = model.train_labels;
    am.labels.push_back(adm.labels.front());

    const int d = params.intrinsic_dim != kAutoDim
                      ? params.intrinsic_dim
                      : estimate_intrinsic_dim(model.train_x.leftCols(model.initial_labeled));

    const EmbeddingSolution sol = embed_amalgam(am, params, d, nullptr);

    EmbeddingModel next = model;
    next.embedding = sol.vectors;
    next.eigenvalues = sol.eigenvalues;
    const Eigen::MatrixXd labeled = model.train_x.leftCols(model.initial_labeled);
    next.drold = project(sol.vectors, labeled);
    next.admitted = model.admitted + 1;
    next.train_x = std::move(am.x);
    next.train_labels = std::move(am.labels);
    return next;
}

}  // namespace fploc
