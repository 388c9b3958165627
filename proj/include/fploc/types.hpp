#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fploc {

// Error taxonomy; the CLI maps these onto exit codes (config/data -> 2,
// numerical -> 3, filesystem -> 4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kRssFloorDbm = -110.0;
constexpr double kRssCeilDbm = 0.0;

/// One fingerprint observation: per-AP signal strength in dBm plus a
/// missing-AP mask (true = AP not heard in this observation).
struct RssVector {
    std::vector<double> values;
    std::vector<bool> missing;

    RssVector() = default;
    explicit RssVector(std::vector<double> v)
        : values(std::move(v)), missing(values.size(), false) {}
    RssVector(std::vector<double> v, std::vector<bool> m)
        : values(std::move(v)), missing(std::move(m)) {}

    std::size_t size() const { return values.size(); }

    // Throws ValidationError unless lengths match n and every non-missing
    // entry lies in [-110, 0] dBm.
    void validate(std::size_t n) const;
};

/// Surveyed grid location: planar coordinates, raw samples and the
/// aggregated fingerprint (complete, i.e. no missing entries).
struct ReferencePoint {
    double x = 0.0;
    double y = 0.0;
    std::vector<RssVector> samples;
    std::vector<double> fingerprint;
};

/// Labeled offline database: AP roster plus reference points.
struct RadioMap {
    std::vector<std::string> ap_ids;
    std::vector<ReferencePoint> rps;
    double grid_interval = 0.0;

    std::size_t ap_count() const { return ap_ids.size(); }
    std::size_t rp_count() const { return rps.size(); }

    /// Fingerprints as an n x N matrix (one column per reference point).
    Eigen::MatrixXd fingerprint_matrix() const;
    std::vector<std::array<double, 2>> coordinates() const;

    void validate() const;
};

constexpr int kAutoDim = 0;  // intrinsic_dim sentinel: estimate from data

/// Training knobs. kernel_lambda and heat_t are data-dependent when unset:
/// lambda falls back to the median pairwise-distance heuristic and heat_t
/// to the mean squared distance over graph edges.
struct TrainParams {
    int intrinsic_dim = kAutoDim;
    int n_clusters = 2;
    int affinity_k = 6;
    std::optional<double> heat_t;
    std::optional<double> kernel_lambda;
    double reg_sigma = 1e-8;
    double fuzzifier_m = 2.0;
    double converge_eps = 1e-6;
    int max_iter = 100;
    double match_eps = 6.0;
    int match_threshold = 13;
    double update_ratio = 0.2;
    int knn_k = 3;
    double fill_dbm = 0.0;
    std::int64_t seed = 1;

    void validate() const;  // throws ConfigError naming the offending field
};

/// Trained embedding artifact. Besides the projection matrix and the
/// dimensionality-reduced database it keeps the amalgamated training set,
/// which online updates re-embed from.
struct EmbeddingModel {
    std::vector<std::string> ap_ids;
    Eigen::MatrixXd embedding;                  // n x d, columns = eigenvectors
    Eigen::MatrixXd drold;                      // d x m', projected labeled fingerprints
    std::vector<std::array<double, 2>> coords;  // m' reference-point coordinates
    std::vector<int> labels;                    // m' cluster ids (0-based)
    Eigen::VectorXd eigenvalues;                // d, descending
    TrainParams params;
    int initial_labeled = 0;
    int admitted = 0;
    Eigen::MatrixXd train_x;                    // n x (m' + admitted)
    std::vector<int> train_labels;

    std::size_t ap_count() const { return ap_ids.size(); }
    int dim() const { return static_cast<int>(embedding.cols()); }

    void validate() const;
    bool operator==(const EmbeddingModel& other) const;
};

}  // namespace fploc
