#include "fploc/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace fploc {

void RssVector::validate(std::size_t n) const {
    if (values.size() != n || missing.size() != n) {
        std::ostringstream os;
        os << "rss vector length " << values.size() << "/" << missing.size()
           << " does not match AP roster size " << n;
        throw ValidationError(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (missing[i]) continue;
        const double v = values[i];
        if (!std::isfinite(v) || v < kRssFloorDbm || v > kRssCeilDbm) {
            std::ostringstream os;
            os << "rss value " << v << " for AP index " << i
               << " outside [" << kRssFloorDbm << ", " << kRssCeilDbm << "] dBm";
            throw ValidationError(os.str());
        }
    }
}

Eigen::MatrixXd RadioMap::fingerprint_matrix() const {
    Eigen::MatrixXd x(ap_count(), rp_count());
    for (std::size_t j = 0; j < rps.size(); ++j) {
        if (rps[j].fingerprint.size() != ap_count())
            throw ValidationError("fingerprint length does not match AP roster");
        for (std::size_t i = 0; i < ap_count(); ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rps[j].fingerprint[i];
    }
    return x;
}

std::vector<std::array<double, 2>> RadioMap::coordinates() const {
    std::vector<std::array<double, 2>> c;
    c.reserve(rps.size());
    for (const auto& rp : rps) c.push_back({rp.x, rp.y});
    return c;
}

void RadioMap::validate() const {
    if (ap_ids.empty()) throw ValidationError("radio map has no APs");
    if (rps.empty()) throw ValidationError("radio map has no reference points");
    if (!(grid_interval > 0.0)) throw ValidationError("grid_interval must be > 0");
    std::set<std::pair<double, double>> seen;
    for (const auto& rp : rps) {
        if (rp.samples.empty()) throw ValidationError("reference point without samples");
        if (rp.fingerprint.size() != ap_count())
            throw ValidationError("fingerprint length does not match AP roster");
        for (const auto& s : rp.samples) s.validate(ap_count());
        if (!seen.insert({rp.x, rp.y}).second) {
            std::ostringstream os;
            os << "duplicate reference-point coordinates (" << rp.x << ", " << rp.y << ")";
            throw ValidationError(os.str());
        }
    }
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string(what));
}

}  // namespace

void TrainParams::validate() const {
    require(intrinsic_dim >= 0, "intrinsic_dim must be positive or auto");
    require(n_clusters >= 1, "n_clusters must be >= 1");
    require(affinity_k >= 1, "affinity_k must be >= 1");
    require(!heat_t || *heat_t > 0.0, "heat_t must be > 0");
    require(!kernel_lambda || *kernel_lambda > 0.0, "kernel_lambda must be > 0");
    require(reg_sigma > 0.0, "reg_sigma must be > 0");
    require(fuzzifier_m > 1.0, "fuzzifier_m must be > 1");
    require(converge_eps > 0.0, "converge_eps must be > 0");
    require(max_iter >= 1, "max_iter must be >= 1");
    require(match_eps > 0.0, "match_eps must be > 0");
    require(match_threshold >= 1, "match_threshold must be >= 1");
    require(update_ratio > 0.0 && update_ratio <= 1.0, "update_ratio must be in (0, 1]");
    require(knn_k >= 1, "knn_k must be >= 1");
    require(std::isfinite(fill_dbm), "fill_dbm must be finite");
}

void EmbeddingModel::validate() const {
    const auto n = static_cast<Eigen::Index>(ap_count());
    if (n == 0) throw ValidationError("model has empty AP roster");
    const Eigen::Index d = embedding.cols();
    if (d < 1 || d > n) throw ValidationError("embedding dimension d must satisfy 1 <= d <= n");
    if (embedding.rows() != n) throw ValidationError("embedding row count does not match AP roster");
    if (drold.rows() != d) throw ValidationError("drold dimension does not match embedding");
    const auto m = static_cast<std::size_t>(drold.cols());
    if (coords.size() != m || labels.size() != m)
        throw ValidationError("drold column count, coordinates and labels disagree");
    if (eigenvalues.size() != d) throw ValidationError("eigenvalue count does not match d");
    if (initial_labeled != static_cast<int>(m))
        throw ValidationError("provenance labeled count does not match drold");
    if (train_x.rows() != n || train_x.cols() != static_cast<Eigen::Index>(m) + admitted)
        throw ValidationError("training-set shape does not match provenance");
    if (train_labels.size() != m + static_cast<std::size_t>(admitted))
        throw ValidationError("training label count does not match provenance");
    params.validate();
    // drold must be re-derivable from the stored labeled fingerprints
    const Eigen::MatrixXd rebuilt = embedding.transpose() * train_x.leftCols(static_cast<Eigen::Index>(m));
    if (m > 0 && (rebuilt - drold).cwiseAbs().maxCoeff() > 1e-9)
        throw ValidationError("drold is not the projection of its source fingerprints");
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
    auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    const auto& p = params;
    const auto& q = other.params;
    return ap_ids == other.ap_ids && same(embedding, other.embedding) &&
           same(drold, other.drold) && coords == other.coords && labels == other.labels &&
           eigenvalues.size() == other.eigenvalues.size() && eigenvalues == other.eigenvalues &&
           initial_labeled == other.initial_labeled && admitted == other.admitted &&
           same(train_x, other.train_x) && train_labels == other.train_labels &&
           p.intrinsic_dim == q.intrinsic_dim && p.n_clusters == q.n_clusters &&
           p.affinity_k == q.affinity_k && p.heat_t == q.heat_t &&
           p.kernel_lambda == q.kernel_lambda && p.reg_sigma == q.reg_sigma &&
           p.fuzzifier_m == q.fuzzifier_m && p.converge_eps == q.converge_eps &&
           p.max_iter == q.max_iter && p.match_eps == q.match_eps &&
           p.match_threshold == q.match_threshold && p.update_ratio == q.update_ratio &&
           p.knn_k == q.knn_k && p.fill_dbm == q.fill_dbm && p.seed == q.seed;
}

}  // namespace fploc
