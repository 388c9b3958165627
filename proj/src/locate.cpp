#include "fploc/locate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fploc {

double euclid(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ValidationError("euclid: length mismatch");
    return (a - b).norm();
}

std::vector<double> fill_missing(const RssVector& sample, double fill_dbm) {
    if (sample.values.size() != sample.missing.size())
        throw ValidationError("rss vector value/mask length mismatch");
    std::vector<double> out = sample.values;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (sample.missing[i]) out[i] = fill_dbm;
    return out;
}

PositionFix knn_locate(const Eigen::VectorXd& query, const Eigen::MatrixXd& fingerprints,
                       const std::vector<std::array<double, 2>>& coords, int k, OpCounter* ops) {
    const Eigen::Index dim = fingerprints.rows();
    const Eigen::Index count = fingerprints.cols();
    if (query.size() != dim) throw ValidationError("query length does not match fingerprints");
    if (coords.size() != static_cast<std::size_t>(count))
        throw ValidationError("coordinate list does not match fingerprints");
    if (k < 1 || k > count) throw ConfigError("knn k must satisfy 1 <= k <= N");

    std::vector<double> d2(static_cast<std::size_t>(count));
    const double* q = query.data();
    for (Eigen::Index j = 0; j < count; ++j) {
        const double* f = fingerprints.col(j).data();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double diff = q[i] - f[i];
            acc += diff * diff;
        }
        d2[static_cast<std::size_t>(j)] = acc;
        if (ops) ops->macs += static_cast<std::uint64_t>(dim);
    }

    std::vector<int> idx(static_cast<std::size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
        if (d2[static_cast<std::size_t>(a)] != d2[static_cast<std::size_t>(b)])
            return d2[static_cast<std::size_t>(a)] < d2[static_cast<std::size_t>(b)];
        return a < b;
    });

    PositionFix fix;
    fix.neighbor_ids.assign(idx.begin(), idx.begin() + k);
    fix.neighbor_distances.reserve(k);
    double sx = 0.0, sy = 0.0;
    for (int id : fix.neighbor_ids) {
        fix.neighbor_distances.push_back(std::sqrt(d2[static_cast<std::size_t>(id)]));
        sx += coords[static_cast<std::size_t>(id)][0];
        sy += coords[static_cast<std::size_t>(id)][1];
    }
    fix.x = sx / k;
    fix.y = sy / k;
    return fix;
}

PositionFix locate_sde(const EmbeddingModel& model, const RssVector& raw_query, int k,
                       double fill_dbm, OpCounter* ops) {
    raw_query.validate(model.ap_count());
    const auto filled = fill_missing(raw_query, fill_dbm);
    const Eigen::Map<const Eigen::VectorXd> q(filled.data(),
                                              static_cast<Eigen::Index>(filled.size()));
    const Eigen::VectorXd reduced = model.embedding.transpose() * q;
    if (ops)
        ops->macs += static_cast<std::uint64_t>(model.embedding.rows()) *
                     static_cast<std::uint64_t>(model.embedding.cols());
    return knn_locate(reduced, model.drold, model.coords, k, ops);
}

}  // namespace fploc
