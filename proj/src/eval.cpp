#include "fploc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fploc/io.hpp"
#include "fploc/kfcm.hpp"
#include "fploc/locate.hpp"
#include "fploc/sde.hpp"

namespace fploc {

using nlohmann::json;

double accuracy_at_radius(const std::vector<std::array<double, 2>>& estimates,
                          const std::vector<std::array<double, 2>>& truths, double r) {
    if (estimates.empty()) throw ValidationError("accuracy_at_radius: empty estimate list");
    if (estimates.size() != truths.size())
        throw ValidationError("accuracy_at_radius: estimate/truth lists differ in length");
    if (r < 0.0) throw ConfigError("error radius must be >= 0");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double dx = estimates[i][0] - truths[i][0];
        const double dy = estimates[i][1] - truths[i][1];
        if (std::sqrt(dx * dx + dy * dy) <= r) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

CdfCurve error_cdf(const std::vector<std::array<double, 2>>& estimates,
                   const std::vector<std::array<double, 2>>& truths, std::vector<double> radii) {
    std::sort(radii.begin(), radii.end());
    CdfCurve curve;
    curve.radii = radii;
    curve.accuracy.reserve(radii.size());
    for (double r : radii) curve.accuracy.push_back(accuracy_at_radius(estimates, truths, r));
    return curve;
}

std::vector<int> partition_subareas(const RadioMap& map, int n_areas, std::int64_t seed) {
    const auto coords = map.coordinates();
    const auto count = static_cast<Eigen::Index>(coords.size());
    if (n_areas < 1) throw ConfigError("n_areas must be >= 1");
    if (n_areas > count) throw ConfigError("n_areas exceeds the reference-point count");

    Eigen::MatrixXd pts(2, count);
    for (Eigen::Index j = 0; j < count; ++j) {
        pts(0, j) = coords[static_cast<std::size_t>(j)][0];
        pts(1, j) = coords[static_cast<std::size_t>(j)][1];
    }

    const auto init = farthest_point_indices(pts, n_areas, seed);
    Eigen::MatrixXd centers(2, n_areas);
    for (int i = 0; i < n_areas; ++i) centers.col(i) = pts.col(init[static_cast<std::size_t>(i)]);

    std::vector<int> assign(static_cast<std::size_t>(count), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (Eigen::Index j = 0; j < count; ++j) {
            int best = 0;
            double best_d2 = (pts.col(j) - centers.col(0)).squaredNorm();
            for (int i = 1; i < n_areas; ++i) {
                const double d2 = (pts.col(j) - centers.col(i)).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = i;
                }
            }
            if (assign[static_cast<std::size_t>(j)] != best) {
                assign[static_cast<std::size_t>(j)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int i = 0; i < n_areas; ++i) {
            Eigen::Vector2d sum = Eigen::Vector2d::Zero();
            int members = 0;
            for (Eigen::Index j = 0; j < count; ++j)
                if (assign[static_cast<std::size_t>(j)] == i) {
                    sum += pts.col(j);
                    ++members;
                }
            if (members > 0) centers.col(i) = sum / members;  // empty areas keep their center
        }
    }
    return assign;
}

Testbed make_testbed(const SimConfig& config, int n_unlabeled) {
    Testbed tb;
    tb.config = config;
    SyntheticData data = build_synthetic_radio_map(config);
    tb.map = std::move(data.map);
    tb.queries = std::move(data.queries);
    auto pool = draw_observations(config, n_unlabeled, 0);
    tb.unlabeled.reserve(pool.size());
    for (auto& q : pool) tb.unlabeled.push_back(std::move(q.rss));  // coordinates dropped
    return tb;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "intrinsic_dim") return SweepAxis::IntrinsicDim;
    if (name == "n_clusters") return SweepAxis::NClusters;
    if (name == "affinity_k") return SweepAxis::AffinityK;
    if (name == "reg_sigma") return SweepAxis::RegSigma;
    if (name == "update_ratio") return SweepAxis::UpdateRatio;
    throw ConfigError("unknown sweep axis '" + name +
                      "' (expected intrinsic_dim, n_clusters, affinity_k, reg_sigma or "
                      "update_ratio)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::IntrinsicDim: return "intrinsic_dim";
        case SweepAxis::NClusters: return "n_clusters";
        case SweepAxis::AffinityK: return "affinity_k";
        case SweepAxis::RegSigma: return "reg_sigma";
        case SweepAxis::UpdateRatio: return "update_ratio";
    }
    return "?";
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct Evaluated {
    std::vector<std::array<double, 2>> estimates;
    std::vector<double> errors;
    std::uint64_t macs = 0;
    double seconds = 0.0;
};

Evaluated evaluate_queries(const Testbed& tb, const EmbeddingModel* model,
                           const TrainParams& params) {
    const Eigen::MatrixXd raw = model ? Eigen::MatrixXd() : tb.map.fingerprint_matrix();
    const auto coords = tb.map.coordinates();

    Evaluated out;
    out.estimates.reserve(tb.queries.size());
    out.errors.reserve(tb.queries.size());
    OpCounter ops;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& q : tb.queries) {
        PositionFix fix;
        if (model) {
            fix = locate_sde(*model, q.rss, params.knn_k, params.fill_dbm, &ops);
        } else {
            const auto filled = fill_missing(q.rss, params.fill_dbm);
            const Eigen::Map<const Eigen::VectorXd> qv(filled.data(),
                                                       static_cast<Eigen::Index>(filled.size()));
            fix = knn_locate(qv, raw, coords, params.knn_k, &ops);
        }
        out.estimates.push_back({fix.x, fix.y});
        const double dx = fix.x - q.x;
        const double dy = fix.y - q.y;
        out.errors.push_back(std::sqrt(dx * dx + dy * dy));
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.macs = tb.queries.empty() ? 0 : ops.macs / tb.queries.size();
    return out;
}

std::vector<std::array<double, 2>> query_truths(const Testbed& tb) {
    std::vector<std::array<double, 2>> t;
    t.reserve(tb.queries.size());
    for (const auto& q : tb.queries) t.push_back({q.x, q.y});
    return t;
}

// queries inherit the sub-area of the nearest reference point
std::vector<double> area_medians(const Testbed& tb, const std::vector<int>& rp_areas, int n_areas,
                                 const std::vector<double>& errors) {
    const auto coords = tb.map.coordinates();
    std::vector<std::vector<double>> buckets(static_cast<std::size_t>(n_areas));
    for (std::size_t qi = 0; qi < tb.queries.size(); ++qi) {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < coords.size(); ++j) {
            const double dx = coords[j][0] - tb.queries[qi].x;
            const double dy = coords[j][1] - tb.queries[qi].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = j;
            }
        }
        buckets[static_cast<std::size_t>(rp_areas[best])].push_back(errors[qi]);
    }
    std::vector<double> medians;
    medians.reserve(buckets.size());
    for (auto& b : buckets) medians.push_back(median(std::move(b)));
    return medians;
}

}  // namespace

EvalReport compare_methods(const Testbed& testbed, const TrainParams& params,
                           const std::vector<double>& radii, int n_areas,
                           const std::vector<std::string>& methods) {
    if (testbed.queries.empty()) throw ValidationError("testbed has no queries");

    auto wanted = [&](const char* name) {
        return methods.empty() || std::find(methods.begin(), methods.end(), name) != methods.end();
    };
    for (const auto& m : methods)
        if (m != "knn" && m != "lde" && m != "sde")
            throw ConfigError("unknown method '" + m + "' (expected knn, lde or sde)");

    EvalReport report;
    report.radii = radii;
    std::sort(report.radii.begin(), report.radii.end());
    report.n_queries = static_cast<int>(testbed.queries.size());
    report.query_hash = hash_queries(testbed.queries);

    TrainParams lde_params = params;
    lde_params.update_ratio = 1.0;  // no admitted samples: plain LDE
    EmbeddingModel lde, sde;
    if (wanted("lde")) lde = train_sde(testbed.map, testbed.unlabeled, lde_params);
    if (wanted("sde")) sde = train_sde(testbed.map, testbed.unlabeled, params);

    const auto truths = query_truths(testbed);
    std::vector<int> rp_areas;
    if (n_areas > 0) {
        rp_areas = partition_subareas(testbed.map, n_areas, params.seed);
        report.n_areas = n_areas;
        report.area_sizes.assign(static_cast<std::size_t>(n_areas), 0);
        for (int a : rp_areas) ++report.area_sizes[static_cast<std::size_t>(a)];
    }

    struct Entry {
        const char* name;
        const EmbeddingModel* model;
        const TrainParams* params;
    };
    const Entry entries[] = {{"knn", nullptr, &params},
                             {"lde", &lde, &lde_params},
                             {"sde", &sde, &params}};
    for (const auto& e : entries) {
        if (!wanted(e.name)) continue;
        Evaluated ev = evaluate_queries(testbed, e.model, *e.params);
        MethodResult mr;
        mr.name = e.name;
        mr.curve = error_cdf(ev.estimates, truths, report.radii);
        mr.median_error = median(ev.errors);
        mr.mean_error =
            std::accumulate(ev.errors.begin(), ev.errors.end(), 0.0) / ev.errors.size();
        mr.macs_per_query = ev.macs;
        mr.runtime_sec = ev.seconds;
        if (n_areas > 0) mr.area_median_error = area_medians(testbed, rp_areas, n_areas, ev.errors);
        report.methods.push_back(std::move(mr));
    }
    return report;
}

EvalReport run_sweep(const Testbed& testbed, SweepAxis axis, const std::vector<double>& values,
                     const TrainParams& base_params, const std::vector<double>& radii) {
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    if (testbed.queries.empty()) throw ValidationError("testbed has no queries");

    EvalReport report;
    report.axis = to_string(axis);
    report.radii = radii;
    std::sort(report.radii.begin(), report.radii.end());
    report.n_queries = static_cast<int>(testbed.queries.size());
    report.query_hash = hash_queries(testbed.queries);

    const auto truths = query_truths(testbed);
    for (double value : values) {
        SweepPoint point;
        point.value = value;
        TrainParams p = base_params;
        try {
            switch (axis) {
                case SweepAxis::IntrinsicDim: p.intrinsic_dim = static_cast<int>(value); break;
                case SweepAxis::NClusters: p.n_clusters = static_cast<int>(value); break;
                case SweepAxis::AffinityK: p.affinity_k = static_cast<int>(value); break;
                case SweepAxis::RegSigma: p.reg_sigma = value; break;
                case SweepAxis::UpdateRatio: p.update_ratio = value; break;
            }
            p.validate();
            const EmbeddingModel model = train_sde(testbed.map, testbed.unlabeled, p);
            Evaluated ev = evaluate_queries(testbed, &model, p);
            point.curve = error_cdf(ev.estimates, truths, report.radii);
            point.median_error = median(ev.errors);
            point.accuracy_at_1m = accuracy_at_radius(ev.estimates, truths, 1.0);
            point.ok = true;
            point.cholesky_ok = true;
        } catch (const SolverError& e) {
            point.ok = false;
            point.cholesky_ok = false;
            point.error = e.what();
        } catch (const std::runtime_error& e) {
            point.ok = false;
            point.cholesky_ok = true;  // failed before or beside the factorization
            point.error = e.what();
        }
        report.points.push_back(std::move(point));
    }

    for (const auto& point : report.points) {
        if (!point.ok) continue;
        if (!report.has_best || point.accuracy_at_1m > report.best_accuracy_at_1m) {
            report.has_best = true;
            report.best_value = point.value;
            report.best_accuracy_at_1m = point.accuracy_at_1m;
        }
    }
    return report;
}

namespace {

json curve_to_json(const CdfCurve& curve) {
    return json{{"radii", curve.radii}, {"accuracy", curve.accuracy}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    json j;
    j["radii"] = report.radii;
    j["query_hash"] = report.query_hash;
    j["n_queries"] = report.n_queries;
    if (!report.methods.empty()) {
        json methods = json::array();
        for (const auto& m : report.methods) {
            json jm{{"name", m.name},
                    {"curve", curve_to_json(m.curve)},
                    {"median_error", m.median_error},
                    {"mean_error", m.mean_error},
                    {"macs_per_query", m.macs_per_query}};
            if (!m.area_median_error.empty()) jm["area_median_error"] = m.area_median_error;
            methods.push_back(std::move(jm));
        }
        j["methods"] = std::move(methods);
    }
    if (!report.axis.empty()) {
        j["axis"] = report.axis;
        json points = json::array();
        for (const auto& p : report.points) {
            json jp{{"value", p.value}, {"ok", p.ok}, {"cholesky_ok", p.cholesky_ok}};
            if (p.ok) {
                jp["curve"] = curve_to_json(p.curve);
                jp["median_error"] = p.median_error;
                jp["accuracy_at_1m"] = p.accuracy_at_1m;
            } else {
                jp["error"] = p.error;
            }
            points.push_back(std::move(jp));
        }
        j["points"] = std::move(points);
        if (report.has_best)
            j["best"] = json{{"value", report.best_value},
                             {"accuracy_at_1m", report.best_accuracy_at_1m}};
    }
    if (report.n_areas > 0) {
        j["subareas"] = json{{"n_areas", report.n_areas}, {"sizes", report.area_sizes}};
    }
    return j.dump(1) + "\n";
}

std::string curves_to_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "series,radius,accuracy\n";
    for (const auto& m : report.methods)
        for (std::size_t i = 0; i < m.curve.radii.size(); ++i)
            os << m.name << "," << format_double(m.curve.radii[i]) << ","
               << format_double(m.curve.accuracy[i]) << "\n";
    for (const auto& p : report.points) {
        if (!p.ok) continue;
        for (std::size_t i = 0; i < p.curve.radii.size(); ++i)
            os << report.axis << "=" << format_double(p.value) << ","
               << format_double(p.curve.radii[i]) << "," << format_double(p.curve.accuracy[i])
               << "\n";
    }
    return os.str();
}

std::string hash_queries(const std::vector<Query>& queries) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& q : queries) {
        mix(&q.x, sizeof(double));
        mix(&q.y, sizeof(double));
        for (std::size_t i = 0; i < q.rss.size(); ++i) {
            const double v = q.rss.values[i];
            const char m = q.rss.missing[i] ? 1 : 0;
            mix(&v, sizeof(double));
            mix(&m, 1);
        }
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace fploc
