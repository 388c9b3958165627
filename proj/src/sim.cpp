#include "fploc/sim.hpp"

#include <algorithm>
#include <cmath>

namespace fploc {

namespace {

void require(bool ok, const char* flag, const char* what) {
    if (!ok) throw ConfigError(std::string(flag) + " " + what);
}

int grid_points(double extent, double interval) {
    return static_cast<int>(std::floor(extent / interval + 1e-9)) + 1;
}

bool on_grid(const SimConfig& c, double x, double y) {
    auto aligned = [&](double v, double extent) {
        if (v < 0.0 || v > extent) return false;
        const double q = v / c.grid_interval;
        return std::abs(q - std::round(q)) < 1e-12;
    };
    return aligned(x, c.hallway_length) && aligned(y, c.hallway_width);
}

}  // namespace

void SimConfig::validate() const {
    require(hallway_length > 0.0, "--length", "must be > 0");
    require(hallway_width > 0.0, "--width", "must be > 0");
    require(grid_interval > 0.0, "--grid-interval", "must be > 0");
    require(n_aps >= 1, "--n-aps", "must be >= 1");
    require(pathloss_exponent > 0.0, "--pathloss", "must be > 0");
    require(shadowing_sigma >= 0.0, "--sigma", "must be >= 0");
    require(samples_per_rp >= 1, "--samples-per-rp", "must be >= 1");
    require(dropout_prob >= 0.0 && dropout_prob < 1.0, "--dropout", "must be in [0, 1)");
    require(n_queries >= 0, "--n-queries", "must be >= 0");
    require(query_samples >= 1, "--query-samples", "must be >= 1");
    if (grid_points(hallway_length, grid_interval) < 1 ||
        grid_points(hallway_width, grid_interval) < 1)
        throw ConfigError("--grid-interval produces an empty reference-point grid");
}

Layout generate_layout(const SimConfig& config) {
    config.validate();
    Layout layout;

    const int nx = grid_points(config.hallway_length, config.grid_interval);
    const int ny = grid_points(config.hallway_width, config.grid_interval);
    layout.rp_pos.reserve(static_cast<std::size_t>(nx) * ny);
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            layout.rp_pos.push_back({ix * config.grid_interval, iy * config.grid_interval});
    if (layout.rp_pos.empty()) throw ConfigError("layout has no reference points");

    // Stations every L/n_aps metres, 0.5 m outside alternating walls.
    layout.ap_pos.reserve(config.n_aps);
    for (int i = 0; i < config.n_aps; ++i) {
        const double x = (i + 0.5) * config.hallway_length / config.n_aps;
        const double y = (i % 2 == 0) ? -0.5 : config.hallway_width + 0.5;
        layout.ap_pos.push_back({x, y});
    }
    return layout;
}

RssVector sample_rss(const Layout& layout, const SimConfig& config, double x, double y, Rng& rng) {
    std::normal_distribution<double> shadow(0.0, config.shadowing_sigma > 0.0
                                                     ? config.shadowing_sigma
                                                     : 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    RssVector rss;
    rss.values.resize(layout.ap_pos.size());
    rss.missing.resize(layout.ap_pos.size());
    for (std::size_t i = 0; i < layout.ap_pos.size(); ++i) {
        const double dx = x - layout.ap_pos[i][0];
        const double dy = y - layout.ap_pos[i][1];
        const double dist = std::max(std::sqrt(dx * dx + dy * dy), 1.0);
        double v = config.tx_power_at_1m - 10.0 * config.pathloss_exponent * std::log10(dist);
        if (config.shadowing_sigma > 0.0) v += shadow(rng);
        rss.values[i] = std::clamp(v, kRssFloorDbm, kRssCeilDbm);
        rss.missing[i] = config.dropout_prob > 0.0 && unit(rng) < config.dropout_prob;
        if (rss.missing[i]) rss.values[i] = 0.0;  // masked entries carry no value
    }
    return rss;
}

namespace {

Rng stream_rng(std::int64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream) so sub-streams stay independent
    std::uint64_t z = static_cast<std::uint64_t>(seed) + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
}

std::vector<Query> draw_uniform_queries(const Layout& layout, const SimConfig& config, int count,
                                        Rng& rng) {
    std::uniform_real_distribution<double> ux(0.0, config.hallway_length);
    std::uniform_real_distribution<double> uy(0.0, config.hallway_width);
    std::vector<Query> queries;
    queries.reserve(count);
    while (static_cast<int>(queries.size()) < count) {
        const double x = ux(rng);
        const double y = uy(rng);
        if (on_grid(config, x, y)) continue;  // keep queries off the RP grid
        Query q;
        q.x = x;
        q.y = y;
        // a query is a short dwell: query_samples observations averaged,
        // an AP counts as missing only when no observation heard it
        std::vector<RssVector> burst;
        for (int s = 0; s < config.query_samples; ++s)
            burst.push_back(sample_rss(layout, config, x, y, rng));
        const auto values = aggregate_fingerprint(burst, burst.front().size(), 0.0);
        q.rss.values = values;
        q.rss.missing.assign(values.size(), false);
        for (std::size_t i = 0; i < values.size(); ++i) {
            bool heard = false;
            for (const auto& b : burst) heard = heard || !b.missing[i];
            if (!heard) {
                q.rss.missing[i] = true;
                q.rss.values[i] = 0.0;
            }
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

}  // namespace

SyntheticData build_synthetic_radio_map(const SimConfig& config) {
    const Layout layout = generate_layout(config);

    SyntheticData data;
    data.map.grid_interval = config.grid_interval;
    for (int i = 1; i <= config.n_aps; ++i) data.map.ap_ids.push_back(std::to_string(i));

    Rng rng = stream_rng(config.seed, 0);
    data.map.rps.reserve(layout.rp_pos.size());
    for (const auto& pos : layout.rp_pos) {
        ReferencePoint rp;
        rp.x = pos[0];
        rp.y = pos[1];
        for (int s = 0; s < config.samples_per_rp; ++s)
            rp.samples.push_back(sample_rss(layout, config, pos[0], pos[1], rng));
        // silent APs fall back to 0 dBm, the same convention the
        // asymmetric-matching path applies at query time
        rp.fingerprint = aggregate_fingerprint(rp.samples, config.n_aps, 0.0);
        data.map.rps.push_back(std::move(rp));
    }
    data.map.validate();

    Rng qrng = stream_rng(config.seed, 1);
    data.queries = draw_uniform_queries(layout, config, config.n_queries, qrng);
    return data;
}

std::vector<Query> draw_observations(const SimConfig& config, int count, std::uint64_t stream) {
    const Layout layout = generate_layout(config);
    Rng rng = stream_rng(config.seed, 2 + stream);
    return draw_uniform_queries(layout, config, count, rng);
}

}  // namespace fploc
