#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fploc/io.hpp"
#include "fploc/types.hpp"

namespace fploc {

/// Synthetic hallway testbed parameters. Defaults give a 101x5 grid
/// (505 reference points) covered by 27 APs at 4 dB shadowing.
struct SimConfig {
    double hallway_length = 50.0;
    double hallway_width = 2.0;
    double grid_interval = 0.5;
    int n_aps = 27;
    double pathloss_exponent = 2.5;
    double tx_power_at_1m = -30.0;
    double shadowing_sigma = 4.0;
    int samples_per_rp = 3;
    double dropout_prob = 0.05;
    int n_queries = 500;
    int query_samples = 3;  // online observations averaged per query point
    std::int64_t seed = 1;

    void validate() const;  // throws ConfigError naming the offending flag
};

struct Layout {
    std::vector<std::array<double, 2>> ap_pos;
    std::vector<std::array<double, 2>> rp_pos;
};

using Rng = std::mt19937_64;

/// AP stations alternate sides of the hallway at even spacing; the RP grid
/// covers the rectangle at grid_interval. Geometry is independent of the
/// seed so that reseeding changes sample noise only.
Layout generate_layout(const SimConfig& config);

/// Log-distance path loss with Gaussian shadowing, per-AP dropout, values
/// clamped to [-110, 0] dBm. Distances are floored at 1 m.
RssVector sample_rss(const Layout& layout, const SimConfig& config, double x, double y, Rng& rng);

struct SyntheticData {
    RadioMap map;
    std::vector<Query> queries;
};

SyntheticData build_synthetic_radio_map(const SimConfig& config);

/// Extra observations at uniform positions, e.g. an unlabeled training pool.
/// Drawn from a stream derived from (config.seed, stream).
std::vector<Query> draw_observations(const SimConfig& config, int count, std::uint64_t stream);

}  // namespace fploc
