#pragma once

#include <string>
#include <vector>

#include "fploc/types.hpp"

namespace fploc {

/// One online observation with ground-truth coordinates (simulator output).
struct Query {
    double x = 0.0;
    double y = 0.0;
    RssVector rss;
};

// Radio-map CSV: header "x,y,ap_<id>,..."; one row per sample, consecutive
// rows with equal coordinates belong to the same reference point; missing
// APs are empty cells. Aggregation takes the mean over non-missing samples
// per AP; an AP heard in no sample at an RP gets fill_dbm.
RadioMap load_radio_map(const std::string& path, double fill_dbm = 0.0);
void save_radio_map(const RadioMap& map, const std::string& path);

// Query CSV shares the radio-map layout; every row is independent.
std::vector<Query> load_queries(const std::string& path, const std::vector<std::string>& ap_ids);
void save_queries(const std::vector<Query>& queries, const std::vector<std::string>& ap_ids,
                  const std::string& path);

void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

/// Per-AP mean over non-missing samples; APs heard in no sample get fill_dbm.
std::vector<double> aggregate_fingerprint(const std::vector<RssVector>& samples, std::size_t n,
                                          double fill_dbm);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace fploc
