#include "fploc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace fploc {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        std::ostringstream os;
        os << path << ":" << line_no << ": malformed numeric cell '" << cell << "'";
        throw ParseError(os.str());
    }
    return v;
}

// Shared layout of radio-map and query CSVs.
struct CsvHeader {
    std::vector<std::string> ap_ids;
};

CsvHeader read_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ":1: empty file, expected header 'x,y,ap_<id>,...'");
    auto cells = split_csv_line(line);
    if (cells.size() < 3 || cells[0] != "x" || cells[1] != "y")
        throw ParseError(path + ":1: header must start with 'x,y' followed by ap_<id> columns");
    CsvHeader h;
    for (std::size_t i = 2; i < cells.size(); ++i) {
        if (cells[i].rfind("ap_", 0) != 0 || cells[i].size() <= 3)
            throw ParseError(path + ":1: AP column '" + cells[i] + "' must be named ap_<id>");
        h.ap_ids.push_back(cells[i].substr(3));
    }
    return h;
}

struct CsvRow {
    double x, y;
    RssVector rss;
};

bool read_row(std::istream& in, const std::string& path, std::size_t n_aps, std::size_t& line_no,
              CsvRow& row) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != n_aps + 2) {
            std::ostringstream os;
            os << path << ":" << line_no << ": expected " << n_aps + 2 << " cells, got "
               << cells.size();
            throw ParseError(os.str());
        }
        row.x = parse_cell(cells[0], path, line_no);
        row.y = parse_cell(cells[1], path, line_no);
        row.rss.values.assign(n_aps, 0.0);
        row.rss.missing.assign(n_aps, false);
        for (std::size_t i = 0; i < n_aps; ++i) {
            if (cells[i + 2].empty()) {
                row.rss.missing[i] = true;
            } else {
                row.rss.values[i] = parse_cell(cells[i + 2], path, line_no);
            }
        }
        return true;
    }
    return false;
}

double infer_grid_interval(const std::vector<ReferencePoint>& rps) {
    auto min_gap = [](std::vector<double> vals) {
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < vals.size(); ++i) gap = std::min(gap, vals[i] - vals[i - 1]);
        return gap;
    };
    std::vector<double> xs, ys;
    for (const auto& rp : rps) {
        xs.push_back(rp.x);
        ys.push_back(rp.y);
    }
    const double gap = std::min(min_gap(xs), min_gap(ys));
    return std::isfinite(gap) ? gap : 1.0;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

void write_header(std::ostream& out, const std::vector<std::string>& ap_ids) {
    out << "x,y";
    for (const auto& id : ap_ids) out << ",ap_" << id;
    out << "\n";
}

void write_row(std::ostream& out, double x, double y, const RssVector& rss) {
    out << format_double(x) << "," << format_double(y);
    for (std::size_t i = 0; i < rss.size(); ++i) {
        out << ",";
        if (!rss.missing[i]) out << format_double(rss.values[i]);
    }
    out << "\n";
}

}  // namespace

std::vector<double> aggregate_fingerprint(const std::vector<RssVector>& samples, std::size_t n,
                                          double fill_dbm) {
    std::vector<double> fp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        int count = 0;
        for (const auto& s : samples) {
            if (!s.missing[i]) {
                sum += s.values[i];
                ++count;
            }
        }
        fp[i] = count > 0 ? sum / count : fill_dbm;
    }
    return fp;
}

RadioMap load_radio_map(const std::string& path, double fill_dbm) {
    auto in = open_in(path);
    const auto header = read_header(in, path);
    const std::size_t n = header.ap_ids.size();

    RadioMap map;
    map.ap_ids = header.ap_ids;
    std::size_t line_no = 1;
    CsvRow row;
    while (read_row(in, path, n, line_no, row)) {
        if (!map.rps.empty() && map.rps.back().x == row.x && map.rps.back().y == row.y) {
            map.rps.back().samples.push_back(std::move(row.rss));
        } else {
            ReferencePoint rp;
            rp.x = row.x;
            rp.y = row.y;
            rp.samples.push_back(std::move(row.rss));
            map.rps.push_back(std::move(rp));
        }
    }
    if (map.rps.empty()) throw ParseError(path + ": no sample rows");
    for (auto& rp : map.rps) rp.fingerprint = aggregate_fingerprint(rp.samples, n, fill_dbm);
    map.grid_interval = infer_grid_interval(map.rps);
    map.validate();
    return map;
}

void save_radio_map(const RadioMap& map, const std::string& path) {
    auto out = open_out(path);
    write_header(out, map.ap_ids);
    for (const auto& rp : map.rps)
        for (const auto& s : rp.samples) write_row(out, rp.x, rp.y, s);
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<Query> load_queries(const std::string& path, const std::vector<std::string>& ap_ids) {
    auto in = open_in(path);
    const auto header = read_header(in, path);
    if (!ap_ids.empty() && header.ap_ids != ap_ids)
        throw ValidationError(path + ": AP roster does not match the model's");
    const std::size_t n = header.ap_ids.size();

    std::vector<Query> queries;
    std::size_t line_no = 1;
    CsvRow row;
    while (read_row(in, path, n, line_no, row)) {
        row.rss.validate(n);
        queries.push_back(Query{row.x, row.y, std::move(row.rss)});
    }
    return queries;
}

void save_queries(const std::vector<Query>& queries, const std::vector<std::string>& ap_ids,
                  const std::string& path) {
    auto out = open_out(path);
    write_header(out, ap_ids);
    for (const auto& q : queries) write_row(out, q.x, q.y, q.rss);
    if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

constexpr int kModelVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows)
        throw ParseError("matrix row count mismatch");
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = data[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ParseError("matrix column count mismatch");
        for (Eigen::Index j2 = 0; j2 < cols; ++j2)
            m(i, j2) = row[static_cast<std::size_t>(j2)].get<double>();
    }
    return m;
}

json params_to_json(const TrainParams& p) {
    json j{{"intrinsic_dim", p.intrinsic_dim},
           {"n_clusters", p.n_clusters},
           {"affinity_k", p.affinity_k},
           {"reg_sigma", p.reg_sigma},
           {"fuzzifier_m", p.fuzzifier_m},
           {"converge_eps", p.converge_eps},
           {"max_iter", p.max_iter},
           {"match_eps", p.match_eps},
           {"match_threshold", p.match_threshold},
           {"update_ratio", p.update_ratio},
           {"knn_k", p.knn_k},
           {"fill_dbm", p.fill_dbm},
           {"seed", p.seed}};
    j["heat_t"] = p.heat_t ? json(*p.heat_t) : json(nullptr);
    j["kernel_lambda"] = p.kernel_lambda ? json(*p.kernel_lambda) : json(nullptr);
    return j;
}

TrainParams params_from_json(const json& j) {
    TrainParams p;
    p.intrinsic_dim = j.at("intrinsic_dim").get<int>();
    p.n_clusters = j.at("n_clusters").get<int>();
    p.affinity_k = j.at("affinity_k").get<int>();
    if (!j.at("heat_t").is_null()) p.heat_t = j.at("heat_t").get<double>();
    if (!j.at("kernel_lambda").is_null()) p.kernel_lambda = j.at("kernel_lambda").get<double>();
    p.reg_sigma = j.at("reg_sigma").get<double>();
    p.fuzzifier_m = j.at("fuzzifier_m").get<double>();
    p.converge_eps = j.at("converge_eps").get<double>();
    p.max_iter = j.at("max_iter").get<int>();
    p.match_eps = j.at("match_eps").get<double>();
    p.match_threshold = j.at("match_threshold").get<int>();
    p.update_ratio = j.at("update_ratio").get<double>();
    p.knn_k = j.at("knn_k").get<int>();
    p.fill_dbm = j.at("fill_dbm").get<double>();
    p.seed = j.at("seed").get<std::int64_t>();
    return p;
}

}  // namespace

void save_model(const EmbeddingModel& model, const std::string& path) {
    model.validate();
    json j;
    j["version"] = kModelVersion;
    j["ap_ids"] = model.ap_ids;
    j["embedding"] = matrix_to_json(model.embedding);
    j["drold"] = matrix_to_json(model.drold);
    json coords = json::array();
    for (const auto& c : model.coords) coords.push_back(json::array({c[0], c[1]}));
    j["coords"] = std::move(coords);
    j["labels"] = model.labels;
    json eig = json::array();
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) eig.push_back(model.eigenvalues[i]);
    j["eigenvalues"] = std::move(eig);
    j["params"] = params_to_json(model.params);
    j["provenance"] = json{{"initial_labeled", model.initial_labeled}, {"admitted", model.admitted}};
    j["train"] = json{{"x", matrix_to_json(model.train_x)}, {"labels", model.train_labels}};

    auto out = open_out(path);
    out << j.dump(1) << "\n";
    if (!out) throw IoError("write to '" + path + "' failed");
}

EmbeddingModel load_model(const std::string& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": malformed model file: " + e.what());
    }
    EmbeddingModel model;
    try {
        const int version = j.at("version").get<int>();
        if (version != kModelVersion) {
            std::ostringstream os;
            os << path << ": unsupported model version " << version << " (expected "
               << kModelVersion << ")";
            throw ParseError(os.str());
        }
        model.ap_ids = j.at("ap_ids").get<std::vector<std::string>>();
        model.embedding = matrix_from_json(j.at("embedding"));
        model.drold = matrix_from_json(j.at("drold"));
        for (const auto& c : j.at("coords"))
            model.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        model.labels = j.at("labels").get<std::vector<int>>();
        const auto& eig = j.at("eigenvalues");
        model.eigenvalues.resize(static_cast<Eigen::Index>(eig.size()));
        for (std::size_t i = 0; i < eig.size(); ++i)
            model.eigenvalues[static_cast<Eigen::Index>(i)] = eig[i].get<double>();
        model.params = params_from_json(j.at("params"));
        model.initial_labeled = j.at("provenance").at("initial_labeled").get<int>();
        model.admitted = j.at("provenance").at("admitted").get<int>();
        model.train_x = matrix_from_json(j.at("train").at("x"));
        model.train_labels = j.at("train").at("labels").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw ParseError(path + ": malformed model file: " + e.what());
    }
    model.validate();
    return model;
}

}  // namespace fploc
