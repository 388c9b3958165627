#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fploc/eval.hpp"
#include "fploc/io.hpp"
#include "fploc/kfcm.hpp"
#include "fploc/locate.hpp"
#include "fploc/sde.hpp"
#include "fploc/sim.hpp"
#include "fploc/types.hpp"

namespace {

using namespace fploc;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// "auto" or a positive number; used for --dim, --heat-t and --kernel-lambda
struct AutoOrValue {
    std::string text = "auto";

    bool is_auto() const { return text == "auto"; }
    double value() const {
        try {
            return std::stod(text);
        } catch (const std::exception&) {
            throw ConfigError("expected 'auto' or a number, got '" + text + "'");
        }
    }
};

void add_sim_flags(CLI::App* cmd, SimConfig& cfg) {
    cmd->add_option("--length", cfg.hallway_length, "Hallway length, metres");
    cmd->add_option("--width", cfg.hallway_width, "Hallway width, metres");
    cmd->add_option("--grid-interval", cfg.grid_interval, "Reference-point spacing, metres");
    cmd->add_option("--n-aps", cfg.n_aps, "Number of access points");
    cmd->add_option("--pathloss", cfg.pathloss_exponent, "Path-loss exponent");
    cmd->add_option("--tx-power", cfg.tx_power_at_1m, "RSS at 1 m, dBm");
    cmd->add_option("--sigma", cfg.shadowing_sigma, "Shadowing std dev, dB");
    cmd->add_option("--samples-per-rp", cfg.samples_per_rp, "Samples per reference point");
    cmd->add_option("--dropout", cfg.dropout_prob, "Per-AP dropout probability");
    cmd->add_option("--n-queries", cfg.n_queries, "Number of online queries");
    cmd->add_option("--query-samples", cfg.query_samples, "Observations averaged per query");
}

struct TrainFlags {
    TrainParams params;
    AutoOrValue dim, heat, lambda;

    void add(CLI::App* cmd) {
        cmd->add_option("--dim", dim.text, "Embedding dimension or 'auto'")
            ->default_str("auto");
        cmd->add_option("--clusters", params.n_clusters, "Number of KFCM clusters");
        cmd->add_option("--affinity-k", params.affinity_k, "Neighborhood size for the graphs");
        cmd->add_option("--heat-t", heat.text, "Heat-kernel parameter or 'auto'")
            ->default_str("auto");
        cmd->add_option("--kernel-lambda", lambda.text, "Gaussian kernel factor or 'auto'")
            ->default_str("auto");
        cmd->add_option("--reg-sigma", params.reg_sigma, "Eigenproblem regularizer");
        cmd->add_option("--fuzzifier", params.fuzzifier_m, "KFCM fuzzifier m");
        cmd->add_option("--eps", params.converge_eps, "KFCM convergence threshold");
        cmd->add_option("--max-iter", params.max_iter, "KFCM iteration cap");
        cmd->add_option("--match-eps", params.match_eps, "Slope tolerance for class matching");
        cmd->add_option("--match-threshold", params.match_threshold,
                        "Minimum slope agreements to admit a sample");
        cmd->add_option("--ratio", params.update_ratio, "Update ratio (1 admits nothing)");
        cmd->add_option("--knn-k", params.knn_k, "Neighbors for positioning");
        cmd->add_option("--fill-dbm", params.fill_dbm, "Replacement for missing APs, dBm");
    }

    TrainParams resolve() const {
        TrainParams p = params;
        p.intrinsic_dim = dim.is_auto() ? kAutoDim : static_cast<int>(dim.value());
        if (!heat.is_auto()) p.heat_t = heat.value();
        if (!lambda.is_auto()) p.kernel_lambda = lambda.value();
        p.validate();
        return p;
    }
};

std::vector<double> parse_values(const std::string& spec) {
    std::vector<double> values;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto dots = token.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(token.substr(0, dots));
            const int hi = std::stoi(token.substr(dots + 2));
            if (hi < lo) throw ConfigError("--values range '" + token + "' is reversed");
            for (int v = lo; v <= hi; ++v) values.push_back(v);
        } else if (!token.empty()) {
            values.push_back(std::stod(token));
        }
    }
    if (values.empty()) throw ConfigError("--values is empty");
    return values;
}

std::vector<std::string> split_names(const std::string& spec) {
    std::vector<std::string> names;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ','))
        if (!token.empty()) names.push_back(token);
    return names;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

int cmd_simulate(const SimConfig& cfg, const std::string& map_path, const std::string& query_path,
                 const std::string& unlabeled_path, int unlabeled_count) {
    cfg.validate();
    const SyntheticData data = build_synthetic_radio_map(cfg);
    save_radio_map(data.map, map_path);
    if (!query_path.empty()) save_queries(data.queries, data.map.ap_ids, query_path);
    if (!unlabeled_path.empty()) {
        const auto pool = draw_observations(cfg, unlabeled_count, 0);
        save_queries(pool, data.map.ap_ids, unlabeled_path);
    }
    std::cerr << "simulate: " << data.map.rp_count() << " RPs x " << cfg.samples_per_rp
              << " samples, " << cfg.n_aps << " APs, " << data.queries.size() << " queries ("
              << cfg.hallway_length << " m x " << cfg.hallway_width << " m, "
              << cfg.grid_interval << " m grid)\n";
    return 0;
}

int cmd_train(const std::string& map_path, const std::string& unlabeled_path,
              const std::string& out_path, const TrainParams& params,
              const std::string& diagnostics_path) {
    const RadioMap map = load_radio_map(map_path, params.fill_dbm);
    std::vector<RssVector> pool;
    if (!unlabeled_path.empty()) {
        for (auto& q : load_queries(unlabeled_path, map.ap_ids)) pool.push_back(std::move(q.rss));
    }

    TrainDiagnostics diag;
    const EmbeddingModel model = train_sde(map, pool, params, &diag);
    save_model(model, out_path);

    std::cerr << "train: d=" << diag.resolved_dim << ", admitted=" << diag.admitted
              << ", rejected=" << diag.rejected << ", capped_out=" << diag.capped_out
              << ", kfcm_iters=" << diag.clusters.iterations << "\n";
    std::cerr << "train: eigenvalues =";
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
        std::cerr << " " << model.eigenvalues(i);
    std::cerr << "\n";

    if (!diagnostics_path.empty()) {
        std::vector<int> histogram(static_cast<std::size_t>(params.n_clusters), 0);
        for (int label : hard_labels(diag.clusters.membership))
            ++histogram[static_cast<std::size_t>(label)];
        nlohmann::json j{{"chosen_dim", diag.resolved_dim},
                         {"admitted", diag.admitted},
                         {"rejected", diag.rejected},
                         {"capped_out", diag.capped_out},
                         {"kernel_lambda", diag.resolved_kernel_lambda},
                         {"heat_t", diag.resolved_heat_t},
                         {"kfcm_iterations", diag.clusters.iterations},
                         {"objective_trace", diag.clusters.objective_trace},
                         {"label_histogram", histogram}};
        nlohmann::json eig = nlohmann::json::array();
        for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
            eig.push_back(model.eigenvalues(i));
        j["eigenvalues"] = std::move(eig);
        write_text(diagnostics_path, j.dump(1) + "\n");
    }
    return 0;
}

int cmd_locate(const std::string& model_path, const std::string& query_path,
               const std::string& out_path, int k, double fill_dbm) {
    const EmbeddingModel model = load_model(model_path);
    const auto queries = load_queries(query_path, model.ap_ids);

    std::ostringstream os;
    os << "x,y,neighbors\n";
    for (const auto& q : queries) {
        const PositionFix fix = locate_sde(model, q.rss, k, fill_dbm);
        os << format_double(fix.x) << "," << format_double(fix.y) << ",";
        for (std::size_t i = 0; i < fix.neighbor_ids.size(); ++i) {
            if (i > 0) os << ";";
            os << fix.neighbor_ids[i];
        }
        os << "\n";
    }
    write_text(out_path, os.str());
    std::cerr << "locate: " << queries.size() << " fixes written to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const SimConfig& cfg, const TrainParams& params, int unlabeled_count,
                 const std::vector<double>& radii, const std::vector<std::string>& methods,
                 int subareas, const std::string& out_path, const std::string& csv_path) {
    const Testbed tb = make_testbed(cfg, unlabeled_count);
    const EvalReport report = compare_methods(tb, params, radii, subareas, methods);
    write_text(out_path, report_to_json(report));
    if (!csv_path.empty()) write_text(csv_path, curves_to_csv(report));
    for (const auto& m : report.methods)
        std::cerr << "evaluate: " << m.name << " median=" << m.median_error
                  << " m, mean=" << m.mean_error << " m, macs/query=" << m.macs_per_query
                  << ", locate_time=" << m.runtime_sec << " s\n";
    return 0;
}

int cmd_sweep(const SimConfig& cfg, const TrainParams& params, int unlabeled_count,
              const std::string& axis_name, const std::string& values_spec,
              const std::vector<double>& radii, const std::string& out_path,
              const std::string& csv_path) {
    const SweepAxis axis = sweep_axis_from_string(axis_name);
    const auto values = parse_values(values_spec);
    const Testbed tb = make_testbed(cfg, unlabeled_count);
    const EvalReport report = run_sweep(tb, axis, values, params, radii);
    write_text(out_path, report_to_json(report));
    if (!csv_path.empty()) write_text(csv_path, curves_to_csv(report));
    int failures = 0;
    for (const auto& p : report.points)
        if (!p.ok) ++failures;
    std::cerr << "sweep: " << report.points.size() << " points on " << report.axis << ", "
              << failures << " failed";
    if (report.has_best)
        std::cerr << "; best at 1 m: " << report.axis << "=" << report.best_value << " ("
                  << report.best_accuracy_at_1m << ")";
    std::cerr << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WLAN fingerprint localization toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a key=value file");

    SimConfig sim_cfg;
    TrainFlags train_flags;
    std::string map_path, query_path, unlabeled_path, model_path, out_path, csv_path;
    std::string diagnostics_path, axis_name, values_spec;
    std::string radii_spec = "0.5,1,1.5,2";
    std::string methods_spec = "knn,lde,sde";
    int unlabeled_count = 3000;
    int subareas = 0;
    int locate_k = 3;
    double locate_fill = 0.0;
    std::int64_t seed = 1;

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic radio map");
    add_sim_flags(simulate, sim_cfg);
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--out", map_path, "Radio-map CSV path")->required();
    simulate->add_option("--queries", query_path, "Query CSV path");
    simulate->add_option("--unlabeled", unlabeled_path, "Unlabeled-pool CSV path");
    simulate->add_option("--unlabeled-count", unlabeled_count, "Unlabeled pool size");

    auto* train = app.add_subcommand("train", "Train an embedding model");
    train->add_option("--map", map_path, "Radio-map CSV path")->required();
    train->add_option("--unlabeled", unlabeled_path, "Unlabeled-pool CSV path");
    train->add_option("--out", out_path, "Model JSON path")->required();
    train->add_option("--seed", seed, "RNG seed");
    train->add_option("--emit-diagnostics", diagnostics_path, "Training diagnostics JSON path");
    train_flags.add(train);

    auto* locate = app.add_subcommand("locate", "Position queries against a model");
    locate->add_option("--model", model_path, "Model JSON path")->required();
    locate->add_option("--queries", query_path, "Query CSV path")->required();
    locate->add_option("--out", out_path, "Fix CSV path")->required();
    locate->add_option("--k", locate_k, "Neighbors for positioning");
    locate->add_option("--fill-dbm", locate_fill, "Replacement for missing APs, dBm");

    auto* evaluate = app.add_subcommand("evaluate", "Compare methods on a seeded testbed");
    add_sim_flags(evaluate, sim_cfg);
    evaluate->add_option("--seed", seed, "RNG seed");
    evaluate->add_option("--unlabeled-count", unlabeled_count, "Unlabeled pool size");
    evaluate->add_option("--radii", radii_spec, "Error radii, metres");
    evaluate->add_option("--methods", methods_spec, "Subset of knn,lde,sde");
    evaluate->add_option("--subareas", subareas, "Sub-area count for per-area stats (0 = off)");
    evaluate->add_option("--out", out_path, "Report JSON path")->required();
    evaluate->add_option("--csv", csv_path, "CDF curve CSV path");
    train_flags.add(evaluate);

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep on a seeded testbed");
    add_sim_flags(sweep, sim_cfg);
    sweep->add_option("--seed", seed, "RNG seed");
    sweep->add_option("--unlabeled-count", unlabeled_count, "Unlabeled pool size");
    sweep->add_option("--axis", axis_name,
                      "intrinsic_dim|n_clusters|affinity_k|reg_sigma|update_ratio")
        ->required();
    sweep->add_option("--values", values_spec, "Comma list and lo..hi ranges")->required();
    sweep->add_option("--radii", radii_spec, "Error radii, metres");
    sweep->add_option("--out", out_path, "Report JSON path")->required();
    sweep->add_option("--csv", csv_path, "CDF curve CSV path");
    train_flags.add(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        sim_cfg.seed = seed;
        if (simulate->parsed())
            return cmd_simulate(sim_cfg, map_path, query_path, unlabeled_path, unlabeled_count);

        TrainParams params = train_flags.resolve();
        params.seed = seed;
        if (train->parsed())
            return cmd_train(map_path, unlabeled_path, out_path, params, diagnostics_path);
        if (locate->parsed())
            return cmd_locate(model_path, query_path, out_path, locate_k, locate_fill);
        if (evaluate->parsed())
            return cmd_evaluate(sim_cfg, params, unlabeled_count, parse_values(radii_spec),
                                split_names(methods_spec), subareas, out_path, csv_path);
        if (sweep->parsed())
            return cmd_sweep(sim_cfg, params, unlabeled_count, axis_name, values_spec,
                             parse_values(radii_spec), out_path, csv_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
