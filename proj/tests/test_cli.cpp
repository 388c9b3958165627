#include <algorithm>
#include <cstdlib>
#include <string>

#include <doctest.h>

#include "fploc/io.hpp"
#include "test_util.hpp"

using testutil::TempDir;

namespace {

std::string cli_path() {
    const char* env = std::getenv("FPLOC_CLI");
    REQUIRE_MESSAGE(env != nullptr, "FPLOC_CLI must point at the CLI binary");
    return env;
}

int run(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd = cli_path() + " " + args + " 2>" + stderr_file;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// small testbed flags shared by the command tests
const char* kSimFlags = "--length 8 --width 1 --n-aps 6 --samples-per-rp 2 --n-queries 20";

}  // namespace

TEST_CASE("cli simulate") {
    TempDir tmp;
    const auto map = tmp.file("map.csv");
    const auto queries = tmp.file("queries.csv");

    SUBCASE("writes both files deterministically") {
        const std::string args = std::string("simulate ") + kSimFlags + " --seed 42 --out " + map +
                                 " --queries " + queries;
        CHECK(run(args) == 0);
        const auto map_bytes = testutil::read_file(map);
        const auto query_bytes = testutil::read_file(queries);
        CHECK(!map_bytes.empty());
        CHECK(!query_bytes.empty());

        CHECK(run(args) == 0);
        CHECK(testutil::read_file(map) == map_bytes);
        CHECK(testutil::read_file(queries) == query_bytes);
    }
    SUBCASE("a zero grid interval exits 2 and names the flag") {
        const auto log = tmp.file("err.txt");
        const int code = run("simulate --grid-interval 0 --out " + map, log);
        CHECK(code == 2);
        CHECK(testutil::read_file(log).find("--grid-interval") != std::string::npos);
    }
    SUBCASE("unknown flags are rejected") {
        CHECK(run("simulate --does-not-exist 1 --out " + map) == 2);
    }
}

TEST_CASE("cli train") {
    TempDir tmp;
    const auto map = tmp.file("map.csv");
    const auto pool = tmp.file("pool.csv");
    const auto model = tmp.file("model.json");
    REQUIRE(run(std::string("simulate ") + kSimFlags + " --seed 7 --out " + map + " --unlabeled " +
                pool + " --unlabeled-count 60") == 0);

    SUBCASE("produces a model that passes load validation") {
        const auto log = tmp.file("err.txt");
        CHECK(run("train --map " + map + " --unlabeled " + pool +
                      " --dim auto --clusters 2 --affinity-k 6 --reg-sigma 1e-8 --ratio 0.2"
                      " --seed 7 --out " +
                      model,
                  log) == 0);
        CHECK_NOTHROW(fploc::load_model(model));
        CHECK(testutil::read_file(log).find("d=") != std::string::npos);
    }
    SUBCASE("ratio 1 admits nothing") {
        const auto log = tmp.file("err.txt");
        CHECK(run("train --map " + map + " --unlabeled " + pool + " --ratio 1 --seed 7 --out " +
                      model,
                  log) == 0);
        CHECK(testutil::read_file(log).find("admitted=0") != std::string::npos);
    }
    SUBCASE("missing map file exits 4") {
        CHECK(run("train --map " + tmp.file("none.csv") + " --out " + model) == 4);
    }
    SUBCASE("byte-identical models across reruns") {
        const std::string args =
            "train --map " + map + " --unlabeled " + pool + " --seed 7 --out ";
        CHECK(run(args + model) == 0);
        const auto first = testutil::read_file(model);
        CHECK(run(args + model) == 0);
        CHECK(testutil::read_file(model) == first);
    }
    SUBCASE("training diagnostics are emitted on request") {
        const auto diag = tmp.file("diag.json");
        CHECK(run("train --map " + map + " --unlabeled " + pool + " --seed 7 --out " + model +
                  " --emit-diagnostics " + diag) == 0);
        const auto text = testutil::read_file(diag);
        CHECK(text.find("objective_trace") != std::string::npos);
        CHECK(text.find("label_histogram") != std::string::npos);
        CHECK(text.find("eigenvalues") != std::string::npos);
    }
}

TEST_CASE("cli locate") {
    TempDir tmp;
    const auto map = tmp.file("map.csv");
    const auto queries = tmp.file("queries.csv");
    const auto model = tmp.file("model.json");
    const auto fixes = tmp.file("fixes.csv");
    REQUIRE(run(std::string("simulate ") + kSimFlags + " --seed 9 --out " + map + " --queries " +
                queries) == 0);
    REQUIRE(run("train --map " + map + " --seed 9 --ratio 1 --out " + model) == 0);

    SUBCASE("one fix per query row") {
        CHECK(run("locate --model " + model + " --queries " + queries + " --out " + fixes) == 0);
        const auto text = testutil::read_file(fixes);
        const auto rows = std::count(text.begin(), text.end(), '\n');
        CHECK(rows == 21);  // header + 20 queries
        CHECK(text.rfind("x,y,neighbors\n", 0) == 0);
    }
    SUBCASE("missing-AP cells are handled") {
        // blank out one AP cell in the first query row
        auto text = testutil::read_file(queries);
        const auto first_row = text.find('\n') + 1;
        auto comma = text.find(',', first_row);
        comma = text.find(',', comma + 1);  // after x and y
        const auto next = text.find(',', comma + 1);
        text.erase(comma + 1, next - comma - 1);
        testutil::write_file(queries, text);
        CHECK(run("locate --model " + model + " --queries " + queries + " --out " + fixes) == 0);
    }
    SUBCASE("an AP roster mismatch exits 2") {
        const auto other = tmp.file("other.csv");
        REQUIRE(run("simulate --length 8 --width 1 --n-aps 4 --n-queries 5 --seed 9 --out " +
                    tmp.file("m2.csv") + " --queries " + other) == 0);
        CHECK(run("locate --model " + model + " --queries " + other + " --out " + fixes) == 2);
    }
}

TEST_CASE("cli evaluate and sweep") {
    TempDir tmp;
    const auto report = tmp.file("report.json");
    const auto csv = tmp.file("curves.csv");
    const std::string common = std::string(" ") + kSimFlags + " --unlabeled-count 60 --seed 3";

    SUBCASE("evaluate emits all three methods") {
        CHECK(run("evaluate --methods knn,lde,sde --radii 0.5,1 --out " + report + " --csv " +
                  csv + common) == 0);
        const auto text = testutil::read_file(report);
        CHECK(text.find("\"knn\"") != std::string::npos);
        CHECK(text.find("\"lde\"") != std::string::npos);
        CHECK(text.find("\"sde\"") != std::string::npos);
        const auto curves = testutil::read_file(csv);
        CHECK(std::count(curves.begin(), curves.end(), '\n') == 1 + 3 * 2);
    }
    SUBCASE("evaluate reruns are byte-identical") {
        const std::string args = "evaluate --radii 0.5,1 --out " + report + common;
        CHECK(run(args) == 0);
        const auto first = testutil::read_file(report);
        CHECK(run(args) == 0);
        CHECK(testutil::read_file(report) == first);
    }
    SUBCASE("sweep walks the requested values") {
        CHECK(run("sweep --axis update_ratio --values 1,0.5,0.2 --radii 0.5,1 --out " + report +
                  common) == 0);
        const auto text = testutil::read_file(report);
        CHECK(text.find("\"axis\": \"update_ratio\"") != std::string::npos);
        CHECK(std::count(text.begin(), text.end(), '\n') > 10);
    }
    SUBCASE("sweep accepts range syntax") {
        CHECK(run("sweep --axis intrinsic_dim --values 1..4 --radii 0.5 --out " + report +
                  common) == 0);
        const auto text = testutil::read_file(report);
        CHECK(text.find("\"best\"") != std::string::npos);
    }
    SUBCASE("bad axis exits 2") {
        CHECK(run("sweep --axis bogus --values 1 --out " + report + common) == 2);
    }
}
