#include <cmath>
#include <random>

#include <doctest.h>

#include "fploc/kfcm.hpp"
#include "test_util.hpp"

using namespace fploc;

namespace {

// independent scalar evaluation of the kernel formula
double kernel_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) sq += (a(i) - b(i)) * (a(i) - b(i));
    return std::exp(-lambda * sq);
}

// naive Gram-expansion of || phi(x_k) - sum_j w_j phi(x_j) ||^2
double kernel_distance_oracle(int k, int i, const Eigen::MatrixXd& u, double m,
                              const Eigen::MatrixXd& x, double lambda) {
    const Eigen::Index count = x.cols();
    std::vector<double> w(static_cast<std::size_t>(count));
    double denom = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) denom += std::pow(u(i, j), m);
    for (Eigen::Index j = 0; j < count; ++j)
        w[static_cast<std::size_t>(j)] = std::pow(u(i, j), m) / denom;

    double cross = 0.0, within = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) {
        cross += w[static_cast<std::size_t>(j)] * kernel_oracle(x.col(k), x.col(j), lambda);
        for (Eigen::Index l = 0; l < count; ++l)
            within += w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(l)] *
                      kernel_oracle(x.col(j), x.col(l), lambda);
    }
    return 1.0 - 2.0 * cross + within;
}

}  // namespace

TEST_CASE("gaussian kernel basics") {
    Eigen::VectorXd a(3), b(3);
    a << -40, -50, -60;
    b = a;
    CHECK(gaussian_kernel(a, b, 2.0) == 1.0);

    b(0) = a(0) + std::sqrt(std::log(2.0));  // ||a-b||^2 = ln 2
    CHECK(gaussian_kernel(a, b, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

    Eigen::VectorXd c(2);
    CHECK_THROWS_AS(gaussian_kernel(a, c, 1.0), ValidationError);
}

TEST_CASE("gaussian kernel matches scalar formula on random pairs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-90.0, -30.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd a(8), b(8);
        for (int i = 0; i < 8; ++i) {
            a(i) = dist(rng);
            b(i) = dist(rng);
        }
        const double lambda = 0.001 + 0.01 * trial;
        CHECK(gaussian_kernel(a, b, lambda) ==
              doctest::Approx(kernel_oracle(a, b, lambda)).epsilon(1e-12));
    }
}

TEST_CASE("kernel distance of a lone sample to its own cluster is zero") {
    Eigen::MatrixXd u(1, 1);
    u << 1.0;
    Eigen::MatrixXd gram(1, 1);
    gram << 1.0;
    CHECK(kernel_distance(0, 0, u, 2.0, gram) == 0.0);
}

TEST_CASE("kernel distance vanishes as the kernel degenerates to 1") {
    // lambda -> 0 makes K -> all-ones
    Eigen::MatrixXd u(1, 2);
    u << 0.5, 0.5;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(2, 2);
    CHECK(kernel_distance(0, 0, u, 2.0, gram) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kernel_distance(1, 0, u, 2.0, gram) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kernel distance matches the brute-force Gram oracle") {
    const Eigen::MatrixXd x = testutil::random_matrix(4, 6, 77);
    const double lambda = 0.003;
    const Eigen::MatrixXd u = testutil::random_membership(2, 6, 78);
    const Eigen::MatrixXd gram = gram_matrix(x, lambda);

    for (int k = 0; k < 6; ++k)
        for (int i = 0; i < 2; ++i) {
            const double got = kernel_distance(k, i, u, 2.0, gram);
            const double want = kernel_distance_oracle(k, i, u, 2.0, x, lambda);
            CHECK(std::abs(got - want) <= 1e-10);
        }

    SUBCASE("batched distances agree with the single-entry form") {
        const Eigen::MatrixXd d = kernel_distances(u, 2.0, gram);
        for (int k = 0; k < 6; ++k)
            for (int i = 0; i < 2; ++i)
                CHECK(d(i, k) == doctest::Approx(kernel_distance(k, i, u, 2.0, gram)));
    }
}

TEST_CASE("kernel distance is invariant under consistent index permutation") {
    const Eigen::MatrixXd x = testutil::random_matrix(3, 5, 101);
    const double lambda = 0.01;
    const Eigen::MatrixXd u = testutil::random_membership(2, 5, 102);
    const Eigen::MatrixXd gram = gram_matrix(x, lambda);

    // reverse the sample order
    std::vector<int> perm{4, 3, 2, 1, 0};
    Eigen::MatrixXd xp(3, 5), up(2, 5);
    for (int j = 0; j < 5; ++j) {
        xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
        up.col(j) = u.col(perm[static_cast<std::size_t>(j)]);
    }
    const Eigen::MatrixXd gramp = gram_matrix(xp, lambda);
    for (int k = 0; k < 5; ++k)
        for (int i = 0; i < 2; ++i)
            CHECK(kernel_distance(k, i, up, 2.0, gramp) ==
                  doctest::Approx(
                      kernel_distance(perm[static_cast<std::size_t>(k)], i, u, 2.0, gram))
                      .epsilon(1e-12));
}

TEST_CASE("membership update") {
    SUBCASE("single cluster gives unit membership") {
        Eigen::MatrixXd d(1, 3);
        d << 0.5, 2.0, 7.0;
        const Eigen::MatrixXd u = update_membership(d, 2.0);
        for (int k = 0; k < 3; ++k) CHECK(u(0, k) == 1.0);
    }
    SUBCASE("hand-evaluated two-cluster case") {
        Eigen::MatrixXd d(2, 1);
        d << 1.0, 2.0;
        const Eigen::MatrixXd u = update_membership(d, 2.0);
        CHECK(u(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(u(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("zero distance forces a crisp assignment") {
        Eigen::MatrixXd d(2, 1);
        d << 1.0, 0.0;
        const Eigen::MatrixXd u = update_membership(d, 2.0);
        CHECK(u(0, 0) == 0.0);
        CHECK(u(1, 0) == 1.0);
    }
    SUBCASE("columns always sum to one") {
        const Eigen::MatrixXd d =
            testutil::random_matrix(4, 30, 55, 0.01, 9.0);  // positive distances
        const Eigen::MatrixXd u = update_membership(d, 1.7);
        for (int k = 0; k < 30; ++k) CHECK(u.col(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("center update") {
    const Eigen::MatrixXd x = testutil::random_matrix(3, 6, 21);

    SUBCASE("crisp memberships reduce to class means") {
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, 6);
        for (int k = 0; k < 6; ++k) u(k < 3 ? 0 : 1, k) = 1.0;
        const Eigen::MatrixXd centers = update_centers(x, u, 2.0);
        CHECK((centers.col(0) - x.leftCols(3).rowwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((centers.col(1) - x.rightCols(3).rowwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("uniform memberships collapse both centers to the global mean") {
        const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(2, 6, 0.5);
        const Eigen::MatrixXd centers = update_centers(x, u, 2.0);
        CHECK((centers.col(0) - centers.col(1)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((centers.col(0) - x.rowwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("random memberships match the direct formula") {
        const Eigen::MatrixXd u = testutil::random_membership(2, 6, 22);
        const Eigen::MatrixXd centers = update_centers(x, u, 2.5);
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd num = Eigen::VectorXd::Zero(3);
            double den = 0.0;
            for (int k = 0; k < 6; ++k) {
                num += std::pow(u(i, k), 2.5) * x.col(k);
                den += std::pow(u(i, k), 2.5);
            }
            CHECK((centers.col(i) - num / den).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("zero membership mass is a degenerate cluster") {
        const Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, 6);
        CHECK_THROWS_AS(update_centers(x, u, 2.0), SolverError);
    }
}

TEST_CASE("hard labels") {
    Eigen::MatrixXd u(2, 3);
    u << 0.9, 0.5, 0.1,  //
        0.1, 0.5, 0.9;
    const auto labels = hard_labels(u);
    CHECK(labels == std::vector<int>{0, 0, 1});  // tie resolves to the lower index

    SUBCASE("crisp memberships round-trip") {
        std::vector<int> want{1, 0, 2, 2, 1, 0};
        Eigen::MatrixXd crisp = Eigen::MatrixXd::Zero(3, 6);
        for (int k = 0; k < 6; ++k) crisp(want[static_cast<std::size_t>(k)], k) = 1.0;
        CHECK(hard_labels(crisp) == want);
    }
    SUBCASE("invariant under argmax-preserving monotone transforms") {
        const Eigen::MatrixXd base = testutil::random_membership(3, 10, 13);
        const auto before = hard_labels(base);
        Eigen::MatrixXd warped = base;
        for (int k = 0; k < 10; ++k)
            for (int i = 0; i < 3; ++i) warped(i, k) = std::exp(3.0 * base(i, k));
        CHECK(hard_labels(warped) == before);
    }
}

TEST_CASE("run_kfcm separates two distant blobs") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> jitter(0.0, 0.5);
    Eigen::MatrixXd x(4, 40);
    for (int k = 0; k < 40; ++k) {
        const double base = k < 20 ? -80.0 : -30.0;  // gap of 50, spread ~0.5
        for (int i = 0; i < 4; ++i) x(i, k) = base + jitter(rng);
    }

    TrainParams params;
    params.seed = 9;
    const ClusterModel model = run_kfcm(x, 2, params);
    const auto labels = hard_labels(model.membership);
    for (int k = 1; k < 20; ++k) CHECK(labels[static_cast<std::size_t>(k)] == labels[0]);
    for (int k = 21; k < 40; ++k) CHECK(labels[static_cast<std::size_t>(k)] == labels[20]);
    CHECK(labels[0] != labels[20]);
    CHECK(model.converged);
}

TEST_CASE("run_kfcm edge cases and invariants") {
    const Eigen::MatrixXd x = testutil::random_matrix(5, 30, 31);
    TrainParams params;
    params.seed = 4;

    SUBCASE("single cluster memberships are all one") {
        const ClusterModel model = run_kfcm(x, 1, params);
        CHECK((model.membership.array() == 1.0).all());
    }
    SUBCASE("too many clusters is a config error") {
        CHECK_THROWS_AS(run_kfcm(x, 31, params), ConfigError);
    }
    SUBCASE("same seed reproduces the model exactly") {
        const ClusterModel a = run_kfcm(x, 3, params);
        const ClusterModel b = run_kfcm(x, 3, params);
        CHECK(a.centers == b.centers);
        CHECK(a.membership == b.membership);
        CHECK(a.objective_trace == b.objective_trace);
    }
    SUBCASE("objective is non-increasing and columns stay stochastic") {
        const ClusterModel model = run_kfcm(x, 3, params);
        REQUIRE(!model.objective_trace.empty());
        for (std::size_t t = 1; t < model.objective_trace.size(); ++t)
            CHECK(model.objective_trace[t] <=
                  model.objective_trace[t - 1] + 1e-9 * std::abs(model.objective_trace[t - 1]));
        for (Eigen::Index k = 0; k < model.membership.cols(); ++k)
            CHECK(model.membership.col(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
}
