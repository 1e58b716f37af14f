#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adprog/dynamics.hpp"
#include "adprog/graph.hpp"
#include "adprog/rng.hpp"

using namespace adprog;

namespace {

Mat adjacency_from(std::initializer_list<std::initializer_list<double>> rows) {
    Mat m(rows.size(), rows.begin()->size());
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("laplacian of a unit edge") {
    const BrainGraph g = make_two_region_graph();
    CHECK(g.laplacian(0, 0) == 1.0);
    CHECK(g.laplacian(0, 1) == -1.0);
    CHECK(g.laplacian(1, 0) == -1.0);
    CHECK(g.laplacian(1, 1) == 1.0);
}

TEST_CASE("laplacian of an isolated node") {
    const BrainGraph g = build_graph({"only"}, Mat::Zero(1, 1));
    CHECK(g.laplacian(0, 0) == 0.0);
}

TEST_CASE("laplacian of a three-node path") {
    const BrainGraph g =
        build_graph({"a", "b", "c"}, adjacency_from({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}));
    Mat expected = adjacency_from({{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}});
    CHECK(g.laplacian.isApprox(expected, 0.0));
    // rows sum to zero and the matrix is positive semidefinite
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(g.laplacian.row(i).sum() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> eig(g.laplacian);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("graph validation rejects bad adjacency") {
    CHECK_THROWS_AS(build_graph({"a", "b"}, adjacency_from({{0, 1}, {2, 0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_graph({"a", "b"}, adjacency_from({{0, -1}, {-1, 0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_graph({"a", "b"}, adjacency_from({{1, 0}, {0, 0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_graph({"a"}, adjacency_from({{0, 1}, {1, 0}})), std::invalid_argument);
}

TEST_CASE("amyloid diffusion step") {
    const BrainGraph g = make_two_region_graph();
    const Vec d = (Vec(2) << 1.0, 0.0).finished();
    const Vec next = step_amyloid(d, g, 0.1, 1.0);
    CHECK(next[0] == Catch::Approx(0.9).margin(0));
    CHECK(next[1] == Catch::Approx(0.1).margin(0));

    CHECK(step_amyloid(d, g, 0.0, 1.0) == d);

    const Vec uniform = (Vec(2) << 0.5, 0.5).finished();
    CHECK(step_amyloid(uniform, g, 0.3, 1.0) == uniform);
}

TEST_CASE("amyloid mass is conserved under diffusion") {
    Rng rng = make_rng(7, {1});
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    std::uniform_real_distribution<double> load(0.0, 1.0);
    std::uniform_int_distribution<int> nodes(2, 8);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = nodes(rng);
        Mat adj = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) adj(i, j) = adj(j, i) = weight(rng);
        const BrainGraph g = build_graph(std::vector<std::string>(n, "r"), adj);
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = load(rng);
        const double beta = 0.2 * load(rng);
        const Vec next = step_amyloid(d, g, beta, 1.0);
        CHECK(std::abs(next.sum() - d.sum()) <= 1e-12);
    }
}

TEST_CASE("amyloid accumulation") {
    const Vec phi = (Vec(2) << 0.0, 0.0).finished();
    const Vec d = (Vec(2) << 1.0, 0.0).finished();
    CHECK(accumulate_amyloid(phi, d, 1.0) == d);
    const Vec phi2 = (Vec(2) << 1.3, 1.2).finished();
    const Vec d2 = (Vec(2) << 0.02, 0.01).finished();
    const Vec next = accumulate_amyloid(phi2, d2, 1.0);
    CHECK(next[0] == Catch::Approx(1.32).margin(1e-15));
    CHECK(next[1] == Catch::Approx(1.21).margin(1e-15));
    CHECK(accumulate_amyloid(phi2, Vec::Zero(2), 1.0) == phi2);
}

TEST_CASE("activity from information and size") {
    const Vec y1 = compute_activity((Vec(1) << 4.0).finished(), (Vec(1) << 2.0).finished(), 1.0, 1);
    CHECK(y1[0] == 2.0);
    const Vec y2 = compute_activity((Vec(1) << 4.0).finished(), (Vec(1) << 2.0).finished(), 1.0, 2);
    CHECK(y2[0] == 1.0);
    CHECK(compute_activity(Vec::Zero(2), (Vec(2) << 1.0, 2.0).finished(), 1.0, 1).isZero());
    CHECK_THROWS_AS(
        compute_activity((Vec(1) << 1.0).finished(), (Vec(1) << 0.0).finished(), 1.0, 1),
        std::domain_error);
}

TEST_CASE("cognition and cost sums") {
    CHECK(compute_cognition((Vec(2) << 7.0, 3.0).finished()) == 10.0);
    CHECK(compute_cognition(Vec::Zero(2)) == 0.0);
    CHECK(compute_cost((Vec(2) << 2.0, 0.5).finished()) == 2.5);
}

TEST_CASE("atrophy step") {
    const Vec x = (Vec(1) << 3.5).finished();
    const Vec d = (Vec(1) << 0.1).finished();
    const Vec y = (Vec(1) << 1.0).finished();
    const Vec next = step_atrophy(x, d, y, 0.5, 0.1, 1.0);
    CHECK(next[0] == Catch::Approx(3.35).margin(1e-15));
    CHECK(step_atrophy(x, d, y, 0.0, 0.0, 1.0) == x);
    CHECK(step_atrophy(x, Vec::Zero(1), Vec::Zero(1), 0.5, 0.1, 1.0) == x);
}

TEST_CASE("reward forms") {
    CHECK(reward_plain(10.0, 0.0, 10.0, 1.0) == 0.0);
    CHECK(reward_training(10.0, 0.0, 10.0, 1.0, -2000, 2000) == 0.0);
    CHECK(reward_plain(8.0, 3.0, 10.0, 2.0) == -7.0);
    const double expected = -0.4 * std::pow(100.0, 0.4);
    CHECK(reward_training(10.4, 0.0, 10.0, 1.0, -2000, 2000) ==
          Catch::Approx(expected).margin(1e-12));
    // heavy overshoot clamps at the floor
    CHECK(reward_training(14.0, 0.0, 10.0, 1.0, -2000, 2000) == -2000.0);
}

TEST_CASE("penalized reward agrees with the plain form below the demand") {
    Rng rng = make_rng(3, {2});
    std::uniform_real_distribution<double> c(0.0, 10.0);
    std::uniform_real_distribution<double> m(0.0, 30.0);
    std::uniform_real_distribution<double> lam(0.1, 8.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double C = c(rng), M = m(rng), L = lam(rng);
        const double plain = reward_plain(C, M, 10.0, L);
        if (plain < -2000 || plain > 2000) continue;
        CHECK(reward_training(C, M, 10.0, L, -2000, 2000) == Catch::Approx(plain).margin(1e-12));
    }
}

TEST_CASE("baseline amyloid rate for an isolated node") {
    const BrainGraph g = build_graph({"only"}, Mat::Zero(1, 1));
    const Vec d1 = init_amyloid_rate((Vec(1) << 2.0).finished(), g, 0.1, 70.0);
    CHECK(d1[0] == Catch::Approx(0.1).margin(1e-14));
}

TEST_CASE("baseline amyloid rate is linear in accumulated amyloid") {
    const BrainGraph g = make_two_region_graph();
    const Vec phi = (Vec(2) << 1.3, 1.2).finished();
    const Vec d1 = init_amyloid_rate(phi, g, 0.05, 75.0);
    const Vec d2 = init_amyloid_rate(2.0 * phi, g, 0.05, 75.0);
    CHECK((d2 - 2.0 * d1).norm() < 1e-14);
    const Vec tiny = init_amyloid_rate(1e-12 * phi, g, 0.05, 75.0);
    CHECK(tiny.norm() < 1e-11);
}

TEST_CASE("baseline amyloid rate matches an explicit eigendecomposition") {
    // two-node unit graph: eigenpairs (0, [1,1]/sqrt2) and (2, [1,-1]/sqrt2)
    const BrainGraph g = make_two_region_graph();
    const double beta = 0.05, t_po = 25.0;
    const Vec phi = (Vec(2) << 1.3, 1.2).finished();
    const double mean = (phi[0] + phi[1]) / 2.0;
    const double diff = (phi[0] - phi[1]) / 2.0;
    const double k0 = 1.0 / (beta * t_po);
    const double e = std::exp(-2.0 * beta * t_po);
    const double k2 = 2.0 * e / (1.0 - e);
    Vec expected(2);
    expected[0] = beta * (k0 * mean + k2 * diff);
    expected[1] = beta * (k0 * mean - k2 * diff);
    const Vec got = init_amyloid_rate(phi, g, beta, 50.0 + t_po);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("baseline amyloid rate floors the onset time for young subjects") {
    const BrainGraph g = make_two_region_graph();
    const Vec phi = (Vec(2) << 1.0, 0.9).finished();
    AmyloidInitOptions opts;
    opts.warn_on_floor = false;
    const Vec young = init_amyloid_rate(phi, g, 0.05, 48.0, opts);
    const Vec floored = init_amyloid_rate(phi, g, 0.05, 51.0, opts);
    CHECK((young - floored).norm() == 0.0);
    CHECK_THROWS_AS(init_amyloid_rate(phi, g, 0.0, 70.0), std::invalid_argument);
    CHECK_THROWS_AS(init_amyloid_rate((Vec(2) << -1.0, 1.0).finished(), g, 0.05, 70.0),
                    std::invalid_argument);
}
