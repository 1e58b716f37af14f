#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adprog {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Region-labelled undirected graph with its combinatorial Laplacian.
/// The Laplacian is the substrate for amyloid diffusion; by construction
/// every row sums to zero and the matrix is positive semidefinite.
struct BrainGraph {
    std::vector<std::string> region_names;
    Mat adjacency;
    Mat laplacian;

    Eigen::Index size() const { return adjacency.rows(); }
};

/// Builds the graph from a nonnegative symmetric adjacency with zero diagonal.
/// laplacian = diag(row sums) - adjacency.
inline BrainGraph build_graph(std::vector<std::string> region_names, const Mat& adjacency) {
    const auto n = adjacency.rows();
    if (adjacency.cols() != n)
        throw std::invalid_argument("build_graph: adjacency must be square");
    if (static_cast<Eigen::Index>(region_names.size()) != n)
        throw std::invalid_argument("build_graph: region_names size must match adjacency");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw std::invalid_argument("build_graph: adjacency diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (adjacency(i, j) < 0.0)
                throw std::invalid_argument("build_graph: adjacency must be nonnegative");
            if (adjacency(i, j) != adjacency(j, i))
                throw std::invalid_argument("build_graph: adjacency must be symmetric");
        }
    }
    BrainGraph g;
    g.region_names = std::move(region_names);
    g.adjacency = adjacency;
    g.laplacian = Mat(adjacency.rows(), adjacency.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double degree = adjacency.row(i).sum();
        for (Eigen::Index j = 0; j < n; ++j)
            g.laplacian(i, j) = (i == j) ? degree - adjacency(i, j) : -adjacency(i, j);
    }
    return g;
}

/// The default two-region graph: a single unit-weight edge.
inline BrainGraph make_two_region_graph(double edge_weight = 1.0,
                                        std::vector<std::string> names = {"region_1", "region_2"}) {
    Mat adj(2, 2);
    adj << 0.0, edge_weight, edge_weight, 0.0;
    return build_graph(std::move(names), adj);
}

}  // namespace adprog
