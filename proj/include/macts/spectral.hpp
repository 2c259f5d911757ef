#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "macts/topology.hpp"

namespace macts {

inline Eigen::MatrixXd adjacency_matrix(const Topology& t) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t.n, t.n);
    for (const auto& e : t.edges) {
        a(e.u, e.v) += e.weight;
        a(e.v, e.u) += e.weight;
    }
    return a;
}

/// Graph Laplacian L = D - A. Row sums are zero; positive semidefinite for
/// symmetric weights.
inline Eigen::MatrixXd laplacian(const Topology& t) {
    Eigen::MatrixXd l = -adjacency_matrix(t);
    // Diagonal set from the off-diagonal row sum so each row sums to exactly 0.
    for (int i = 0; i < t.n; ++i) {
        double off = 0.0;
        for (int j = 0; j < t.n; ++j)
            if (j != i) off += l(i, j);
        l(i, i) = -off;
    }
    return l;
}

/// Ascending eigenvalues of a symmetric matrix. Throws if the solver fails.
inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigenvalue solver did not converge");
    }
    return solver.eigenvalues();
}

/// Second-smallest Laplacian eigenvalue. No connectivity requirement: a
/// disconnected graph simply yields 0.
inline double lambda2_of_laplacian(const Eigen::MatrixXd& lap) {
    if (lap.rows() < 2) throw std::invalid_argument("lambda2 needs at least two nodes");
    return symmetric_eigenvalues(lap)(1);
}

/// Algebraic connectivity (Fiedler value) of a connected topology; positive
/// exactly when the graph is connected.
inline double algebraic_connectivity(const Topology& t) {
    if (!is_connected(t)) throw std::invalid_argument("algebraic connectivity of a disconnected graph");
    return lambda2_of_laplacian(laplacian(t));
}

inline Topology topology_from_adjacency(const Eigen::MatrixXd& a) {
    Topology t;
    t.n = static_cast<int>(a.rows());
    for (int i = 0; i < t.n; ++i) {
        for (int j = i + 1; j < t.n; ++j) {
            if (a(i, j) > 0.0) t.add_edge(i, j, a(i, j));
        }
    }
    return t;
}

/// The per-level hop graphs and their union.
///
/// Level h carries the h-th power of the base adjacency matrix with the
/// diagonal zeroed: entry (i,s) counts the weight of all h-hop routes from i
/// to s, and routes returning to their start contribute nothing and are
/// dropped. The union accumulates the level weights for h = 1..max_hops;
/// level 1 is the input graph itself.
struct HopExpansion {
    std::vector<Topology> levels;
    Topology unioned;
};

inline HopExpansion h_hop_augment(const Topology& t, int max_hops) {
    if (max_hops < 1) throw std::invalid_argument("hop count must be >= 1");
    if (!is_connected(t)) throw std::invalid_argument("hop augmentation of a disconnected graph");
    const Eigen::MatrixXd base = adjacency_matrix(t);
    HopExpansion out;
    Eigen::MatrixXd power = base;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(t.n, t.n);
    for (int h = 1; h <= max_hops; ++h) {
        if (h > 1) power = (power * base).eval();
        Eigen::MatrixXd level = power;
        level.diagonal().setZero();
        out.levels.push_back(topology_from_adjacency(level));
        sum += level;
    }
    out.unioned = topology_from_adjacency(sum);
    return out;
}

/// Connectivity summary of an H-hop expansion: per-level Fiedler values, the
/// union's Fiedler value, the level-sum lower bound and the equal-weight
/// upper bound sum(w_ij, i != j)/(n-1).
struct SpectralReport {
    int max_hops = 1;
    std::vector<double> lambda2_per_hop;
    double lambda2_union = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

inline SpectralReport spectral_report(const Topology& t, int max_hops) {
    constexpr double kTol = 1e-9;
    const HopExpansion hops = h_hop_augment(t, max_hops);
    SpectralReport report;
    report.max_hops = max_hops;
    for (const auto& level : hops.levels) {
        report.lambda2_per_hop.push_back(
            level.n < 2 ? 0.0 : lambda2_of_laplacian(laplacian(level)));
        report.lower_bound += report.lambda2_per_hop.back();
    }
    report.lambda2_union = lambda2_of_laplacian(laplacian(hops.unioned));

    double weight_sum = 0.0;
    bool uniform = true;
    double w0 = hops.unioned.edges.empty() ? 1.0 : hops.unioned.edges.front().weight;
    for (const auto& e : hops.unioned.edges) {
        weight_sum += 2.0 * e.weight; // both directions
        if (std::abs(e.weight - w0) > 1e-12) uniform = false;
    }
    report.upper_bound = weight_sum / static_cast<double>(t.n - 1);

    if (report.lambda2_union < report.lower_bound - kTol) {
        throw std::logic_error("hop-union connectivity fell below the level-sum bound");
    }
    if (uniform && report.lambda2_union > report.upper_bound + kTol) {
        throw std::logic_error("equal-weight connectivity exceeded its upper bound");
    }
    return report;
}

} // namespace macts
