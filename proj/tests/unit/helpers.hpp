#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gridad/measurement.hpp"
#include "gridad/network.hpp"

namespace gridad::testing {

// Two buses joined by a lossless line z = j x, slack at bus 1.
inline NetworkTopology two_bus(double x = 0.1) {
    std::vector<Bus> buses{{1, BusKind::Slack, 0, 0, {}, 0, 1.0}, {2, BusKind::Load, 0.5, 0.1, {}, 0, 1.0}};
    std::vector<Branch> branches{{1, 2, {0.0, x}, 0.0, BranchStatus::Connected}};
    return NetworkTopology(std::move(buses), std::move(branches));
}

// Lossless, shunt-free three-bus ring.
inline NetworkTopology three_bus_ring() {
    std::vector<Bus> buses{{1, BusKind::Slack, 0, 0, {}, 0, 1.0},
                           {2, BusKind::Load, 0.3, 0.1, {}, 0, 1.0},
                           {3, BusKind::Load, 0.2, 0.05, {}, 0, 1.0}};
    std::vector<Branch> branches{{1, 2, {0.0, 0.1}, 0.0, BranchStatus::Connected},
                                 {2, 3, {0.0, 0.2}, 0.0, BranchStatus::Connected},
                                 {1, 3, {0.0, 0.15}, 0.0, BranchStatus::Connected}};
    return NetworkTopology(std::move(buses), std::move(branches));
}

// Near-flat random operating state, packed.
inline Eigen::VectorXd random_state(const StateLayout& layout, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(-0.3, 0.3), mag(0.94, 1.06);
    Eigen::VectorXd x(layout.dim());
    for (int i = 0; i < layout.dim(); ++i) x(i) = layout.is_angle(i) ? ang(rng) : mag(rng);
    return x;
}

// Two well separated Gaussian classes in `dims` dimensions.
inline void blobs(int per_class, int dims, double separation, std::uint64_t seed, Eigen::MatrixXd& X,
                  std::vector<int>& y) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    X.resize(2 * per_class, dims);
    y.clear();
    for (int i = 0; i < 2 * per_class; ++i) {
        const int c = i % 2;
        for (int d = 0; d < dims; ++d) X(i, d) = n01(rng) + (d == 0 ? c * separation : 0.0);
        y.push_back(c);
    }
}

// XOR layout: four clusters at the corners, opposite corners share a label.
inline void xor_data(int samples, std::uint64_t seed, Eigen::MatrixXd& X, std::vector<int>& y) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 0.1);
    X.resize(samples, 2);
    y.clear();
    for (int i = 0; i < samples; ++i) {
        const int a = i % 2, b = (i / 2) % 2;
        X(i, 0) = a + jitter(rng);
        X(i, 1) = b + jitter(rng);
        y.push_back(a ^ b);
    }
}

}  // namespace gridad::testing
