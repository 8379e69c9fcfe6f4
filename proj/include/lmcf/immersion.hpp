#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/ambient.hpp"

namespace lmcf {

/// Periodic grid on the flat parameter torus [0,1)^n, n ∈ {1, 2}.
class GridTopology {
 public:
  static constexpr int kMinResolution = 16;

  GridTopology() = default;
  /// `resolution` holds N_a per axis; throws InvalidImmersion if any N_a < 16.
  explicit GridTopology(std::vector<int> resolution);

  int dim() const { return dim_; }
  int resolution(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return 1.0 / n_[static_cast<std::size_t>(axis)]; }
  int node_count() const { return count_; }
  /// Π Δu_a, the parameter-space volume of one cell.
  double cell_volume() const;

  int index(int i0, int i1 = 0) const { return i0 + n_[0] * i1; }
  std::array<int, 2> multi_index(int node) const {
    return {node % n_[0], dim_ == 2 ? node / n_[0] : 0};
  }
  /// Parameter coordinate u_a of a node.
  double param(int node, int axis) const {
    return static_cast<double>(multi_index(node)[static_cast<std::size_t>(axis)]) * spacing(axis);
  }

  /// Node reached from `node` by the integer shift (d0, d1), with the number of
  /// times each periodic axis was wrapped (for deck translations).
  struct Neighbor {
    int node;
    std::array<int, 2> wraps;
  };
  Neighbor shift(int node, int d0, int d1 = 0) const;

 private:
  int dim_ = 1;
  std::vector<int> n_{kMinResolution, 1};
  int count_ = kMinResolution;
};

/// A discretized compact Lagrangian immersion at one time.
///
/// `coords` has one column of chart coordinates per node. `wraps` holds, per
/// parameter axis, the deck translation P_a with F(u + e_a) = F(u) + P_a.
class Immersion {
 public:
  Immersion(std::shared_ptr<const AmbientSpace> space, GridTopology topology,
            Eigen::MatrixXd coords, std::vector<AmbVec> wraps = {}, double time = 0.0);

  const AmbientSpace& space() const { return *space_; }
  std::shared_ptr<const AmbientSpace> space_ptr() const { return space_; }
  const GridTopology& topology() const { return topology_; }
  const Eigen::MatrixXd& coords() const { return coords_; }
  const std::vector<AmbVec>& wraps() const { return wraps_; }
  double time() const { return time_; }
  int dim() const { return topology_.dim(); }
  int node_count() const { return topology_.node_count(); }

  AmbVec point(int node) const { return coords_.col(node); }
  /// Chart position of the node shifted by (d0, d1), unwrapped to be
  /// continuous with `node`.
  AmbVec shifted_point(int node, int d0, int d1 = 0) const;

  Immersion with_coords(Eigen::MatrixXd coords, double time) const;
  Immersion with_time(double time) const;

 private:
  std::shared_ptr<const AmbientSpace> space_;
  GridTopology topology_;
  Eigen::MatrixXd coords_;
  std::vector<AmbVec> wraps_;
  double time_ = 0.0;
};

}  // namespace lmcf
