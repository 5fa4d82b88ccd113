#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rim/parallel.hpp"

namespace rim {

/// Relative slack allowed on node-pair Lipschitz estimates of transformed
/// graphs (interpolation plus quadrature error).
inline constexpr double kGridSlack = 1e-2;

/// Uniform tensor grid over [-R, R]^d in H+ with an odd number of nodes per
/// axis, so the origin is a node.
class GraphGrid {
 public:
  GraphGrid(int dim, int nodes_per_axis, double radius);

  int dim() const { return dim_; }
  int nodes_per_axis() const { return m_; }
  double radius() const { return radius_; }
  double spacing() const { return 2.0 * radius_ / (m_ - 1); }
  std::size_t node_count() const { return count_; }
  std::size_t origin() const { return origin_; }
  double axis_value(int i) const { return -radius_ + spacing() * i; }

  const Eigen::VectorXd& node(std::size_t i) const { return nodes_[i]; }
  bool operator==(const GraphGrid& other) const;

 private:
  int dim_;
  int m_;
  double radius_;
  std::size_t count_;
  std::size_t origin_;
  std::vector<Eigen::VectorXd> nodes_;
};

/// Provenance of a graph: the noise seed and fiber shift it belongs to.
struct OmegaTag {
  std::uint64_t seed = 0;
  double shift = 0.0;
};

/// Discretised Lipschitz map gamma: H+ -> H- with gamma(0) = 0.
///
/// Node values are interpolated multilinearly inside the ball |y| <= R and
/// extended positively homogeneously outside it:
/// gamma(y) = (|y| / R) gamma(R y / |y|).
class LipschitzGraph {
 public:
  LipschitzGraph(std::shared_ptr<const GraphGrid> grid, int value_dim, double kappa_bound);

  static LipschitzGraph zero(std::shared_ptr<const GraphGrid> grid, int value_dim,
                             double kappa_bound);
  static LipschitzGraph from_function(
      std::shared_ptr<const GraphGrid> grid, int value_dim, double kappa_bound,
      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f);

  const GraphGrid& grid() const { return *grid_; }
  const std::shared_ptr<const GraphGrid>& grid_ptr() const { return grid_; }
  int value_dim() const { return static_cast<int>(values_.rows()); }
  double kappa_bound() const { return kappa_bound_; }
  void set_kappa_bound(double k) { kappa_bound_ = k; }
  const OmegaTag& omega() const { return omega_; }
  void set_omega(OmegaTag tag) { omega_ = tag; }

  /// Node values, one column per node.
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd node_value(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }
  /// Stores a node value; the origin stays pinned at zero.
  void set_node_value(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& v);

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// Non-allocating evaluation; returns true when y lies outside the ball.
  bool evaluate_into(const Eigen::Ref<const Eigen::VectorXd>& y,
                     Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  void interpolate(const Eigen::Ref<const Eigen::VectorXd>& y,
                   Eigen::Ref<Eigen::VectorXd> out) const;

  std::shared_ptr<const GraphGrid> grid_;
  Eigen::MatrixXd values_;
  double kappa_bound_;
  OmegaTag omega_;
};

/// max over node pairs of |gamma(y1) - gamma(y2)| / |y1 - y2|.
double lip_norm(const LipschitzGraph& g, Execution exec = Execution::parallel);
/// max over nonzero nodes of |gamma(y)| / |y|.
double growth_norm(const LipschitzGraph& g);
/// growth_norm of g1 - g2; the graphs must share a grid.
double metric(const LipschitzGraph& g1, const LipschitzGraph& g2);

nlohmann::json graph_to_json(const LipschitzGraph& g);
LipschitzGraph graph_from_json(const nlohmann::json& j);

}  // namespace rim
