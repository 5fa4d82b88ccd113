#include "rim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rim/errors.hpp"

namespace rim {

GraphGrid::GraphGrid(int dim, int nodes_per_axis, double radius)
    : dim_(dim), m_(nodes_per_axis), radius_(radius) {
  if (dim < 1 || dim > 4) throw ValidationError("graph grid dimension must be in [1, 4]");
  if (nodes_per_axis < 3 || nodes_per_axis % 2 == 0) {
    throw ValidationError("nodes per axis must be odd and >= 3 so the origin is a node");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("grid radius must be > 0");

  count_ = 1;
  for (int d = 0; d < dim_; ++d) count_ *= static_cast<std::size_t>(m_);
  nodes_.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    Eigen::VectorXd y(dim_);
    std::size_t rest = i;
    for (int d = 0; d < dim_; ++d) {
      y[d] = axis_value(static_cast<int>(rest % static_cast<std::size_t>(m_)));
      rest /= static_cast<std::size_t>(m_);
    }
    nodes_.push_back(std::move(y));
  }
  origin_ = 0;
  std::size_t stride = 1;
  for (int d = 0; d < dim_; ++d) {
    origin_ += stride * static_cast<std::size_t>((m_ - 1) / 2);
    stride *= static_cast<std::size_t>(m_);
  }
  nodes_[origin_].setZero();
}

bool GraphGrid::operator==(const GraphGrid& other) const {
  return dim_ == other.dim_ && m_ == other.m_ && radius_ == other.radius_;
}

// ---------------------------------------------------------------------------

LipschitzGraph::LipschitzGraph(std::shared_ptr<const GraphGrid> grid, int value_dim,
                               double kappa_bound)
    : grid_(std::move(grid)), kappa_bound_(kappa_bound) {
  if (!grid_) throw ValidationError("graph requires a grid");
  if (value_dim < 1) throw ValidationError("graph value dimension must be >= 1");
  values_ = Eigen::MatrixXd::Zero(value_dim, static_cast<Eigen::Index>(grid_->node_count()));
}

LipschitzGraph LipschitzGraph::zero(std::shared_ptr<const GraphGrid> grid, int value_dim,
                                    double kappa_bound) {
  return LipschitzGraph(std::move(grid), value_dim, kappa_bound);
}

LipschitzGraph LipschitzGraph::from_function(
    std::shared_ptr<const GraphGrid> grid, int value_dim, double kappa_bound,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f) {
  LipschitzGraph g(std::move(grid), value_dim, kappa_bound);
  for (std::size_t i = 0; i < g.grid().node_count(); ++i) {
    const Eigen::VectorXd v = f(g.grid().node(i));
    if (v.size() != value_dim) throw ValidationError("graph function returned the wrong size");
    g.set_node_value(i, v);
  }
  return g;
}

void LipschitzGraph::set_node_value(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (i == grid_->origin()) {
    values_.col(static_cast<Eigen::Index>(i)).setZero();
    return;
  }
  values_.col(static_cast<Eigen::Index>(i)) = v;
}

void LipschitzGraph::interpolate(const Eigen::Ref<const Eigen::VectorXd>& y,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  const int dim = grid_->dim();
  const int m = grid_->nodes_per_axis();
  const double h = grid_->spacing();
  const double r = grid_->radius();
  int base[4];
  double frac[4];
  for (int d = 0; d < dim; ++d) {
    const double p = (y[d] + r) / h;
    int i = static_cast<int>(std::floor(p));
    i = std::clamp(i, 0, m - 2);
    base[d] = i;
    frac[d] = std::clamp(p - i, 0.0, 1.0);
  }
  out.setZero();
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int d = 0; d < dim; ++d) {
      const int bit = (c >> d) & 1;
      weight *= bit ? frac[d] : 1.0 - frac[d];
      idx += stride * static_cast<std::size_t>(base[d] + bit);
      stride *= static_cast<std::size_t>(m);
    }
    if (weight != 0.0) out.noalias() += weight * values_.col(static_cast<Eigen::Index>(idx));
  }
}

bool LipschitzGraph::evaluate_into(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   Eigen::Ref<Eigen::VectorXd> out) const {
  if (y.size() != grid_->dim()) throw ValidationError("graph evaluated at a point of wrong size");
  const double norm = y.norm();
  const double r = grid_->radius();
  if (norm <= r) {
    interpolate(y, out);
    return false;
  }
  const Eigen::VectorXd edge = (r / norm) * y;
  interpolate(edge, out);
  out *= norm / r;
  return true;
}

Eigen::VectorXd LipschitzGraph::evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  Eigen::VectorXd out(value_dim());
  evaluate_into(y, out);
  return out;
}

// ---------------------------------------------------------------------------

double lip_norm(const LipschitzGraph& g, Execution exec) {
  const std::size_t n = g.grid().node_count();
  const auto& vals = g.values();
  std::vector<double> row_max(n, 0.0);
  for_each_index(n, exec, [&](std::size_t i) {
    const Eigen::VectorXd& yi = g.grid().node(i);
    double best = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dy = (g.grid().node(j) - yi).norm();
      const double dv =
          (vals.col(static_cast<Eigen::Index>(j)) - vals.col(static_cast<Eigen::Index>(i))).norm();
      best = std::max(best, dv / dy);
    }
    row_max[i] = best;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

double growth_norm(const LipschitzGraph& g) {
  double best = 0.0;
  for (std::size_t i = 0; i < g.grid().node_count(); ++i) {
    if (i == g.grid().origin()) continue;
    best = std::max(best, g.values().col(static_cast<Eigen::Index>(i)).norm() /
                              g.grid().node(i).norm());
  }
  return best;
}

double metric(const LipschitzGraph& g1, const LipschitzGraph& g2) {
  if (!(g1.grid() == g2.grid()) || g1.value_dim() != g2.value_dim()) {
    throw ValidationError("metric requires graphs on the same grid");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < g1.grid().node_count(); ++i) {
    if (i == g1.grid().origin()) continue;
    const auto col = static_cast<Eigen::Index>(i);
    best = std::max(best, (g1.values().col(col) - g2.values().col(col)).norm() /
                              g1.grid().node(i).norm());
  }
  return best;
}

// ---------------------------------------------------------------------------

nlohmann::json graph_to_json(const LipschitzGraph& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (int i = 0; i < g.grid().nodes_per_axis(); ++i) axes.push_back(g.grid().axis_value(i));
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < g.grid().node_count(); ++i) {
    nlohmann::json v = nlohmann::json::array();
    for (int k = 0; k < g.value_dim(); ++k) v.push_back(g.values()(k, static_cast<Eigen::Index>(i)));
    nodes.push_back(std::move(v));
  }
  return {
      {"schema", "rim.graph/1"},
      {"grid", {{"dim", g.grid().dim()},
                {"nodes_per_axis", g.grid().nodes_per_axis()},
                {"axes", axes},
                {"node_order", "first axis fastest"}}},
      {"R", g.grid().radius()},
      {"value_dim", g.value_dim()},
      {"values", nodes},
      {"kappa_bound", g.kappa_bound()},
      {"omega", {{"seed", g.omega().seed}, {"shift", g.omega().shift}}},
  };
}

LipschitzGraph graph_from_json(const nlohmann::json& j) {
  try {
    auto grid = std::make_shared<const GraphGrid>(j.at("grid").at("dim").get<int>(),
                                                  j.at("grid").at("nodes_per_axis").get<int>(),
                                                  j.at("R").get<double>());
    const int value_dim = j.at("value_dim").get<int>();
    LipschitzGraph g(grid, value_dim, j.at("kappa_bound").get<double>());
    const auto& nodes = j.at("values");
    if (nodes.size() != grid->node_count()) throw ValidationError("graph node count mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Eigen::VectorXd v(value_dim);
      for (int k = 0; k < value_dim; ++k) v[k] = nodes[i].at(static_cast<std::size_t>(k)).get<double>();
      g.set_node_value(i, v);
    }
    g.set_omega({j.at("omega").at("seed").get<std::uint64_t>(),
                 j.at("omega").at("shift").get<double>()});
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace rim
