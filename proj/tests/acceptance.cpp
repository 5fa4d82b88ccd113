// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "desk.hpp"
#include "oracles.hpp"
#include "rim/cocycle.hpp"
#include "rim/comparison.hpp"
#include "rim/errors.hpp"
#include "rim/manifold.hpp"

using namespace rim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void add(Outcome& o, bool ok, const std::string& label, double value) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += ", ";
  o.detail += label + "=" + fmt("%.3g", value) + (ok ? "" : "!");
}

const double kSatKappa = eigen(1.5, -0.5, 0.25).kappa;

LipschitzGraph sat_zero() { return LipschitzGraph::zero(desk::line(), 3, kSatKappa); }

// 1. Spectral data of B over random admissible triples.
Outcome eigen_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam(-5.0, 5.0), gap(0.05, 6.0), frac(0.01, 0.99);
  double disc = 0.0, vec = 0.0, prod = 0.0;
  int mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const double lc = lam(rng), lh = lc + gap(rng), L = frac(rng) * (lh - lc) / 4.0;
    const EigenData e = eigen(lh, lc, L);
    const double d = lh - lc;
    disc = std::max(disc, std::abs(e.discriminant - d * (d - 4.0 * L)) / std::max(1.0, d * d));
    const Eigen::Matrix2d B = oracle::comparison_matrix(lh, lc, L);
    const Eigen::Vector2d pp(e.plus_w(), e.plus_v()), pm(e.minus_w(), e.minus_v());
    vec = std::max({vec, (B * pp - e.lambda_plus * pp).norm() / pp.norm(),
                    (B * pm - e.lambda_minus * pm).norm() / pm.norm()});
    prod = std::max(prod, std::abs(e.e_plus * e.e_minus - 1.0));
  }
  std::uniform_real_distribution<double> any(-3.0, 3.0), Ld(0.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double a = any(rng), b = any(rng), L = Ld(rng);
    const double lh = std::max(a, b), lc = std::min(a, b);
    Eigen::EigenSolver<Eigen::Matrix2d> es(oracle::comparison_matrix(lh, lc, L));
    const Eigen::Vector2cd ev = es.eigenvalues();
    const bool real_distinct =
        std::abs(ev[0].imag()) < 1e-12 && std::abs(ev[0].real() - ev[1].real()) > 1e-9;
    if (gap_check(SpectralModel({lh, lc}, 1), L) != real_distinct) ++mismatches;
  }
  const double secs = seconds_since(t0);
  add(o, disc <= 1e-10, "disc_err", disc);
  add(o, vec <= 1e-10, "eigvec_res", vec);
  add(o, prod <= 1e-10, "e+e-_err", prod);
  add(o, mismatches == 0, "gap_mismatch", mismatches);
  add(o, secs < 1.0, "secs", secs);
  return o;
}

// 2. Comparison system closed forms and monotonicity.
Outcome comparison_suite() {
  Outcome o;
  const EigenData e = eigen(2.0, 0.0, 0.25);
  double flat = 0.0;
  for (double T : {0.25, 0.5, 1.0, 2.0}) {
    const ComparisonSolution s(e, Fiber::zero(-1.0, 3.0), T, e.kappa, 0.0, 1.0);
    flat = std::max({flat, std::abs(s.W(0.0) - std::exp(-e.lambda_plus * T)),
                     std::abs(s.V(T) - e.kappa)});
  }
  add(o, flat <= 1e-10, "zero_noise_err", flat);

  double sampled = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Fiber f = desk::fiber(seed, 2.0);
    const double T = 1.0;
    const ComparisonSolution s(e, f, T, e.kappa, 0.0, 1.0);
    const double Z = oracle::simpson([&](double t) { return f.z(t); }, 0.0, T, 4096);
    auto M = [&](double t) {
      Eigen::MatrixXd m = oracle::comparison_matrix(2.0, 0.0, 0.25);
      m += f.z(t) * Eigen::MatrixXd::Identity(2, 2);
      return m;
    };
    Eigen::VectorXd x0(2);
    x0 << s.W(0.0), s.V(0.0);
    const Eigen::VectorXd end = oracle::rk4_linear(M, x0, 0.0, T, 512);
    sampled = std::max({sampled, std::abs(s.W(0.0) - std::exp(-e.lambda_plus * T - Z)),
                        std::abs(s.V(T) - e.kappa), std::abs(end[0] - 1.0),
                        std::abs(end[1] - e.kappa)});
  }
  add(o, sampled <= 1e-6, "sampled_err", sampled);

  int bad = 0;
  const Fiber f = desk::fiber(9, 2.0);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> g(0.0, e.kappa), c(0.0, 1.0), T(0.1, 1.0);
  for (int k = 0; k < 50; ++k) {
    double g1 = g(rng), g2 = g(rng), c1 = c(rng), c2 = c(rng);
    if (g1 > g2) std::swap(g1, g2);
    if (c1 > c2) std::swap(c1, c2);
    const double t = T(rng);
    if (!monotonicity_check(ComparisonSolution(e, f, t, g1, c1, 1.0),
                            ComparisonSolution(e, f, t, g2, c2, 1.0))) {
      ++bad;
    }
  }
  add(o, bad == 0, "monotone_fail", bad);
  return o;
}

// 3. Cocycle law on the saturated model.
Outcome cocycle_law() {
  Outcome o;
  const System sys = desk::saturated();
  const Fiber f = desk::fiber(3, 2.0);
  Eigen::VectorXd x0(4);
  x0 << 0.5, -0.3, 0.2, 0.1;
  const StateVector x = StateVector::from_full(x0, 1);
  const StateVector ref = evolve(sys, f, x, 1.0, 2.5e-3 / 16.0);
  std::vector<double> defect, global;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const StateVector direct = evolve(sys, f, x, 1.0, dt);
    const StateVector split = evolve(sys, f.shifted(0.5), evolve(sys, f, x, 0.5, dt), 0.5, dt);
    defect.push_back((direct.full() - split.full()).norm() / dt);
    global.push_back((split.full() - ref.full()).norm());
  }
  add(o, *std::max_element(defect.begin(), defect.end()) <= 1.0, "max_defect/dt",
      *std::max_element(defect.begin(), defect.end()));
  for (std::size_t k = 1; k < global.size(); ++k) {
    const double r = global[k - 1] / global[k];
    add(o, std::abs(r - 2.0) <= 0.4, "ratio" + std::to_string(k), r);
  }
  add(o, global[0] / 1e-2 < 1.0, "C", global[0] / 1e-2);
  return o;
}

// 4. F = 0 transform against the closed form, and split invariance.
Outcome linear_exactness() {
  Outcome o;
  const System sys = desk::no_coupling({2.0, 0.0}, 1);
  const double c = 0.15;
  const auto g = linear_graph(desk::line(), 1, c, eigen(2.0, 0.0, 0.25).kappa);
  const double factor = c * std::exp(-2.0);
  auto closed_err = [&](const LipschitzGraph& out) {
    double m = 0.0;
    for (std::size_t i = 0; i < out.grid().node_count(); ++i) {
      m = std::max(m, std::abs(out.node_value(i)[0] - factor * out.grid().node(i)[0]));
    }
    return m;
  };
  const TransformSettings s;
  const Fiber flat = Fiber::zero(-1.0, 3.0);
  const LipschitzGraph a = transform(sys, g, flat, 1.0, s);
  add(o, closed_err(a) <= 1e-8, "zero_noise_err", closed_err(a));
  double sampled = 0.0, split = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Fiber f = desk::fiber(seed, 2.0);
    const LipschitzGraph one = transform(sys, g, f, 1.0, s);
    sampled = std::max(sampled, closed_err(one));
    const LipschitzGraph two = transform(sys, transform(sys, g, f, 0.37, s), f.shifted(0.37), 0.63, s);
    split = std::max(split, metric(one, two));
  }
  const LipschitzGraph halves = transform(sys, transform(sys, g, flat, 0.5, s), flat.shifted(0.5), 0.5, s);
  split = std::max(split, metric(a, halves));
  add(o, sampled <= 1e-5, "sampled_err", sampled);
  add(o, split <= 1e-8, "split_err", split);
  return o;
}

// 5. The kappa-ball is mapped into itself.
Outcome kappa_ball() {
  Outcome o;
  const System sys = desk::saturated();
  const Fiber f = desk::fiber(12, 2.0);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = random_kappa_graph(desk::line(), 3, kSatKappa, seed);
    worst = std::max(worst, lip_norm(transform(sys, g, f, 1.0, TransformSettings{})) / kSatKappa);
  }
  add(o, worst <= 1.0 + kGridSlack, "max_lip/kappa", worst);
  return o;
}

// 6. Contraction per unit time and pullback rate.
Outcome contraction_rate() {
  Outcome o;
  const System sys = desk::saturated();
  const EigenData e = eigen(1.5, -0.5, 0.25);
  const Fiber f = desk::fiber(21);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto g1 = random_kappa_graph(desk::line(), 3, e.kappa, 100 + 2 * k);
    const auto g2 = random_kappa_graph(desk::line(), 3, e.kappa, 101 + 2 * k);
    worst = std::max(worst, contraction_ratio(sys, f, g1, g2, 1.0, TransformSettings{}) / e.rate);
  }
  add(o, worst <= 1.05, "max_ratio/rate", worst);
  // The trace rate is attained for linear coupling; saturation only speeds it up.
  PullbackSettings p;
  p.tol = 1e-9;
  double rel = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ManifoldResult r =
        pullback_fixed_point(desk::linear_b(), desk::fiber(seed + 20), LipschitzGraph::zero(desk::line(), 1, eigen(2.0, 0.0, 0.25).kappa),
                             p, TransformSettings{});
    rel = std::max(rel, std::abs(r.rate_fit - r.expected_rate) / std::abs(r.expected_rate));
  }
  add(o, rel <= 0.2, "linear_slope_rel_err", rel);
  p.tol = 1e-7;
  const ManifoldResult s = pullback_fixed_point(sys, f, sat_zero(), p, TransformSettings{});
  add(o, s.rate_fit <= s.expected_rate * 0.8, "saturated_slope/expected", s.rate_fit / s.expected_rate);
  return o;
}

// 7. Linear B manifold slope.
Outcome linear_manifold() {
  Outcome o;
  const System sys = desk::linear_b();
  const EigenData e = eigen(2.0, 0.0, 0.25);
  Eigen::EigenSolver<Eigen::Matrix2d> es(oracle::comparison_matrix(2.0, 0.0, 0.25));
  const int top = es.eigenvalues().real()[0] > es.eigenvalues().real()[1] ? 0 : 1;
  const Eigen::Vector2d v = es.eigenvectors().col(top).real();
  const double slope = v[1] / v[0];
  const auto g0 = LipschitzGraph::zero(desk::line(), 1, e.kappa);
  const auto r0 =
      pullback_fixed_point(sys, Fiber::zero(-40.0, 2.0), g0, PullbackSettings{}, TransformSettings{});
  const double flat = std::abs(fit_slope(r0.gamma_star).mean - slope);
  add(o, flat <= 1e-3, "zero_noise_err", flat);
  double worst = 0.0, secs = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    const auto r = pullback_fixed_point(sys, desk::fiber(seed), g0, PullbackSettings{},
                                        TransformSettings{});
    secs = std::max(secs, seconds_since(t0));
    worst = std::max(worst, std::abs(fit_slope(r.gamma_star).mean - slope));
  }
  add(o, worst <= 1e-2, "sampled_err", worst);
  add(o, secs < 120.0, "max_secs", secs);
  return o;
}

// 8. Points on the graph stay on the graph.
Outcome invariance() {
  Outcome o;
  const System sys = desk::saturated();
  const Fiber f = desk::fiber(7);
  const auto a = pullback_fixed_point(sys, f, sat_zero(), PullbackSettings{}, TransformSettings{});
  const auto b =
      pullback_fixed_point(sys, f.shifted(1.0), sat_zero(), PullbackSettings{}, TransformSettings{});
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 10; ++k) pts.push_back(Eigen::VectorXd::Constant(1, -0.27 + 0.06 * k));
  const double r = invariance_check(sys, a, b, 1.0, pts, 1e-3).max_relative;
  add(o, r <= 1e-2, "max_rel_residual", r);
  return o;
}

// 9. Backward decay on the unstable manifold.
Outcome unstable_decay() {
  Outcome o;
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.8);
  const DecayReport flat =
      unstable_decay_check(desk::no_coupling({2.0, 0.0}, 1), Fiber::zero(-45.0, 2.0),
                           LipschitzGraph::zero(desk::line(), 1, 0.0), x, 5, PullbackSettings{},
                           TransformSettings{});
  double exact = 0.0;
  for (const auto& e : flat.entries) {
    exact = std::max(exact, std::abs(e.psi_norm - std::exp(-2.0 * e.t) * 0.8) / (std::exp(-2.0 * e.t) * 0.8));
  }
  add(o, exact <= 1e-8 && flat.all_hold, "zero_F_rel_err", exact);
  int held = 0, checked = 0;
  double margin = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const DecayReport rep = unstable_decay_check(desk::saturated(), desk::fiber(seed + 30, 40.0), sat_zero(),
                                                 x, 5, PullbackSettings{}, TransformSettings{});
    for (const auto& e : rep.entries) {
      ++checked;
      if (e.holds && e.graph_bound_holds) ++held;
      margin = std::max(margin, e.psi_norm / e.bound);
    }
  }
  add(o, held == checked, "held/15", held);
  add(o, margin <= 1.0 + 1e-6, "max_psi/bound", margin);
  return o;
}

// 10. Conjugacy of the SPDE with the transformed equation.
Outcome conjugacy() {
  Outcome o;
  const System sys{SpectralModel({-0.5, -1.5}, 1), Nonlinearity::zero()};
  Eigen::VectorXd x0(2);
  x0 << 0.5, 0.0;
  const StateVector x = StateVector::from_full(x0, 1);
  const double T = 1.0;
  const std::vector<double> dts{1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  std::vector<double> sq(dts.size(), 0.0);
  const int seeds = 200;
  for (int s = 1; s <= seeds; ++s) {
    const auto path = WienerPath::sample(static_cast<std::uint64_t>(s), -41.0, 2.0, 1.0 / 4096);
    const Fiber f(std::make_shared<const OUCache>(path, 40.0));
    for (std::size_t k = 0; k < dts.size(); ++k) {
      const StateVector y = transform_T_inv(f.z(T), evolve(sys, f, transform_T(f.z(0.0), x), T, dts[k]));
      const double d = (y.full() - evolve_spde(sys, path, x, T, dts[k]).full()).norm();
      sq[k] += d * d;
    }
  }
  for (std::size_t k = 1; k < dts.size(); ++k) {
    const double r = std::sqrt(sq[k - 1] / sq[k]);
    add(o, std::abs(r - std::sqrt(2.0)) <= 0.3 * std::sqrt(2.0), "ratio" + std::to_string(k), r);
  }
  return o;
}

// 11. Both sides of the gap threshold.
Outcome gap_sharpness() {
  Outcome o;
  const std::vector<double> Ls{0.2, 0.3, 0.4, 0.45, 0.5, 0.55, 0.75};
  const auto entries = gap_sharpness_sweep(2.0, 0.0, Ls, desk::fiber(40), desk::line(),
                                           PullbackSettings{}, TransformSettings{});
  int wrong = 0;
  double worst = 0.0;
  for (const auto& e : entries) {
    const bool expect = 2.0 > 4.0 * e.L;
    if (e.gap_ok != expect) ++wrong;
    if (expect) {
      if (!e.slope) {
        ++wrong;
        continue;
      }
      const double d = 2.0, disc = d * (d - 4.0 * e.L);
      const double lp = 0.5 * (d + std::sqrt(disc));
      // Unstable eigenvector (lp - lc - L, L) of B gives the slope.
      const double slope = e.L / (lp - e.L);
      worst = std::max(worst, std::abs(e.slope->mean - slope));
    } else if (e.slope) {
      ++wrong;
    }
  }
  add(o, wrong == 0, "misclassified", wrong);
  add(o, worst <= 1e-2, "max_slope_err", worst);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"eigen/gap suite", eigen_suite},
      {"comparison closed forms", comparison_suite},
      {"cocycle law", cocycle_law},
      {"linear-case exactness", linear_exactness},
      {"kappa-ball invariance", kappa_ball},
      {"contraction rate", contraction_rate},
      {"linear manifold slope", linear_manifold},
      {"invariance residual", invariance},
      {"unstable decay", unstable_decay},
      {"conjugacy order", conjugacy},
      {"gap sharpness", gap_sharpness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
