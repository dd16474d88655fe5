#include "hdc/forward.hpp"

#include "instances.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace hdc;

namespace {

NetworkGraph complete_graph(int n, int k) {
  std::vector<std::pair<int, int>> edges;
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) {
      if (l != j) edges.emplace_back(l, j);
    }
  }
  return NetworkGraph(n, k, edges);
}

IterationSystem random_system(test::Rng& rng, int n, int k, double density,
                              double rho) {
  NetworkGraph g = test::random_graph(rng, n, k, density);
  auto [b, p] = test::random_bp(rng, g, rho);
  return IterationSystem(std::move(b), std::move(p), std::move(g));
}

}  // namespace

TEST_CASE("step fixed point for B = 0, P = I") {
  const NetworkGraph g(3, 1, {});  // self-loops only
  const IterationSystem sys(Matrix::Zero(2, 1), Matrix::Identity(2, 2), g);
  StateMatrix s{Matrix::Constant(1, 1, 3.0), Matrix::Ones(2, 1)};
  const StateMatrix next = step(sys, s);
  CHECK((next.x - s.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((next.u - s.u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar step arithmetic") {
  const NetworkGraph g = complete_graph(2, 1);
  const IterationSystem sys(Matrix::Constant(1, 1, 0.5),
                            Matrix::Constant(1, 1, 0.5), g);
  StateMatrix s{Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1)};
  CHECK(step(sys, s).x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("matrix step equals node-wise update rule") {
  test::Rng rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    const IterationSystem sys = random_system(rng, 7, 2, 0.5, 0.8);
    const NetworkGraph& g = sys.graph();
    const int m = g.n_sensors();
    const int k = g.n_anchors();
    const int width = 2;
    StateMatrix s{test::random_matrix(rng, k, width),
                  test::random_matrix(rng, m, width)};
    const StateMatrix next = step(sys, s);

    // Node-wise form: every sensor combines its own state, sensor
    // neighbors, and anchor neighbors.
    for (int i = 0; i < m; ++i) {
      const auto nb = g.neighborhoods(k + i);
      for (int c = 0; c < width; ++c) {
        double v = 0.0;
        for (int j : nb.sensors) v += sys.p()(i, j - k) * s.x(j - k, c);
        for (int a : nb.anchors) v += sys.b()(i, a) * s.u(a, c);
        CHECK(next.x(i, c) == doctest::Approx(v).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("step rejects dimension mismatches") {
  const NetworkGraph g = complete_graph(3, 1);
  const IterationSystem sys(Matrix::Zero(2, 1), Matrix::Zero(2, 2), g);
  StateMatrix bad{Matrix::Zero(2, 1), Matrix::Zero(1, 1)};
  CHECK_THROWS_AS(step(sys, bad), std::invalid_argument);
}

TEST_CASE("system construction validates sparsity and flags divergence") {
  const NetworkGraph g(3, 1, {{1, 0}, {2, 1}});
  Matrix b = Matrix::Zero(2, 1);
  b(1, 0) = 1.0;  // sensor 2 cannot hear the anchor
  CHECK_THROWS_AS(IterationSystem(b, Matrix::Zero(2, 2), g),
                  std::invalid_argument);

  const IterationSystem marginal(Matrix::Zero(2, 1),
                                 Matrix::Identity(2, 2), g);
  CHECK_FALSE(marginal.convergent());
  CHECK(marginal.rho() == doctest::Approx(1.0));
}

TEST_CASE("one-shot system reaches W u0 exactly") {
  test::Rng rng(303);
  const NetworkGraph g = complete_graph(5, 2);
  const Matrix w = test::random_matrix(rng, 3, 2);
  const IterationSystem sys(w, Matrix::Zero(3, 3), g);
  const Matrix u0 = test::random_matrix(rng, 2, 1);
  const Matrix x0 = test::random_matrix(rng, 3, 1);
  const Trajectory traj = run(sys, u0, x0, 1e-12, 100);
  CHECK(traj.iterations <= 2);
  CHECK((traj.snapshots.back() - w * u0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run forgets the initial sensor states") {
  test::Rng rng(305);
  NetworkGraph g = test::random_graph(rng, 8, 2, 0.6);
  auto [b, p] = test::random_bp(rng, g, 0.6);
  p *= 0.5 / induced_norm(p, NormKind::Infinity);  // certificate regime
  const IterationSystem sys(b, p, g);
  const Matrix u0 = test::random_matrix(rng, 2, 2);
  const Matrix x0 = test::random_matrix(rng, 6, 2);
  const double tol = 1e-12;
  const Trajectory a = run(sys, u0, x0, tol, 100000);
  const Matrix x0_far = x0 + 10.0 * test::random_matrix(rng, 6, 2);
  const Trajectory b2 = run(sys, u0, x0_far, tol, 100000);
  CHECK((a.snapshots.back() - b2.snapshots.back()).cwiseAbs().maxCoeff() <=
        2.0 * tol);
}

TEST_CASE("run limit matches the direct solve") {
  test::Rng rng(307);
  for (int trial = 0; trial < 5; ++trial) {
    const IterationSystem sys = random_system(rng, 8, 2, 0.5, 0.6);
    const Matrix u0 = test::random_matrix(rng, 2, 1);
    const Matrix x0 = test::random_matrix(rng, 6, 1);
    const double tol = 1e-12;
    const Trajectory traj = run(sys, u0, x0, tol, 100000);
    const Matrix expected = limit_map(sys.p(), sys.b()) * u0;
    const double err =
        (traj.snapshots.back() - expected).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-9);
    const double p_norm = induced_norm(sys.p(), NormKind::Infinity);
    if (p_norm < 1.0) {
      CHECK(err <= tol / (1.0 - p_norm));  // stop-test certificate
    }
  }
}

TEST_CASE("anchor states never change") {
  test::Rng rng(309);
  const IterationSystem sys = random_system(rng, 6, 2, 0.6, 0.5);
  StateMatrix s{test::random_matrix(rng, 2, 2),
                test::random_matrix(rng, 4, 2)};
  const Matrix u0 = s.u;
  for (int t = 0; t < 25; ++t) {
    s = step(sys, s);
    CHECK((s.u - u0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero B with convergent P decays to the zero matrix") {
  test::Rng rng(311);
  NetworkGraph g = test::random_graph(rng, 7, 1, 0.5);
  auto [b, p] = test::random_bp(rng, g, 0.7);
  b.setZero();
  const IterationSystem sys(b, p, g);
  const Trajectory traj = run(sys, test::random_matrix(rng, 1, 1),
                              test::random_matrix(rng, 6, 1), 1e-13, 100000);
  CHECK(traj.snapshots.back().cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("divergent run reports the radius; exhausted budget carries data") {
  const NetworkGraph g = complete_graph(3, 1);
  const IterationSystem face(Matrix::Zero(2, 1),
                             1.05 * Matrix::Identity(2, 2), g);
  CHECK_THROWS_AS(run(face, Matrix::Zero(1, 1), Matrix::Ones(2, 1), 1e-10, 10),
                  DivergentSystemError);

  test::Rng rng(313);
  const IterationSystem slow = random_system(rng, 6, 1, 0.7, 0.95);
  try {
    run(slow, Matrix::Ones(1, 1), Matrix::Zero(5, 1), 1e-300, 25);
    FAIL("expected MaxItersExceeded");
  } catch (const MaxItersExceeded& e) {
    CHECK(e.partial().iterations == 25);
    CHECK(e.partial().error_norms.size() == 26);
  }
}

TEST_CASE("decay exponent of a scalar geometric system") {
  const NetworkGraph g = complete_graph(2, 1);
  const IterationSystem sys(Matrix::Constant(1, 1, 0.5),
                            Matrix::Constant(1, 1, 0.5), g);
  Trajectory traj;
  try {
    run(sys, Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1), 1e-300, 40);
  } catch (const MaxItersExceeded& e) {
    traj = e.partial();
  }
  REQUIRE(traj.error_norms.size() >= 10);
  CHECK(decay_exponent(traj) == doctest::Approx(std::log(0.5)).epsilon(1e-6));
}

TEST_CASE("decay exponent picks the dominant diagonal mode") {
  const NetworkGraph g = complete_graph(3, 1);
  Matrix p(2, 2);
  p << 0.9, 0.0, 0.0, 0.1;
  const IterationSystem sys(Matrix::Zero(2, 1), p, g);
  Trajectory traj;
  try {
    run(sys, Matrix::Zero(1, 1), Matrix::Ones(2, 1), 1e-300, 60);
  } catch (const MaxItersExceeded& e) {
    traj = e.partial();
  }
  CHECK(decay_exponent(traj) == doctest::Approx(std::log(0.9)).epsilon(1e-6));
}

TEST_CASE("decay exponent stays below the spectral bound") {
  test::Rng rng(317);
  for (int trial = 0; trial < 50; ++trial) {
    const IterationSystem sys = random_system(rng, 8, 2, 0.6, 0.75);
    Trajectory traj;
    try {
      run(sys, test::random_matrix(rng, 2, 1),
          test::random_matrix(rng, 6, 1), 1e-300, 80);
    } catch (const MaxItersExceeded& e) {
      traj = e.partial();
    }
    const double slope = decay_exponent(traj);
    CHECK(slope <= std::log(0.75) + 0.05);
  }
}

TEST_CASE("decay exponent edge cases") {
  Trajectory short_traj;
  short_traj.error_norms = {1.0, 0.5, 0.25};
  CHECK_THROWS_AS(decay_exponent(short_traj), std::invalid_argument);

  Trajectory settled;
  settled.error_norms.assign(20, 0.0);
  CHECK(decay_exponent(settled) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("consensus dimension on constructed ranks") {
  const NetworkGraph g = complete_graph(8, 3);
  const int m_sensors = 5;
  SUBCASE("zero B") {
    const IterationSystem sys(Matrix::Zero(m_sensors, 3),
                              Matrix::Zero(m_sensors, m_sensors), g);
    const auto dim = consensus_dimension(sys, 2);
    CHECK(dim.subspace_dim == 0);
    CHECK(dim.hdc_dim == 0);
  }
  SUBCASE("full column rank") {
    test::Rng rng(319);
    const Matrix b = test::random_matrix(rng, m_sensors, 3);
    const IterationSystem sys(b, Matrix::Zero(m_sensors, m_sensors), g);
    const auto dim = consensus_dimension(sys, 2);
    CHECK(dim.subspace_dim == 6);
    CHECK(dim.hdc_dim == 3);
  }
}

TEST_CASE("consensus dimension detects duplicated columns") {
  test::Rng rng(321);
  const NetworkGraph g = complete_graph(9, 4);
  Matrix b = test::random_matrix(rng, 5, 4);
  b.col(3) = 2.0 * b.col(1);
  const IterationSystem sys(b, Matrix::Zero(5, 5), g);
  const auto dim = consensus_dimension(sys, 1);
  CHECK(dim.hdc_dim == 3);
  CHECK(dim.hdc_dim == test::elimination_rank(b));
  CHECK(dim.hdc_dim <= g.n_anchors());
}

TEST_CASE("consensus dimension names the violated hypothesis") {
  const NetworkGraph tall = complete_graph(5, 3);  // K >= M
  const IterationSystem sys(Matrix::Zero(2, 3), Matrix::Zero(2, 2), tall);
  CHECK_THROWS_WITH_AS(consensus_dimension(sys, 1),
                       doctest::Contains("K < M"), std::invalid_argument);

  const NetworkGraph ok = complete_graph(5, 1);
  const IterationSystem diverging(Matrix::Zero(4, 1),
                                  Matrix::Identity(4, 4), ok);
  CHECK_THROWS_WITH_AS(consensus_dimension(diverging, 1),
                       doctest::Contains("rho(P) < 1"), std::invalid_argument);
}

TEST_CASE("average consensus on a complete sensor graph") {
  test::Rng rng(323);
  const NetworkGraph g = test::random_connected_sensor_graph(rng, 4, 1.0);
  const IterationSystem sys = average_consensus_preset(g);
  CHECK(sys.rho() == doctest::Approx(1.0).epsilon(1e-10));

  const Matrix x0 = test::random_matrix(rng, 4, 1);
  StateMatrix s{Matrix::Zero(0, 1), x0};
  for (int t = 0; t < 400; ++t) s = step(sys, s);
  const double mean = x0.mean();
  CHECK((s.x.array() - mean).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("average consensus single node") {
  const NetworkGraph g(1, 0, {});
  const IterationSystem sys = average_consensus_preset(g);
  CHECK(sys.p()(0, 0) == doctest::Approx(1.0));
  StateMatrix s{Matrix::Zero(0, 1), Matrix::Constant(1, 1, 4.2)};
  CHECK(step(sys, s).x(0, 0) == doctest::Approx(4.2));
}

TEST_CASE("Metropolis ring is doubly stochastic and averages") {
  std::vector<std::pair<int, int>> edges;
  const int m = 6;
  for (int i = 0; i < m; ++i) {
    edges.emplace_back(i, (i + 1) % m);
    edges.emplace_back((i + 1) % m, i);
  }
  const NetworkGraph ring(m, 0, edges);
  const IterationSystem sys = average_consensus_preset(ring);
  CHECK((sys.p().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-15);
  CHECK((sys.p().colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-15);

  test::Rng rng(329);
  const Matrix x0 = test::random_matrix(rng, m, 1);
  StateMatrix s{Matrix::Zero(0, 1), x0};
  for (int t = 0; t < 2000; ++t) s = step(sys, s);
  CHECK((s.x.array() - x0.mean()).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("Jacobi preset identities and solve") {
  test::Rng rng(331);
  const NetworkGraph g = complete_graph(6, 1);
  SUBCASE("identity system is one-shot") {
    const Matrix rhs = test::random_matrix(rng, 5, 1);
    const IterationSystem sys =
        jacobi_preset(Matrix::Identity(5, 5), rhs, g);
    CHECK(sys.p().cwiseAbs().maxCoeff() == 0.0);
    CHECK((sys.b() - rhs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("diagonally dominant solve matches the dense solver") {
    const NetworkGraph g2 = complete_graph(3, 1);
    Matrix a(2, 2);
    a << 3.0, 1.0, -1.0, 4.0;
    Matrix rhs(2, 1);
    rhs << 1.0, 2.0;
    const IterationSystem sys = jacobi_preset(a, rhs, g2);
    const Matrix u = Matrix::Constant(1, 1, 1.0);
    const Trajectory traj = run(sys, u, Matrix::Zero(2, 1), 1e-13, 10000);
    const Matrix direct = a.fullPivLu().solve(rhs * u);
    CHECK((traj.snapshots.back() - direct).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("strict diagonal dominance keeps Jacobi convergent") {
  test::Rng rng(337);
  const NetworkGraph g = complete_graph(6, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = test::random_matrix(rng, 5, 5);
    for (int i = 0; i < 5; ++i) {
      a(i, i) = a.row(i).cwiseAbs().sum() + 0.1;
    }
    const IterationSystem sys =
        jacobi_preset(a, test::random_matrix(rng, 5, 1), g);
    CHECK(sys.rho() < 1.0);
  }
}

TEST_CASE("Jacobi rejects zero diagonals") {
  const NetworkGraph g = complete_graph(3, 1);
  Matrix a = Matrix::Ones(2, 2);
  a(0, 0) = 0.0;
  CHECK_THROWS_AS(jacobi_preset(a, Matrix::Ones(2, 1), g),
                  std::invalid_argument);
}

TEST_CASE("Jacobi rejects systems denser than the graph") {
  // Sensors 1 and 2 are not connected to each other.
  const NetworkGraph g(3, 1, {{1, 0}, {2, 0}});
  Matrix a(2, 2);
  a << 4.0, 1.0, 1.0, 4.0;
  CHECK_THROWS_AS(jacobi_preset(a, Matrix::Ones(2, 1), g),
                  std::invalid_argument);
}

TEST_CASE("leader-follower star converges to the anchor state") {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < 5; ++i) edges.emplace_back(i, 0);
  const NetworkGraph star(5, 1, edges);
  const IterationSystem sys = leader_follower_preset(star);
  const Matrix ones_col = limit_map(sys.p(), sys.b());
  CHECK((ones_col.array() - 1.0).abs().maxCoeff() <= 1e-12);

  const Matrix u = Matrix::Constant(1, 1, -2.5);
  const Trajectory traj = run(sys, u, Matrix::Zero(4, 1), 1e-12, 10000);
  CHECK((traj.snapshots.back().array() + 2.5).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("leader-follower chain reaches the same limit more slowly") {
  const NetworkGraph star(3, 1, {{1, 0}, {2, 0}});
  const NetworkGraph chain(3, 1, {{1, 0}, {2, 1}});
  const IterationSystem fast = leader_follower_preset(star);
  const IterationSystem slow = leader_follower_preset(chain);
  const Matrix u = Matrix::Constant(1, 1, 1.0);
  const Trajectory tf = run(fast, u, Matrix::Zero(2, 1), 1e-12, 100000);
  const Trajectory ts = run(slow, u, Matrix::Zero(2, 1), 1e-12, 100000);
  CHECK((tf.snapshots.back().array() - 1.0).abs().maxCoeff() <= 1e-9);
  CHECK((ts.snapshots.back().array() - 1.0).abs().maxCoeff() <= 1e-9);
  CHECK(ts.iterations >= tf.iterations);
}

TEST_CASE("leader-follower explicit weights: one-step handoff") {
  const NetworkGraph g(2, 1, {{1, 0}});
  Matrix f(1, 2);
  f << 1.0, 0.0;
  const IterationSystem sys = leader_follower_preset(g, f);
  StateMatrix s{Matrix::Constant(1, 1, 7.0), Matrix::Zero(1, 1)};
  CHECK(step(sys, s).x(0, 0) == doctest::Approx(7.0));
}

TEST_CASE("leader-follower detects unreachable sensors") {
  // Sensor 2 only hears itself.
  const NetworkGraph g(3, 1, {{1, 0}});
  CHECK_THROWS_AS(leader_follower_preset(g), DivergentSystemError);
}

TEST_CASE("robust run is consistent and deterministic") {
  const NetworkGraph g = complete_graph(2, 1);
  const IterationSystem sys(Matrix::Constant(1, 1, 0.5),
                            Matrix::Constant(1, 1, 0.5), g);
  const Matrix u = Matrix::Constant(1, 1, 2.0);
  const Matrix x0 = Matrix::Zero(1, 1);

  SUBCASE("noiseless damped iteration approaches the limit") {
    const Trajectory traj = robust_run(sys, u, x0, 0.0, 0.8, 10000, 1);
    CHECK(std::abs(traj.snapshots.back()(0, 0) - 2.0) <= 1e-4);
  }
  SUBCASE("fixed seed reproduces the trajectory bit for bit") {
    const Trajectory a = robust_run(sys, u, x0, 0.3, 0.8, 500, 77);
    const Trajectory b = robust_run(sys, u, x0, 0.3, 0.8, 500, 77);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
      CHECK((a.snapshots[i] - b.snapshots[i]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("gamma outside (0.5, 1] is rejected") {
    CHECK_THROWS_AS(robust_run(sys, u, x0, 0.0, 0.5, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(robust_run(sys, u, x0, 0.0, 1.5, 10, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("noisy scalar runs stay unbiased across seeds") {
  const NetworkGraph g = complete_graph(2, 1);
  const IterationSystem sys(Matrix::Constant(1, 1, 0.5),
                            Matrix::Constant(1, 1, 0.5), g);
  const Matrix u = Matrix::Constant(1, 1, 2.0);
  const Matrix x0 = Matrix::Zero(1, 1);

  const int n_seeds = 20;
  const long iters = 3000;
  std::vector<double> means;
  for (int seedv = 0; seedv < n_seeds; ++seedv) {
    const Trajectory traj = robust_run(sys, u, x0, 0.1, 0.75, iters, seedv);
    double acc = 0.0;
    int count = 0;
    // 3000 steps stay under the thinning threshold: all snapshots kept.
    for (std::size_t s = traj.snapshots.size() - 1000;
         s < traj.snapshots.size(); ++s) {
      acc += traj.snapshots[s](0, 0);
      ++count;
    }
    means.push_back(acc / count);
  }
  double mean = 0.0;
  for (double v : means) mean += v;
  mean /= n_seeds;
  double var = 0.0;
  for (double v : means) var += (v - mean) * (v - mean);
  var /= (n_seeds - 1);
  const double se = std::sqrt(var / n_seeds);
  CHECK(std::abs(mean - 2.0) <= 3.0 * se + 1e-12);
}

TEST_CASE("trajectory snapshots thin out after the threshold") {
  const NetworkGraph g = complete_graph(2, 1);
  const IterationSystem sys(Matrix::Constant(1, 1, 0.5),
                            Matrix::Constant(1, 1, 0.5), g);
  const Trajectory traj = robust_run(sys, Matrix::Constant(1, 1, 1.0),
                                     Matrix::Zero(1, 1), 0.0, 0.8, 12000, 3);
  CHECK(traj.error_norms.size() == 12001);
  CHECK(traj.snapshots.size() < 12001);
  CHECK(traj.snapshot_steps.back() == 12000);
}
