#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "stohom/spectral.hpp"

using namespace stohom;
using Catch::Approx;

TEST_CASE("grid points and weights, nu_s = 2") {
  auto grid = build_grid(2, SeparableSdf::triangular());
  REQUIRE(grid.tau.size() == 2);
  CHECK(grid.tau[0] == Approx(-0.5));
  CHECK(grid.tau[1] == Approx(0.5));
  for (int j = 0; j < 3; ++j) {
    CHECK(grid.chi_axis[j][0] == Approx(0.5));
    CHECK(grid.chi_axis[j][1] == Approx(0.5));
  }
  CHECK(grid.eta_nu == Approx(1.0).margin(1e-14));
  CHECK(grid.nu() == 8);
}

TEST_CASE("grid matches hand summation, nu_s = 8") {
  auto grid = build_grid(8, SeparableSdf::triangular());
  // axis |tau| values 0.125, 0.375, 0.625, 0.875, each twice
  double axis_sum = 0.0;
  for (int b = 0; b < 8; ++b) {
    axis_sum += (2.0 / 8.0) * (1.0 - std::abs(grid.tau[b]));
    CHECK(grid.chi_axis[0][b] ==
          Approx((2.0 / 8.0) * (1.0 - std::abs(grid.tau[b]))));
  }
  CHECK(axis_sum == Approx(1.0).margin(1e-14));
  CHECK(grid.nu() == 512);  // reference study resolution
  CHECK(std::abs(grid.eta_nu - 1.0) <= 1e-12);
}

TEST_CASE("midpoint rule is exact for the triangular density") {
  for (int nu_s : {2, 4, 8, 16}) {
    auto grid = build_grid(nu_s, SeparableSdf::triangular());
    CHECK(std::abs(grid.eta_nu - 1.0) <= 1e-12);
    CHECK(grid.eta_within_gate);
  }
}

TEST_CASE("grid rejects odd or nonpositive nu_s") {
  CHECK_THROWS_AS(build_grid(3, SeparableSdf::triangular()),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0, SeparableSdf::triangular()),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid(-2, SeparableSdf::triangular()),
                  std::invalid_argument);
}

TEST_CASE("grid weights are quadrant symmetric") {
  auto grid = build_grid(8, SeparableSdf::triangular());
  for (int b1 = 0; b1 < 8; ++b1)
    for (int b2 = 0; b2 < 8; ++b2)
      for (int b3 = 0; b3 < 8; ++b3) {
        int flipped = grid.linear(7 - b1, b2, b3);
        CHECK(grid.chi_delta[grid.linear(b1, b2, b3)] ==
              grid.chi_delta[flipped]);
      }
}

TEST_CASE("sdf validation") {
  CHECK_NOTHROW(SeparableSdf::triangular().validate());
  SeparableSdf bad = SeparableSdf::triangular();
  bad.axis[1] = [](double t) { return std::abs(t) < 1.0 ? 0.7 : 0.0; };
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a coefficients at the mean point reduce to sqrt(chi)") {
  auto grid = build_grid(4, SeparableSdf::triangular());
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Constant(3, 2, 0.5);
  auto a = a_coefficients(ybar, grid, {0.3, 0.2, 0.1});
  for (int lin = 0; lin < grid.nu(); ++lin)
    CHECK(a[lin] == Approx(std::sqrt(grid.chi_delta[lin])).margin(1e-15));
}

TEST_CASE("a coefficients with uncertainty switched off ignore y") {
  auto grid = build_grid(4, SeparableSdf::triangular());
  UniformStream u(7);
  Eigen::MatrixXd y(3, 2);
  for (int j = 0; j < 3; ++j)
    for (int b = 0; b < 2; ++b) y(j, b) = u.next();
  auto a = a_coefficients(y, grid, {0.0, 0.0, 0.0});
  for (int lin = 0; lin < grid.nu(); ++lin)
    CHECK(a[lin] == Approx(std::sqrt(grid.chi_delta[lin])).margin(1e-15));
}

TEST_CASE("affine factor for a single perturbed axis entry") {
  auto grid = build_grid(2, SeparableSdf::triangular());
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(3, 1, 0.5);
  y(0, 0) = 1.0;
  auto a = a_coefficients(y, grid, {0.3, 0.0, 0.0});
  const double factor = 1.0 + std::sqrt(12.0) * 0.3 * 0.5;  // ~1.5196
  CHECK(factor == Approx(1.5196).margin(5e-4));
  for (int b2 = 0; b2 < 2; ++b2)
    for (int b3 = 0; b3 < 2; ++b3) {
      double base = std::sqrt(grid.chi_delta[grid.linear(0, b2, b3)]);
      CHECK(a[grid.linear(0, b2, b3)] == Approx(base * factor));
      // mirror rule: the tau > 0 half carries the same factor
      CHECK(a[grid.linear(1, b2, b3)] == Approx(base * factor));
    }
}

TEST_CASE("a coefficients reject delta at or past the positivity bound") {
  auto grid = build_grid(2, SeparableSdf::triangular());
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(3, 1, 0.5);
  CHECK_THROWS_AS(a_coefficients(y, grid, {1.0 / std::sqrt(3.0), 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(a_coefficients(y, grid, {0.6, 0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("chi tilde normalizes exactly for random y") {
  auto grid = build_grid(8, SeparableSdf::triangular());
  UniformStream u(42);
  const std::array<double, 3> delta{0.4, 0.4, 0.4};
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixXd y(3, 4);
    for (int j = 0; j < 3; ++j)
      for (int b = 0; b < 4; ++b) y(j, b) = u.next();
    auto w = chi_tilde(y, grid, delta);
    double sum = 0.0;
    double min_w = 1.0;
    for (double v : w) {
      sum += v;
      min_w = std::min(min_w, v);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(min_w >= 0.0);
  }
}

TEST_CASE("chi tilde at the mean point equals the normalized weights") {
  auto grid = build_grid(8, SeparableSdf::triangular());
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Constant(3, 4, 0.5);
  auto w = chi_tilde(ybar, grid, {0.3, 0.3, 0.3});
  for (int lin = 0; lin < grid.nu(); ++lin)
    CHECK(std::abs(w[lin] - grid.chi_delta[lin] / grid.eta_nu) <= 1e-12);
}

TEST_CASE("chi tilde is uniform on the smallest grid") {
  auto grid = build_grid(2, SeparableSdf::triangular());
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Constant(3, 1, 0.5);
  auto w = chi_tilde(ybar, grid, {0.0, 0.0, 0.0});
  for (double v : w) CHECK(v == Approx(0.125));
}

TEST_CASE("chi tilde keeps quadrant symmetry for random y") {
  auto grid = build_grid(4, SeparableSdf::triangular());
  UniformStream u(3);
  Eigen::MatrixXd y(3, 2);
  for (int j = 0; j < 3; ++j)
    for (int b = 0; b < 2; ++b) y(j, b) = u.next();
  auto w = chi_tilde(y, grid, {0.2, 0.3, 0.1});
  for (int b1 = 0; b1 < 4; ++b1)
    for (int b2 = 0; b2 < 4; ++b2)
      for (int b3 = 0; b3 < 4; ++b3) {
        int lin = grid.linear(b1, b2, b3);
        CHECK(w[lin] == w[grid.linear(3 - b1, b2, b3)]);
        CHECK(w[lin] == w[grid.linear(b1, 3 - b2, b3)]);
        CHECK(w[lin] == w[grid.linear(b1, b2, 3 - b3)]);
      }
}

TEST_CASE("degenerate spectrum is rejected") {
  // density concentrated on (-1/2, 1/2): vanishes at the nu_s = 2 nodes
  SeparableSdf narrow;
  auto pyramid = [](double t) {
    return std::abs(t) < 0.5 ? 2.0 * (1.0 - 2.0 * std::abs(t)) : 0.0;
  };
  narrow.axis = {pyramid, pyramid, pyramid};
  auto grid = build_grid(2, narrow);
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Constant(3, 1, 0.5);
  CHECK_THROWS_AS(chi_tilde(ybar, grid, {0.0, 0.0, 0.0}), std::domain_error);
}

TEST_CASE("custom q evaluator is honored") {
  auto grid = build_grid(4, SeparableSdf::triangular());
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(3, 2, 0.25);
  QEvaluator doubling = [](const Eigen::MatrixXd&, int, int, int) {
    return 2.0;
  };
  auto a = a_coefficients(y, grid, doubling);
  for (int lin = 0; lin < grid.nu(); ++lin)
    CHECK(a[lin] == Approx(2.0 * std::sqrt(grid.chi_delta[lin])));
  // the common factor cancels in the normalized weights
  auto w = chi_tilde_from_a(a);
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Constant(3, 2, 0.5);
  auto w0 = chi_tilde(ybar, grid, {0.0, 0.0, 0.0});
  for (int lin = 0; lin < grid.nu(); ++lin)
    CHECK(w[lin] == Approx(w0[lin]).margin(1e-15));
}

TEST_CASE("spectrum distribution support and derived quantities") {
  SpectrumDistribution d(0.2, 0.4, {0.4, 0.4, 0.4});
  CHECK(d.w_min() == Approx(0.2 * (1.0 - std::sqrt(3.0) * 0.4)));
  CHECK(d.w_min() == Approx(0.0614).margin(5e-4));  // study minimum ~0.06
  CHECK(d.w_max() == Approx(0.3386).margin(5e-4));
  CHECK(d.delta_s() ==
        Approx(std::sqrt(std::pow(1.16, 3) - 1.0)).margin(1e-12));
  CHECK(SpectrumDistribution(0.2, 0.0, {0.0, 0.0, 0.0}).delta_s() == 0.0);
  CHECK_THROWS_AS(SpectrumDistribution(0.2, 0.58, {0.0, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SpectrumDistribution(-0.1, 0.0, {0.0, 0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("spectrum parameter sampling") {
  SECTION("zero-width support is deterministic") {
    SpectrumDistribution d(0.2, 0.0, {0.0, 0.0, 0.0});
    UniformStream ws(11), ys(12);
    auto p = sample_spectrum_params(ws, ys, d, 8);
    for (double w : p.w) CHECK(w == Approx(0.2).margin(1e-15));
    CHECK(p.y.rows() == 3);
    CHECK(p.y.cols() == 4);
  }
  SECTION("sample mean of w matches the uniform law") {
    SpectrumDistribution d(0.2, 0.4, {0.0, 0.0, 0.0});
    UniformStream ws(100), ys(101);
    const int n = 100000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      auto p = sample_spectrum_params(ws, ys, d, 2);
      for (double w : p.w) {
        CHECK(w >= d.w_min());
        CHECK(w <= d.w_max());
      }
      mean += p.w[0];
    }
    mean /= n;
    const double se = (d.w_max() - d.w_min()) / std::sqrt(12.0) /
                      std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - 0.2) <= 3.0 * se);
  }
}

TEST_CASE("discrete measure converges for a smooth test function") {
  // oracle: int chi(tau) cos(c . tau) dtau = prod_j 2 (1 - cos c_j) / c_j^2
  const std::array<double, 3> c{1.3, 0.7, 2.1};
  double exact = 1.0;
  for (double cj : c) exact *= 2.0 * (1.0 - std::cos(cj)) / (cj * cj);
  double prev_err = 1e300;
  for (int nu_s : {4, 8, 16, 32}) {
    auto grid = build_grid(nu_s, SeparableSdf::triangular());
    double sum = 0.0;
    for (int b1 = 0; b1 < nu_s; ++b1)
      for (int b2 = 0; b2 < nu_s; ++b2)
        for (int b3 = 0; b3 < nu_s; ++b3)
          sum += grid.chi_delta[grid.linear(b1, b2, b3)] *
                 std::cos(c[0] * grid.tau[b1] + c[1] * grid.tau[b2] +
                          c[2] * grid.tau[b3]);
    double err = std::abs(sum - exact);
    CHECK(err < prev_err);
    prev_err = err;
    CHECK(std::abs(grid.eta_nu - 1.0) <= 1e-12);
  }
}
