#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "nhxy/scaling.hpp"

using namespace nhxy;
using Catch::Matchers::WithinAbs;
using Points = std::vector<std::pair<double, double>>;

namespace {

// Least squares through a QR solve of the design matrix [1 x].
Eigen::Vector2d qr_line(const Points& xy) {
  Eigen::MatrixXd a(xy.size(), 2);
  Eigen::VectorXd b(xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) {
    a(Eigen::Index(i), 0) = 1;
    a(Eigen::Index(i), 1) = xy[i].first;
    b(Eigen::Index(i)) = xy[i].second;
  }
  return a.colPivHouseholderQr().solve(b);
}

const std::vector<double> kLadder = {6, 8, 10, 12, 14};

}  // namespace

TEST_CASE("exact power law gives nu", "[scaling]") {
  Points p;
  for (double n : kLadder) p.emplace_back(n, n);
  const auto f = fit_nu(p);
  CHECK_THAT(f.derived_quantity, WithinAbs(1.0, 1e-12));
  CHECK(f.rms_residual < 1e-12);
  CHECK(f.n_points == 5);
  CHECK(f.kind == FitKind::nu);
}

TEST_CASE("randomized exact models are recovered", "[scaling]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double nu = u(rng), a = u(rng), lc = u(rng), c = u(rng), k = u(rng);
    Points chi, lam, ent;
    for (double n : kLadder) {
      chi.emplace_back(n, a * std::pow(n, 2 / nu - 1));
      lam.emplace_back(n, lc - k / (n * n));
    }
    const int n = 16;
    for (int la = 1; la < n; ++la) ent.emplace_back(la, c / 3 * std::log(std::sin(std::numbers::pi * la / n)) + k);
    CHECK_THAT(fit_nu(chi).derived_quantity, WithinAbs(nu, 1e-12 * std::max(1.0, nu * nu)));
    const auto crit = extrapolate_critical(lam);
    CHECK_THAT(crit.derived_quantity, WithinAbs(lc, 1e-12));
    CHECK_THAT(crit.slope, WithinAbs(-k, 1e-10));
    const auto cc = fit_central_charge(ent, n);
    CHECK_THAT(cc.derived_quantity, WithinAbs(c, 1e-12));
    CHECK_THAT(cc.intercept, WithinAbs(k, 1e-12));
    CHECK(cc.n_points == n - 3);
  }
}

TEST_CASE("fit agrees with a QR least-squares solve on noisy data", "[scaling]") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 0.05);
  Points lam, xy;
  for (double n : kLadder) {
    const double y = 0.8 - 2 / (n * n) + g(rng);
    lam.emplace_back(n, y);
    xy.emplace_back(1 / (n * n), y);
  }
  const auto f = extrapolate_critical(lam);
  const auto ref = qr_line(xy);
  CHECK_THAT(f.intercept, WithinAbs(ref(0), 1e-12));
  CHECK_THAT(f.slope, WithinAbs(ref(1), 1e-9));
  double ss = 0;
  for (auto [x, y] : xy) ss += std::pow(y - ref(0) - ref(1) * x, 2);
  CHECK_THAT(f.rms_residual, WithinAbs(std::sqrt(ss / xy.size()), 1e-12));
  CHECK(f.rms_residual > 1e-4);
}

TEST_CASE("fits are permutation invariant", "[scaling]") {
  Points p = {{6, 0.31}, {8, 0.52}, {10, 0.49}, {12, 0.77}, {14, 0.80}};
  const auto ref = fit_nu(p);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(p.begin(), p.end(), rng);
    const auto f = fit_nu(p);
    CHECK(f.slope == ref.slope);
    CHECK(f.intercept == ref.intercept);
    CHECK(f.rms_residual == ref.rms_residual);
  }
}

TEST_CASE("flat entropy profile gives zero central charge", "[scaling]") {
  Points p;
  for (int la = 1; la < 12; ++la) p.emplace_back(la, 0.72);
  const auto f = fit_central_charge(p, 12);
  CHECK_THAT(f.derived_quantity, WithinAbs(0.0, 1e-12));
  CHECK(f.rms_residual < 1e-12);
}

TEST_CASE("edge subsystems are excluded by default", "[scaling]") {
  const int n = 12;
  Points p;
  for (int la = 1; la < n; ++la) p.emplace_back(la, std::log(std::sin(std::numbers::pi * la / n)) / 3);
  p[0].second += 1;  // L_A = 1 perturbed
  CHECK_THAT(fit_central_charge(p, n).derived_quantity, WithinAbs(1.0, 1e-12));
  const auto with_edges = fit_central_charge(p, n, true);
  CHECK(with_edges.n_points == n - 1);
  CHECK(std::abs(with_edges.derived_quantity - 1.0) > 0.01);
  CHECK(with_edges.rms_residual > 0);
}

TEST_CASE("fit errors", "[scaling]") {
  CHECK_THROWS_AS(fit_nu({{6, 1}, {8, 2}}), FitError);
  CHECK_THROWS_AS(fit_nu({{6, 1}, {6, 2}, {8, 2}}), FitError);
  CHECK_THROWS_AS(fit_nu({{6, 1}, {8, 0}, {10, 2}}), FitError);
  // chi ~ N^-2: slope -2 <= -1
  CHECK_THROWS_AS(fit_nu({{6, 1 / 36.0}, {8, 1 / 64.0}, {10, 1 / 100.0}}), FitError);
  CHECK_THROWS_AS(extrapolate_critical({{6, 0.7}, {8, 0.7}}), FitError);
  CHECK_THROWS_AS(fit_central_charge({{2, 0.5}, {3, 0.6}, {4, 0.7}}, 8), FitError);
  CHECK_THROWS_AS(fit_central_charge({{0, 0.5}, {2, 0.6}, {3, 0.7}, {4, 0.7}}, 8), FitError);
  // L_A and N - L_A share an abscissa
  CHECK_THROWS_AS(fit_central_charge({{2, 0.5}, {6, 0.6}, {2, 0.7}, {6, 0.7}}, 8), FitError);
}

TEST_CASE("fit kind names", "[scaling]") {
  CHECK(to_string(FitKind::nu) == "nu");
  CHECK(to_string(FitKind::central_charge) == "central_charge");
}
