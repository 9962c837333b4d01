#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "doctest.h"

#include "xlhpe/geometry.hpp"

using namespace xlhpe;

namespace {

ArrayGeometry single_element() {
  ArrayGeometry g;
  g.S = 1;
  g.Nx = 1;
  g.Ny = 1;
  g.origins = {{0.0, 0.0, 0.0}};
  return g;
}

ArrayGeometry default_row(int S = 6) { return ArrayGeometry::modular_row(S, 32, 8, 0.05, 0.1, 0.025, 2.0); }

}  // namespace

TEST_CASE("element positions follow the grid") {
  ArrayGeometry g = single_element();
  auto p = element_positions(g, 0);
  REQUIRE(p.size() == 1);
  CHECK(p[0].x == 0.0);
  CHECK(p[0].y == 0.0);

  g.Nx = 2;
  g.d = 0.05;
  p = element_positions(g, 0);
  REQUIRE(p.size() == 2);
  CHECK(p[1].x == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(p[1].y == 0.0);

  const ArrayGeometry row = default_row();
  p = element_positions(row, 2);
  CHECK(p.size() == 256);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].z == 0.0);
    for (std::size_t j = i + 1; j < p.size(); ++j) CHECK(distance(p[i], p[j]) > 0.049);
  }
  CHECK_THROWS_AS(element_positions(row, 6), std::out_of_range);
  CHECK_THROWS_AS(element_positions(row, -1), std::out_of_range);
}

TEST_CASE("modular row is valid and centered") {
  const ArrayGeometry g = default_row();
  CHECK_NOTHROW(g.validate());
  double cx = 0.0;
  for (int s = 0; s < g.S; ++s) cx += g.center(s).x;
  CHECK(std::abs(cx) < 1e-12);
  CHECK(g.center(1).x - g.center(0).x == doctest::Approx(1.6));

  ArrayGeometry bad = g;
  bad.origins[1] = bad.origins[0];
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = g;
  bad.origins[0].z = 0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = g;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("fraunhofer distance and service boundary") {
  ArrayGeometry g = default_row();
  CHECK(fraunhofer_distance(g) == doctest::Approx(19.2).epsilon(1e-12));
  CHECK(near_field_boundary(g) == doctest::Approx(1.92).epsilon(1e-12));
  ArrayGeometry g2 = default_row(12);
  CHECK(fraunhofer_distance(g2) == doctest::Approx(2.0 * fraunhofer_distance(g)).epsilon(1e-12));
  g.D = 0.0;
  CHECK(fraunhofer_distance(g) == 0.0);
}

TEST_CASE("radiation pattern") {
  const double pi = std::numbers::pi;
  CHECK(radiation_pattern(0.0, 2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(radiation_pattern(pi / 3, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(radiation_pattern(0.6 * pi, 2.0) == 0.0);
  CHECK(radiation_pattern(pi / 2, 2.0) == 0.0);
  CHECK(radiation_pattern(pi / 2, 0.0) == doctest::Approx(2.0));
  CHECK(radiation_pattern(pi / 2 + 1e-9, 0.0) == 0.0);
  for (double t = 0.0; t < pi / 2; t += 0.01) CHECK(radiation_pattern(t, 2.0) >= radiation_pattern(t + 0.01, 2.0));
}

TEST_CASE("single element channel matches free-space amplitude and phase") {
  const ArrayGeometry g = single_element();
  const Eigen::VectorXcd h = channel(g, 0, {0.0, 0.0, 10.0});
  REQUIRE(h.size() == 1);
  CHECK(std::abs(h(0)) == doctest::Approx(0.00194924200308419).epsilon(1e-12));
  const std::complex<double> expect = std::polar(0.00194924200308419, -g.wavenumber() * 10.0);
  CHECK(std::abs(h(0) - expect) < 1e-15);

  const Eigen::VectorXcd off = channel(g, 0, {0.3, -0.2, 7.3});
  const double r = std::sqrt(0.09 + 0.04 + 7.3 * 7.3);
  const double theta = std::acos(7.3 / r);
  const double amp = 0.1 / (4.0 * std::numbers::pi * r) * std::sqrt(6.0 * std::cos(theta) * std::cos(theta));
  CHECK(std::abs(off(0) - std::polar(amp, -g.wavenumber() * r)) < 1e-15);
}

TEST_CASE("channel entries share one amplitude and decay along boresight") {
  const ArrayGeometry g = default_row(1);
  const Vec3 c = g.center(0);
  const Eigen::VectorXcd h = channel(g, 0, {c.x + 0.2, c.y, 1.0});
  const double a0 = std::abs(h(0));
  for (Eigen::Index i = 0; i < h.size(); ++i) CHECK(std::abs(h(i)) == doctest::Approx(a0).epsilon(1e-12));

  double prev = 1e9;
  for (double z = 0.5; z < 5.0; z += 0.25) {
    const double n = channel(g, 0, {c.x, c.y, z}).norm();
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("boresight channel is symmetric under element reflection") {
  const ArrayGeometry g = default_row(1);
  const Vec3 c = g.center(0);
  const Eigen::VectorXcd h = channel(g, 0, {c.x, c.y, 1.3});
  for (int i = 0; i < g.Nx; ++i) {
    for (int j = 0; j < g.Ny; ++j) {
      const auto a = h(i * g.Ny + j);
      const auto b = h((g.Nx - 1 - i) * g.Ny + (g.Ny - 1 - j));
      CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
    }
  }
}

TEST_CASE("channel norm is invariant under a common length scale") {
  ArrayGeometry g = default_row(2);
  const Vec3 p{0.4, 0.1, 1.2};
  const double n1 = channel(g, 1, p).norm();
  const double c = 2.5;
  ArrayGeometry h = ArrayGeometry::modular_row(2, 32, 8, 0.05 * c, 0.1 * c, 0.025 * c, 2.0);
  const double n2 = channel(h, 1, {p.x * c, p.y * c, p.z * c}).norm();
  CHECK(n2 == doctest::Approx(n1).epsilon(1e-12));
}

TEST_CASE("users behind the array see a zero channel") {
  const ArrayGeometry g = default_row(2);
  CHECK(channel(g, 0, {0.0, 0.0, -1.0}).norm() == 0.0);
  const ChannelSet ch = build_channel_set(g, {{{0.0, 0.0, -1.0}}, {{0.1, 0.0, 1.0}}});
  CHECK(ch.user_blocked(0));
  CHECK_FALSE(ch.user_blocked(1));
  CHECK_FALSE(ch.all_blocked());
  CHECK(ch.kappa(0, 0) == 0.0);
  const ChannelSet behind = build_channel_set(g, {{{0.0, 0.0, -1.0}}});
  CHECK(behind.all_blocked());
}

TEST_CASE("degenerate positions are rejected") {
  const ArrayGeometry g = default_row(1);
  const Vec3 e = element_positions(g, 0)[17];
  CHECK_THROWS_AS(channel(g, 0, e), std::invalid_argument);
  CHECK_THROWS_AS(channel(g, 0, {e.x, e.y, 1e-7}), std::invalid_argument);
  CHECK_THROWS_AS(build_channel_set(g, {}), std::invalid_argument);
}

TEST_CASE("channel set caches for the default layout") {
  const ArrayGeometry g = default_row();
  const std::vector<UserPosition> users{{{-0.6, 0.0, 1.0}}, {{-0.4, 0.0, 1.1}}, {{0.7, 0.0, 0.9}}};
  const ChannelSet ch = build_channel_set(g, users);
  CHECK(ch.g.size() == 18);
  CHECK(ch.Ns == 256);
  // independent numpy evaluation of the same layout
  const double golden[6][3] = {{0.0248311, 0.0242108, 0.0122572}, {0.0735563, 0.0658477, 0.0269377},
                               {0.299883, 0.250414, 0.091729},    {0.105364, 0.129459, 0.342306},
                               {0.0311879, 0.0379079, 0.0758624}, {0.0140739, 0.016678, 0.0239907}};
  for (int s = 0; s < 6; ++s) {
    for (int m = 0; m < 3; ++m) {
      CHECK(ch.norm(s, m) == doctest::Approx(golden[s][m]).epsilon(1e-5));
      CHECK(ch.kappa(s, m) * ch.norm(s, m) == doctest::Approx(1.0).epsilon(1e-14));
      for (int k = 0; k < 3; ++k) {
        const std::complex<double> direct = ch.at(s, k).transpose() * ch.at(s, m).conjugate();
        CHECK(std::abs(ch.cross[s](k, m) - direct) < 1e-14);
      }
    }
  }
}

TEST_CASE("parallel channel set equals the serial reference") {
  const ArrayGeometry g = default_row(4);
  const std::vector<UserPosition> users{{{-0.6, 0.1, 1.0}}, {{0.2, -0.1, 0.8}}, {{1.1, 0.0, 1.4}}, {{0.0, 0.0, -1.0}}};
  const ChannelSet a = build_channel_set(g, users);
  const ChannelSet b = reference::build_channel_set(g, users);
  for (std::size_t i = 0; i < a.g.size(); ++i) CHECK((a.g[i] - b.g[i]).norm() <= 1e-15 * (1.0 + b.g[i].norm()));
  CHECK((a.kappa - b.kappa).norm() <= 1e-12 * b.kappa.norm());
}

TEST_CASE("per-element amplitude model stays close in the far region") {
  ArrayGeometry g = default_row(1);
  ArrayGeometry e = g;
  e.amplitude = AmplitudeModel::PerElement;
  const Vec3 c = g.center(0);
  const Vec3 p{c.x, c.y, 15.0};
  CHECK(channel(e, 0, p).norm() == doctest::Approx(channel(g, 0, p).norm()).epsilon(1e-2));
  const Vec3 q{c.x + 0.5, c.y, 0.4};
  CHECK(channel(e, 0, q).norm() != channel(g, 0, q).norm());
}
