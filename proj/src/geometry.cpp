#include "xlhpe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "xlhpe/parallel.hpp"

namespace xlhpe {

namespace {

constexpr double kMinElementDistance = 1e-6;

double pattern_angle(double z, double r) { return std::acos(std::clamp(z / r, -1.0, 1.0)); }

void check_subarray_index(const ArrayGeometry& geom, int s) {
  if (s < 0 || s >= geom.S) {
    throw std::out_of_range("sub-array index " + std::to_string(s) + " outside [0, " +
                            std::to_string(geom.S) + ")");
  }
}

// Channel of one sub-array given its precomputed element positions.
Eigen::VectorXcd channel_from_elements(const ArrayGeometry& geom, const Vec3& ref,
                                       const std::vector<Vec3>& elements, const Vec3& p) {
  const double k = geom.wavenumber();
  const double r_ref = distance(p, ref);
  if (r_ref < kMinElementDistance) {
    throw std::invalid_argument("user coincides with the sub-array reference point");
  }
  const auto n = static_cast<Eigen::Index>(elements.size());
  Eigen::VectorXcd h(n);

  if (geom.amplitude == AmplitudeModel::SubArrayCenter) {
    const double amp = geom.lambda / (4.0 * std::numbers::pi * r_ref) *
                       std::sqrt(radiation_pattern(pattern_angle(p.z - ref.z, r_ref), geom.b));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = distance(p, elements[static_cast<size_t>(i)]);
      if (r < kMinElementDistance) throw std::invalid_argument("user coincides with an array element");
      h[i] = amp * std::polar(1.0, -k * r);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec3& e = elements[static_cast<size_t>(i)];
      const double r = distance(p, e);
      if (r < kMinElementDistance) throw std::invalid_argument("user coincides with an array element");
      const double amp = geom.lambda / (4.0 * std::numbers::pi * r) *
                         std::sqrt(radiation_pattern(pattern_angle(p.z - e.z, r), geom.b));
      h[i] = amp * std::polar(1.0, -k * r);
    }
  }
  return h;
}

// g_k^T conj(g_m)
std::complex<double> bilinear(const Eigen::VectorXcd& gk, const Eigen::VectorXcd& gm) {
  return gm.dot(gk);
}

void fill_caches_for(ChannelSet& ch, int s) {
  for (int m = 0; m < ch.M; ++m) {
    const double n = ch.at(s, m).norm();
    ch.norm(s, m) = n;
    ch.kappa(s, m) = n > 0.0 ? 1.0 / n : 0.0;
  }
  Eigen::MatrixXcd c(ch.M, ch.M);
  for (int k = 0; k < ch.M; ++k) {
    for (int m = 0; m < ch.M; ++m) c(k, m) = bilinear(ch.at(s, k), ch.at(s, m));
  }
  ch.cross[static_cast<size_t>(s)] = std::move(c);
}

ChannelSet empty_set(const ArrayGeometry& geom, int M) {
  ChannelSet ch;
  ch.S = geom.S;
  ch.M = M;
  ch.Ns = geom.elements_per_subarray();
  ch.g.resize(static_cast<size_t>(geom.S * M));
  ch.norm = Eigen::MatrixXd::Zero(geom.S, M);
  ch.kappa = Eigen::MatrixXd::Zero(geom.S, M);
  ch.cross.resize(static_cast<size_t>(geom.S));
  return ch;
}

}  // namespace

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

double ArrayGeometry::wavenumber() const { return 2.0 * std::numbers::pi / lambda; }

Vec3 ArrayGeometry::center(int s) const {
  check_subarray_index(*this, s);
  const Vec3& o = origins[static_cast<size_t>(s)];
  return {o.x + 0.5 * (Nx - 1) * d, o.y + 0.5 * (Ny - 1) * d, o.z};
}

void ArrayGeometry::validate() const {
  if (S < 1 || Nx < 1 || Ny < 1) throw std::invalid_argument("S, Nx and Ny must be >= 1");
  if (!(d > 0.0) || !(lambda > 0.0) || !(D > 0.0)) {
    throw std::invalid_argument("d, lambda and D must be positive");
  }
  if (!(b >= 0.0)) throw std::invalid_argument("boresight exponent b must be >= 0");
  if (origins.size() != static_cast<size_t>(S)) {
    throw std::invalid_argument("expected " + std::to_string(S) + " sub-array origins, got " +
                                std::to_string(origins.size()));
  }
  for (const auto& o : origins) {
    if (o.z != 0.0) throw std::invalid_argument("sub-array origins must lie on z = 0");
  }
  const double wx = (Nx - 1) * d;
  const double wy = (Ny - 1) * d;
  for (int i = 0; i < S; ++i) {
    for (int j = i + 1; j < S; ++j) {
      const Vec3& a = origins[static_cast<size_t>(i)];
      const Vec3& c = origins[static_cast<size_t>(j)];
      const bool overlap_x = a.x <= c.x + wx && c.x <= a.x + wx;
      const bool overlap_y = a.y <= c.y + wy && c.y <= a.y + wy;
      if (overlap_x && overlap_y) {
        throw std::invalid_argument("sub-arrays " + std::to_string(i) + " and " + std::to_string(j) +
                                    " overlap");
      }
    }
  }
}

ArrayGeometry ArrayGeometry::modular_row(int S, int Nx, int Ny, double d, double lambda, double D,
                                         double b) {
  ArrayGeometry g;
  g.S = S;
  g.Nx = Nx;
  g.Ny = Ny;
  g.d = d;
  g.lambda = lambda;
  g.D = D;
  g.b = b;
  const double pitch = Nx * d;
  for (int s = 0; s < S; ++s) {
    const double cx = (s - 0.5 * (S - 1)) * pitch;
    g.origins.push_back({cx - 0.5 * (Nx - 1) * d, -0.5 * (Ny - 1) * d, 0.0});
  }
  return g;
}

bool ChannelSet::user_blocked(int m) const { return (kappa.col(m).array() == 0.0).all(); }

bool ChannelSet::all_blocked() const { return (kappa.array() == 0.0).all(); }

ChannelSet ChannelSet::from_vectors(int S, int M, std::vector<Eigen::VectorXcd> vectors) {
  if (S < 1 || M < 1) throw std::invalid_argument("channel set needs S >= 1 and M >= 1");
  if (vectors.size() != static_cast<size_t>(S * M)) {
    throw std::invalid_argument("expected S*M channel vectors");
  }
  ChannelSet ch;
  ch.S = S;
  ch.M = M;
  ch.Ns = static_cast<int>(vectors.front().size());
  for (const auto& v : vectors) {
    if (v.size() != ch.Ns) throw std::invalid_argument("channel vectors differ in length");
  }
  ch.g = std::move(vectors);
  ch.norm = Eigen::MatrixXd::Zero(S, M);
  ch.kappa = Eigen::MatrixXd::Zero(S, M);
  ch.cross.resize(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) fill_caches_for(ch, s);
  return ch;
}

std::vector<Vec3> element_positions(const ArrayGeometry& geom, int s) {
  check_subarray_index(geom, s);
  const Vec3& o = geom.origins[static_cast<size_t>(s)];
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(geom.elements_per_subarray()));
  for (int i = 0; i < geom.Nx; ++i) {
    for (int j = 0; j < geom.Ny; ++j) pts.push_back({o.x + i * geom.d, o.y + j * geom.d, 0.0});
  }
  return pts;
}

double fraunhofer_distance(const ArrayGeometry& geom) {
  return 2.0 * geom.D * geom.D * (geom.S * geom.elements_per_subarray()) / geom.lambda;
}

double near_field_boundary(const ArrayGeometry& geom) { return fraunhofer_distance(geom) / 10.0; }

double radiation_pattern(double theta, double b) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(theta >= 0.0) || theta > half_pi) return 0.0;
  // cos(pi/2) is not exactly zero in floating point; pin the edge of the branch.
  const double c = theta == half_pi ? 0.0 : std::cos(theta);
  return 2.0 * (b + 1.0) * std::pow(c, b);
}

Eigen::VectorXcd channel(const ArrayGeometry& geom, int s, const Vec3& p) {
  check_subarray_index(geom, s);
  return channel_from_elements(geom, geom.center(s), element_positions(geom, s), p);
}

ElementCache::ElementCache(const ArrayGeometry& geom) : geom_(&geom) {
  for (int s = 0; s < geom.S; ++s) {
    elements_.push_back(element_positions(geom, s));
    centers_.push_back(geom.center(s));
  }
}

Eigen::VectorXcd ElementCache::channel(int s, const Vec3& p) const {
  check_subarray_index(*geom_, s);
  const auto i = static_cast<size_t>(s);
  return channel_from_elements(*geom_, centers_[i], elements_[i], p);
}

ChannelSet build_channel_set(const ArrayGeometry& geom, const std::vector<UserPosition>& users) {
  if (users.empty()) throw std::invalid_argument("channel set needs at least one user");
  const int M = static_cast<int>(users.size());
  ChannelSet ch = empty_set(geom, M);
  const ElementCache cache(geom);

  parallel_for(static_cast<std::ptrdiff_t>(geom.S) * M, [&](std::ptrdiff_t idx) {
    const auto s = static_cast<int>(idx / M);
    const auto m = static_cast<size_t>(idx % M);
    ch.g[static_cast<size_t>(idx)] = cache.channel(s, users[m].p);
  });
  parallel_for(geom.S, [&](std::ptrdiff_t s) { fill_caches_for(ch, static_cast<int>(s)); });
  return ch;
}

namespace reference {

ChannelSet build_channel_set(const ArrayGeometry& geom, const std::vector<UserPosition>& users) {
  if (users.empty()) throw std::invalid_argument("channel set needs at least one user");
  const int M = static_cast<int>(users.size());
  std::vector<Eigen::VectorXcd> vectors;
  vectors.reserve(static_cast<size_t>(geom.S * M));
  for (int s = 0; s < geom.S; ++s) {
    for (int m = 0; m < M; ++m) vectors.push_back(channel(geom, s, users[static_cast<size_t>(m)].p));
  }
  return ChannelSet::from_vectors(geom.S, M, std::move(vectors));
}

}  // namespace reference

}  // namespace xlhpe
