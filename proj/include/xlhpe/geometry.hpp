#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace xlhpe {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
double norm(const Vec3& v);
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// How the free-space amplitude and the pattern angle are referenced.
// SubArrayCenter uses one amplitude per (sub-array, user) pair measured from the
// sub-array's geometric center; PerElement evaluates both per antenna element.
enum class AmplitudeModel { SubArrayCenter, PerElement };

/// Modular uniform planar array lying on the z = 0 plane.
///
/// `origins[s]` is the position of element (0, 0) of sub-array s; element (i, j)
/// sits at origins[s] + (i d, j d, 0).
struct ArrayGeometry {
  int S = 6;
  int Nx = 32;
  int Ny = 8;
  double d = 0.05;       // element spacing [m]
  double lambda = 0.1;   // carrier wavelength [m]
  double D = 0.025;      // largest element dimension [m]
  double b = 2.0;        // boresight gain exponent
  std::vector<Vec3> origins;
  AmplitudeModel amplitude = AmplitudeModel::SubArrayCenter;

  int elements_per_subarray() const { return Nx * Ny; }
  double wavenumber() const;
  Vec3 center(int s) const;

  /// Throws std::invalid_argument when an invariant is violated (sizes, positive
  /// lengths, z = 0 origins, overlapping sub-array footprints).
  void validate() const;

  /// S contiguous sub-arrays in a single row along x, centered on the origin.
  static ArrayGeometry modular_row(int S, int Nx, int Ny, double d, double lambda, double D, double b);
};

struct UserPosition {
  Vec3 p;
  int vr_label = 1;
};

/// Near-field channels for every (sub-array, user) pair, with the cached
/// quantities the optimizer needs.
struct ChannelSet {
  int S = 0;
  int M = 0;
  int Ns = 0;
  std::vector<Eigen::VectorXcd> g;     // index s * M + m
  Eigen::MatrixXd norm;                // S x M
  Eigen::MatrixXd kappa;               // S x M, 0 for blocked pairs
  std::vector<Eigen::MatrixXcd> cross; // per s: cross[s](k, m) = g_{s,k}^T conj(g_{s,m})

  const Eigen::VectorXcd& at(int s, int m) const { return g[static_cast<size_t>(s * M + m)]; }
  bool blocked(int s, int m) const { return kappa(s, m) == 0.0; }
  bool user_blocked(int m) const;
  bool all_blocked() const;

  /// Assembles a set from raw vectors (index s * M + m) and fills the caches.
  static ChannelSet from_vectors(int S, int M, std::vector<Eigen::VectorXcd> vectors);
};

/// Element positions of sub-array s, row-major over (x index, y index).
std::vector<Vec3> element_positions(const ArrayGeometry& geom, int s);

double fraunhofer_distance(const ArrayGeometry& geom);
/// Radiative near-field service boundary: one tenth of the Fraunhofer distance.
double near_field_boundary(const ArrayGeometry& geom);

/// Cosine element pattern 2(b+1) cos^b(theta) on [0, pi/2], zero elsewhere.
double radiation_pattern(double theta, double b);

/// Channel vector from sub-array s to a user at p (length Ns).
/// Throws std::invalid_argument if p lies within 1e-6 m of an element or of
/// the reference point.
Eigen::VectorXcd channel(const ArrayGeometry& geom, int s, const Vec3& p);

/// Element positions and reference points precomputed for repeated channel
/// evaluation (channel sets, probe rasters).
class ElementCache {
 public:
  explicit ElementCache(const ArrayGeometry& geom);
  Eigen::VectorXcd channel(int s, const Vec3& p) const;

 private:
  const ArrayGeometry* geom_;
  std::vector<std::vector<Vec3>> elements_;
  std::vector<Vec3> centers_;
};

/// OpenMP kernel over the S*M pairs. Throws on an empty user list.
ChannelSet build_channel_set(const ArrayGeometry& geom, const std::vector<UserPosition>& users);

namespace reference {
/// Serial pair-by-pair construction through channel(); kept as the test oracle
/// for the parallel kernel.
ChannelSet build_channel_set(const ArrayGeometry& geom, const std::vector<UserPosition>& users);
}  // namespace reference

}  // namespace xlhpe
