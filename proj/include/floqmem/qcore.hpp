#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace floqmem {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

// Basis ordering used throughout: index 0 is the excited state |e>, index 1
// the ground state |g>, so that sigma_z = diag(1, -1).
namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
Mat2 raising();   // |e><g|
Mat2 lowering();  // |g><e|
}  // namespace pauli

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  Eigen::Vector3d vec() const { return {x, y, z}; }
  static BlochVector from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

// Validated 2x2 density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  static constexpr double hermiticity_tol = 1e-12;
  static constexpr double trace_tol = 1e-10;
  static constexpr double positivity_tol = 1e-10;

  DensityMatrix();  // maximally mixed
  explicit DensityMatrix(const Mat2& m);

  static DensityMatrix from_bloch(const BlochVector& r);
  static DensityMatrix pure(const Vec2& psi);

  const Mat2& matrix() const { return m_; }
  BlochVector bloch() const;
  cplx operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat2 m_;
};

struct HermitianEigen2 {
  std::array<double, 2> values;  // ascending
  Mat2 vectors;                  // columns are orthonormal eigenvectors
};

// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
HermitianEigen2 eigh(const Mat2& h);

double hermiticity_error(const Mat2& m);

// Bloch coordinates Tr(sigma_i m) of an arbitrary 2x2 matrix (real parts).
Eigen::Vector3d bloch_components(const Mat2& m);
Mat2 from_bloch_components(const Eigen::Vector3d& r);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
// Trace distance for raw Hermitian matrices, without density-matrix validation.
double trace_distance(const Mat2& a, const Mat2& b);

// Row-major vectorization: vec(rho) = (rho00, rho01, rho10, rho11).
Vec4 vectorize(const Mat2& m);
Mat2 unvectorize(const Vec4& v);

std::uint64_t splitmix64(std::uint64_t x);

// Seedable generator with reproducible substreams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng substream(std::uint64_t master, std::uint64_t task) {
    return Rng(master ^ splitmix64(task + 0x9e3779b97f4a7c15ULL));
  }

  double uniform();  // [0, 1)
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

Eigen::Vector3d random_unit_vector(Rng& rng);

struct OrthogonalPair {
  DensityMatrix plus;
  DensityMatrix minus;
  Eigen::Vector3d axis;  // Bloch direction of `plus`
};

// Antipodal pure states (n, -n) with n uniform on the Bloch sphere.
OrthogonalPair random_orthogonal_pair(Rng& rng);
OrthogonalPair orthogonal_pair(const Eigen::Vector3d& axis);

// Family of dynamical maps Phi_t acting on row-major vec(rho).
struct ProcessFamily {
  std::vector<double> times;
  std::vector<Mat4> maps;
};

Mat2 apply_map(const Mat4& map, const Mat2& rho);
// Real 3x3 linear part of the Bloch-space action: M_ij = Tr(sigma_i Phi(sigma_j)) / 2.
Eigen::Matrix3d bloch_linear_part(const Mat4& map);

// Elements <u_i|rho|u_j> in the orthonormal basis {u1, u2}.
Mat2 floquet_basis_elements(const DensityMatrix& rho, const Vec2& u1, const Vec2& u2);
Mat2 floquet_basis_elements(const Mat2& rho, const Vec2& u1, const Vec2& u2);

}  // namespace floqmem
