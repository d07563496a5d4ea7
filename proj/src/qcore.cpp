#include "floqmem/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace floqmem {

namespace pauli {
Mat2 identity() { return Mat2::Identity(); }

Mat2 x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Mat2 y() {
  Mat2 m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

Mat2 z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

Mat2 raising() {
  Mat2 m = Mat2::Zero();
  m(0, 1) = 1.0;
  return m;
}

Mat2 lowering() {
  Mat2 m = Mat2::Zero();
  m(1, 0) = 1.0;
  return m;
}
}  // namespace pauli

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

double hermiticity_error(const Mat2& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

HermitianEigen2 eigh(const Mat2& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const cplx b = 0.5 * (h(0, 1) + std::conj(h(1, 0)));
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double r = std::hypot(half, std::abs(b));

  HermitianEigen2 out;
  out.values = {mean - r, mean + r};
  if (r == 0.0) {
    out.vectors = Mat2::Identity();
    return out;
  }
  // Eigenvector of the lower eigenvalue from the better conditioned row.
  Vec2 lo;
  if (half >= 0.0) {
    lo << -b, cplx(half + r);
  } else {
    lo << cplx(r - half), -std::conj(b);
  }
  lo.normalize();
  Vec2 hi;
  hi << -std::conj(lo(1)), std::conj(lo(0));
  out.vectors.col(0) = lo;
  out.vectors.col(1) = hi;
  return out;
}

Eigen::Vector3d bloch_components(const Mat2& m) {
  return {(m(0, 1) + m(1, 0)).real(), (cplx(0.0, 1.0) * (m(0, 1) - m(1, 0))).real(),
          (m(0, 0) - m(1, 1)).real()};
}

Mat2 from_bloch_components(const Eigen::Vector3d& r) {
  return 0.5 * (pauli::identity() + r(0) * pauli::x() + r(1) * pauli::y() + r(2) * pauli::z());
}

DensityMatrix::DensityMatrix() : m_(0.5 * Mat2::Identity()) {}

DensityMatrix::DensityMatrix(const Mat2& m) : m_(m) {
  if (!m.allFinite()) throw ValidationError("density matrix has non-finite entries");
  const double herm = hermiticity_error(m);
  if (herm > hermiticity_tol) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (deviation " << herm << ")";
    throw ValidationError(os.str());
  }
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream os;
    os << "density matrix trace is " << tr << ", expected 1";
    throw ValidationError(os.str());
  }
  const double lowest = eigh(m).values[0];
  if (lowest < -positivity_tol) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << lowest;
    throw ValidationError(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

DensityMatrix DensityMatrix::from_bloch(const BlochVector& r) {
  const double n = r.norm();
  if (n > 1.0 + positivity_tol) {
    std::ostringstream os;
    os << "Bloch vector norm " << n << " exceeds 1";
    throw ValidationError(os.str());
  }
  return DensityMatrix(from_bloch_components(r.vec()));
}

DensityMatrix DensityMatrix::pure(const Vec2& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ValidationError("cannot build a pure state from the zero vector");
  const Vec2 v = psi / n;
  return DensityMatrix(v * v.adjoint());
}

BlochVector DensityMatrix::bloch() const { return BlochVector::from(bloch_components(m_)); }

double trace_distance(const Mat2& a, const Mat2& b) {
  const Mat2 d = a - b;
  const double herm = hermiticity_error(d);
  if (herm > 1e-9) {
    std::ostringstream os;
    os << "trace distance requires Hermitian arguments (deviation " << herm << ")";
    throw ValidationError(os.str());
  }
  const HermitianEigen2 e = eigh(d);
  return 0.5 * (std::abs(e.values[0]) + std::abs(e.values[1]));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

Vec4 vectorize(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

Mat2 unvectorize(const Vec4& v) {
  Mat2 m;
  m << v(0), v(1), v(2), v(3);
  return m;
}

Mat2 apply_map(const Mat4& map, const Mat2& rho) { return unvectorize(map * vectorize(rho)); }

Eigen::Matrix3d bloch_linear_part(const Mat4& map) {
  const Mat2 basis[3] = {pauli::x(), pauli::y(), pauli::z()};
  Eigen::Matrix3d m;
  for (int j = 0; j < 3; ++j) {
    const Mat2 out = apply_map(map, basis[j]);
    for (int i = 0; i < 3; ++i) m(i, j) = 0.5 * (basis[i] * out).trace().real();
  }
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Eigen::Vector3d random_unit_vector(Rng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

OrthogonalPair orthogonal_pair(const Eigen::Vector3d& axis) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw ValidationError("pair axis must be a nonzero vector");
  const Eigen::Vector3d u = axis / n;
  return {DensityMatrix(from_bloch_components(u)), DensityMatrix(from_bloch_components(-u)), u};
}

OrthogonalPair random_orthogonal_pair(Rng& rng) { return orthogonal_pair(random_unit_vector(rng)); }

Mat2 floquet_basis_elements(const Mat2& rho, const Vec2& u1, const Vec2& u2) {
  const double n1 = u1.squaredNorm();
  const double n2 = u2.squaredNorm();
  const double ov = std::abs(u1.dot(u2));
  if (std::abs(n1 - 1.0) > 1e-10 || std::abs(n2 - 1.0) > 1e-10 || ov > 1e-10) {
    std::ostringstream os;
    os << "Floquet basis is not orthonormal (norms " << n1 << ", " << n2 << ", overlap " << ov
       << ")";
    throw ValidationError(os.str());
  }
  Mat2 u;
  u.col(0) = u1;
  u.col(1) = u2;
  return u.adjoint() * rho * u;
}

Mat2 floquet_basis_elements(const DensityMatrix& rho, const Vec2& u1, const Vec2& u2) {
  return floquet_basis_elements(rho.matrix(), u1, u2);
}

}  // namespace floqmem
