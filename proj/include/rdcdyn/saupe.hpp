#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace rdcdyn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

/// Internuclear vector species an RDC observation can refer to.
enum class VectorType { C_N, N_H, C_H, CA_HA };

inline constexpr std::array<VectorType, 4> kAllVectorTypes = {
    VectorType::C_N, VectorType::N_H, VectorType::C_H, VectorType::CA_HA};

/// Maximal dipolar coupling for a vector type, in Hz. The N-H value anchors
/// the table at 24350 Hz; the others follow from the gyromagnetic ratios and
/// the standard bond lengths r(C'-N)=1.33, r(C'-H)=2.04, r(CA-HA)=1.09 vs
/// r(N-H)=1.02 A. C'-H and CA-HA come out negative (positive gamma product).
double dmax_hz(VectorType t);

/// Override one entry of the D_max table (set once at startup).
void set_dmax_hz(VectorType t, double value);

std::string to_string(VectorType t);
VectorType vector_type_from_string(const std::string& s);

/// Active z-y-z Euler rotation, angles in degrees:
///   R = Rz(alpha) * Ry(beta) * Rz(gamma)
/// Canonical ranges: alpha, gamma in [-180, 180), beta in [0, 180].
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Mat3 rotation() const;
  EulerAngles canonical() const;
  static EulerAngles from_rotation(const Mat3& r);
};

/// Symmetric traceless order tensor stored as its five independent elements;
/// s_zz is always derived as -(s_xx + s_yy).
class SaupeTensor {
 public:
  SaupeTensor() = default;
  SaupeTensor(double s_xx, double s_yy, double s_xy, double s_xz, double s_yz);

  /// Build from a full 3x3 matrix. Throws std::invalid_argument if the input
  /// is not symmetric traceless within `tol` (relative to the largest
  /// element); residual asymmetry/trace is projected out.
  static SaupeTensor from_matrix(const Mat3& m, double tol = 1e-8);

  double s_xx() const { return s_xx_; }
  double s_yy() const { return s_yy_; }
  double s_zz() const { return -s_xx_ - s_yy_; }
  double s_xy() const { return s_xy_; }
  double s_xz() const { return s_xz_; }
  double s_yz() const { return s_yz_; }

  Mat3 matrix() const;
  double frobenius_norm() const;

  SaupeTensor operator+(const SaupeTensor& o) const;
  SaupeTensor operator-(const SaupeTensor& o) const;
  SaupeTensor operator*(double k) const;

 private:
  double s_xx_ = 0.0, s_yy_ = 0.0, s_xy_ = 0.0, s_xz_ = 0.0, s_yz_ = 0.0;
};

inline SaupeTensor operator*(double k, const SaupeTensor& t) { return t * k; }

/// Principal order parameters plus the rotation carrying the principal frame
/// into the molecular frame. After canonicalization |s_zz| >= |s_yy| >= |s_xx|.
struct PrincipalFrame {
  double s_xx = 0.0;
  double s_yy = 0.0;
  double s_zz = 0.0;
  EulerAngles euler;
};

/// S = R * diag(s_xx, s_yy, s_zz) * R^T with R = euler.rotation().
/// Throws std::invalid_argument when the order parameters do not sum to zero
/// within 1e-12.
SaupeTensor tensor_from_principal(const PrincipalFrame& frame);

/// Inverse of tensor_from_principal. Eigenvalues are ordered by descending
/// magnitude (|s_zz| >= |s_yy| >= |s_xx|); magnitude ties within 1e-12 break
/// by signed value descending. Eigenvector signs are fixed so each axis has
/// its largest component positive and the frame is right-handed.
PrincipalFrame eigendecompose(const SaupeTensor& t);

/// D = D_max(type) * v^T S v. `v` must be unit length within 1e-9.
double compute_rdc(const SaupeTensor& t, const Vec3& v, VectorType type);

/// General degree of order: sqrt(2/3 * sum_ij s_ij^2). Rotation invariant.
double gdo(const SaupeTensor& t);

/// R(e) * S * R(e)^T.
SaupeTensor rotate_tensor(const SaupeTensor& t, const EulerAngles& e);

/// Asymmetry eta = (s_xx - s_yy) / s_zz in the canonical principal frame,
/// in [0, 1]; 0 for axially symmetric tensors and for the zero tensor.
double asymmetry(const SaupeTensor& t);

/// One principal-axis direction mapped through the sinusoidal
/// (Sanson-Flamsteed) projection: x = longitude * cos(latitude), y = latitude,
/// all in degrees.
struct SfPoint {
  std::string axis;  // "Sxx", "Syy" or "Szz"
  double longitude_deg = 0.0;
  double latitude_deg = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Projects the three principal axes (both hemispheres, six points total).
std::vector<SfPoint> sf_projection(const SaupeTensor& t);

void write_sf_csv(std::ostream& os, const std::vector<SfPoint>& points);

/// Five-element text form "s_xx s_yy s_xy s_xz s_yz" (REDCAT-style line).
std::string to_text(const SaupeTensor& t);
SaupeTensor tensor_from_text(const std::string& line);

}  // namespace rdcdyn
