#include "rdcdyn/saupe.hpp"

#include "rdcdyn/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rdcdyn {

namespace {

// Gyromagnetic ratios in rad s^-1 T^-1. Only ratios matter: the table is
// anchored at D_max(N-H) = 24350 Hz for r(N-H) = 1.02 A.
constexpr double kGammaH = 26.7522128e7;
constexpr double kGammaC = 6.728284e7;
constexpr double kGammaN = -2.71261804e7;

constexpr double kDmaxNH = 24350.0;

double anchored_dmax(double gamma_a, double gamma_b, double r_angstrom) {
  const double ratio = (gamma_a * gamma_b) / (kGammaN * kGammaH);
  const double r3 = 1.02 / r_angstrom;
  return kDmaxNH * ratio * r3 * r3 * r3;
}

std::array<double, 4> make_default_dmax() {
  std::array<double, 4> d{};
  d[static_cast<int>(VectorType::C_N)] = anchored_dmax(kGammaC, kGammaN, 1.33);
  d[static_cast<int>(VectorType::N_H)] = kDmaxNH;
  d[static_cast<int>(VectorType::C_H)] = anchored_dmax(kGammaC, kGammaH, 2.04);
  d[static_cast<int>(VectorType::CA_HA)] =
      anchored_dmax(kGammaC, kGammaH, 1.09);
  return d;
}

std::array<double, 4>& dmax_table() {
  static std::array<double, 4> table = make_default_dmax();
  return table;
}

double wrap_half_open(double deg) {
  double x = std::fmod(deg + 180.0, 360.0);
  if (x < 0) x += 360.0;
  return x - 180.0;
}

}  // namespace

double dmax_hz(VectorType t) { return dmax_table()[static_cast<int>(t)]; }

void set_dmax_hz(VectorType t, double value) {
  dmax_table()[static_cast<int>(t)] = value;
}

std::string to_string(VectorType t) {
  switch (t) {
    case VectorType::C_N: return "C'-N";
    case VectorType::N_H: return "N-H";
    case VectorType::C_H: return "C'-H";
    case VectorType::CA_HA: return "CA-HA";
  }
  return "?";
}

VectorType vector_type_from_string(const std::string& s) {
  for (VectorType t : kAllVectorTypes)
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown vector type: '" + s + "'");
}

Mat3 EulerAngles::rotation() const {
  const double a = alpha * kDegToRad;
  const double b = beta * kDegToRad;
  const double g = gamma * kDegToRad;
  Mat3 rz_a, ry_b, rz_g;
  rz_a << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  ry_b << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  rz_g << std::cos(g), -std::sin(g), 0, std::sin(g), std::cos(g), 0, 0, 0, 1;
  return rz_a * ry_b * rz_g;
}

EulerAngles EulerAngles::canonical() const {
  return from_rotation(rotation());
}

EulerAngles EulerAngles::from_rotation(const Mat3& r) {
  EulerAngles e;
  const double sin_beta = std::hypot(r(0, 2), r(1, 2));
  e.beta = std::atan2(sin_beta, r(2, 2)) * kRadToDeg;
  if (sin_beta > 1e-9) {
    e.alpha = std::atan2(r(1, 2), r(0, 2)) * kRadToDeg;
    e.gamma = std::atan2(r(2, 1), -r(2, 0)) * kRadToDeg;
  } else if (r(2, 2) > 0) {
    // beta ~ 0: only alpha+gamma is determined; report gamma = 0.
    e.beta = 0.0;
    e.alpha = std::atan2(r(1, 0), r(0, 0)) * kRadToDeg;
    e.gamma = 0.0;
  } else {
    // beta ~ 180: only alpha-gamma is determined; report gamma = 0.
    e.beta = 180.0;
    e.alpha = std::atan2(-r(0, 1), -r(0, 0)) * kRadToDeg;
    e.gamma = 0.0;
  }
  e.alpha = wrap_half_open(e.alpha);
  e.gamma = wrap_half_open(e.gamma);
  return e;
}

SaupeTensor::SaupeTensor(double s_xx, double s_yy, double s_xy, double s_xz,
                         double s_yz)
    : s_xx_(s_xx), s_yy_(s_yy), s_xy_(s_xy), s_xz_(s_xz), s_yz_(s_yz) {
  // Physically meaningful order parameters lie in [-1, 1]; out-of-range
  // eigenvalues are only warned about. max|eigenvalue| <= frobenius norm,
  // and for a traceless tensor >= frobenius / sqrt(3), so the norm gives a
  // cheap conservative screen before the exact check.
  const double fro = frobenius_norm();
  if (fro > std::sqrt(1.5)) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(matrix(),
                                           Eigen::EigenvaluesOnly);
    const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
    if (max_abs > 1.0 + 1e-12)
      log_warning("order tensor eigenvalue " + std::to_string(max_abs) +
                  " outside [-1, 1]");
  }
}

SaupeTensor SaupeTensor::from_matrix(const Mat3& m, double tol) {
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * std::max(1.0, scale))
    throw std::invalid_argument("matrix is not symmetric");
  const double tr = m.trace();
  if (std::abs(tr) > tol * std::max(1.0, scale))
    throw std::invalid_argument("matrix is not traceless");
  const Mat3 s = 0.5 * (m + m.transpose()) - (tr / 3.0) * Mat3::Identity();
  return SaupeTensor(s(0, 0), s(1, 1), s(0, 1), s(0, 2), s(1, 2));
}

Mat3 SaupeTensor::matrix() const {
  Mat3 m;
  m << s_xx_, s_xy_, s_xz_, s_xy_, s_yy_, s_yz_, s_xz_, s_yz_, s_zz();
  return m;
}

double SaupeTensor::frobenius_norm() const { return matrix().norm(); }

SaupeTensor SaupeTensor::operator+(const SaupeTensor& o) const {
  return SaupeTensor(s_xx_ + o.s_xx_, s_yy_ + o.s_yy_, s_xy_ + o.s_xy_,
                     s_xz_ + o.s_xz_, s_yz_ + o.s_yz_);
}

SaupeTensor SaupeTensor::operator-(const SaupeTensor& o) const {
  return SaupeTensor(s_xx_ - o.s_xx_, s_yy_ - o.s_yy_, s_xy_ - o.s_xy_,
                     s_xz_ - o.s_xz_, s_yz_ - o.s_yz_);
}

SaupeTensor SaupeTensor::operator*(double k) const {
  return SaupeTensor(s_xx_ * k, s_yy_ * k, s_xy_ * k, s_xz_ * k, s_yz_ * k);
}

SaupeTensor tensor_from_principal(const PrincipalFrame& frame) {
  const double sum = frame.s_xx + frame.s_yy + frame.s_zz;
  if (std::abs(sum) > 1e-12)
    throw std::invalid_argument(
        "principal order parameters must sum to zero (got " +
        std::to_string(sum) + ")");
  const Mat3 r = frame.euler.rotation();
  const Mat3 d = Vec3(frame.s_xx, frame.s_yy, frame.s_zz).asDiagonal();
  return SaupeTensor::from_matrix(r * d * r.transpose(), 1e-6);
}

PrincipalFrame eigendecompose(const SaupeTensor& t) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(t.matrix());
  const Vec3 vals = es.eigenvalues();
  const Mat3 vecs = es.eigenvectors();

  std::array<int, 3> idx = {0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double da = std::abs(vals[a]), db = std::abs(vals[b]);
    if (std::abs(da - db) > 1e-12) return da > db;
    return vals[a] > vals[b];
  });
  // idx = {zz, yy, xx} by descending magnitude.
  const int iz = idx[0], iy = idx[1], ix = idx[2];

  auto sign_fixed = [](Vec3 v) {
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    return v[imax] < 0 ? Vec3(-v) : v;
  };
  const Vec3 vz = sign_fixed(vecs.col(iz));
  const Vec3 vy = sign_fixed(vecs.col(iy));
  const Vec3 vx = vy.cross(vz);

  Mat3 r;
  r.col(0) = vx;
  r.col(1) = vy;
  r.col(2) = vz;

  PrincipalFrame frame;
  frame.s_xx = vals[ix];
  frame.s_yy = vals[iy];
  frame.s_zz = vals[iz];
  frame.euler = EulerAngles::from_rotation(r);
  return frame;
}

double compute_rdc(const SaupeTensor& t, const Vec3& v, VectorType type) {
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("internuclear vector is not unit length");
  return dmax_hz(type) * v.dot(t.matrix() * v);
}

double gdo(const SaupeTensor& t) {
  return std::sqrt(2.0 / 3.0) * t.frobenius_norm();
}

SaupeTensor rotate_tensor(const SaupeTensor& t, const EulerAngles& e) {
  const Mat3 r = e.rotation();
  return SaupeTensor::from_matrix(r * t.matrix() * r.transpose(), 1e-6);
}

double asymmetry(const SaupeTensor& t) {
  const PrincipalFrame f = eigendecompose(t);
  if (std::abs(f.s_zz) < 1e-300) return 0.0;
  const double eta = (f.s_xx - f.s_yy) / f.s_zz;
  return std::clamp(eta, 0.0, 1.0);
}

std::vector<SfPoint> sf_projection(const SaupeTensor& t) {
  const PrincipalFrame f = eigendecompose(t);
  const Mat3 r = f.euler.rotation();
  const std::array<std::string, 3> labels = {"Sxx", "Syy", "Szz"};
  std::vector<SfPoint> points;
  points.reserve(6);
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) {
      const Vec3 v = sign * r.col(axis);
      SfPoint p;
      p.axis = labels[axis];
      p.latitude_deg = std::asin(std::clamp(v.z(), -1.0, 1.0)) * kRadToDeg;
      p.longitude_deg = std::atan2(v.y(), v.x()) * kRadToDeg;
      p.x = p.longitude_deg * std::cos(p.latitude_deg * kDegToRad);
      p.y = p.latitude_deg;
      points.push_back(p);
    }
  }
  return points;
}

void write_sf_csv(std::ostream& os, const std::vector<SfPoint>& points) {
  os << "label,longitude_deg,latitude_deg,x_sinusoidal,y_sinusoidal\n";
  char buf[160];
  for (const SfPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g\n",
                  p.axis.c_str(), p.longitude_deg, p.latitude_deg, p.x, p.y);
    os << buf;
  }
}

std::string to_text(const SaupeTensor& t) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g %.12g %.12g", t.s_xx(),
                t.s_yy(), t.s_xy(), t.s_xz(), t.s_yz());
  return buf;
}

SaupeTensor tensor_from_text(const std::string& line) {
  std::istringstream in(line);
  double v[5];
  for (double& x : v)
    if (!(in >> x))
      throw std::invalid_argument("expected five tensor elements: '" + line +
                                  "'");
  return SaupeTensor(v[0], v[1], v[2], v[3], v[4]);
}

}  // namespace rdcdyn
