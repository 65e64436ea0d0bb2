#include "rdcdyn/structure.hpp"

#include "rdcdyn/log.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdcdyn {

namespace {

constexpr double kMinPeptideBond = 1.2;
constexpr double kMaxPeptideBond = 1.5;

// Standard backbone geometry (lengths in A, angles in degrees).
constexpr double kBondCN = 1.329;   // C'(i)-N(i+1)
constexpr double kBondNCa = 1.458;  // N-CA
constexpr double kBondCaC = 1.525;  // CA-C'
constexpr double kBondCO = 1.231;   // C'=O
constexpr double kBondNH = 1.02;    // N-H
constexpr double kBondCaHa = 1.09;  // CA-HA
constexpr double kAngleNCaC = 111.2;
constexpr double kAngleCaCN = 116.2;
constexpr double kAngleCNCa = 121.7;
constexpr double kAngleCaCO = 120.5;

// Position of the fourth atom given bond length, bond angle at c and the
// a-b-c-d torsion.
Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond,
                double angle_deg, double torsion_deg) {
  const double theta = angle_deg * kDegToRad;
  const double chi = torsion_deg * kDegToRad;
  const Vec3 bc = (c - b).normalized();
  const Vec3 n = ((b - a).cross(bc)).normalized();
  const Vec3 m = n.cross(bc);
  const Vec3 d2(-bond * std::cos(theta), bond * std::sin(theta) * std::cos(chi),
                bond * std::sin(theta) * std::sin(chi));
  return c + d2.x() * bc + d2.y() * m + d2.z() * n;
}

}  // namespace

std::string to_string(BackboneAtom a) {
  switch (a) {
    case BackboneAtom::N: return "N";
    case BackboneAtom::H: return "H";
    case BackboneAtom::C: return "C";
    case BackboneAtom::O: return "O";
    case BackboneAtom::CA: return "CA";
    case BackboneAtom::HA: return "HA";
  }
  return "?";
}

BackboneStructure::BackboneStructure(std::vector<Residue> residues, char chain)
    : residues_(std::move(residues)), chain_(chain) {
  for (std::size_t i = 1; i < residues_.size(); ++i) {
    if (residues_[i].index <= residues_[i - 1].index)
      throw std::invalid_argument("residue indices must strictly increase");
  }
  for (std::size_t i = 0; i + 1 < residues_.size(); ++i) {
    const Residue& cur = residues_[i];
    const Residue& nxt = residues_[i + 1];
    bool connected = nxt.index == cur.index + 1 && cur.has(BackboneAtom::C) &&
                     nxt.has(BackboneAtom::N);
    if (connected) {
      const double d =
          (nxt.atom(BackboneAtom::N) - cur.atom(BackboneAtom::C)).norm();
      connected = d >= kMinPeptideBond && d <= kMaxPeptideBond;
    }
    if (!connected) gaps_after_.insert(cur.index);
  }
}

const Residue* BackboneStructure::find(int index) const {
  auto it = std::lower_bound(
      residues_.begin(), residues_.end(), index,
      [](const Residue& r, int idx) { return r.index < idx; });
  if (it == residues_.end() || it->index != index) return nullptr;
  return &*it;
}

int BackboneStructure::position_of(int index) const {
  const Residue* r = find(index);
  return r ? static_cast<int>(r - residues_.data()) : -1;
}

BackboneStructure BackboneStructure::transformed(const Mat3& r,
                                                 const Vec3& t) const {
  std::vector<Residue> out = residues_;
  for (Residue& res : out)
    for (auto& a : res.atoms)
      if (a) a = r * *a + t;
  return BackboneStructure(std::move(out), chain_);
}

BackboneStructure BackboneStructure::with_residues(
    std::vector<Residue> residues) const {
  return BackboneStructure(std::move(residues), chain_);
}

BackboneStructure make_ideal_helix(int n_residues, double phi_deg,
                                   double psi_deg) {
  if (n_residues < 2)
    throw std::invalid_argument("helix needs at least two residues");
  std::vector<Residue> residues(n_residues);

  // Seed residue in the xy plane.
  Vec3 n(0, 0, 0);
  Vec3 ca(kBondNCa, 0, 0);
  const double open = (180.0 - kAngleNCaC) * kDegToRad;
  Vec3 c = ca + kBondCaC * Vec3(std::cos(open), std::sin(open), 0);

  for (int i = 0; i < n_residues; ++i) {
    Residue& res = residues[i];
    res.index = i + 1;
    res.name = "ALA";
    res.set_atom(BackboneAtom::N, n);
    res.set_atom(BackboneAtom::CA, ca);
    res.set_atom(BackboneAtom::C, c);
    res.set_atom(BackboneAtom::O,
                 place_atom(n, ca, c, kBondCO, kAngleCaCO, psi_deg + 180.0));

    const Vec3 u1 = (n - ca).normalized();
    const Vec3 u2 = (c - ca).normalized();
    const double cosang = u1.dot(u2);
    const double pa = (-1.0 / 3.0) / (1.0 + cosang);
    const double pb = std::sqrt(std::max(
        0.0, (1.0 - pa * pa * (2.0 + 2.0 * cosang)) / (1.0 - cosang * cosang)));
    res.set_atom(BackboneAtom::HA,
                 ca + kBondCaHa * (pa * (u1 + u2) + pb * u1.cross(u2)));

    if (i + 1 == n_residues) break;
    const Vec3 n_next = place_atom(n, ca, c, kBondCN, kAngleCaCN, psi_deg);
    const Vec3 ca_next = place_atom(ca, c, n_next, kBondNCa, kAngleCNCa, 180.0);
    const Vec3 c_next = place_atom(c, n_next, ca_next, kBondCaC, kAngleNCaC,
                                   phi_deg);
    residues[i + 1].set_atom(
        BackboneAtom::H,
        n_next + kBondNH * ((n_next - c).normalized() +
                            (n_next - ca_next).normalized())
                     .normalized());
    n = n_next;
    ca = ca_next;
    c = c_next;
  }
  return BackboneStructure(std::move(residues), 'A');
}

BackboneStructure extract_range(const BackboneStructure& s, DomainRange range) {
  std::vector<Residue> out;
  for (const Residue& r : s.residues())
    if (range.contains(r.index)) out.push_back(r);
  if (out.empty())
    throw std::invalid_argument("range selects no residues");
  return BackboneStructure(std::move(out), s.chain());
}

std::vector<VectorRecord> build_vectors(const BackboneStructure& s,
                                        const std::vector<VectorType>& types,
                                        DomainRange range) {
  std::vector<VectorRecord> records;
  int skipped = 0;

  auto emit = [&](int key, VectorType type, const Residue* from_res,
                  BackboneAtom from, const Residue* to_res, BackboneAtom to) {
    if (!from_res || !to_res || !from_res->has(from) || !to_res->has(to)) {
      ++skipped;
      return;
    }
    const Vec3 v = to_res->atom(to) - from_res->atom(from);
    records.push_back({key, type, v.normalized()});
  };

  for (const Residue& res : s.residues()) {
    if (!range.contains(res.index)) continue;
    const Residue* prev = s.find(res.index - 1);
    const bool prev_ok = prev && range.contains(prev->index) &&
                         !s.gap_after(prev->index);
    for (VectorType type : types) {
      switch (type) {
        case VectorType::N_H:
          emit(res.index, type, &res, BackboneAtom::N, &res, BackboneAtom::H);
          break;
        case VectorType::CA_HA:
          emit(res.index, type, &res, BackboneAtom::CA, &res,
               BackboneAtom::HA);
          break;
        case VectorType::C_N:
          if (prev_ok)
            emit(res.index, type, prev, BackboneAtom::C, &res,
                 BackboneAtom::N);
          break;
        case VectorType::C_H:
          if (prev_ok)
            emit(res.index, type, prev, BackboneAtom::C, &res,
                 BackboneAtom::H);
          break;
      }
    }
  }
  if (skipped > 0)
    log_info("build_vectors: skipped " + std::to_string(skipped) +
             " records with missing atoms");
  return records;
}

double dihedral(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 b1 = b - a, b2 = c - b, b3 = d - c;
  const Vec3 n1 = b1.cross(b2), n2 = b2.cross(b3);
  const double x = n1.dot(n2);
  const double y = b2.norm() * b1.dot(n2);
  return std::atan2(y, x) * kRadToDeg;
}

double dihedral_phi(const BackboneStructure& s, int residue) {
  const Residue* prev = s.find(residue - 1);
  const Residue* res = s.find(residue);
  if (!prev || !res || !prev->has(BackboneAtom::C) ||
      !res->has(BackboneAtom::N) || !res->has(BackboneAtom::CA) ||
      !res->has(BackboneAtom::C))
    throw std::invalid_argument("phi undefined at residue " +
                                std::to_string(residue));
  return dihedral(prev->atom(BackboneAtom::C), res->atom(BackboneAtom::N),
                  res->atom(BackboneAtom::CA), res->atom(BackboneAtom::C));
}

double dihedral_psi(const BackboneStructure& s, int residue) {
  const Residue* res = s.find(residue);
  const Residue* next = s.find(residue + 1);
  if (!res || !next || !res->has(BackboneAtom::N) ||
      !res->has(BackboneAtom::CA) || !res->has(BackboneAtom::C) ||
      !next->has(BackboneAtom::N))
    throw std::invalid_argument("psi undefined at residue " +
                                std::to_string(residue));
  return dihedral(res->atom(BackboneAtom::N), res->atom(BackboneAtom::CA),
                  res->atom(BackboneAtom::C), next->atom(BackboneAtom::N));
}

namespace {

// Shared body of rotate_phi / rotate_psi: rotates the listed atoms of
// `residue` plus every later residue about the axis through `origin`.
BackboneStructure rotate_tail(const BackboneStructure& s, int residue,
                              const Vec3& origin, const Vec3& axis,
                              double degrees,
                              const std::vector<BackboneAtom>& own_moved) {
  const Eigen::AngleAxisd rot(degrees * kDegToRad, axis.normalized());
  const int pos = s.position_of(residue);
  std::vector<Residue> out = s.residues();
  auto move = [&](std::optional<Vec3>& a) {
    if (a) a = origin + rot * (*a - origin);
  };
  for (BackboneAtom a : own_moved) move(out[pos].atoms[static_cast<int>(a)]);
  for (std::size_t i = pos + 1; i < out.size(); ++i)
    for (auto& a : out[i].atoms) move(a);
  return s.with_residues(std::move(out));
}

}  // namespace

BackboneStructure rotate_phi(const BackboneStructure& s, int residue,
                             double degrees) {
  dihedral_phi(s, residue);  // validates the defining atoms
  const Residue* res = s.find(residue);
  const Vec3 n = res->atom(BackboneAtom::N);
  const Vec3 ca = res->atom(BackboneAtom::CA);
  return rotate_tail(s, residue, n, ca - n, degrees,
                     {BackboneAtom::HA, BackboneAtom::C, BackboneAtom::O});
}

BackboneStructure rotate_psi(const BackboneStructure& s, int residue,
                             double degrees) {
  dihedral_psi(s, residue);
  const Residue* res = s.find(residue);
  const Vec3 ca = res->atom(BackboneAtom::CA);
  const Vec3 c = res->atom(BackboneAtom::C);
  return rotate_tail(s, residue, ca, c - ca, degrees, {BackboneAtom::O});
}

namespace {

void collect_pairs(const BackboneStructure& a, const BackboneStructure& b,
                   DomainRange range, std::vector<Vec3>& pa,
                   std::vector<Vec3>& pb) {
  const std::array<BackboneAtom, 3> kinds = {BackboneAtom::N, BackboneAtom::CA,
                                             BackboneAtom::C};
  for (int idx = range.start; idx <= range.end; ++idx) {
    const Residue* ra = a.find(idx);
    const Residue* rb = b.find(idx);
    if (!ra && !rb) continue;
    if (!ra || !rb)
      throw std::invalid_argument("residue " + std::to_string(idx) +
                                  " present in only one structure");
    for (BackboneAtom k : kinds) {
      if (ra->has(k) != rb->has(k))
        throw std::invalid_argument("atom sets differ at residue " +
                                    std::to_string(idx));
      if (ra->has(k)) {
        pa.push_back(ra->atom(k));
        pb.push_back(rb->atom(k));
      }
    }
  }
  if (pa.size() < 3)
    throw std::invalid_argument("fewer than three matched backbone atoms");
}

}  // namespace

KabschTransform kabsch_superpose(const BackboneStructure& a,
                                 const BackboneStructure& b,
                                 DomainRange range) {
  std::vector<Vec3> pa, pb;
  collect_pairs(a, b, range, pa, pb);
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (const Vec3& p : pa) ca += p;
  for (const Vec3& p : pb) cb += p;
  ca /= double(pa.size());
  cb /= double(pb.size());

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < pa.size(); ++i)
    h += (pa[i] - ca) * (pb[i] - cb).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double d =
      (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0
                                                                    : 1.0;
  KabschTransform out;
  out.r = svd.matrixV() * Vec3(1, 1, d).asDiagonal() *
          svd.matrixU().transpose();
  out.t = cb - out.r * ca;
  double acc = 0;
  for (std::size_t i = 0; i < pa.size(); ++i)
    acc += (out.r * pa[i] + out.t - pb[i]).squaredNorm();
  out.rmsd = std::sqrt(acc / double(pa.size()));
  return out;
}

double kabsch_rmsd(const BackboneStructure& a, const BackboneStructure& b,
                   DomainRange range) {
  return kabsch_superpose(a, b, range).rmsd;
}

double translation_only_rmsd(const BackboneStructure& a,
                             const BackboneStructure& b, DomainRange range) {
  std::vector<Vec3> pa, pb;
  collect_pairs(a, b, range, pa, pb);
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (const Vec3& p : pa) ca += p;
  for (const Vec3& p : pb) cb += p;
  ca /= double(pa.size());
  cb /= double(pb.size());
  double acc = 0;
  for (std::size_t i = 0; i < pa.size(); ++i)
    acc += ((pa[i] - ca) - (pb[i] - cb)).squaredNorm();
  return std::sqrt(acc / double(pa.size()));
}

Vec3 backbone_centroid(const BackboneStructure& s, DomainRange range) {
  Vec3 c = Vec3::Zero();
  int count = 0;
  const std::array<BackboneAtom, 3> kinds = {BackboneAtom::N, BackboneAtom::CA,
                                             BackboneAtom::C};
  for (const Residue& r : s.residues()) {
    if (!range.contains(r.index)) continue;
    for (BackboneAtom k : kinds)
      if (r.has(k)) {
        c += r.atom(k);
        ++count;
      }
  }
  if (count == 0)
    throw std::invalid_argument("no backbone atoms inside range");
  return c / double(count);
}

BackboneStructure reconstruct_amide_protons(const BackboneStructure& s) {
  std::vector<Residue> out = s.residues();
  int rebuilt = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    Residue& res = out[i];
    const Residue& prev = out[i - 1];
    if (res.has(BackboneAtom::H) || res.name == "PRO") continue;
    if (prev.index + 1 != res.index || s.gap_after(prev.index)) continue;
    if (!prev.has(BackboneAtom::C) || !res.has(BackboneAtom::N) ||
        !res.has(BackboneAtom::CA))
      continue;
    const Vec3 n = res.atom(BackboneAtom::N);
    const Vec3 dir = ((n - prev.atom(BackboneAtom::C)).normalized() +
                      (n - res.atom(BackboneAtom::CA)).normalized())
                         .normalized();
    res.set_atom(BackboneAtom::H, n + kBondNH * dir);
    ++rebuilt;
  }
  if (rebuilt > 0)
    log_info("reconstructed " + std::to_string(rebuilt) + " amide protons");
  return s.with_residues(std::move(out));
}

}  // namespace rdcdyn
