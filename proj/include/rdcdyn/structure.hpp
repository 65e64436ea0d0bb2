#pragma once

#include "rdcdyn/saupe.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rdcdyn {

/// Backbone atoms tracked per residue. C is the carbonyl carbon (C').
enum class BackboneAtom { N, H, C, O, CA, HA };

/// Iteration (and PDB output) order: N, CA, C, O, then protons.
inline constexpr std::array<BackboneAtom, 6> kBackboneAtoms = {
    BackboneAtom::N, BackboneAtom::CA, BackboneAtom::C,
    BackboneAtom::O, BackboneAtom::H,  BackboneAtom::HA};

std::string to_string(BackboneAtom a);

struct Residue {
  int index = 0;  // PDB residue sequence number
  std::string name = "ALA";
  std::array<std::optional<Vec3>, 6> atoms;

  bool has(BackboneAtom a) const {
    return atoms[static_cast<int>(a)].has_value();
  }
  const Vec3& atom(BackboneAtom a) const {
    return *atoms[static_cast<int>(a)];
  }
  void set_atom(BackboneAtom a, const Vec3& p) {
    atoms[static_cast<int>(a)] = p;
  }
};

/// Inclusive residue index range.
struct DomainRange {
  int start = 0;
  int end = 0;
  bool contains(int r) const { return r >= start && r <= end; }
};

/// One internuclear unit vector keyed by (residue, type). C'-N and C'-H
/// vectors involve the carbonyl of the preceding residue and are keyed on
/// the amide-bearing residue.
struct VectorRecord {
  int residue = 0;
  VectorType type = VectorType::N_H;
  Vec3 v = Vec3::Zero();
};

/// Ordered backbone residues of a single chain. Immutable after
/// construction; mutating operations return new values. Chain breaks are
/// detected at construction from the C'(i)-N(i+1) distance (covalent range
/// [1.2, 1.5] A) and from non-consecutive residue numbering.
class BackboneStructure {
 public:
  BackboneStructure() = default;
  explicit BackboneStructure(std::vector<Residue> residues, char chain = 'A');

  const std::vector<Residue>& residues() const { return residues_; }
  char chain() const { return chain_; }
  bool empty() const { return residues_.empty(); }
  int size() const { return static_cast<int>(residues_.size()); }

  /// Residue by sequence number, or nullptr.
  const Residue* find(int index) const;
  int position_of(int index) const;  // position in residues(), or -1

  int first_index() const { return residues_.front().index; }
  int last_index() const { return residues_.back().index; }
  DomainRange full_range() const { return {first_index(), last_index()}; }

  /// True when a chain break follows the residue with this sequence number.
  bool gap_after(int index) const { return gaps_after_.count(index) > 0; }
  const std::set<int>& gaps() const { return gaps_after_; }

  BackboneStructure transformed(const Mat3& r, const Vec3& t) const;
  BackboneStructure with_residues(std::vector<Residue> residues) const;

 private:
  std::vector<Residue> residues_;
  char chain_ = 'A';
  std::set<int> gaps_after_;
};

/// Ideal poly-alanine helix (per-residue phi/psi, omega = 180) with amide
/// protons on residues 2..n and HA everywhere. Standard backbone geometry.
BackboneStructure make_ideal_helix(int n_residues, double phi_deg = -57.0,
                                   double psi_deg = -47.0);

/// Sub-structure covering `range` (residues copied verbatim).
BackboneStructure extract_range(const BackboneStructure& s, DomainRange range);

/// Internuclear unit vectors for the requested types, restricted to records
/// whose atoms all lie inside `range` and do not span a chain break. Missing
/// atoms skip the record (counted in one log line).
std::vector<VectorRecord> build_vectors(const BackboneStructure& s,
                                        const std::vector<VectorType>& types,
                                        DomainRange range);

/// Dihedral angle in degrees, IUPAC sign convention.
double dihedral(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double dihedral_phi(const BackboneStructure& s, int residue);
double dihedral_psi(const BackboneStructure& s, int residue);

/// Rigid rotation of everything C-terminal to the phi (N-CA) or psi (CA-C')
/// bond of `residue`, by `degrees` (the dihedral increases by `degrees`).
/// Throws std::invalid_argument when the dihedral's defining atoms are
/// absent (terminal residues).
BackboneStructure rotate_phi(const BackboneStructure& s, int residue,
                             double degrees);
BackboneStructure rotate_psi(const BackboneStructure& s, int residue,
                             double degrees);

struct KabschTransform {
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double rmsd = 0.0;
};

/// Optimal rotation+translation mapping `a` onto `b` over the backbone
/// (N, CA, C') atoms of `range`, with the residual RMSD in Angstrom.
KabschTransform kabsch_superpose(const BackboneStructure& a,
                                 const BackboneStructure& b,
                                 DomainRange range);

double kabsch_rmsd(const BackboneStructure& a, const BackboneStructure& b,
                   DomainRange range);

/// Minimal backbone RMSD allowing only translation (centroid alignment);
/// always >= kabsch_rmsd on the same inputs.
double translation_only_rmsd(const BackboneStructure& a,
                             const BackboneStructure& b, DomainRange range);

/// Centroid of the backbone (N, CA, C') atoms inside `range`.
Vec3 backbone_centroid(const BackboneStructure& s, DomainRange range);

/// Fill in missing amide protons from C'(i-1), N(i), CA(i) geometry
/// (1.02 A from N on the external bisector). Prolines and residues right
/// after a chain break are left alone.
BackboneStructure reconstruct_amide_protons(const BackboneStructure& s);

}  // namespace rdcdyn
