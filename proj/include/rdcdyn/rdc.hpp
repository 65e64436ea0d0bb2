#pragma once

#include "rdcdyn/saupe.hpp"
#include "rdcdyn/structure.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rdcdyn {

struct RdcKey {
  int residue = 0;
  VectorType type = VectorType::N_H;
  auto operator<=>(const RdcKey&) const = default;
};

struct RdcObservation {
  double value_hz = 0.0;
  std::optional<double> error_hz;
};

/// Assigned RDC observations for one alignment medium.
class RdcSet {
 public:
  RdcSet() = default;
  explicit RdcSet(std::string medium);

  const std::string& medium() const { return medium_; }

  /// Throws std::invalid_argument on duplicate keys.
  void insert(RdcKey key, RdcObservation obs);
  void insert_or_assign(RdcKey key, RdcObservation obs);

  const RdcObservation* find(RdcKey key) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

 private:
  std::string medium_ = "m";
  std::map<RdcKey, RdcObservation> data_;
};

/// An alignment medium named together with its order tensor in principal
/// form.
struct MediumSpec {
  std::string name;
  PrincipalFrame frame;
};

/// Discrete rigid-body states sharing a static domain, with relative
/// occupancies.
struct DynamicsModel {
  std::vector<BackboneStructure> states;
  std::vector<double> occupancies;
  DomainRange static_domain;
  DomainRange dynamic_domain;

  /// Checks sum(rho) = 1 within 1e-9, rho in [0,1], shared residue
  /// numbering, and that the static-domain backbone is identical across
  /// states within 1e-6 A. Throws std::invalid_argument on violation.
  void validate() const;
};

/// Back-calculated RDCs for every available vector of the requested types.
RdcSet simulate_rdcs(const BackboneStructure& s, const PrincipalFrame& frame,
                     const std::vector<VectorType>& types, DomainRange range,
                     const std::string& medium = "m");

/// Occupancy-weighted average over per-state sets. Keys outside the common
/// intersection are dropped (logged); an empty intersection is an error.
RdcSet average_rdcs(const std::vector<RdcSet>& sets,
                    const std::vector<double>& occupancies);

/// Independent uniform perturbation in [-half_width, half_width] per
/// observation; records half_width as the per-observation error bound.
/// Deterministic for a fixed seed.
RdcSet add_noise(const RdcSet& set, double half_width_hz, std::uint64_t seed);

/// Per-medium simulation of a discrete-state model: occupancy-weighted
/// average of per-state RDCs, then noise. Within one medium the same frame
/// applies to every state (homogeneous alignment). Per-medium noise streams
/// are derived from `seed` and the medium index.
std::vector<RdcSet> simulate_dynamics(const DynamicsModel& model,
                                      const std::vector<MediumSpec>& media,
                                      const std::vector<VectorType>& types,
                                      double noise_hz, std::uint64_t seed);

/// CSV form: "medium,residue,vector_type,value_hz,error_hz".
void write_rdc_csv(std::ostream& os, const std::vector<RdcSet>& sets);
void save_rdc_csv(const std::filesystem::path& path,
                  const std::vector<RdcSet>& sets);
std::vector<RdcSet> read_rdc_csv(std::istream& in);
std::vector<RdcSet> load_rdc_csv(const std::filesystem::path& path);

/// REDCAT-style listing: the two atom coordinates, the coupling, the error
/// bound and a comment per line. Observations without coordinates in `s`
/// are skipped.
void write_redcat(std::ostream& os, const BackboneStructure& s,
                  const RdcSet& set, double default_error_hz = 1.0);

}  // namespace rdcdyn
