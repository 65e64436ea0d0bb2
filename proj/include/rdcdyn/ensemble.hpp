#pragma once

#include "rdcdyn/state_solver.hpp"
#include "rdcdyn/structure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rdcdyn {

/// A reconstructed conformational ensemble: the shared static domain plus
/// one rotated dynamic-domain copy per state.
struct Ensemble {
  BackboneStructure static_domain;
  struct State {
    BackboneStructure dynamic_domain;
    double occupancy = 0.0;
  };
  std::vector<State> states;
  std::string solution_id;
  std::string anchors_id;
};

/// Rotates the dynamic domain into each recovered state about the static
/// domain's backbone centroid. The solution's Euler angles describe the
/// anchor-tensor transformation; the equivalent coordinate rotation is its
/// transpose. `structure_frame_id`, when non-empty, must match the
/// solution's frame id.
Ensemble assemble(const BackboneStructure& static_domain,
                  const BackboneStructure& dynamic_domain,
                  const StateSolution& solution,
                  const std::string& structure_frame_id = "");

struct ValidationThresholds {
  double static_rmsd_max = 2.0;     // A
  double state_rmsd_max = 2.0;      // A
  double occupancy_error_max = 0.2;
};

struct ValidationReport {
  double static_rmsd = 0.0;  // Kabsch superposition of the static domains
  struct StateEntry {
    int reconstructed_index = 0;  // index into ensemble.states
    int target_index = -1;        // -1: unmatched (phantom)
    double translation_rmsd = 0.0;  // translation-only, upper bound
    double kabsch_rmsd = 0.0;       // full superposition, for reference
    double occupancy_reconstructed = 0.0;
    double occupancy_target = 0.0;
  };
  std::vector<StateEntry> states;
  bool upper_bound = true;  // translation-only values are upper bounds
  bool pass = false;
};

/// Three-step validation: superimpose the target's static domain onto the
/// reconstruction (step 2), carry the target's states along, then per state
/// report the translation-only backbone RMSD (step 3). States are matched
/// by the occupancy-weighted minimal total RMSD over all assignments
/// (exhaustive, n <= 6). Throws std::invalid_argument on residue-range
/// mismatch.
ValidationReport validate(const Ensemble& reconstruction,
                          const Ensemble& target,
                          const ValidationThresholds& thresholds = {});

/// Multi-model PDB: one MODEL per state (static domain + rotated dynamic
/// domain), state occupancy stored in the B-factor column.
void write_ensemble_pdb(std::ostream& os, const Ensemble& ensemble);
void save_ensemble_pdb(const std::filesystem::path& path,
                       const Ensemble& ensemble);

void write_validation_json(std::ostream& os, const ValidationReport& report);

}  // namespace rdcdyn
