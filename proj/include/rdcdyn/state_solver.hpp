#pragma once

#include "rdcdyn/saupe.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdcdyn {

/// Per-medium pair of the anchor tensor (static-domain fit, i.e. what the
/// dynamic domain would show if rigidly fixed) and the observed averaged
/// tensor (dynamic-domain fit against the averaged couplings). Both live in
/// the same molecular frame, labelled by frame_id.
struct AnchorSet {
  struct Entry {
    std::string medium;
    SaupeTensor anchor;
    SaupeTensor observed;
  };
  std::vector<Entry> media;
  std::string frame_id;
};

struct SolvedState {
  EulerAngles euler;
  double occupancy = 0.0;
};

struct StateSolution {
  int n_states = 0;
  std::vector<SolvedState> states;  // sorted by descending occupancy
  double objective = 0.0;           // dimensionless sum of squared elements
  double hz_minimum = 0.0;          // sqrt(objective) * D_max(N-H)

  struct Diagnostics {
    int starts_tried = 0;
    int converged_starts = 0;
    std::vector<int> phantom_states;  // indices with occupancy below floor
    std::vector<std::string> notes;
    struct Attempt {
      int n = 0;
      double hz_minimum = 0.0;
      bool satisfied = false;
    };
    std::vector<Attempt> attempts;  // parsimonious search history
    bool satisfied = true;
  } diagnostics;

  std::string frame_id;
};

struct SolverConfig {
  int starts = 64;
  int max_iterations = 250;
  double occupancy_floor = 0.05;  // phantom-state reporting threshold
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

struct feasibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solvability gate: m alignment media provide 5m equations, n states need
/// 4n-1 parameters, so 5m >= 4n-1 must hold.
bool feasible(int media, int states);

/// Occupancy-weighted sum of rotated anchors per medium:
///   sum_i rho_i R(e_i) S_a R(e_i)^T.
std::vector<SaupeTensor> predicted_average(const AnchorSet& anchors,
                                           const std::vector<EulerAngles>& e,
                                           const std::vector<double>& rho);

/// Objective: sum over media of the squared elements of
/// (observed - predicted_average). `rho` holds all n occupancies
/// (sum = 1 within 1e-9).
double objective(const AnchorSet& anchors, const std::vector<EulerAngles>& e,
                 const std::vector<double>& rho);

/// Objective value expressed in Hz on the N-H scale.
double hz_scale(double objective_value);

/// Multi-start projected Levenberg-Marquardt over 4n-1 parameters (three
/// Euler angles per state, n-1 free occupancies with the last implied).
/// Deterministic for a fixed config. Throws feasibility_error when
/// 5m < 4n-1 and convergence_error when no start converges.
StateSolution solve(const AnchorSet& anchors, int n,
                    const SolverConfig& config = {});

/// Escalates n = 2, 3, ... until hz_minimum <= noise_hz (or feasibility /
/// max_n stops the search), then eliminates phantom states one at a time as
/// long as the reduced model still satisfies the noise level. When nothing
/// satisfies, the best attempt is returned with diagnostics.satisfied =
/// false.
StateSolution parsimonious_solve(const AnchorSet& anchors, int max_n,
                                 double noise_hz,
                                 const SolverConfig& config = {});

struct DegeneracyOptions {
  double eta_threshold = 0.1;
  double axis_threshold_deg = 10.0;
};

/// Flags pathological averaging: every medium's observed tensor nearly
/// axially symmetric (eta below threshold) with all s_zz axes aligned
/// within the angular threshold. Needs >= 2 media.
struct DegeneracyReport {
  struct MediumEntry {
    std::string medium;
    double eta = 0.0;
    Vec3 szz_axis = Vec3::UnitZ();
  };
  std::vector<MediumEntry> media;
  double max_axis_angle_deg = 0.0;
  bool all_symmetric = false;
  bool axes_shared = false;
  bool flagged = false;
};

DegeneracyReport degeneracy_check(const AnchorSet& anchors,
                                  const DegeneracyOptions& options = {});

void write_solution_json(std::ostream& os, const StateSolution& solution);

/// One CSV row per run for batch sweeps (header in solution_csv_header()).
std::string solution_csv_header();
std::string solution_csv_row(const std::string& run_id,
                             const StateSolution& solution);

}  // namespace rdcdyn
