#include "rdcdyn/ensemble.hpp"

#include "rdcdyn/pdb.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace rdcdyn {

Ensemble assemble(const BackboneStructure& static_domain,
                  const BackboneStructure& dynamic_domain,
                  const StateSolution& solution,
                  const std::string& structure_frame_id) {
  if (!structure_frame_id.empty() && !solution.frame_id.empty() &&
      structure_frame_id != solution.frame_id)
    throw std::invalid_argument("frame mismatch: structures are in '" +
                                structure_frame_id + "', solution is in '" +
                                solution.frame_id + "'");

  const Vec3 origin =
      backbone_centroid(static_domain, static_domain.full_range());

  Ensemble ensemble;
  ensemble.static_domain = static_domain;
  ensemble.anchors_id = solution.frame_id;
  for (const SolvedState& state : solution.states) {
    const Mat3 r = state.euler.rotation().transpose();
    Ensemble::State out;
    out.dynamic_domain = dynamic_domain.transformed(r, origin - r * origin);
    out.occupancy = state.occupancy;
    ensemble.states.push_back(std::move(out));
  }
  return ensemble;
}

namespace {

void require_same_span(const BackboneStructure& a, const BackboneStructure& b,
                       const char* what) {
  if (a.first_index() != b.first_index() || a.last_index() != b.last_index())
    throw std::invalid_argument(std::string("residue-range mismatch in ") +
                                what);
}

}  // namespace

ValidationReport validate(const Ensemble& reconstruction,
                          const Ensemble& target,
                          const ValidationThresholds& thresholds) {
  require_same_span(reconstruction.static_domain, target.static_domain,
                    "static domain");
  for (const Ensemble::State& s : target.states)
    require_same_span(reconstruction.states.front().dynamic_domain,
                      s.dynamic_domain, "dynamic domain");

  ValidationReport report;

  // Step 2: bring the target into the reconstruction's frame via the static
  // domain.
  const KabschTransform onto = kabsch_superpose(
      target.static_domain, reconstruction.static_domain,
      target.static_domain.full_range());
  report.static_rmsd = onto.rmsd;

  std::vector<BackboneStructure> moved_targets;
  for (const Ensemble::State& s : target.states)
    moved_targets.push_back(s.dynamic_domain.transformed(onto.r, onto.t));

  // Step 3: translation-only RMSD per matched state pair.
  const int n_r = static_cast<int>(reconstruction.states.size());
  const int n_t = static_cast<int>(moved_targets.size());
  const DomainRange dyn_span =
      reconstruction.states.front().dynamic_domain.full_range();

  std::vector<std::vector<double>> cost(n_r, std::vector<double>(n_t));
  for (int r = 0; r < n_r; ++r)
    for (int t = 0; t < n_t; ++t)
      cost[r][t] = translation_only_rmsd(
          reconstruction.states[r].dynamic_domain, moved_targets[t], dyn_span);

  // Exhaustive assignment (n <= 6): permute the larger side.
  std::vector<int> best_match(n_r, -1);
  double best_total = std::numeric_limits<double>::infinity();
  if (n_r >= n_t) {
    std::vector<int> perm(n_r);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0;
      for (int t = 0; t < n_t; ++t) total += cost[perm[t]][t];
      if (total < best_total) {
        best_total = total;
        std::fill(best_match.begin(), best_match.end(), -1);
        for (int t = 0; t < n_t; ++t) best_match[perm[t]] = t;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<int> perm(n_t);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0;
      for (int r = 0; r < n_r; ++r) total += cost[r][perm[r]];
      if (total < best_total) {
        best_total = total;
        for (int r = 0; r < n_r; ++r) best_match[r] = perm[r];
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  bool pass = report.static_rmsd <= thresholds.static_rmsd_max;
  for (int r = 0; r < n_r; ++r) {
    ValidationReport::StateEntry entry;
    entry.reconstructed_index = r;
    entry.target_index = best_match[r];
    entry.occupancy_reconstructed = reconstruction.states[r].occupancy;
    if (best_match[r] >= 0) {
      entry.translation_rmsd = cost[r][best_match[r]];
      entry.kabsch_rmsd =
          kabsch_rmsd(reconstruction.states[r].dynamic_domain,
                      moved_targets[best_match[r]], dyn_span);
      entry.occupancy_target = target.states[best_match[r]].occupancy;
      if (entry.translation_rmsd > thresholds.state_rmsd_max ||
          std::abs(entry.occupancy_reconstructed - entry.occupancy_target) >
              thresholds.occupancy_error_max)
        pass = false;
    }
    report.states.push_back(entry);
  }
  if (n_r < n_t) pass = false;  // some target state has no reconstruction
  report.pass = pass;
  return report;
}

void write_ensemble_pdb(std::ostream& os, const Ensemble& ensemble) {
  os << "REMARK   6 STATE OCCUPANCY IS STORED IN THE B-FACTOR COLUMN\n";
  int model = 1;
  for (const Ensemble::State& state : ensemble.states) {
    os << "MODEL     " << model++ << "\n";
    int serial = 1;
    write_pdb_atoms(os, ensemble.static_domain, serial, state.occupancy);
    write_pdb_atoms(os, state.dynamic_domain, serial, state.occupancy);
    os << "ENDMDL\n";
  }
  os << "END\n";
}

void save_ensemble_pdb(const std::filesystem::path& path,
                       const Ensemble& ensemble) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_ensemble_pdb(out, ensemble);
}

void write_validation_json(std::ostream& os, const ValidationReport& report) {
  nlohmann::json j;
  j["static_rmsd"] = report.static_rmsd;
  j["upper_bound"] = report.upper_bound;
  j["pass"] = report.pass;
  for (const auto& s : report.states)
    j["states"].push_back({{"reconstructed_index", s.reconstructed_index},
                           {"target_index", s.target_index},
                           {"translation_rmsd", s.translation_rmsd},
                           {"kabsch_rmsd", s.kabsch_rmsd},
                           {"occupancy_reconstructed",
                            s.occupancy_reconstructed},
                           {"occupancy_target", s.occupancy_target}});
  os << j.dump(2) << "\n";
}

}  // namespace rdcdyn
