#pragma once

#include "rdcdyn/rdc.hpp"
#include "rdcdyn/saupe.hpp"
#include "rdcdyn/state_solver.hpp"
#include "rdcdyn/structure.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdcdyn {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One dihedral mutation of a dynamics state, e.g. "phi:25:60".
struct Mutation {
  enum class Kind { Phi, Psi } kind = Kind::Phi;
  int residue = 0;
  double degrees = 0.0;
};

/// Fully resolved run configuration. The file format is a plain-text
/// key-value list with [section] headers and '#' comments; unknown keys are
/// rejected with their field path.
struct RunConfig {
  // [structure]
  std::string structure_source = "helix:40";  // helix:N | file:PATH | fetch:ID
  char chain = 'A';
  std::optional<EulerAngles> orientation;  // applied after loading

  // [domains]
  DomainRange static_domain{2, 23};
  DomainRange dynamic_domain{26, 40};

  // [media] name = sxx syy szz alpha beta gamma
  std::vector<MediumSpec> media;

  // [dynamics] stateK = mutation list; state 1 defaults to the template
  std::vector<std::vector<Mutation>> states;
  std::vector<double> occupancies;

  // [simulation]
  std::vector<VectorType> types = {VectorType::N_H, VectorType::C_N,
                                   VectorType::C_H, VectorType::CA_HA};
  double noise_hz = 1.0;
  std::uint64_t seed = 0;

  // [profile]
  std::vector<std::filesystem::path> rdc_files;
  std::vector<VectorType> profile_types;  // empty: use everything in the data

  // [solver]
  int solve_states = 2;
  int max_states = 4;
  bool parsimonious = false;
  int starts = 64;
  double occupancy_floor = 0.05;
  std::optional<double> solver_noise_hz;  // defaults to simulation noise
  std::optional<std::filesystem::path> truth_manifest;

  // [sweep]
  std::vector<double> sweep_angles;
  std::vector<std::vector<double>> sweep_occupancies;

  // [output]
  std::filesystem::path out_dir = "out";

  bool no_network = false;  // flag only, not a file key

  static RunConfig load_file(const std::filesystem::path& path);
  static RunConfig parse(std::istream& in);

  /// Every effective value, re-readable as a config file.
  void write_resolved(std::ostream& os) const;
};

}  // namespace rdcdyn
