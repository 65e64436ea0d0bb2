#pragma once

#include "rdcdyn/config.hpp"

namespace rdcdyn {

// Exit codes shared by the command layer and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitNoConvergence = 4;
inline constexpr int kExitIo = 5;

BackboneStructure load_structure(const RunConfig& config);
DynamicsModel build_model(const RunConfig& config,
                          const BackboneStructure& structure);

/// Writes per-medium RDC CSVs, per-state PDBs and the truth manifest.
void run_simulate(const RunConfig& config);

/// Writes forward/backward profile CSVs and the verdict JSON.
void run_profile(const RunConfig& config);

/// Fits anchors, solves, assembles the ensemble and (when a truth manifest
/// is available) validates against it.
void run_solve(const RunConfig& config);

/// One simulate+solve+validate cell per (angle, occupancy set); partial
/// failures are recorded per row and the batch continues.
void run_sweep(const RunConfig& config);

/// Maps an escaped exception to the documented exit code.
int exit_code_for_current_exception();

}  // namespace rdcdyn
