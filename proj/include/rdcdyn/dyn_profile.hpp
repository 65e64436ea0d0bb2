#pragma once

#include "rdcdyn/rdc.hpp"
#include "rdcdyn/structure.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rdcdyn {

enum class Direction { Forward, Backward };

std::string to_string(Direction d);

struct ProfilePoint {
  int residue = 0;
  double rmsd_hz = 0.0;
};

/// RDC-rmsd versus fragment length, computed against a template structure:
/// for each prefix (direction-dependent) one tensor per medium is fitted and
/// the observation-weighted rms across media recorded at the prefix's last
/// residue.
struct DynamicProfile {
  Direction direction = Direction::Forward;
  std::vector<ProfilePoint> points;  // residue order follows the direction
  int media_count = 0;
  double noise_hz = 0.0;
};

enum class Classification { Typical, Anomalous };
enum class FragmentMode { RigidBody, Uncorrelated, Unknown };

std::string to_string(Classification c);
std::string to_string(FragmentMode m);

struct ProfileVerdict {
  std::optional<int> onset;  // present iff classification == Anomalous
  Classification classification = Classification::Typical;
  FragmentMode mode = FragmentMode::Unknown;
};

struct ProfileConfig {
  int min_rdc_per_medium = 8;      // smallest fittable prefix
  double onset_noise_factor = 2.0; // threshold = max(factor*noise, plateau...)
  double plateau_sigma_factor = 3.0;
  // The plateau is estimated from the early stable stretch of the scan so a
  // late anomaly cannot inflate its own threshold.
  double plateau_window_fraction = 0.25;
  int onset_persistence = 3;       // consecutive points above threshold
  double min_anomaly_hz = 1e-6;    // floor for noiseless data
  double rigid_plateau_factor = 2.0;
  double uncorrelated_fraction = 0.7;
  int min_fragment_residues = 10;
};

/// The analysis span defaults to the whole template; `start_residue`
/// overrides where elongation begins (N-terminal end for forward scans,
/// C-terminal end for backward scans). The data's recorded error bounds set
/// the noise level unless `noise_override_hz` is given.
DynamicProfile compute_profile(const BackboneStructure& templ,
                               const std::vector<RdcSet>& media_sets,
                               Direction direction,
                               std::optional<DomainRange> span = std::nullopt,
                               std::optional<double> noise_override_hz =
                                   std::nullopt,
                               const ProfileConfig& config = {});

/// Onset = first residue whose rmsd exceeds
///   max(onset_noise_factor * noise, plateau + plateau_sigma_factor * spread,
///       min_anomaly_hz)
/// and stays above it for `onset_persistence` consecutive points. The
/// plateau estimate is the median (spread: scaled MAD) of the first
/// `plateau_window_fraction` of the profile. Requires >= 10 points.
ProfileVerdict detect_onset(const DynamicProfile& profile,
                            const ProfileConfig& config = {});

/// Classifies a fragment (>= min_fragment_residues residues) from its own
/// profile: RigidBody when the tail plateaus at <= rigid_plateau_factor *
/// noise; Uncorrelated when the profile keeps rising beyond that level over
/// >= uncorrelated_fraction of its points.
FragmentMode classify_fragment(const BackboneStructure& templ,
                               DomainRange fragment,
                               const std::vector<RdcSet>& media_sets,
                               Direction direction,
                               const ProfileConfig& config = {});

/// CSV form: "direction,residue,rmsd_hz".
void write_profile_csv(std::ostream& os, const DynamicProfile& profile);

void write_verdict_json(std::ostream& os, const ProfileVerdict& verdict,
                        const DynamicProfile& profile);

}  // namespace rdcdyn
