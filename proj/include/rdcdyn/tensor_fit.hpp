#pragma once

#include "rdcdyn/rdc.hpp"
#include "rdcdyn/saupe.hpp"
#include "rdcdyn/structure.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rdcdyn {

struct TensorFit {
  SaupeTensor tensor;
  double rdc_rmsd_hz = 0.0;  // N-H normalized, see rdc_rmsd()
  double condition_number = 0.0;
  int observations = 0;
  bool degenerate_geometry = false;  // condition number above threshold
};

/// Condition numbers above this flag near-degenerate vector geometry
/// (e.g. parallel N-H bonds of a helix).
inline constexpr double kConditionWarnThreshold = 1e4;

/// Least-squares order tensor from matched (vector, observation) pairs via
/// SVD pseudo-inverse of the 5-column design matrix with rows
///   D_max(type) * (x^2-z^2, y^2-z^2, 2xy, 2xz, 2yz).
/// Requires at least 5 matched pairs.
TensorFit svd_fit(const std::vector<VectorRecord>& vectors, const RdcSet& rdcs);

/// Root-mean-square misfit in Hz scaled to the N-H vector: each residual is
/// weighted by w = D_max(N-H) / D_max(type). Requires >= 1 matched pair.
double rdc_rmsd(const SaupeTensor& t, const std::vector<VectorRecord>& vectors,
                const RdcSet& rdcs);

/// Per-domain fits across media plus the static/dynamic designation.
struct DomainFits {
  std::string domain;
  std::vector<TensorFit> per_medium;
};

struct OrderTensorReport {
  struct Entry {
    std::string domain;
    std::vector<double> gdo_per_medium;
    double mean_gdo = 0.0;
  };
  std::vector<Entry> domains;
  std::string static_domain;  // highest mean GDO
  /// [medium][pair] minimal principal-frame rotation between domain pairs,
  /// degrees, modulo the tensor's 180-degree axis flips.
  std::vector<std::vector<double>> frame_angle_deg;
  std::vector<std::string> pair_labels;
};

OrderTensorReport order_tensor_report(const std::vector<DomainFits>& fits);

void write_order_tensor_report_json(std::ostream& os,
                                    const OrderTensorReport& report);

/// Minimal rotation angle (degrees) between two principal frames, taking the
/// tensor's two-fold axis degeneracies into account.
double principal_frame_angle_deg(const SaupeTensor& a, const SaupeTensor& b);

void write_fit_json(std::ostream& os, const TensorFit& fit);

}  // namespace rdcdyn
