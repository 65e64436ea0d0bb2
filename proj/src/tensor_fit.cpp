#include "rdcdyn/tensor_fit.hpp"

#include "rdcdyn/log.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rdcdyn {

namespace {

using json = nlohmann::json;

struct Matched {
  Eigen::MatrixXd a;  // n x 5 design matrix
  Eigen::VectorXd d;  // observed couplings, Hz
  std::vector<VectorType> types;
};

Matched match(const std::vector<VectorRecord>& vectors, const RdcSet& rdcs) {
  std::vector<const VectorRecord*> used;
  for (const VectorRecord& rec : vectors)
    if (rdcs.find({rec.residue, rec.type})) used.push_back(&rec);

  Matched m;
  m.a.resize(used.size(), 5);
  m.d.resize(used.size());
  m.types.reserve(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    const VectorRecord& rec = *used[i];
    const double dmax = dmax_hz(rec.type);
    const double x = rec.v.x(), y = rec.v.y(), z = rec.v.z();
    m.a.row(i) << dmax * (x * x - z * z), dmax * (y * y - z * z),
        dmax * 2 * x * y, dmax * 2 * x * z, dmax * 2 * y * z;
    m.d[i] = rdcs.find({rec.residue, rec.type})->value_hz;
    m.types.push_back(rec.type);
  }
  return m;
}

}  // namespace

TensorFit svd_fit(const std::vector<VectorRecord>& vectors,
                  const RdcSet& rdcs) {
  const Matched m = match(vectors, rdcs);
  if (m.d.size() < 5)
    throw std::invalid_argument("svd_fit needs at least 5 matched RDCs, got " +
                                std::to_string(m.d.size()));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  const double cond = smin > 0 ? sv[0] / smin
                               : std::numeric_limits<double>::infinity();
  const Eigen::VectorXd s = svd.solve(m.d);

  TensorFit fit;
  fit.tensor = SaupeTensor(s[0], s[1], s[2], s[3], s[4]);
  fit.condition_number = cond;
  fit.observations = static_cast<int>(m.d.size());
  fit.degenerate_geometry = cond > kConditionWarnThreshold;
  if (fit.degenerate_geometry)
    log_warning("svd_fit: near-degenerate vector geometry (condition number " +
                std::to_string(cond) + ")");
  fit.rdc_rmsd_hz = rdc_rmsd(fit.tensor, vectors, rdcs);
  return fit;
}

double rdc_rmsd(const SaupeTensor& t, const std::vector<VectorRecord>& vectors,
                const RdcSet& rdcs) {
  const double dmax_nh = dmax_hz(VectorType::N_H);
  double acc = 0;
  int n = 0;
  for (const VectorRecord& rec : vectors) {
    const RdcObservation* obs = rdcs.find({rec.residue, rec.type});
    if (!obs) continue;
    const double w = dmax_nh / dmax_hz(rec.type);
    const double r = obs->value_hz - compute_rdc(t, rec.v, rec.type);
    acc += r * r * w * w;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rdc_rmsd: no matched observations");
  return std::sqrt(acc / n);
}

double principal_frame_angle_deg(const SaupeTensor& a, const SaupeTensor& b) {
  const Mat3 ra = eigendecompose(a).euler.rotation();
  const Mat3 rb = eigendecompose(b).euler.rotation();
  // Two-fold flips about the principal axes leave the tensor unchanged.
  const std::array<Vec3, 4> flips = {Vec3(1, 1, 1), Vec3(1, -1, -1),
                                     Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  double best = 180.0;
  for (const Vec3& f : flips) {
    const Mat3 rel = (ra * f.asDiagonal()).transpose() * rb;
    const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    best = std::min(best, std::acos(c) * kRadToDeg);
  }
  return best;
}

OrderTensorReport order_tensor_report(const std::vector<DomainFits>& fits) {
  if (fits.size() < 2)
    throw std::invalid_argument("order_tensor_report needs >= 2 domains");
  const std::size_t media = fits.front().per_medium.size();
  if (media < 1) throw std::invalid_argument("needs >= 1 medium");
  for (const DomainFits& f : fits)
    if (f.per_medium.size() != media)
      throw std::invalid_argument("domains must cover the same media");

  OrderTensorReport report;
  double best_gdo = -1;
  for (const DomainFits& f : fits) {
    OrderTensorReport::Entry e;
    e.domain = f.domain;
    for (const TensorFit& tf : f.per_medium)
      e.gdo_per_medium.push_back(gdo(tf.tensor));
    e.mean_gdo = 0;
    for (double g : e.gdo_per_medium) e.mean_gdo += g;
    e.mean_gdo /= double(media);
    if (e.mean_gdo > best_gdo) {
      best_gdo = e.mean_gdo;
      report.static_domain = e.domain;
    }
    report.domains.push_back(std::move(e));
  }

  report.frame_angle_deg.resize(media);
  for (std::size_t m = 0; m < media; ++m) {
    for (std::size_t i = 0; i < fits.size(); ++i) {
      for (std::size_t j = i + 1; j < fits.size(); ++j) {
        report.frame_angle_deg[m].push_back(principal_frame_angle_deg(
            fits[i].per_medium[m].tensor, fits[j].per_medium[m].tensor));
        if (m == 0)
          report.pair_labels.push_back(fits[i].domain + "/" + fits[j].domain);
      }
    }
  }
  return report;
}

namespace {

json fit_to_json(const TensorFit& fit) {
  const PrincipalFrame f = eigendecompose(fit.tensor);
  return json{
      {"tensor",
       {{"s_xx", fit.tensor.s_xx()},
        {"s_yy", fit.tensor.s_yy()},
        {"s_xy", fit.tensor.s_xy()},
        {"s_xz", fit.tensor.s_xz()},
        {"s_yz", fit.tensor.s_yz()}}},
      {"principal",
       {{"s_xx", f.s_xx},
        {"s_yy", f.s_yy},
        {"s_zz", f.s_zz},
        {"alpha", f.euler.alpha},
        {"beta", f.euler.beta},
        {"gamma", f.euler.gamma}}},
      {"gdo", gdo(fit.tensor)},
      {"asymmetry", asymmetry(fit.tensor)},
      {"rdc_rmsd_hz", fit.rdc_rmsd_hz},
      {"condition_number", fit.condition_number},
      {"observations", fit.observations},
      {"degenerate_geometry", fit.degenerate_geometry}};
}

}  // namespace

void write_fit_json(std::ostream& os, const TensorFit& fit) {
  os << fit_to_json(fit).dump(2) << "\n";
}

void write_order_tensor_report_json(std::ostream& os,
                                    const OrderTensorReport& report) {
  json j;
  j["static_domain"] = report.static_domain;
  for (const auto& e : report.domains)
    j["domains"].push_back({{"domain", e.domain},
                            {"gdo_per_medium", e.gdo_per_medium},
                            {"mean_gdo", e.mean_gdo}});
  j["pair_labels"] = report.pair_labels;
  j["frame_angle_deg"] = report.frame_angle_deg;
  os << j.dump(2) << "\n";
}

}  // namespace rdcdyn
