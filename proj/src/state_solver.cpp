#include "rdcdyn/state_solver.hpp"

#include "rdcdyn/levmar.hpp"
#include "rdcdyn/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace rdcdyn {

namespace {

constexpr double kAngleDiffStep = 1e-4;  // degrees
constexpr double kRhoDiffStep = 1e-7;

struct Packed {
  std::vector<EulerAngles> eulers;
  std::vector<double> rho;  // all n occupancies
};

Packed unpack(const Eigen::VectorXd& x, int n) {
  Packed p;
  p.eulers.resize(n);
  p.rho.resize(n);
  for (int i = 0; i < n; ++i)
    p.eulers[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
  double used = 0;
  for (int i = 0; i + 1 < n; ++i) {
    p.rho[i] = x[3 * n + i];
    used += p.rho[i];
  }
  p.rho[n - 1] = 1.0 - used;
  return p;
}

// Euclidean projection of the free occupancies onto
// {rho_i >= 0, sum rho_i <= 1} (so the implied last occupancy stays >= 0).
void project_occupancies(Eigen::VectorXd& x, int n) {
  const int base = 3 * n;
  const int k = n - 1;
  if (k <= 0) return;
  Eigen::VectorXd rho = x.segment(base, k).cwiseMax(0.0);
  if (rho.sum() > 1.0) {
    // Projection onto the simplex {rho >= 0, sum = 1}.
    std::vector<double> u(rho.data(), rho.data() + k);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0, tau = 0;
    for (int i = 0; i < k; ++i) {
      cum += u[i];
      const double t = (cum - 1.0) / (i + 1);
      if (u[i] > t) tau = t;
    }
    rho = (rho.array() - tau).cwiseMax(0.0);
  }
  x.segment(base, k) = rho;
}

Eigen::VectorXd residuals_for(const AnchorSet& anchors, int n,
                              const Eigen::VectorXd& x) {
  const Packed p = unpack(x, n);
  std::vector<Mat3> rotations(n);
  for (int i = 0; i < n; ++i) rotations[i] = p.eulers[i].rotation();

  Eigen::VectorXd r(9 * anchors.media.size());
  Eigen::Index at = 0;
  for (const AnchorSet::Entry& entry : anchors.media) {
    const Mat3 a = entry.anchor.matrix();
    Mat3 predicted = Mat3::Zero();
    for (int i = 0; i < n; ++i)
      predicted += p.rho[i] * rotations[i] * a * rotations[i].transpose();
    const Mat3 diff = entry.observed.matrix() - predicted;
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) r[at++] = diff(row, col);
  }
  return r;
}

bool state_less(const SolvedState& a, const SolvedState& b) {
  if (a.occupancy != b.occupancy) return a.occupancy > b.occupancy;
  if (a.euler.alpha != b.euler.alpha) return a.euler.alpha < b.euler.alpha;
  if (a.euler.beta != b.euler.beta) return a.euler.beta < b.euler.beta;
  return a.euler.gamma < b.euler.gamma;
}

std::vector<SolvedState> canonical_states(const Eigen::VectorXd& x, int n) {
  const Packed p = unpack(x, n);
  std::vector<SolvedState> states(n);
  for (int i = 0; i < n; ++i) {
    states[i].euler = p.eulers[i].canonical();
    states[i].occupancy = p.rho[i];
  }
  std::sort(states.begin(), states.end(), state_less);
  return states;
}

bool solution_less(const std::vector<SolvedState>& a,
                   const std::vector<SolvedState>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (state_less(a[i], b[i])) return true;
    if (state_less(b[i], a[i])) return false;
  }
  return false;
}

}  // namespace

bool feasible(int media, int states) {
  return 5 * media >= 4 * states - 1;
}

std::vector<SaupeTensor> predicted_average(const AnchorSet& anchors,
                                           const std::vector<EulerAngles>& e,
                                           const std::vector<double>& rho) {
  if (e.size() != rho.size() || e.empty())
    throw std::invalid_argument("need one Euler set per occupancy");
  double sum = 0;
  for (double r : rho) sum += r;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("occupancies must sum to 1");

  std::vector<SaupeTensor> out;
  out.reserve(anchors.media.size());
  for (const AnchorSet::Entry& entry : anchors.media) {
    const Mat3 a = entry.anchor.matrix();
    Mat3 acc = Mat3::Zero();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const Mat3 r = e[i].rotation();
      acc += rho[i] * r * a * r.transpose();
    }
    out.push_back(SaupeTensor::from_matrix(acc, 1e-6));
  }
  return out;
}

double objective(const AnchorSet& anchors, const std::vector<EulerAngles>& e,
                 const std::vector<double>& rho) {
  const std::vector<SaupeTensor> predicted = predicted_average(anchors, e, rho);
  double f = 0;
  for (std::size_t j = 0; j < anchors.media.size(); ++j)
    f += (anchors.media[j].observed.matrix() - predicted[j].matrix())
             .squaredNorm();
  return f;
}

double hz_scale(double objective_value) {
  if (objective_value < 0)
    throw std::invalid_argument("objective must be >= 0");
  return std::sqrt(objective_value) * dmax_hz(VectorType::N_H);
}

StateSolution solve(const AnchorSet& anchors, int n,
                    const SolverConfig& config) {
  const int m = static_cast<int>(anchors.media.size());
  if (m < 1 || n < 1)
    throw std::invalid_argument("need >= 1 medium and >= 1 state");
  if (!feasible(m, n)) {
    std::ostringstream msg;
    msg << "infeasible model: " << m << " media provide " << 5 * m
        << " equations but " << n << " states need " << 4 * n - 1
        << " (requires 5m >= 4n-1)";
    throw feasibility_error(msg.str());
  }
  if (config.starts < 1)
    throw std::invalid_argument("need at least one start");

  const int dim = 4 * n - 1;

  // Pre-generate every start so threading cannot change the result.
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> angle(-180.0, 180.0);
  std::uniform_real_distribution<double> beta(0.0, 180.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Eigen::VectorXd> starts(config.starts,
                                      Eigen::VectorXd::Zero(dim));
  for (Eigen::VectorXd& x : starts) {
    for (int i = 0; i < n; ++i) {
      x[3 * i] = angle(rng);
      x[3 * i + 1] = beta(rng);
      x[3 * i + 2] = angle(rng);
    }
    // Uniform over the simplex via normalized exponentials.
    std::vector<double> w(n);
    double total = 0;
    for (double& v : w) {
      v = -std::log(std::max(uni(rng), 1e-300));
      total += v;
    }
    for (int i = 0; i + 1 < n; ++i) x[3 * n + i] = w[i] / total;
  }

  LmOptions lm;
  lm.max_iterations = config.max_iterations;
  lm.diff_steps = Eigen::VectorXd::Constant(dim, kAngleDiffStep);
  for (int i = 3 * n; i < dim; ++i) lm.diff_steps[i] = kRhoDiffStep;

  const ResidualFn residual_fn = [&](const Eigen::VectorXd& x) {
    return residuals_for(anchors, n, x);
  };
  const ProjectFn project_fn = [n](Eigen::VectorXd& x) {
    project_occupancies(x, n);
  };

  std::vector<LmResult> results(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < starts.size();
         i = next.fetch_add(1))
      results[i] = levenberg_marquardt(residual_fn, starts[i], lm, project_fn);
  };
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(starts.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  int converged = 0;
  int best = -1;
  std::vector<SolvedState> best_states;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].converged) ++converged;
    std::vector<SolvedState> states = canonical_states(results[i].x, n);
    const bool better =
        best < 0 || results[i].cost < results[best].cost ||
        (results[i].cost == results[best].cost &&
         solution_less(states, best_states));
    if (better) {
      best = static_cast<int>(i);
      best_states = std::move(states);
    }
  }
  if (converged == 0)
    throw convergence_error("no start converged after " +
                            std::to_string(config.max_iterations) +
                            " iterations x " +
                            std::to_string(config.starts) + " starts");

  StateSolution sol;
  sol.n_states = n;
  sol.states = std::move(best_states);
  sol.objective = results[best].cost;
  sol.hz_minimum = hz_scale(sol.objective);
  sol.frame_id = anchors.frame_id;
  sol.diagnostics.starts_tried = config.starts;
  sol.diagnostics.converged_starts = converged;
  for (int i = 0; i < n; ++i)
    if (sol.states[i].occupancy < config.occupancy_floor)
      sol.diagnostics.phantom_states.push_back(i);
  if (m == 1)
    sol.diagnostics.notes.push_back(
        "single alignment medium: orientational degeneracies (inversion and "
        "axis flips) are not resolved");
  for (const AnchorSet::Entry& entry : anchors.media)
    if (gdo(entry.anchor) < 1e-8)
      sol.diagnostics.notes.push_back("anchor tensor for medium '" +
                                      entry.medium + "' is nearly zero");
  return sol;
}

StateSolution parsimonious_solve(const AnchorSet& anchors, int max_n,
                                 double noise_hz,
                                 const SolverConfig& config) {
  if (max_n < 2) throw std::invalid_argument("parsimonious search needs max_n >= 2");
  const int m = static_cast<int>(anchors.media.size());
  if (!feasible(m, 2))
    throw feasibility_error("even a 2-state model is infeasible with " +
                            std::to_string(m) + " media");

  std::vector<StateSolution::Diagnostics::Attempt> attempts;
  StateSolution best;
  bool have_best = false;

  for (int n = 2; n <= max_n && feasible(m, n); ++n) {
    StateSolution sol = solve(anchors, n, config);
    const bool satisfied = sol.hz_minimum <= noise_hz;
    attempts.push_back({n, sol.hz_minimum, satisfied});
    if (!have_best || sol.hz_minimum < best.hz_minimum) {
      best = sol;
      have_best = true;
    }
    if (!satisfied) continue;

    // Phantom states are dropped one at a time, re-solving after each.
    while (n > 2 && !sol.diagnostics.phantom_states.empty()) {
      StateSolution reduced = solve(anchors, n - 1, config);
      const bool still = reduced.hz_minimum <= noise_hz;
      attempts.push_back({n - 1, reduced.hz_minimum, still});
      if (!still) break;
      sol = reduced;
      --n;
    }
    sol.diagnostics.attempts = attempts;
    sol.diagnostics.satisfied = true;
    return sol;
  }

  best.diagnostics.attempts = attempts;
  best.diagnostics.satisfied = false;
  best.diagnostics.notes.push_back(
      "no state count satisfied the noise level " + std::to_string(noise_hz) +
      " Hz");
  return best;
}

DegeneracyReport degeneracy_check(const AnchorSet& anchors,
                                  const DegeneracyOptions& options) {
  if (anchors.media.size() < 2)
    throw std::invalid_argument("degeneracy_check needs >= 2 media");

  DegeneracyReport report;
  report.all_symmetric = true;
  for (const AnchorSet::Entry& entry : anchors.media) {
    DegeneracyReport::MediumEntry e;
    e.medium = entry.medium;
    e.eta = asymmetry(entry.observed);
    e.szz_axis = eigendecompose(entry.observed).euler.rotation().col(2);
    if (e.eta >= options.eta_threshold) report.all_symmetric = false;
    report.media.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < report.media.size(); ++i)
    for (std::size_t j = i + 1; j < report.media.size(); ++j) {
      const double c = std::clamp(
          std::abs(report.media[i].szz_axis.dot(report.media[j].szz_axis)),
          0.0, 1.0);
      report.max_axis_angle_deg =
          std::max(report.max_axis_angle_deg, std::acos(c) * kRadToDeg);
    }
  report.axes_shared =
      report.max_axis_angle_deg <= options.axis_threshold_deg;
  report.flagged = report.all_symmetric && report.axes_shared;
  return report;
}

void write_solution_json(std::ostream& os, const StateSolution& solution) {
  nlohmann::json j;
  j["n_states"] = solution.n_states;
  for (const SolvedState& s : solution.states)
    j["states"].push_back({{"alpha", s.euler.alpha},
                           {"beta", s.euler.beta},
                           {"gamma", s.euler.gamma},
                           {"rho", s.occupancy}});
  j["objective"] = solution.objective;
  j["hz_minimum"] = solution.hz_minimum;
  // The reported minimum is sqrt of the summed (not per-medium averaged)
  // objective, scaled by D_max(N-H).
  j["hz_convention"] = "sqrt(sum over media) * dmax_nh";
  j["frame_id"] = solution.frame_id;
  j["diagnostics"] = {
      {"starts_tried", solution.diagnostics.starts_tried},
      {"converged_starts", solution.diagnostics.converged_starts},
      {"phantom_states", solution.diagnostics.phantom_states},
      {"notes", solution.diagnostics.notes},
      {"satisfied", solution.diagnostics.satisfied}};
  for (const auto& a : solution.diagnostics.attempts)
    j["diagnostics"]["attempts"].push_back(
        {{"n", a.n}, {"hz_minimum", a.hz_minimum}, {"satisfied", a.satisfied}});
  os << j.dump(2) << "\n";
}

std::string solution_csv_header() {
  return "run,n_states,objective,hz_minimum,satisfied,states...";
}

std::string solution_csv_row(const std::string& run_id,
                             const StateSolution& solution) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s,%d,%.10g,%.10g,%d", run_id.c_str(),
                solution.n_states, solution.objective, solution.hz_minimum,
                solution.diagnostics.satisfied ? 1 : 0);
  os << buf;
  for (const SolvedState& s : solution.states) {
    std::snprintf(buf, sizeof buf, ",%.6g,%.6g,%.6g,%.6g", s.euler.alpha,
                  s.euler.beta, s.euler.gamma, s.occupancy);
    os << buf;
  }
  return os.str();
}

}  // namespace rdcdyn
