#include "rdcdyn/commands.hpp"

#include "rdcdyn/dyn_profile.hpp"
#include "rdcdyn/ensemble.hpp"
#include "rdcdyn/fetch.hpp"
#include "rdcdyn/log.hpp"
#include "rdcdyn/pdb.hpp"
#include "rdcdyn/tensor_fit.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace rdcdyn {

namespace {

using json = nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_run_meta(const RunConfig& config, const std::string& command) {
  // Timestamps live only here so every other artifact is byte-reproducible.
  const auto now = std::chrono::system_clock::now();
  json j;
  j["command"] = command;
  j["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  j["seed"] = config.seed;
  auto out = open_out(config.out_dir / "run_meta.json");
  out << j.dump(2) << "\n";
}

void write_resolved_config(const RunConfig& config) {
  auto out = open_out(config.out_dir / "resolved_config.txt");
  config.write_resolved(out);
}

std::string frame_label(const RunConfig& config) {
  std::string label = "molecular-frame:" + config.structure_source;
  if (config.orientation) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "@%.6g/%.6g/%.6g",
                  config.orientation->alpha, config.orientation->beta,
                  config.orientation->gamma);
    label += buf;
  }
  return label;
}

std::vector<RdcSet> load_all_rdcs(const RunConfig& config) {
  if (config.rdc_files.empty())
    throw config_error("profile.rdc_files: no RDC files configured");
  std::vector<RdcSet> sets;
  for (const auto& file : config.rdc_files)
    for (RdcSet& set : load_rdc_csv(file)) sets.push_back(std::move(set));
  if (!config.profile_types.empty()) {
    std::vector<RdcSet> filtered;
    for (const RdcSet& set : sets) {
      RdcSet f(set.medium());
      for (const auto& [key, obs] : set)
        if (std::find(config.profile_types.begin(),
                      config.profile_types.end(),
                      key.type) != config.profile_types.end())
          f.insert(key, obs);
      if (!f.empty()) filtered.push_back(std::move(f));
    }
    sets = std::move(filtered);
  }
  if (sets.empty()) throw config_error("no RDC observations after filtering");
  return sets;
}

json frame_json(const PrincipalFrame& f) {
  return json{{"s_xx", f.s_xx},        {"s_yy", f.s_yy},
              {"s_zz", f.s_zz},        {"alpha", f.euler.alpha},
              {"beta", f.euler.beta},  {"gamma", f.euler.gamma}};
}

struct Truth {
  std::vector<BackboneStructure> states;
  std::vector<double> occupancies;
  DomainRange static_domain{0, 0};
  DomainRange dynamic_domain{0, 0};
};

Truth load_truth(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("cannot open truth manifest " +
                             manifest_path.string());
  json j;
  in >> j;
  Truth truth;
  truth.static_domain = {j["domains"]["static"][0], j["domains"]["static"][1]};
  truth.dynamic_domain = {j["domains"]["dynamic"][0],
                          j["domains"]["dynamic"][1]};
  const auto dir = manifest_path.parent_path();
  for (const auto& state : j["states"]) {
    truth.occupancies.push_back(state["occupancy"]);
    truth.states.push_back(
        load_pdb_file(dir / std::string(state["pdb"]), {.chain = 'A'}));
  }
  return truth;
}

Ensemble truth_ensemble(const Truth& truth) {
  Ensemble target;
  target.static_domain =
      extract_range(truth.states.front(), truth.static_domain);
  for (std::size_t i = 0; i < truth.states.size(); ++i)
    target.states.push_back(
        {extract_range(truth.states[i], truth.dynamic_domain),
         truth.occupancies[i]});
  return target;
}

AnchorSet fit_anchors(const RunConfig& config,
                      const BackboneStructure& structure,
                      const std::vector<RdcSet>& sets) {
  AnchorSet anchors;
  anchors.frame_id = frame_label(config);
  const auto static_vectors =
      build_vectors(structure, config.types, config.static_domain);
  const auto dynamic_vectors =
      build_vectors(structure, config.types, config.dynamic_domain);
  for (const RdcSet& set : sets) {
    AnchorSet::Entry e;
    e.medium = set.medium();
    e.anchor = svd_fit(static_vectors, set).tensor;
    e.observed = svd_fit(dynamic_vectors, set).tensor;
    anchors.media.push_back(std::move(e));
  }
  return anchors;
}

SolverConfig solver_config(const RunConfig& config) {
  SolverConfig sc;
  sc.starts = config.starts;
  sc.occupancy_floor = config.occupancy_floor;
  sc.seed = config.seed;
  return sc;
}

}  // namespace

BackboneStructure load_structure(const RunConfig& config) {
  const std::string& src = config.structure_source;
  BackboneStructure s;
  if (src.rfind("helix:", 0) == 0) {
    s = make_ideal_helix(std::stoi(src.substr(6)));
  } else if (src.rfind("file:", 0) == 0) {
    s = load_pdb_file(src.substr(5), {.chain = config.chain});
  } else if (src.rfind("fetch:", 0) == 0) {
    FetchOptions fo;
    fo.no_network = config.no_network;
    s = parse_pdb(fetch_structure(src.substr(6), fo),
                  {.chain = config.chain});
  } else {
    throw config_error("structure.source: expected helix:N, file:PATH or "
                       "fetch:ID, got '" +
                       src + "'");
  }
  if (config.orientation)
    s = s.transformed(config.orientation->rotation(), Vec3::Zero());
  return s;
}

DynamicsModel build_model(const RunConfig& config,
                          const BackboneStructure& structure) {
  if (config.states.empty())
    throw config_error("dynamics: at least one state required");
  DynamicsModel model;
  for (const auto& mutations : config.states) {
    BackboneStructure state = structure;
    for (const Mutation& m : mutations)
      state = m.kind == Mutation::Kind::Phi
                  ? rotate_phi(state, m.residue, m.degrees)
                  : rotate_psi(state, m.residue, m.degrees);
    model.states.push_back(std::move(state));
  }
  model.occupancies = config.occupancies;
  model.static_domain = config.static_domain;
  model.dynamic_domain = config.dynamic_domain;
  model.validate();
  return model;
}

void run_simulate(const RunConfig& config) {
  if (config.media.empty()) throw config_error("media: none configured");
  const BackboneStructure structure = load_structure(config);
  const DynamicsModel model = build_model(config, structure);
  const auto sets = simulate_dynamics(model, config.media, config.types,
                                      config.noise_hz, config.seed);

  std::filesystem::create_directories(config.out_dir);
  json manifest;
  manifest["frame_id"] = frame_label(config);
  manifest["seed"] = config.seed;
  manifest["noise_hz"] = config.noise_hz;
  manifest["domains"]["static"] = {config.static_domain.start,
                                   config.static_domain.end};
  manifest["domains"]["dynamic"] = {config.dynamic_domain.start,
                                    config.dynamic_domain.end};

  for (std::size_t m = 0; m < sets.size(); ++m) {
    const std::string name = "rdc_" + sets[m].medium() + ".csv";
    save_rdc_csv(config.out_dir / name, {sets[m]});
    manifest["media"].push_back(
        {{"name", sets[m].medium()},
         {"frame", frame_json(config.media[m].frame)},
         {"tensor", to_text(tensor_from_principal(config.media[m].frame))},
         {"rdc_file", name}});
  }
  for (std::size_t i = 0; i < model.states.size(); ++i) {
    const std::string name = "state" + std::to_string(i + 1) + ".pdb";
    save_pdb_file(config.out_dir / name, model.states[i]);
    manifest["states"].push_back(
        {{"pdb", name}, {"occupancy", model.occupancies[i]}});
  }
  auto mout = open_out(config.out_dir / "truth.json");
  mout << manifest.dump(2) << "\n";

  write_resolved_config(config);
  write_run_meta(config, "simulate");
}

void run_profile(const RunConfig& config) {
  const BackboneStructure structure = load_structure(config);
  const auto sets = load_all_rdcs(config);
  std::filesystem::create_directories(config.out_dir);

  json verdicts;
  for (Direction dir : {Direction::Forward, Direction::Backward}) {
    const DynamicProfile profile = compute_profile(structure, sets, dir);
    ProfileVerdict verdict = detect_onset(profile);
    if (verdict.onset) {
      // Classify the fragment a few residues past the onset.
      const DomainRange frag =
          dir == Direction::Forward
              ? DomainRange{*verdict.onset + 2, structure.last_index()}
              : DomainRange{structure.first_index(), *verdict.onset - 2};
      verdict.mode = classify_fragment(structure, frag, sets, dir);
    }
    auto csv = open_out(config.out_dir /
                        ("profile_" + to_string(dir) + ".csv"));
    write_profile_csv(csv, profile);
    std::ostringstream buf;
    write_verdict_json(buf, verdict, profile);
    verdicts[to_string(dir)] = json::parse(buf.str());
  }
  auto vout = open_out(config.out_dir / "verdict.json");
  vout << verdicts.dump(2) << "\n";

  write_resolved_config(config);
  write_run_meta(config, "profile");
}

void run_solve(const RunConfig& config) {
  const BackboneStructure structure = load_structure(config);
  const auto sets = load_all_rdcs(config);
  const AnchorSet anchors = fit_anchors(config, structure, sets);
  const double noise =
      config.solver_noise_hz.value_or(config.noise_hz);

  StateSolution solution =
      config.parsimonious
          ? parsimonious_solve(anchors, config.max_states, noise,
                               solver_config(config))
          : solve(anchors, config.solve_states, solver_config(config));

  std::filesystem::create_directories(config.out_dir);

  std::ostringstream sol_buf;
  write_solution_json(sol_buf, solution);
  json sol_json = json::parse(sol_buf.str());
  if (anchors.media.size() >= 2) {
    const DegeneracyReport deg = degeneracy_check(anchors);
    json dj;
    dj["flagged"] = deg.flagged;
    dj["all_symmetric"] = deg.all_symmetric;
    dj["axes_shared"] = deg.axes_shared;
    dj["max_axis_angle_deg"] = deg.max_axis_angle_deg;
    for (const auto& m : deg.media)
      dj["media"].push_back({{"medium", m.medium}, {"eta", m.eta}});
    sol_json["degeneracy"] = dj;
  }
  auto sout = open_out(config.out_dir / "solution.json");
  sout << sol_json.dump(2) << "\n";

  {
    auto csv = open_out(config.out_dir / "summary.csv");
    csv << solution_csv_header() << "\n"
        << solution_csv_row("solve", solution) << "\n";
  }

  const Ensemble ensemble =
      assemble(extract_range(structure, config.static_domain),
               extract_range(structure, config.dynamic_domain), solution,
               anchors.frame_id);
  save_ensemble_pdb(config.out_dir / "ensemble.pdb", ensemble);

  std::filesystem::path manifest =
      config.truth_manifest.value_or(config.rdc_files.front().parent_path() /
                                     "truth.json");
  if (std::filesystem::exists(manifest)) {
    const Truth truth = load_truth(manifest);
    const ValidationReport report =
        validate(ensemble, truth_ensemble(truth));
    auto vout = open_out(config.out_dir / "validation.json");
    write_validation_json(vout, report);
  }

  write_resolved_config(config);
  write_run_meta(config, "solve");
}

void run_sweep(const RunConfig& config) {
  if (config.sweep_angles.empty() || config.sweep_occupancies.empty()) {
    std::filesystem::create_directories(config.out_dir);
    auto out = open_out(config.out_dir / "sweep.csv");
    out << "angle_deg,occupancies,status,hz_minimum,rho_recovered,"
           "state_rmsd,static_rmsd\n";
    write_resolved_config(config);
    write_run_meta(config, "sweep");
    return;
  }
  if (config.media.empty()) throw config_error("media: none configured");
  if (config.states.size() < 2 || config.states[1].empty())
    throw config_error("sweep needs dynamics.state2 as the mutation template");

  const BackboneStructure structure = load_structure(config);

  struct Cell {
    double angle;
    std::vector<double> occupancies;
    std::string row;
  };
  std::vector<Cell> cells;
  for (double angle : config.sweep_angles)
    for (const auto& occ : config.sweep_occupancies)
      cells.push_back({angle, occ, ""});

  auto run_cell = [&](std::size_t index) {
    Cell& cell = cells[index];
    std::ostringstream row;
    row << cell.angle << ",";
    for (std::size_t i = 0; i < cell.occupancies.size(); ++i)
      row << (i ? "/" : "") << cell.occupancies[i] * 100;
    try {
      RunConfig cell_config = config;
      cell_config.occupancies = cell.occupancies;
      cell_config.states.resize(cell.occupancies.size());
      // Scale the template mutations to the cell's angle.
      for (auto& muts : cell_config.states)
        for (Mutation& m : muts) m.degrees = cell.angle;
      cell_config.seed = mix_seed(config.seed, index);

      const DynamicsModel model = build_model(cell_config, structure);
      const auto sets =
          simulate_dynamics(model, cell_config.media, cell_config.types,
                            cell_config.noise_hz, cell_config.seed);
      const AnchorSet anchors = fit_anchors(cell_config, structure, sets);
      SolverConfig sc = solver_config(cell_config);
      sc.threads = 1;  // cells already run in parallel
      const StateSolution solution =
          solve(anchors, static_cast<int>(cell.occupancies.size()), sc);

      Ensemble target;
      target.static_domain =
          extract_range(model.states[0], model.static_domain);
      for (std::size_t i = 0; i < model.states.size(); ++i)
        target.states.push_back(
            {extract_range(model.states[i], model.dynamic_domain),
             model.occupancies[i]});
      const Ensemble recon = assemble(
          extract_range(structure, cell_config.static_domain),
          extract_range(structure, cell_config.dynamic_domain), solution,
          anchors.frame_id);
      const ValidationReport report = validate(recon, target);

      char buf[64];
      std::snprintf(buf, sizeof buf, ",ok,%.6g,", solution.hz_minimum);
      row << buf;
      for (std::size_t i = 0; i < solution.states.size(); ++i)
        row << (i ? "/" : "") << solution.states[i].occupancy;
      row << ",";
      for (std::size_t i = 0; i < report.states.size(); ++i)
        row << (i ? "/" : "") << report.states[i].translation_rmsd;
      std::snprintf(buf, sizeof buf, ",%.6g", report.static_rmsd);
      row << buf;
    } catch (const feasibility_error&) {
      row << ",infeasible,,,,";
    } catch (const std::exception& e) {
      std::string what = e.what();
      std::replace(what.begin(), what.end(), ',', ';');
      row << ",error:" << what << ",,,,";
    }
    cell.row = row.str();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < cells.size();
         i = next.fetch_add(1))
      run_cell(i);
  };
  const unsigned pool_size =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < pool_size; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::filesystem::create_directories(config.out_dir);
  auto out = open_out(config.out_dir / "sweep.csv");
  out << "angle_deg,occupancies,status,hz_minimum,rho_recovered,state_rmsd,"
         "static_rmsd\n";
  for (const Cell& cell : cells) out << cell.row << "\n";

  write_resolved_config(config);
  write_run_meta(config, "sweep");
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const config_error&) {
    return kExitConfig;
  } catch (const feasibility_error&) {
    return kExitInfeasible;
  } catch (const convergence_error&) {
    return kExitNoConvergence;
  } catch (const std::exception&) {
    return kExitIo;
  }
}

}  // namespace rdcdyn
