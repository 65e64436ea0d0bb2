#include "rdcdyn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace rdcdyn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, const std::string& path) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error(path + ": expected a number, got '" + v + "'");
  }
}

long to_int(const std::string& v, const std::string& path) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error(path + ": expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& path) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error(path + ": expected true/false, got '" + v + "'");
}

DomainRange to_range(const std::string& v, const std::string& path) {
  const auto dash = v.find('-');
  if (dash == std::string::npos)
    throw config_error(path + ": expected START-END, got '" + v + "'");
  DomainRange r;
  r.start = static_cast<int>(to_int(trim(v.substr(0, dash)), path));
  r.end = static_cast<int>(to_int(trim(v.substr(dash + 1)), path));
  if (r.start > r.end)
    throw config_error(path + ": start exceeds end in '" + v + "'");
  return r;
}

std::vector<double> to_numbers(const std::string& v, const std::string& path) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok, path));
  return out;
}

std::vector<Mutation> to_mutations(const std::string& v,
                                   const std::string& path) {
  std::vector<Mutation> out;
  if (trim(v) == "identity" || trim(v).empty()) return out;
  for (const std::string& part : split(v, ',')) {
    const auto fields = split(part, ':');
    if (fields.size() != 3)
      throw config_error(path + ": expected phi:RES:DEG or psi:RES:DEG, got '" +
                         part + "'");
    Mutation m;
    if (fields[0] == "phi")
      m.kind = Mutation::Kind::Phi;
    else if (fields[0] == "psi")
      m.kind = Mutation::Kind::Psi;
    else
      throw config_error(path + ": unknown dihedral '" + fields[0] + "'");
    m.residue = static_cast<int>(to_int(fields[1], path));
    m.degrees = to_double(fields[2], path);
    out.push_back(m);
  }
  return out;
}

std::vector<VectorType> to_types(const std::string& v,
                                 const std::string& path) {
  std::vector<VectorType> out;
  for (const std::string& name : split(v, ',')) {
    try {
      out.push_back(vector_type_from_string(name));
    } catch (const std::invalid_argument&) {
      throw config_error(path + ": unknown vector type '" + name + "'");
    }
  }
  return out;
}

// Occupancy set written as "50/25/25" (percent) or "0.5 0.25 0.25".
std::vector<double> to_occupancies(const std::string& v,
                                   const std::string& path) {
  std::vector<double> out;
  if (v.find('/') != std::string::npos) {
    for (const std::string& part : split(v, '/'))
      out.push_back(to_double(part, path) / 100.0);
  } else {
    out = to_numbers(v, path);
  }
  double sum = 0;
  for (double r : out) sum += r;
  if (out.empty() || std::abs(sum - 1.0) > 1e-6)
    throw config_error(path + ": occupancies must sum to 1, got '" + v + "'");
  return out;
}

}  // namespace

RunConfig RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  return parse(in);
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  cfg.media.clear();

  std::map<int, std::vector<Mutation>> state_map;
  std::string line, section;
  int line_number = 0;
  bool types_given = false;

  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known_sections = {
          "structure", "domains",  "media",  "dynamics",
          "simulation", "profile", "solver", "sweep",
          "output"};
      if (!known_sections.count(section))
        throw config_error("unknown section [" + section + "] at line " +
                           std::to_string(line_number));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected key = value at line " +
                         std::to_string(line_number));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string path = section + "." + key;

    if (section == "structure") {
      if (key == "source") cfg.structure_source = value;
      else if (key == "chain") {
        if (value.size() != 1)
          throw config_error(path + ": chain must be one character");
        cfg.chain = value[0];
      } else if (key == "orientation") {
        const auto nums = to_numbers(value, path);
        if (nums.size() != 3)
          throw config_error(path + ": expected three Euler angles");
        cfg.orientation = EulerAngles{nums[0], nums[1], nums[2]};
      } else
        throw config_error("unknown key " + path);
    } else if (section == "domains") {
      if (key == "static") cfg.static_domain = to_range(value, path);
      else if (key == "dynamic") cfg.dynamic_domain = to_range(value, path);
      else throw config_error("unknown key " + path);
    } else if (section == "media") {
      const auto nums = to_numbers(value, path);
      if (nums.size() != 6)
        throw config_error(path +
                           ": expected 'sxx syy szz alpha beta gamma'");
      MediumSpec m;
      m.name = key;
      m.frame = PrincipalFrame{nums[0], nums[1], nums[2],
                               {nums[3], nums[4], nums[5]}};
      cfg.media.push_back(std::move(m));
    } else if (section == "dynamics") {
      if (key == "occupancies") cfg.occupancies = to_occupancies(value, path);
      else if (key.rfind("state", 0) == 0) {
        const int idx = static_cast<int>(to_int(key.substr(5), path));
        if (idx < 1) throw config_error(path + ": state index starts at 1");
        state_map[idx] = to_mutations(value, path);
      } else
        throw config_error("unknown key " + path);
    } else if (section == "simulation") {
      if (key == "types") {
        cfg.types = to_types(value, path);
        types_given = true;
      } else if (key == "noise_hz")
        cfg.noise_hz = to_double(value, path);
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(to_int(value, path));
      else
        throw config_error("unknown key " + path);
    } else if (section == "profile") {
      if (key == "rdc_files") {
        cfg.rdc_files.clear();
        for (const std::string& f : split(value, ','))
          cfg.rdc_files.emplace_back(f);
      } else if (key == "types")
        cfg.profile_types = to_types(value, path);
      else
        throw config_error("unknown key " + path);
    } else if (section == "solver") {
      if (key == "states")
        cfg.solve_states = static_cast<int>(to_int(value, path));
      else if (key == "max_states")
        cfg.max_states = static_cast<int>(to_int(value, path));
      else if (key == "parsimonious")
        cfg.parsimonious = to_bool(value, path);
      else if (key == "starts")
        cfg.starts = static_cast<int>(to_int(value, path));
      else if (key == "occupancy_floor")
        cfg.occupancy_floor = to_double(value, path);
      else if (key == "noise_hz")
        cfg.solver_noise_hz = to_double(value, path);
      else if (key == "truth_manifest")
        cfg.truth_manifest = std::filesystem::path(value);
      else
        throw config_error("unknown key " + path);
    } else if (section == "sweep") {
      if (key == "angles")
        cfg.sweep_angles = to_numbers(value, path);
      else if (key == "occupancies") {
        cfg.sweep_occupancies.clear();
        for (const std::string& set : split(value, ' '))
          cfg.sweep_occupancies.push_back(to_occupancies(set, path));
      } else
        throw config_error("unknown key " + path);
    } else if (section == "output") {
      if (key == "directory") cfg.out_dir = value;
      else throw config_error("unknown key " + path);
    } else {
      throw config_error("key '" + key + "' outside any section at line " +
                         std::to_string(line_number));
    }
  }

  if (!state_map.empty()) {
    const int max_state = state_map.rbegin()->first;
    cfg.states.assign(max_state, {});
    for (const auto& [idx, muts] : state_map) cfg.states[idx - 1] = muts;
  }
  if (cfg.states.empty() && !cfg.occupancies.empty())
    cfg.states.assign(cfg.occupancies.size(), {});
  if (!cfg.states.empty() && cfg.occupancies.empty()) {
    if (cfg.states.size() == 1)
      cfg.occupancies = {1.0};
    else
      throw config_error("dynamics.occupancies required for " +
                         std::to_string(cfg.states.size()) + " states");
  }
  if (!cfg.states.empty() && cfg.states.size() != cfg.occupancies.size())
    throw config_error("dynamics: " + std::to_string(cfg.states.size()) +
                       " states but " + std::to_string(cfg.occupancies.size()) +
                       " occupancies");
  (void)types_given;
  return cfg;
}

namespace {

std::string mutation_text(const std::vector<Mutation>& muts) {
  if (muts.empty()) return "identity";
  std::string out;
  for (const Mutation& m : muts) {
    if (!out.empty()) out += ",";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%d:%.10g",
                  m.kind == Mutation::Kind::Phi ? "phi" : "psi", m.residue,
                  m.degrees);
    out += buf;
  }
  return out;
}

}  // namespace

void RunConfig::write_resolved(std::ostream& os) const {
  char buf[256];
  os << "[structure]\n";
  os << "source = " << structure_source << "\n";
  os << "chain = " << chain << "\n";
  if (orientation) {
    std::snprintf(buf, sizeof buf, "orientation = %.10g %.10g %.10g\n",
                  orientation->alpha, orientation->beta, orientation->gamma);
    os << buf;
  }
  os << "\n[domains]\n";
  os << "static = " << static_domain.start << "-" << static_domain.end << "\n";
  os << "dynamic = " << dynamic_domain.start << "-" << dynamic_domain.end
     << "\n";
  os << "\n[media]\n";
  for (const MediumSpec& m : media) {
    std::snprintf(buf, sizeof buf, "%s = %.10g %.10g %.10g %.10g %.10g %.10g\n",
                  m.name.c_str(), m.frame.s_xx, m.frame.s_yy, m.frame.s_zz,
                  m.frame.euler.alpha, m.frame.euler.beta,
                  m.frame.euler.gamma);
    os << buf;
  }
  os << "\n[dynamics]\n";
  for (std::size_t i = 0; i < states.size(); ++i)
    os << "state" << i + 1 << " = " << mutation_text(states[i]) << "\n";
  if (!occupancies.empty()) {
    os << "occupancies =";
    for (double r : occupancies) {
      std::snprintf(buf, sizeof buf, " %.10g", r);
      os << buf;
    }
    os << "\n";
  }
  os << "\n[simulation]\n";
  os << "types = ";
  for (std::size_t i = 0; i < types.size(); ++i)
    os << (i ? "," : "") << to_string(types[i]);
  os << "\n";
  std::snprintf(buf, sizeof buf, "noise_hz = %.10g\nseed = %llu\n", noise_hz,
                static_cast<unsigned long long>(seed));
  os << buf;
  if (!rdc_files.empty() || !profile_types.empty()) {
    os << "\n[profile]\n";
    if (!rdc_files.empty()) {
      os << "rdc_files = ";
      for (std::size_t i = 0; i < rdc_files.size(); ++i)
        os << (i ? "," : "") << rdc_files[i].string();
      os << "\n";
    }
    if (!profile_types.empty()) {
      os << "types = ";
      for (std::size_t i = 0; i < profile_types.size(); ++i)
        os << (i ? "," : "") << to_string(profile_types[i]);
      os << "\n";
    }
  }
  os << "\n[solver]\n";
  os << "states = " << solve_states << "\n";
  os << "max_states = " << max_states << "\n";
  os << "parsimonious = " << (parsimonious ? "true" : "false") << "\n";
  os << "starts = " << starts << "\n";
  std::snprintf(buf, sizeof buf, "occupancy_floor = %.10g\n", occupancy_floor);
  os << buf;
  if (solver_noise_hz) {
    std::snprintf(buf, sizeof buf, "noise_hz = %.10g\n", *solver_noise_hz);
    os << buf;
  }
  if (truth_manifest) os << "truth_manifest = " << truth_manifest->string()
                         << "\n";
  if (!sweep_angles.empty()) {
    os << "\n[sweep]\nangles =";
    for (double a : sweep_angles) {
      std::snprintf(buf, sizeof buf, " %.10g", a);
      os << buf;
    }
    os << "\noccupancies =";
    for (const auto& set : sweep_occupancies) {
      os << " ";
      for (std::size_t i = 0; i < set.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.10g", i ? "/" : "", set[i] * 100);
        os << buf;
      }
    }
    os << "\n";
  }
  os << "\n[output]\ndirectory = " << out_dir.string() << "\n";
}

}  // namespace rdcdyn
