#include "rdcdyn/pdb.hpp"

#include "rdcdyn/log.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace rdcdyn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<BackboneAtom> atom_kind(const std::string& name) {
  if (name == "N") return BackboneAtom::N;
  if (name == "H" || name == "HN") return BackboneAtom::H;
  if (name == "C") return BackboneAtom::C;
  if (name == "O") return BackboneAtom::O;
  if (name == "CA") return BackboneAtom::CA;
  if (name == "HA") return BackboneAtom::HA;
  return std::nullopt;
}

double parse_field(const std::string& line, std::size_t pos, std::size_t len,
                   int line_number, const char* what) {
  const std::string field = trim(line.substr(pos, len));
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw parse_error(std::string("malformed ") + what + " field '" + field +
                          "'",
                      line_number);
  }
}

const char* element_of(BackboneAtom a) {
  switch (a) {
    case BackboneAtom::N: return "N";
    case BackboneAtom::H: return "H";
    case BackboneAtom::C: return "C";
    case BackboneAtom::O: return "O";
    case BackboneAtom::CA: return "C";
    case BackboneAtom::HA: return "H";
  }
  return "X";
}

}  // namespace

BackboneStructure parse_pdb(const std::string& text,
                            const PdbParseOptions& options) {
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  bool saw_any_atom = false;
  bool saw_model_end = false;

  struct Slot {
    Vec3 pos = Vec3::Zero();
    double occupancy = -1.0;
  };
  // (residue index) -> (name, per-atom best-occupancy slot)
  std::map<int, std::pair<std::string, std::array<Slot, 6>>> collected;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.rfind("ENDMDL", 0) == 0 && options.first_model_only &&
        !collected.empty()) {
      saw_model_end = true;
      continue;
    }
    if (line.rfind("ATOM", 0) != 0 || line.size() < 54) continue;
    saw_any_atom = true;
    if (saw_model_end) continue;

    const char chain = line.size() > 21 ? line[21] : ' ';
    if (chain != options.chain) continue;
    const char icode = line.size() > 26 ? line[26] : ' ';
    if (icode != ' ') continue;

    const std::string name = trim(line.substr(12, 4));
    const auto kind = atom_kind(name);
    if (!kind) continue;

    const std::string res_name = trim(line.substr(17, 3));
    const int res_seq = static_cast<int>(
        parse_field(line, 22, 4, line_number, "residue number"));
    const double x = parse_field(line, 30, 8, line_number, "x coordinate");
    const double y = parse_field(line, 38, 8, line_number, "y coordinate");
    const double z = parse_field(line, 46, 8, line_number, "z coordinate");
    double occupancy = 1.0;
    if (line.size() >= 60) {
      const std::string occ = trim(line.substr(54, 6));
      if (!occ.empty())
        occupancy = parse_field(line, 54, 6, line_number, "occupancy");
    }

    auto& entry = collected[res_seq];
    if (entry.first.empty()) entry.first = res_name;
    Slot& slot = entry.second[static_cast<int>(*kind)];
    if (occupancy > slot.occupancy) {
      slot.occupancy = occupancy;
      slot.pos = Vec3(x, y, z);
    }
  }

  if (!saw_any_atom) throw parse_error("no ATOM records found", line_number);
  if (collected.empty())
    throw parse_error(std::string("no ATOM records for chain '") +
                          options.chain + "'",
                      line_number);

  std::vector<Residue> residues;
  residues.reserve(collected.size());
  for (const auto& [index, entry] : collected) {
    Residue r;
    r.index = index;
    r.name = entry.first;
    for (int k = 0; k < 6; ++k)
      if (entry.second[k].occupancy >= 0) r.atoms[k] = entry.second[k].pos;
    residues.push_back(std::move(r));
  }

  BackboneStructure s(std::move(residues), options.chain);
  if (!s.gaps().empty()) {
    std::string where;
    for (int g : s.gaps()) where += " " + std::to_string(g);
    log_info("chain break after residue(s):" + where);
  }
  if (options.reconstruct_amide_h) s = reconstruct_amide_protons(s);
  return s;
}

BackboneStructure load_pdb_file(const std::filesystem::path& path,
                                const PdbParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pdb(buf.str(), options);
}

void write_pdb_atoms(std::ostream& os, const BackboneStructure& s, int& serial,
                     double bfactor) {
  char buf[96];
  for (const Residue& r : s.residues()) {
    for (BackboneAtom kind : kBackboneAtoms) {
      if (!r.has(kind)) continue;
      const Vec3& p = r.atom(kind);
      std::snprintf(buf, sizeof buf,
                    "ATOM  %5d  %-3s %-3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f"
                    "          %2s\n",
                    serial++, to_string(kind).c_str(), r.name.c_str(),
                    s.chain(), r.index, p.x(), p.y(), p.z(), 1.0, bfactor,
                    element_of(kind));
      os << buf;
    }
  }
}

std::string to_pdb(const BackboneStructure& s) {
  std::ostringstream os;
  int serial = 1;
  write_pdb_atoms(os, s, serial);
  os << "TER\nEND\n";
  return os.str();
}

void save_pdb_file(const std::filesystem::path& path,
                   const BackboneStructure& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_pdb(s);
}

}  // namespace rdcdyn
