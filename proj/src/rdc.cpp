#include "rdcdyn/rdc.hpp"

#include "rdcdyn/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rdcdyn {

namespace {

// splitmix64, used to derive independent per-medium noise streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RdcSet::RdcSet(std::string medium) : medium_(std::move(medium)) {
  if (medium_.empty())
    throw std::invalid_argument("medium identifier must be non-empty");
}

void RdcSet::insert(RdcKey key, RdcObservation obs) {
  if (!data_.emplace(key, obs).second)
    throw std::invalid_argument("duplicate RDC key: residue " +
                                std::to_string(key.residue) + " " +
                                to_string(key.type));
}

void RdcSet::insert_or_assign(RdcKey key, RdcObservation obs) {
  data_.insert_or_assign(key, obs);
}

const RdcObservation* RdcSet::find(RdcKey key) const {
  auto it = data_.find(key);
  return it == data_.end() ? nullptr : &it->second;
}

void DynamicsModel::validate() const {
  if (states.empty() || states.size() != occupancies.size())
    throw std::invalid_argument("states and occupancies must match");
  double sum = 0;
  for (double rho : occupancies) {
    if (rho < 0.0 || rho > 1.0)
      throw std::invalid_argument("occupancy outside [0, 1]");
    sum += rho;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("occupancies must sum to 1");

  const BackboneStructure& first = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) {
    const BackboneStructure& other = states[i];
    if (other.size() != first.size())
      throw std::invalid_argument("states must share residue numbering");
    for (const Residue& r : first.residues()) {
      const Residue* o = other.find(r.index);
      if (!o) throw std::invalid_argument("states must share residue numbering");
      if (!static_domain.contains(r.index)) continue;
      for (BackboneAtom k :
           {BackboneAtom::N, BackboneAtom::CA, BackboneAtom::C}) {
        if (r.has(k) != o->has(k))
          throw std::invalid_argument("static domain differs between states");
        if (r.has(k) && (r.atom(k) - o->atom(k)).norm() > 1e-6)
          throw std::invalid_argument(
              "static domain moves between states (residue " +
              std::to_string(r.index) + ")");
      }
    }
  }
}

RdcSet simulate_rdcs(const BackboneStructure& s, const PrincipalFrame& frame,
                     const std::vector<VectorType>& types, DomainRange range,
                     const std::string& medium) {
  const SaupeTensor tensor = tensor_from_principal(frame);
  RdcSet out(medium);
  for (const VectorRecord& rec : build_vectors(s, types, range))
    out.insert({rec.residue, rec.type},
               {compute_rdc(tensor, rec.v, rec.type), std::nullopt});
  return out;
}

RdcSet average_rdcs(const std::vector<RdcSet>& sets,
                    const std::vector<double>& occupancies) {
  if (sets.empty() || sets.size() != occupancies.size())
    throw std::invalid_argument("need one occupancy per set");
  double sum = 0;
  for (double rho : occupancies) sum += rho;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("occupancies must sum to 1");

  RdcSet out(sets.front().medium());
  std::size_t dropped = 0;
  for (const auto& [key, obs] : sets.front()) {
    double value = occupancies.front() * obs.value_hz;
    bool shared = true;
    for (std::size_t i = 1; i < sets.size(); ++i) {
      const RdcObservation* other = sets[i].find(key);
      if (!other) {
        shared = false;
        break;
      }
      value += occupancies[i] * other->value_hz;
    }
    if (shared)
      out.insert(key, {value, obs.error_hz});
    else
      ++dropped;
  }
  if (dropped > 0)
    log_info("average_rdcs: dropped " + std::to_string(dropped) +
             " keys outside the common intersection");
  if (out.empty())
    throw std::invalid_argument("no common RDC keys across states");
  return out;
}

RdcSet add_noise(const RdcSet& set, double half_width_hz, std::uint64_t seed) {
  if (half_width_hz < 0)
    throw std::invalid_argument("noise half-width must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-half_width_hz, half_width_hz);
  RdcSet out(set.medium());
  for (const auto& [key, obs] : set)
    out.insert(key, {obs.value_hz + (half_width_hz > 0 ? uni(rng) : 0.0),
                     half_width_hz});
  return out;
}

std::vector<RdcSet> simulate_dynamics(const DynamicsModel& model,
                                      const std::vector<MediumSpec>& media,
                                      const std::vector<VectorType>& types,
                                      double noise_hz, std::uint64_t seed) {
  model.validate();
  if (media.empty()) throw std::invalid_argument("need at least one medium");

  const DomainRange span = model.states.front().full_range();
  std::vector<RdcSet> out;
  out.reserve(media.size());
  for (std::size_t m = 0; m < media.size(); ++m) {
    std::vector<RdcSet> per_state;
    per_state.reserve(model.states.size());
    for (const BackboneStructure& state : model.states)
      per_state.push_back(
          simulate_rdcs(state, media[m].frame, types, span, media[m].name));
    RdcSet averaged = average_rdcs(per_state, model.occupancies);
    out.push_back(add_noise(averaged, noise_hz, mix_seed(seed, m)));
  }
  return out;
}

void write_rdc_csv(std::ostream& os, const std::vector<RdcSet>& sets) {
  os << "medium,residue,vector_type,value_hz,error_hz\n";
  char buf[160];
  for (const RdcSet& set : sets) {
    for (const auto& [key, obs] : set) {
      std::snprintf(buf, sizeof buf, "%s,%d,%s,%.10g,%.10g\n",
                    set.medium().c_str(), key.residue,
                    to_string(key.type).c_str(), obs.value_hz,
                    obs.error_hz.value_or(0.0));
      os << buf;
    }
  }
}

void save_rdc_csv(const std::filesystem::path& path,
                  const std::vector<RdcSet>& sets) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_rdc_csv(out, sets);
}

std::vector<RdcSet> read_rdc_csv(std::istream& in) {
  std::vector<RdcSet> sets;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line.rfind("medium,", 0) == 0 || line[0] == '#')
      continue;
    std::istringstream fields(line);
    std::string medium, residue, type, value, error;
    if (!std::getline(fields, medium, ',') ||
        !std::getline(fields, residue, ',') ||
        !std::getline(fields, type, ',') ||
        !std::getline(fields, value, ','))
      throw std::runtime_error("bad RDC CSV line " +
                               std::to_string(line_number));
    std::getline(fields, error, ',');

    auto it = std::find_if(sets.begin(), sets.end(), [&](const RdcSet& s) {
      return s.medium() == medium;
    });
    if (it == sets.end()) {
      sets.emplace_back(medium);
      it = sets.end() - 1;
    }
    RdcObservation obs;
    obs.value_hz = std::stod(value);
    if (!error.empty() && std::stod(error) > 0) obs.error_hz = std::stod(error);
    it->insert({std::stoi(residue), vector_type_from_string(type)}, obs);
  }
  return sets;
}

std::vector<RdcSet> load_rdc_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_rdc_csv(in);
}

void write_redcat(std::ostream& os, const BackboneStructure& s,
                  const RdcSet& set, double default_error_hz) {
  char buf[256];
  for (const auto& [key, obs] : set) {
    const Residue* res = s.find(key.residue);
    const Residue* prev = s.find(key.residue - 1);
    const Residue* from = nullptr;
    const Residue* to = nullptr;
    BackboneAtom a1{}, a2{};
    switch (key.type) {
      case VectorType::N_H:
        from = res; a1 = BackboneAtom::N; to = res; a2 = BackboneAtom::H;
        break;
      case VectorType::CA_HA:
        from = res; a1 = BackboneAtom::CA; to = res; a2 = BackboneAtom::HA;
        break;
      case VectorType::C_N:
        from = prev; a1 = BackboneAtom::C; to = res; a2 = BackboneAtom::N;
        break;
      case VectorType::C_H:
        from = prev; a1 = BackboneAtom::C; to = res; a2 = BackboneAtom::H;
        break;
    }
    if (!from || !to || !from->has(a1) || !to->has(a2)) continue;
    const Vec3& p = from->atom(a1);
    const Vec3& q = to->atom(a2);
    std::snprintf(buf, sizeof buf,
                  "%.3f %.3f %.3f %.3f %.3f %.3f %.6f %.3f /* %s %d */\n",
                  p.x(), p.y(), p.z(), q.x(), q.y(), q.z(), obs.value_hz,
                  obs.error_hz.value_or(default_error_hz),
                  to_string(key.type).c_str(), key.residue);
    os << buf;
  }
}

}  // namespace rdcdyn
