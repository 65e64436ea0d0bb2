#pragma once

#include "rdcdyn/structure.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace rdcdyn {

struct parse_error : std::runtime_error {
  int line;
  parse_error(const std::string& msg, int line_number)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + msg),
        line(line_number) {}
};

struct PdbParseOptions {
  char chain = 'A';
  bool reconstruct_amide_h = true;
  bool first_model_only = true;
};

/// Reads ATOM records of one chain (fixed columns). Alternate locations
/// resolve to the highest occupancy; HETATM and insertion-coded records are
/// ignored. Throws parse_error when no usable ATOM record exists or a
/// coordinate field is malformed.
BackboneStructure parse_pdb(const std::string& text,
                            const PdbParseOptions& options = {});

BackboneStructure load_pdb_file(const std::filesystem::path& path,
                                const PdbParseOptions& options = {});

/// ATOM records for the tracked backbone atoms, fixed columns. `bfactor`
/// fills the temperature-factor column of every record.
void write_pdb_atoms(std::ostream& os, const BackboneStructure& s,
                     int& serial, double bfactor = 0.0);

std::string to_pdb(const BackboneStructure& s);

void save_pdb_file(const std::filesystem::path& path,
                   const BackboneStructure& s);

}  // namespace rdcdyn
