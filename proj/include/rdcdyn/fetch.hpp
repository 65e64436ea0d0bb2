#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace rdcdyn {

struct fetch_error : std::runtime_error {
  enum class Kind { BadId, NotFound, Network };
  Kind kind;
  fetch_error(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

struct FetchOptions {
  /// Scheme + host (+ optional port and path prefix); entries are fetched
  /// from "<base_url>/<ID>.pdb".
  std::string base_url = "https://files.rcsb.org/download";
  /// Defaults to $RDCDYN_CACHE_DIR, else ~/.cache/rdcdyn.
  std::filesystem::path cache_dir;
  bool no_network = false;
  int timeout_seconds = 30;
};

std::filesystem::path default_cache_dir();

/// Validates the 4-character accession (digit + three alphanumerics) before
/// touching the network, serves cache hits without any connection, and
/// caches successful downloads. Throws fetch_error with kind BadId,
/// NotFound (HTTP 404) or Network (everything else).
std::string fetch_structure(const std::string& id,
                            const FetchOptions& options = {});

}  // namespace rdcdyn
