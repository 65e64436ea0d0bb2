#include "rdcdyn/fetch.hpp"

#include "rdcdyn/log.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

namespace rdcdyn {

namespace {

std::mutex g_cache_mutex;

bool valid_accession(const std::string& id) {
  if (id.size() != 4) return false;
  if (!std::isdigit(static_cast<unsigned char>(id[0]))) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(c));
  return s;
}

// Splits "https://host:port/prefix" into client target and path prefix.
std::pair<std::string, std::string> split_base(const std::string& base) {
  const auto scheme_end = base.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base.find('/', host_start);
  if (path_start == std::string::npos) return {base, ""};
  return {base.substr(0, path_start), base.substr(path_start)};
}

}  // namespace

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("RDCDYN_CACHE_DIR")) return env;
  if (const char* home = std::getenv("HOME"))
    return std::filesystem::path(home) / ".cache" / "rdcdyn";
  return std::filesystem::path(".rdcdyn_cache");
}

std::string fetch_structure(const std::string& raw_id,
                            const FetchOptions& options) {
  const std::string id = upper(raw_id);
  if (!valid_accession(id))
    throw fetch_error(fetch_error::Kind::BadId,
                      "'" + raw_id + "' is not a valid 4-character accession");

  const std::filesystem::path cache_dir =
      options.cache_dir.empty() ? default_cache_dir() : options.cache_dir;
  const std::filesystem::path cached = cache_dir / (id + ".pdb");

  if (std::filesystem::exists(cached)) {
    std::ifstream in(cached);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  if (options.no_network)
    throw fetch_error(fetch_error::Kind::Network,
                      "network disabled and '" + id + "' is not cached");

  const auto [target, prefix] = split_base(options.base_url);
  httplib::Client client(target);
  client.set_connection_timeout(options.timeout_seconds);
  client.set_read_timeout(options.timeout_seconds);
  client.set_follow_location(true);

  const std::string path = prefix + "/" + id + ".pdb";
  httplib::Result res = client.Get(path);
  if (!res)
    throw fetch_error(fetch_error::Kind::Network,
                      "connection to " + target + " failed (" +
                          httplib::to_string(res.error()) + ")");
  if (res->status == 404)
    throw fetch_error(fetch_error::Kind::NotFound,
                      "entry '" + id + "' not found at " + target);
  if (res->status != 200)
    throw fetch_error(fetch_error::Kind::Network,
                      "HTTP " + std::to_string(res->status) + " from " +
                          target);

  {
    std::lock_guard lock(g_cache_mutex);
    std::filesystem::create_directories(cache_dir);
    const std::filesystem::path tmp = cached.string() + ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out << res->body;
    out.close();
    std::filesystem::rename(tmp, cached);
  }
  log_info("fetched " + id + " (" + std::to_string(res->body.size()) +
           " bytes)");
  return res->body;
}

}  // namespace rdcdyn
