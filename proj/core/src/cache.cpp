#include "csvx/cache.hpp"

#include <fstream>
#include <sstream>

namespace csvx {

std::filesystem::path artifact_path(const std::filesystem::path& cache_dir,
                                    const std::string& env_id, const Coalition& c,
                                    const std::string& config_hash) {
  return cache_dir / env_id / c.key() / (config_hash + ".json");
}

void save_artifact(const std::filesystem::path& cache_dir, const PolicyArtifact& art) {
  auto path = artifact_path(cache_dir, art.env_id, art.coalition, art.config_hash);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CacheError("cannot write artifact file " + path.string());
  out << art.serialize();
}

PolicyArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open artifact file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw CacheError("artifact file " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    return PolicyArtifact::from_json(j);
  } catch (const CacheError& e) {
    throw CacheError(path.string() + ": " + e.what());
  }
}

bool artifact_cached(const std::filesystem::path& cache_dir, const std::string& env_id,
                     const Coalition& c, const std::string& config_hash) {
  return std::filesystem::exists(artifact_path(cache_dir, env_id, c, config_hash));
}

}  // namespace csvx
