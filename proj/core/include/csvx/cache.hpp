#pragma once

#include <filesystem>
#include <string>

#include "csvx/artifact.hpp"

namespace csvx {

/// cache/<env>/<coalition-key>/<config-hash>.json
std::filesystem::path artifact_path(const std::filesystem::path& cache_dir,
                                    const std::string& env_id, const Coalition& c,
                                    const std::string& config_hash);

void save_artifact(const std::filesystem::path& cache_dir, const PolicyArtifact& art);

/// Loads and verifies the content hash; throws CacheError on corruption.
PolicyArtifact load_artifact(const std::filesystem::path& path);

bool artifact_cached(const std::filesystem::path& cache_dir, const std::string& env_id,
                     const Coalition& c, const std::string& config_hash);

}  // namespace csvx
