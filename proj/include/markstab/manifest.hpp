#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "markstab/errors.hpp"

namespace markstab {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the raw file bytes, reported as fixed-width hex.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot digest missing file: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

// Everything needed to reproduce a CLI run: the argv to replay plus digests
// of the inputs it read. Written next to each command's primary outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;
  double wall_time_seconds = 0.0;
};

inline void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  j["tool"] = "markstab";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["inputs"] = m.input_digests;
  j["outputs"] = m.outputs;
  j["wall_time_seconds"] = m.wall_time_seconds;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace markstab
