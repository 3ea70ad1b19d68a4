#include "kropina/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kropina/version.hpp"

namespace kropina {

std::string engine_version() {
#ifdef KROPINA_VERSION
  return KROPINA_VERSION;
#else
  return "unversioned";
#endif
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IOFailure("cannot open '" + path + "' for writing");
  const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",xi" << i;
  out << ",F,omega_xi\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t);
    for (int i = 0; i < n; ++i) out << "," << format_double(s.x[i]);
    for (int i = 0; i < n; ++i) out << "," << format_double(s.xi[i]);
    out << "," << format_double(s.F) << "," << format_double(s.omega_xi) << "\n";
  }
  if (!out) throw IOFailure("write failed for '" + path + "'");
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOFailure("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw IOFailure("empty trajectory file '" + path + "'");
  // header t,x1..xn,xi1..xin,F,omega_xi -> count columns
  int cols = 1;
  for (char c : header) {
    if (c == ',') ++cols;
  }
  const int n = (cols - 3) / 2;
  if (cols != 2 * n + 3 || n < 1) {
    throw IOFailure("unrecognized trajectory header in '" + path + "'");
  }
  Trajectory traj;
  traj.meta.structure_label = "file:" + path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (...) {
        throw IOFailure("non-numeric cell '" + cell + "' in '" + path + "'");
      }
    }
    if (static_cast<int>(vals.size()) != cols) {
      throw IOFailure("bad row width in '" + path + "'");
    }
    TrajectorySample s;
    s.t = vals[0];
    s.x = Eigen::Map<const Vec>(vals.data() + 1, n);
    s.xi = Eigen::Map<const Vec>(vals.data() + 1 + n, n);
    s.F = vals[1 + 2 * n];
    s.omega_xi = vals[2 + 2 * n];
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

std::string manifest_path_for(const std::string& artifact_path) {
  const size_t dot = artifact_path.find_last_of('.');
  const size_t slash = artifact_path.find_last_of("/\\");
  const bool has_ext = dot != std::string::npos &&
                       (slash == std::string::npos || dot > slash);
  const std::string base = has_ext ? artifact_path.substr(0, dot) : artifact_path;
  return base + ".manifest.json";
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  j["command"] = m.command;
  j["model"] = m.model;
  j["seeds"] = m.seeds;
  j["gauge"] = m.gauge;
  j["tolerances"] = {{"rel", m.rel_tol}, {"abs", m.abs_tol}};
  j["termination"] = m.termination;
  j["version"] = m.version;
  for (const auto& [k, v] : m.extra) j["extra"][k] = v;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& f : m.output_files) {
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(file_digest(f)));
    outs.push_back({{"file", f}, {"fnv1a64", digest}});
  }
  j["outputs"] = outs;
  std::ofstream out(path);
  if (!out) throw IOFailure("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOFailure("cannot open '" + path + "' for digest");
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace kropina
