// kropina - trajectory CSV files and run manifests
#ifndef KROPINA_IO_HPP_
#define KROPINA_IO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kropina/ode.hpp"

namespace kropina {

/// CSV with header exactly t,x1..xn,xi1..xin,F,omega_xi and 17-significant-
/// digit decimals (lossless double round-trip).
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Reads the format written above. The result carries samples only (no dense
/// output, no diagnostics hook).
Trajectory read_trajectory_csv(const std::string& path);

/// Everything needed to rerun a CLI invocation bit-for-bit on one platform.
struct RunManifest {
  std::string command;
  std::string model;
  std::vector<std::string> seeds;
  std::string gauge;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  std::string termination;
  std::map<std::string, std::string> extra;
  std::vector<std::string> output_files;  // digests computed at write time
  std::string version;
};

/// artifact.csv -> artifact.manifest.json
std::string manifest_path_for(const std::string& artifact_path);

void write_manifest(const RunManifest& m, const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes.
std::uint64_t file_digest(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace kropina

#endif  // KROPINA_IO_HPP_
