#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fedgen/config.hpp"

namespace fedgen {

struct RunArtifact {
  std::filesystem::path dir;
};

enum class RunMode { hierarchy, flat_fl, merge_only, local_only };
RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

// Every command creates out_dir, writes the config echo first, then its data
// files. Wall-clock timings land in metadata.txt, never in data CSVs.
RunArtifact cmd_partition(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
RunArtifact cmd_run(const ExperimentConfig& cfg, RunMode mode, const std::filesystem::path& out_dir);
// what: "sweep", "grid", or "all"
RunArtifact cmd_trueput(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        const std::string& what = "all");
// what: "sweep", "learn", or "all"
RunArtifact cmd_decode(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       const std::string& what = "all");
RunArtifact cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                       const std::filesystem::path& out_dir);

}  // namespace fedgen
