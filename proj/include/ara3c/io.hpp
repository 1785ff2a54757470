#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ara3c/eval.hpp"
#include "ara3c/trainer.hpp"
#include "ara3c/util.hpp"

namespace ara3c {

// Persistence layer: JSON checkpoints and config files, CSV reports, run
// manifests. All writes go through a temp file + rename so a crashed run
// never leaves a partial artifact behind.

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    std::string created;  // ISO 8601 UTC
    std::uint64_t seed = 0;
    TrainedModel model;
};

Checkpoint make_checkpoint(const TrainedModel& model);

// Lossless round trip: save -> load -> save is byte-identical. Doubles use
// the shortest representation that reconstructs the exact 64-bit value.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

// Flat, fully enumerated key set; unknown keys are ConfigErrors naming the
// key. Missing keys keep their defaults.
TrainConfig load_config(const std::filesystem::path& path);
TrainConfig config_from_json(const std::string& text);
std::string config_to_json(const TrainConfig& config);

// CSV schemas (version 1, stable):
//   curve: episode,worker,reward,wallclock_s
//   sweep: sweep_value,seed,episode,reward
//   trace: t,theta,theta_dot,a_mu,a_nu,r
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);
void write_sweep_csv(const EvalReport& report, const std::filesystem::path& path);
void write_trace_csv(const TraceRecord& trace, const std::filesystem::path& path);

struct RunManifest {
    std::string run_id;
    std::string command_line;
    std::string source_revision;
    std::string created;
    std::string config_json;                // snapshot of the effective config
    std::vector<std::string> output_files;  // paths relative to the manifest
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace ara3c
