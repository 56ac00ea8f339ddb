#pragma once

#include <string>

#include "obham/integrator.hpp"
#include "obham/systems.hpp"

// Run configuration: JSON in, canonical JSON out. Parsing is strict (unknown
// keys are errors, types must match) and serialize() always emits every key,
// so serialize(parse(text)) is a canonical form and parse(serialize(c))
// round-trips exactly. The digest is an FNV-1a hash of the canonical form; it
// is stamped into every output file a run produces.

namespace obham::config {

struct RunConfig {
    std::string system_name = "oscillator"; // oscillator | circle | toda
    systems::OscillatorOptions oscillator;
    systems::CircleOptions circle;
    systems::TodaOptions toda;

    integrate::IntegratorConfig integrator; // includes regularization + backend

    MixingModel::Mode mixing_mode = MixingModel::Mode::Zero;
    bool mixing_complete_compatible = false;

    std::string csv_path;
    std::string jsonl_path;
    std::string report_path;
};

/// Parses and fully validates a configuration document. Throws InvalidInput
/// with a path-qualified message on any malformed content.
RunConfig parse(const std::string& json_text);

/// Reads the file and parses it. Throws InvalidInput when unreadable.
RunConfig load(const std::string& path);

/// Canonical serialization: sorted keys, every field explicit.
std::string serialize(const RunConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical serialization.
std::string digest(const RunConfig& cfg);

/// Instantiates the configured system and installs the mixing block.
systems::SystemBundle build_system(const RunConfig& cfg);

} // namespace obham::config
