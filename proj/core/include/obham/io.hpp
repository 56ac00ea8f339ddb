#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "obham/integrator.hpp"

namespace obham::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

uint64_t fnv1a64(std::string_view s);

/// Zero-padded lowercase 16-digit hex.
std::string hex16(uint64_t v);

/// Trajectory table. First line carries the config digest as a comment,
/// second line the column header t,x*,xi*,pi*,phi,energy,h_used; the first
/// data row is the initial state with h_used = 0.
void write_csv(const std::string& path, const std::string& config_digest,
               const ObservationSystemSpec& spec, const integrate::Trajectory& traj);

/// Step diagnostics as JSON lines: one meta record with the digest, one
/// record per accepted step, one final-state record.
void write_jsonl(const std::string& path, const std::string& config_digest,
                 const integrate::Trajectory& traj);

void write_text(const std::string& path, const std::string& text);

} // namespace obham::io
