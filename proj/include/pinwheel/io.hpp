#pragma once

// Files: key = value configuration, binary field and partition dumps with
// text headers, the trace CSV, checkpoint summaries, reports and the run
// manifest.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pinwheel/energy.hpp"
#include "pinwheel/segregation.hpp"
#include "pinwheel/solver.hpp"

namespace pinwheel::io {

namespace fs = std::filesystem;

struct RunConfig {
  SolverConfig solver;
  std::vector<double> schedule;
};

/// -1, -2, -4, ..., -1024.
std::vector<double> default_schedule();

/// One `key = value` per line, `#` starts a comment. Unknown keys and
/// malformed values raise ConfigError carrying the line number; the result
/// is validated.
RunConfig parse_config_text(std::string_view text);
/// Throws IoError when the file cannot be read.
RunConfig parse_config(const fs::path& path);
/// Text that parses back to the same configuration.
std::string config_to_text(const RunConfig& rc);

/// Header lines `key value` up to `end_header`, then n_r1 * n_r2 * n_phi
/// little-endian doubles in r1-major order.
void write_field(const fs::path& path, const Field& u, const std::string& name);
Field read_field(const fs::path& path, GridPtr grid = nullptr);

/// Components as u1.field, u2.field, ... in dir.
void write_state(const fs::path& dir, const PinwheelState& s);
PinwheelState read_state(const fs::path& dir, GridPtr grid = nullptr);

/// Text header, then one byte per cell (see cell_code).
void write_partition(const fs::path& path, const Partition& p);
std::vector<std::uint8_t> read_partition_codes(const fs::path& path);

extern const char* const kTraceColumns;
std::string trace_csv(const ContinuationTrace& trace);
void write_trace_csv(const fs::path& path, const ContinuationTrace& trace);
/// Records with the CSV columns filled in (kinetic and overlap matrices
/// are not part of the CSV).
std::vector<TraceRecord> read_trace_csv(const fs::path& path);

/// Per-beta checkpoint text: beta, j_value, overlap matrix, gauge, iterations.
std::string checkpoint_summary(const TraceRecord& r);

std::string report_text(const OptimalityReport& opt, const NodalReport* nodal, const Partition* part);

/// Write to a temporary sibling and rename over the target.
void write_atomic(const fs::path& path, const std::string& contents);
std::string read_text(const fs::path& path);

}  // namespace pinwheel::io
