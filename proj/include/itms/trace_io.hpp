#pragma once

// Trace CSV: one row per plant step, shortest round-trip decimal for every
// number so read(write(trace)) == trace exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "itms/simulation.hpp"

namespace itms {

/// t, PlantState fields, ControlInput fields, door_signal, lower_active, q_hp.
[[nodiscard]] std::vector<std::string> trace_columns();

/// Shortest decimal text that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

void write_trace_csv(std::ostream& os, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);

/// Throws ConfigError on a malformed header or row.
[[nodiscard]] Trace read_trace_csv(std::istream& is);
[[nodiscard]] Trace read_trace_csv(const std::string& path);

}  // namespace itms
