#pragma once

/// @file commands.hpp
/// @brief The rank, stats and eval commands.

#include <iosfwd>
#include <string>

#include "specinfer/cli/config.hpp"

namespace specinfer::cli {

enum class Format { tsv, structured };

struct Output {
  Format format = Format::tsv;
  /// Print wall-clock compile times; otherwise the column reads NA so that
  /// output is reproducible byte for byte.
  bool timing = false;
  unsigned jobs = 1;
};

void cmd_rank(const RunConfig& config, const Output& opts, std::ostream& out);
void cmd_stats(const RunConfig& config, const Output& opts, std::ostream& out);
/// Throws DomainError for an unknown spec name or a negative θ.
void cmd_eval(const RunConfig& config, const std::string& spec, double theta, const Output& opts, std::ostream& out);

/// Parses arguments, runs a command and maps failures to exit codes: 0 on
/// success, 1 for user or domain errors, 2 for internal errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace specinfer::cli
