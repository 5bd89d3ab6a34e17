#pragma once

/// @file config.hpp
/// @brief JSON world, demonstration and run configuration files, and task
/// expressions.
///
/// Expressions are nested calls over tile colors:
///
///     and(reach(yellow), avoid(red), historically(implies(yellow, not(since(not(brown), blue)))))
///
/// Leaves are true, false, a color (yellow, red, blue, brown, white or the
/// letters y r b n w) or did(<action name>). Operators: not, and, or (any
/// arity ≥ 1), implies, once, historically, since(f, g), reach(f) = once(f)
/// and avoid(f) = historically(not f).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specinfer/demos.hpp"
#include "specinfer/gridworld.hpp"
#include "specinfer/monitor.hpp"

namespace specinfer::cli {

/// Throws ParseError for malformed text or schema violations.
GridSpec parse_world(std::string_view json_text);

struct DemoStep {
  std::string action;
  Cell cell;
};
using RawDemo = std::vector<DemoStep>;

/// {"demos": [[["right", [1, 0]], ...], ...]}
std::vector<RawDemo> parse_demos(std::string_view json_text);

/// Maps action names and cells to encodings. Throws DomainError for unknown
/// actions or off-grid cells.
std::vector<Demonstration> resolve_demos(const std::vector<RawDemo>& raw, const Gridworld& world);

/// Throws ParseError for syntax errors and DomainError for colors that no
/// tile of `world` has or unknown actions.
past::Formula parse_spec(std::string_view expr, const Gridworld& world);

struct SpecEntry {
  std::string name;
  std::string expr;
  std::optional<double> log_prior;
};

struct DiscountConfig {
  std::uint64_t gamma_num = 1;
  unsigned gamma_bits = 0;
  double epsilon = 0.01;
};

struct RunConfig {
  GridSpec world;
  std::vector<SpecEntry> specs;
  std::vector<RawDemo> demos;
  unsigned horizon = 1;
  double tolerance = 1e-4;
  /// Fixed satisfaction target for every candidate.
  std::optional<double> p_target;
  std::optional<DiscountConfig> discount;
};

/// `world` and `demos` are either inline objects or paths relative to
/// `base_dir`.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file. Throws ParseError when it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Everything a command needs: the dynamics (discounted when configured),
/// compiled candidates and encoded demonstrations.
struct Problem {
  Gridworld world;
  RandomBitPA pa;
  unsigned horizon = 1;
  std::vector<Candidate> candidates;
  std::vector<Demonstration> demos;
};

/// Builds the world, parses every spec and resolves demonstrations.
Problem prepare(const RunConfig& config);

} // namespace specinfer::cli
