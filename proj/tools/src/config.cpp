#include "specinfer/cli/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specinfer/compiler.hpp"
#include "specinfer/error.hpp"

namespace specinfer::cli {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

/// Runs `f`, turning JSON type and key errors into ParseError.
template <class F>
auto schema(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

Cell parse_cell(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("cell must be [x, y]");
  return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Inline value, or the parsed contents of the file it names.
std::string section_text(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string()) return read_file(base_dir / j.get<std::string>());
  return j.dump();
}

GridSpec world_from(const json& j) {
  GridSpec spec;
  spec.width = j.at("width").get<unsigned>();
  spec.height = j.at("height").get<unsigned>();
  if (j.contains("tiles")) spec.tiles = j.at("tiles").get<std::vector<std::string>>();
  if (j.contains("slip")) {
    const json& slip = j.at("slip");
    spec.slip_numerator = slip.at("numerator").get<std::uint64_t>();
    const unsigned q = slip.at("coin_bits").get<unsigned>();
    if (q > 62) throw ParseError("world: at most 62 coin bits");
    spec.slip_denominator = std::uint64_t{1} << q;
    if (slip.contains("direction")) spec.slip_direction = parse_direction(slip.at("direction").get<std::string>());
  }
  if (j.contains("actions")) {
    spec.actions.clear();
    for (const json& a : j.at("actions")) spec.actions.push_back(parse_direction(a.get<std::string>()));
  }
  if (j.contains("start")) spec.start = parse_cell(j.at("start"));
  return spec;
}

std::vector<RawDemo> demos_from(const json& j) {
  std::vector<RawDemo> out;
  for (const json& demo : j.at("demos")) {
    RawDemo d;
    for (const json& step : demo) {
      if (!step.is_array() || step.size() != 2) throw ParseError("demo step must be [action, [x, y]]");
      d.push_back(DemoStep{step.at(0).get<std::string>(), parse_cell(step.at(1))});
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Recursive-descent parser for spec expressions.
class SpecParser {
public:
  SpecParser(std::string_view text, const Gridworld& world) : text_(text), world_(world) {}

  past::Formula parse() {
    past::Formula f = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

private:
  using Formula = past::Formula;

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("spec '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<Formula> arguments() {
    std::vector<Formula> args;
    expect('(');
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    expect(')');
    return args;
  }

  Formula unary(const std::string& op, std::vector<Formula> args) {
    if (args.size() != 1) fail(op + " takes one argument");
    return args[0];
  }

  Formula color_atom(const std::string& name) {
    static const std::pair<const char*, char> names[] = {
        {"yellow", 'y'}, {"red", 'r'}, {"blue", 'b'}, {"brown", 'n'}, {"white", 'w'},
        {"y", 'y'},      {"r", 'r'},   {"b", 'b'},    {"n", 'n'},     {"w", 'w'}};
    for (const auto& [word, c] : names) {
      if (name != word) continue;
      bool present = false;
      for (unsigned y = 0; y < world_.spec().height && !present; ++y) {
        for (unsigned x = 0; x < world_.spec().width && !present; ++x) {
          present = world_.color(Cell{static_cast<int>(x), static_cast<int>(y)}) == c;
        }
      }
      if (!present) throw DomainError("spec '" + std::string(text_) + "': no tile of color " + name + " in the world");
      return Formula::atom(world_.tile_predicate(c), name);
    }
    fail("unknown name '" + name + "'");
  }

  Formula did(const std::string& action) {
    std::uint64_t id = 0;
    try {
      id = world_.action_id(action);
    } catch (const Error& e) {
      throw DomainError("spec '" + std::string(text_) + "': " + e.what());
    }
    BitCircuit p;
    const auto bits = wires::inputs(p.circuit, Port::action, world_.pa().action_bits);
    p.out = wires::equals_const(p.circuit, bits, id);
    return Formula::atom(std::move(p), "did(" + action + ")");
  }

  Formula expr() {
    const std::string name = word();
    if (name == "true") return Formula::constant(true);
    if (name == "false") return Formula::constant(false);
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') return color_atom(name);
    if (name == "did") {
      expect('(');
      const std::string action = word();
      expect(')');
      return did(action);
    }
    std::vector<Formula> args = arguments();
    if (name == "not") return !unary(name, args);
    if (name == "once" || name == "reach") return past::once(unary(name, args));
    if (name == "historically") return past::historically(unary(name, args));
    if (name == "avoid") return past::historically(!unary(name, args));
    if (name == "and" || name == "or") {
      Formula acc = args[0];
      for (std::size_t i = 1; i < args.size(); ++i) acc = name == "and" ? (acc && args[i]) : (acc || args[i]);
      return acc;
    }
    if (name == "implies" || name == "since") {
      if (args.size() != 2) fail(name + " takes two arguments");
      return name == "implies" ? past::implies(args[0], args[1]) : past::since(args[0], args[1]);
    }
    fail("unknown operator '" + name + "'");
  }

  std::string_view text_;
  const Gridworld& world_;
  std::size_t pos_ = 0;
};

} // namespace

GridSpec parse_world(std::string_view json_text) {
  const json j = parse_json(json_text, "world");
  return schema("world", [&] { return world_from(j); });
}

std::vector<RawDemo> parse_demos(std::string_view json_text) {
  const json j = parse_json(json_text, "demos");
  return schema("demos", [&] { return demos_from(j); });
}

std::vector<Demonstration> resolve_demos(const std::vector<RawDemo>& raw, const Gridworld& world) {
  std::vector<Demonstration> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Demonstration d;
    for (std::size_t t = 0; t < raw[i].size(); ++t) {
      const DemoStep& step = raw[i][t];
      try {
        d.steps.push_back(TraceStep{world.action_id(step.action), world.encode(step.cell)});
      } catch (const Error& e) {
        throw DomainError("demo " + std::to_string(i) + " step " + std::to_string(t) + ": " + e.what());
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

past::Formula parse_spec(std::string_view expr, const Gridworld& world) { return SpecParser(expr, world).parse(); }

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "config");
  return schema("config", [&] {
    RunConfig config;
    config.world = parse_world(section_text(j.at("world"), base_dir));
    for (const json& s : j.at("specs")) {
      SpecEntry entry{s.at("name").get<std::string>(), s.at("expr").get<std::string>(), std::nullopt};
      if (s.contains("log_prior")) entry.log_prior = s.at("log_prior").get<double>();
      config.specs.push_back(std::move(entry));
    }
    if (config.specs.empty()) throw ParseError("config: at least one spec is required");
    config.demos = j.contains("demos") ? parse_demos(section_text(j.at("demos"), base_dir)) : std::vector<RawDemo>{};
    if (j.contains("discount")) {
      const json& d = j.at("discount");
      config.discount =
          DiscountConfig{d.at("gamma_num").get<std::uint64_t>(), d.at("gamma_bits").get<unsigned>(),
                         d.contains("epsilon") ? d.at("epsilon").get<double>() : 0.01};
    } else {
      config.horizon = j.at("horizon").get<unsigned>();
      if (config.horizon == 0) throw ParseError("config: horizon must be at least 1");
    }
    if (j.contains("tolerance")) config.tolerance = j.at("tolerance").get<double>();
    if (!(config.tolerance > 0.0)) throw ParseError("config: tolerance must be positive");
    if (j.contains("p_target")) config.p_target = j.at("p_target").get<double>();
    return config;
  });
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

Problem prepare(const RunConfig& config) {
  Problem problem{make_gridworld(config.world), {}, config.horizon, {}, {}};
  const Alphabet alphabet{problem.world.pa().state_bits, problem.world.pa().action_bits};
  std::optional<Discounted> discounted;
  if (config.discount) {
    const DiscountConfig& d = *config.discount;
    discounted = with_discount(problem.world.pa(), d.gamma_num, d.gamma_bits, d.epsilon);
    problem.pa = discounted->pa;
    problem.horizon = discounted->horizon;
  } else {
    problem.pa = problem.world.pa();
  }
  for (const SpecEntry& s : config.specs) {
    Monitor m = past::compile(parse_spec(s.expr, problem.world), alphabet);
    if (discounted) m = freeze_at_sink(m, *discounted);
    problem.candidates.push_back(Candidate{s.name, std::move(m), s.log_prior});
  }
  problem.demos = resolve_demos(config.demos, problem.world);
  return problem;
}

} // namespace specinfer::cli
