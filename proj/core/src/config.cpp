#include "tjm/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace tjm {

namespace {

struct Value {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<Value> array;
  int line = 0, col = 0;
};

struct Table {
  std::map<std::string, Value> values;         // possibly dotted keys
  int line = 0;
};

struct Document {
  Table root;
  std::map<std::string, Table> sections;
  std::vector<Table> noise;  // [[noise]] array elements
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document parse() {
    Document doc;
    Table* current = &doc.root;
    while (!eof()) {
      skip_ws_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        current = parse_header(doc);
      } else {
        auto [key, value] = parse_key_value();
        if (!current->values.emplace(key, std::move(value)).second) {
          fail("duplicate key '" + key + "'");
        }
      }
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config syntax error: " + msg, line_, col());
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      line_start_ = pos_;
    }
    return c;
  }

  int col() const { return static_cast<int>(pos_ - line_start_) + 1; }

  void skip_ws_and_comments() {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
  }

  std::string parse_bare_key() {
    std::string key;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        key.push_back(advance());
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  Table* parse_header(Document& doc) {
    advance();  // '['
    const bool array_table = !eof() && peek() == '[';
    if (array_table) advance();
    skip_inline_ws();
    const std::string name = parse_bare_key();
    skip_inline_ws();
    if (eof() || advance() != ']') fail("expected ']' closing section header");
    if (array_table) {
      if (eof() || advance() != ']') fail("expected ']]' closing array section header");
      if (name != "noise") fail("unknown array section [[" + name + "]]");
      doc.noise.emplace_back();
      doc.noise.back().line = line_;
      return &doc.noise.back();
    }
    if (name == "noise") fail("[noise] must be an array section: use [[noise]]");
    auto [it, fresh] = doc.sections.try_emplace(name);
    if (!fresh) fail("section [" + name + "] appears twice");
    it->second.line = line_;
    return &it->second;
  }

  std::pair<std::string, Value> parse_key_value() {
    const std::string key = parse_bare_key();
    skip_inline_ws();
    if (eof() || advance() != '=') fail("expected '=' after key '" + key + "'");
    skip_inline_ws();
    Value v = parse_value();
    return {key, std::move(v)};
  }

  Value parse_value() {
    Value v;
    v.line = line_;
    v.col = col();
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') {
      v.kind = Value::Kind::String;
      v.str = parse_string();
    } else if (c == '[') {
      v.kind = Value::Kind::Array;
      advance();
      skip_ws_and_comments();
      while (!eof() && peek() != ']') {
        v.array.push_back(parse_value());
        skip_ws_and_comments();
        if (!eof() && peek() == ',') {
          advance();
          skip_ws_and_comments();
        }
      }
      if (eof()) fail("unterminated array");
      advance();  // ']'
    } else if (text_.compare(pos_, 4, "true") == 0) {
      v.kind = Value::Kind::Boolean;
      v.boolean = true;
      pos_ += 4;
    } else if (text_.compare(pos_, 5, "false") == 0) {
      v.kind = Value::Kind::Boolean;
      v.boolean = false;
      pos_ += 5;
    } else {
      v.kind = Value::Kind::Number;
      v.num = parse_number();
    }
    return v;
  }

  std::string parse_string() {
    advance();  // opening quote
    std::string out;
    while (!eof()) {
      const char c = advance();
      if (c == '"') return out;
      if (c == '\\') {
        if (eof()) break;
        const char e = advance();
        if (e == '"' || e == '\\') {
          out.push_back(e);
        } else {
          fail("unsupported escape sequence");
        }
      } else if (c == '\n') {
        fail("unterminated string");
      } else {
        out.push_back(c);
      }
    }
    fail("unterminated string");
  }

  double parse_number() {
    const std::size_t start = pos_;
    while (!eof()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
          c == '.' || c == 'e' || c == 'E') {
        advance();
      } else {
        break;
      }
    }
    double out = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, out);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_ || pos_ == start) {
      fail("malformed number");
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

[[noreturn]] void semantic_fail(const std::string& path, const std::string& msg,
                                int line = 0, int col = 0) {
  throw ConfigError("config error at " + path + ": " + msg, line, col, path);
}

class Binder {
 public:
  explicit Binder(const Table& table, std::string prefix)
      : table_(table), prefix_(std::move(prefix)) {}

  ~Binder() = default;

  double number(const std::string& key, double fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Number) semantic_fail(path(key), "expected a number", v->line, v->col);
    return v->num;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Number || v->num != std::floor(v->num)) {
      semantic_fail(path(key), "expected an integer", v ? v->line : 0, v ? v->col : 0);
    }
    return static_cast<std::int64_t>(v->num);
  }

  bool boolean(const std::string& key, bool fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Boolean) semantic_fail(path(key), "expected true/false", v->line, v->col);
    return v->boolean;
  }

  std::optional<std::string> string(const std::string& key) {
    const Value* v = take(key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::String) semantic_fail(path(key), "expected a string", v->line, v->col);
    return v->str;
  }

  std::vector<Value> array(const std::string& key) {
    const Value* v = take(key);
    if (!v) return {};
    if (v->kind != Value::Kind::Array) semantic_fail(path(key), "expected an array", v->line, v->col);
    return v->array;
  }

  void finish() const {
    for (const auto& [key, value] : table_.values) {
      if (!used_.contains(key)) {
        semantic_fail(path(key), "unknown key", value.line, value.col);
      }
    }
  }

 private:
  const Value* take(const std::string& key) {
    auto it = table_.values.find(key);
    if (it == table_.values.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  const Table& table_;
  std::string prefix_;
  std::set<std::string> used_;
};

ChannelKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "dephasing") return ChannelKind::Dephasing;
  if (s == "excitation") return ChannelKind::Excitation;
  if (s == "relaxation") return ChannelKind::Relaxation;
  semantic_fail(path, "unknown channel kind '" + s + "'");
}

RateSchedule::Kind parse_schedule_kind(const std::string& s, const std::string& path) {
  if (s == "constant") return RateSchedule::Kind::Constant;
  if (s == "damped_oscillatory") return RateSchedule::Kind::DampedOscillatory;
  semantic_fail(path, "unknown schedule kind '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Tjm: return "tjm";
    case RunMode::DenseTrajectory: return "dense_trajectory";
    case RunMode::DenseMaster: return "dense_master";
  }
  return "unknown";
}

SimConfig parse_config(std::string_view text) {
  Parser parser(text);
  const Document doc = parser.parse();
  SimConfig cfg;

  {
    Binder root(doc.root, "");
    if (auto m = root.string("mode")) {
      if (*m == "tjm") cfg.mode = RunMode::Tjm;
      else if (*m == "dense_trajectory") cfg.mode = RunMode::DenseTrajectory;
      else if (*m == "dense_master") cfg.mode = RunMode::DenseMaster;
      else semantic_fail("mode", "unknown mode '" + *m + "'");
    }
    root.finish();
  }

  for (const auto& [name, table] : doc.sections) {
    if (name == "system") {
      Binder b(table, "system");
      cfg.n_sites = static_cast<int>(b.integer("n_sites", cfg.n_sites));
      cfg.j_coupling = b.number("j_coupling", cfg.j_coupling);
      cfg.g_field = b.number("g_field", cfg.g_field);
      b.finish();
    } else if (name == "evolution") {
      Binder b(table, "evolution");
      cfg.dt = b.number("dt", cfg.dt);
      cfg.n_steps = static_cast<int>(b.integer("n_steps", cfg.n_steps));
      cfg.chi_max = b.integer("chi_max", cfg.chi_max);
      cfg.svd_threshold = b.number("svd_threshold", cfg.svd_threshold);
      b.finish();
    } else if (name == "ensemble") {
      Binder b(table, "ensemble");
      cfg.n_traj = static_cast<int>(b.integer("n_traj", cfg.n_traj));
      cfg.base_seed = static_cast<std::uint64_t>(b.integer("base_seed", cfg.base_seed));
      cfg.workers = static_cast<int>(b.integer("workers", cfg.workers));
      b.finish();
    } else if (name == "sampling") {
      Binder b(table, "sampling");
      cfg.sample_stride = static_cast<int>(b.integer("stride", cfg.sample_stride));
      for (const auto& v : b.array("observables")) {
        if (v.kind != Value::Kind::String) {
          semantic_fail("sampling.observables", "expected strings", v.line, v.col);
        }
        if (v.str == "x") continue;  // always measured
        if (v.str == "z") cfg.measure_z = true;
        else semantic_fail("sampling.observables", "unknown observable '" + v.str + "'");
      }
      cfg.sample_sites.clear();
      for (const auto& v : b.array("sites")) {
        if (v.kind != Value::Kind::Number || v.num != std::floor(v.num)) {
          semantic_fail("sampling.sites", "expected integers", v.line, v.col);
        }
        cfg.sample_sites.push_back(static_cast<int>(v.num));
      }
      b.finish();
    } else if (name == "initial") {
      Binder b(table, "initial");
      if (auto s = b.string("state")) {
        if (*s == "zeros") cfg.initial_state = InitialState::AllZeros;
        else if (*s == "plus") cfg.initial_state = InitialState::AllPlus;
        else semantic_fail("initial.state", "unknown initial state '" + *s + "'");
      }
      b.finish();
    } else {
      semantic_fail(name, "unknown section", table.line);
    }
  }

  for (std::size_t i = 0; i < doc.noise.size(); ++i) {
    const std::string prefix = "noise[" + std::to_string(i) + "]";
    Binder b(doc.noise[i], prefix);
    NoiseSpec spec;
    const auto kind = b.string("kind");
    if (!kind) semantic_fail(prefix + ".kind", "missing channel kind");
    spec.kind = parse_kind(*kind, prefix + ".kind");
    if (auto sk = b.string("schedule.kind")) {
      spec.schedule.kind = parse_schedule_kind(*sk, prefix + ".schedule.kind");
    }
    spec.schedule.gamma_inf = b.number("schedule.gamma_inf", 0.0);
    spec.schedule.amplitude = b.number("schedule.amplitude", 0.0);
    spec.schedule.omega = b.number("schedule.omega", 0.0);
    spec.schedule.f_cubic_coeff = b.number("schedule.f_cubic_coeff", 0.0);
    b.finish();
    cfg.noise.push_back(spec);
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const SimConfig& cfg) {
  if (cfg.n_sites < 1) semantic_fail("system.n_sites", "must be >= 1");
  if (!(cfg.dt > 0.0)) semantic_fail("evolution.dt", "must be > 0");
  if (cfg.n_steps < 1) semantic_fail("evolution.n_steps", "must be >= 1");
  if (cfg.chi_max < 1) semantic_fail("evolution.chi_max", "must be >= 1");
  if (cfg.svd_threshold < 0.0) semantic_fail("evolution.svd_threshold", "must be >= 0");
  if (cfg.n_traj < 1) semantic_fail("ensemble.n_traj", "must be >= 1");
  if (cfg.workers < 0) semantic_fail("ensemble.workers", "must be >= 0");
  if (cfg.sample_stride < 1) semantic_fail("sampling.stride", "must be >= 1");
  for (int s : cfg.sample_sites) {
    if (s < 0 || s >= cfg.n_sites) semantic_fail("sampling.sites", "site index out of range");
  }
  if (cfg.mode == RunMode::DenseMaster && cfg.n_sites > 6) {
    semantic_fail("system.n_sites", "dense_master mode is capped at 6 sites");
  }
  if (cfg.mode == RunMode::DenseTrajectory && cfg.n_sites > 12) {
    semantic_fail("system.n_sites", "dense_trajectory mode is capped at 12 sites");
  }

  for (std::size_t i = 0; i < cfg.noise.size(); ++i) {
    const auto& spec = cfg.noise[i];
    const std::string prefix = "noise[" + std::to_string(i) + "]";
    if (spec.schedule.kind == RateSchedule::Kind::Constant && spec.schedule.gamma_inf < 0) {
      semantic_fail(prefix + ".schedule.gamma_inf", "constant rates must be >= 0");
    }
  }

  // Completeness: the channel set must admit exact normalization.
  if (!cfg.noise.empty()) {
    std::vector<NoiseChannel> templates;
    for (const auto& spec : cfg.noise) {
      templates.push_back(NoiseChannel{spec.kind, -1, channel_op(spec.kind), 1.0, spec.schedule});
    }
    try {
      normalize_channels(templates, cfg.n_sites);
    } catch (const std::invalid_argument& e) {
      semantic_fail("noise", e.what());
    }
  }
}

std::string serialize_config(const SimConfig& cfg) {
  std::ostringstream out;
  out << "mode = \"" << to_string(cfg.mode) << "\"\n\n";
  out << "[system]\n";
  out << "n_sites = " << cfg.n_sites << "\n";
  out << "j_coupling = " << format_double(cfg.j_coupling) << "\n";
  out << "g_field = " << format_double(cfg.g_field) << "\n\n";
  out << "[evolution]\n";
  out << "dt = " << format_double(cfg.dt) << "\n";
  out << "n_steps = " << cfg.n_steps << "\n";
  out << "chi_max = " << cfg.chi_max << "\n";
  out << "svd_threshold = " << format_double(cfg.svd_threshold) << "\n\n";
  out << "[ensemble]\n";
  out << "n_traj = " << cfg.n_traj << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  out << "workers = " << cfg.workers << "\n\n";
  out << "[sampling]\n";
  out << "stride = " << cfg.sample_stride << "\n";
  out << "observables = [\"x\"";
  if (cfg.measure_z) out << ", \"z\"";
  out << "]\n";
  out << "sites = [";
  for (std::size_t i = 0; i < cfg.sample_sites.size(); ++i) {
    if (i) out << ", ";
    out << cfg.sample_sites[i];
  }
  out << "]\n\n";
  out << "[initial]\n";
  out << "state = \"" << (cfg.initial_state == InitialState::AllPlus ? "plus" : "zeros")
      << "\"\n";
  for (const auto& spec : cfg.noise) {
    out << "\n[[noise]]\n";
    out << "kind = \"" << to_string(spec.kind) << "\"\n";
    out << "schedule.kind = \""
        << (spec.schedule.kind == RateSchedule::Kind::Constant ? "constant"
                                                               : "damped_oscillatory")
        << "\"\n";
    out << "schedule.gamma_inf = " << format_double(spec.schedule.gamma_inf) << "\n";
    out << "schedule.amplitude = " << format_double(spec.schedule.amplitude) << "\n";
    out << "schedule.omega = " << format_double(spec.schedule.omega) << "\n";
    out << "schedule.f_cubic_coeff = " << format_double(spec.schedule.f_cubic_coeff) << "\n";
  }
  return out.str();
}

SimContext make_context(const SimConfig& cfg) {
  validate_config(cfg);
  SimContext ctx;
  ctx.n_sites = cfg.n_sites;
  ctx.j_coupling = cfg.j_coupling;
  ctx.g_field = cfg.g_field;
  ctx.hamiltonian = MpOperator::tfi(cfg.n_sites, cfg.j_coupling, cfg.g_field);
  ctx.dt = cfg.dt;
  ctx.n_steps = cfg.n_steps;
  ctx.chi_max = cfg.chi_max;
  ctx.svd_threshold = cfg.svd_threshold;
  ctx.initial_state = cfg.initial_state;
  ctx.sample_stride = cfg.sample_stride;
  ctx.measure_z = cfg.measure_z;
  ctx.sample_sites = cfg.sample_sites;

  if (!cfg.noise.empty()) {
    std::vector<NoiseChannel> templates;
    for (const auto& spec : cfg.noise) {
      ctx.kinds.push_back(spec.kind);
      ctx.kind_schedules.push_back(spec.schedule);
      templates.push_back(NoiseChannel{spec.kind, -1, channel_op(spec.kind), 1.0, spec.schedule});
    }
    ctx.channels = normalize_channels(templates, cfg.n_sites);
    ctx.channel_norm = ctx.channels.front().norm_factor;
  }
  return ctx;
}

}  // namespace tjm
