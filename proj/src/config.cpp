#include "holesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace holesim {

using nlohmann::json;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  json parse() {
    json doc = json::object();
    std::string section;
    while (!at_end()) {
      skip_blank();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        section = read_bare();
        if (section.empty()) fail("empty section name");
        skip_inline_space();
        expect(']');
        if (doc.contains(section)) fail("duplicate section [" + section + "]");
        doc[section] = json::object();
      } else {
        if (section.empty()) fail("key outside of any [section]");
        const std::string key = read_bare();
        if (key.empty()) fail("expected a key");
        skip_inline_space();
        expect('=');
        skip_inline_space();
        json value = read_value();
        if (doc[section].contains(key)) fail("duplicate key " + section + "." + key);
        doc[section][key] = std::move(value);
      }
      end_line();
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
      if (text_[i] == '\n') ++line;
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_space() {
    while (peek() == ' ' || peek() == '\t' || peek() == '\r') ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!at_end() && peek() != '\n') ++pos_;
  }

  // Whitespace, newlines and comments.
  void skip_blank() {
    for (;;) {
      skip_inline_space();
      if (peek() == '#') {
        skip_comment();
      } else if (peek() == '\n') {
        ++pos_;
      } else {
        return;
      }
    }
  }

  void end_line() {
    skip_inline_space();
    skip_comment();
    if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string read_bare() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  json read_value() {
    const char c = peek();
    if (c == '"') return read_string();
    if (c == '[') return read_array();
    if (c == 't' || c == 'f') {
      const std::string word = read_bare();
      if (word == "true") return true;
      if (word == "false") return false;
      fail("unknown literal '" + word + "'");
    }
    return read_number();
  }

  json read_string() {
    ++pos_;
    std::string out;
    while (!at_end() && peek() != '"') {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (at_end()) fail("unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out += c;
    }
    expect('"');
    return out;
  }

  json read_array() {
    ++pos_;
    json arr = json::array();
    skip_blank();
    while (peek() != ']') {
      if (at_end()) fail("unterminated array");
      arr.push_back(read_value());
      skip_blank();
      if (peek() == ',') {
        ++pos_;
        skip_blank();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    ++pos_;
    return arr;
  }

  json read_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                         peek() == '-' || peek() == '_'))
      ++pos_;
    std::string tok(text_.substr(start, pos_ - start));
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (*first == '+') ++first;
    if (!is_float) {
      if (*first == '-') {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
      } else {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
      }
      fail("bad integer '" + tok + "'");
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v)) fail("bad number '" + tok + "'");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Working state while mapping a document; the grid and failure plan are
// assembled once all keys are known.
struct Draft {
  ScenarioFile file;
  double width = 0.0, height = 0.0, cell_side = 10.0, subregion_side = 250.0;
  std::optional<Point> sink_pos;
  double failure_percent = 0.0;
  std::optional<double> failure_time;
  std::optional<std::vector<FailureStep>> failure_plan;
};

double as_number(const json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw std::invalid_argument("expected an integer");
}

Point as_point(const json& v) {
  if (!v.is_array() || v.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {as_number(v[0]), as_number(v[1])};
}

struct Key {
  std::string name;
  bool required = false;
  std::function<void(Draft&, const json&)> set;
  std::function<json(const Draft&)> get;
};

template <class Ref>
Key real(std::string name, Ref ref, bool required = false) {
  return {std::move(name), required, [ref](Draft& d, const json& v) { ref(d) = as_number(v); },
          [ref](const Draft& d) { return json(ref(d)); }};
}

template <class Ref>
Key integer(std::string name, Ref ref, bool required = false) {
  return {std::move(name), required,
          [ref](Draft& d, const json& v) {
            const std::int64_t x = as_integer(v);
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
              throw std::invalid_argument("integer out of range");
            ref(d) = static_cast<int>(x);
          },
          [ref](const Draft& d) { return json(ref(d)); }};
}

template <class Ref>
Key boolean(std::string name, Ref ref) {
  return {std::move(name), false,
          [ref](Draft& d, const json& v) {
            if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
            ref(d) = v.get<bool>();
          },
          [ref](const Draft& d) { return json(ref(d)); }};
}

template <class E, class Ref>
Key choice(std::string name, Ref ref, std::vector<std::pair<std::string, E>> options) {
  return {std::move(name), false,
          [ref, options](Draft& d, const json& v) {
            if (v.is_string())
              for (const auto& [label, value] : options)
                if (v.get<std::string>() == label) {
                  ref(d) = value;
                  return;
                }
            std::string msg = "expected one of";
            for (const auto& o : options) msg += " \"" + o.first + "\"";
            throw std::invalid_argument(msg);
          },
          [ref, options](const Draft& d) {
            for (const auto& [label, value] : options)
              if (ref(d) == value) return json(label);
            return json(nullptr);
          }};
}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"scenario.id", false,
                 [](Draft& d, const json& v) {
                   if (!v.is_string()) throw std::invalid_argument("expected a string");
                   d.file.scenario.id = v.get<std::string>();
                 },
                 [](const Draft& d) { return json(d.file.scenario.id); }});
    k.push_back({"scenario.seed", true,
                 [](Draft& d, const json& v) {
                   if (v.is_number_unsigned()) d.file.scenario.seed = v.get<std::uint64_t>();
                   else if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
                     d.file.scenario.seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
                   else throw std::invalid_argument("expected a nonnegative integer");
                 },
                 [](const Draft& d) { return json(d.file.scenario.seed); }});
    k.push_back(real("scenario.duration_s", [](auto& d) -> auto& { return d.file.scenario.duration_s; }, true));

    k.push_back(choice<ProtocolKind>("protocol.kind", [](auto& d) -> auto& { return d.file.scenario.protocol.kind; },
                                     {{"proposed", ProtocolKind::Proposed}, {"baseline", ProtocolKind::Baseline}}));
    k.push_back(real("protocol.round_s", [](auto& d) -> auto& { return d.file.scenario.protocol.round_s; }));

    k.push_back(real("grid.width", [](auto& d) -> auto& { return d.width; }, true));
    k.push_back(real("grid.height", [](auto& d) -> auto& { return d.height; }, true));
    k.push_back(real("grid.cell_side", [](auto& d) -> auto& { return d.cell_side; }));
    k.push_back(real("grid.subregion_side", [](auto& d) -> auto& { return d.subregion_side; }));

    k.push_back(integer("nodes.count", [](auto& d) -> auto& { return d.file.scenario.nodes.count; }, true));
    k.push_back(real("nodes.mobile_fraction", [](auto& d) -> auto& { return d.file.scenario.nodes.mobile_fraction; }));
    k.push_back(real("nodes.initial_energy_j", [](auto& d) -> auto& { return d.file.scenario.nodes.initial_energy_j; }));
    k.push_back(real("nodes.r_l", [](auto& d) -> auto& { return d.file.scenario.nodes.r_l; }));
    k.push_back(real("nodes.r_s", [](auto& d) -> auto& { return d.file.scenario.nodes.r_s; }));

    auto radio = [](auto& d) -> auto& { return d.file.scenario.protocol.radio; };
    auto power = [](auto& d) -> auto& { return d.file.scenario.protocol.power; };
    k.push_back(choice<RadioKind>("energy.model", [radio](auto& d) -> auto& { return radio(d).kind; },
                                  {{"two_regime", RadioKind::TwoRegime}, {"simple", RadioKind::Simple}}));
    k.push_back(real("energy.e_elec", [radio](auto& d) -> auto& { return radio(d).e_elec; }));
    k.push_back(real("energy.eps_fs", [radio](auto& d) -> auto& { return radio(d).eps_fs; }));
    k.push_back(real("energy.eps_mp", [radio](auto& d) -> auto& { return radio(d).eps_mp; }));
    k.push_back(real("energy.d0", [radio](auto& d) -> auto& { return radio(d).d0; }));
    k.push_back(real("energy.e_trans", [radio](auto& d) -> auto& { return radio(d).e_trans; }));
    k.push_back(real("energy.e_amp", [radio](auto& d) -> auto& { return radio(d).e_amp; }));
    k.push_back(real("energy.e_recv", [radio](auto& d) -> auto& { return radio(d).e_recv; }));
    k.push_back(boolean("energy.amp_per_bit", [radio](auto& d) -> auto& { return radio(d).amp_per_bit; }));
    k.push_back(real("energy.idle_w", [power](auto& d) -> auto& { return power(d).idle_w; }));
    k.push_back(real("energy.sleep_w", [power](auto& d) -> auto& { return power(d).sleep_w; }));
    k.push_back(real("energy.move_j_per_m", [power](auto& d) -> auto& { return power(d).move_j_per_m; }));
    k.push_back(real("energy.sense_j_per_event", [power](auto& d) -> auto& { return power(d).sense_j_per_event; }));
    k.push_back(real("energy.range_power_exp", [power](auto& d) -> auto& { return power(d).range_power_exp; }));

    k.push_back(integer("prevention.zones_per_side",
                        [](auto& d) -> auto& { return d.file.scenario.protocol.zones_per_side; }));
    k.push_back(real("prevention.threshold", [](auto& d) -> auto& { return d.file.scenario.protocol.crisis_threshold; }));
    k.push_back(real("cover.t_base_s", [](auto& d) -> auto& { return d.file.scenario.protocol.t_base_s; }));
    k.push_back(choice<MobileSelection>("mobile.selection",
                                        [](auto& d) -> auto& { return d.file.scenario.protocol.selection; },
                                        {{"nearest", MobileSelection::Nearest}, {"farthest", MobileSelection::Farthest}}));
    k.push_back(real("mobile.speed_mps", [](auto& d) -> auto& { return d.file.scenario.protocol.mobile_speed_mps; }));

    k.push_back({"sink.pos", false, [](Draft& d, const json& v) { d.sink_pos = as_point(v); },
                 [](const Draft& d) {
                   const Point p = d.sink_pos.value_or(d.file.scenario.protocol.sink_pos);
                   return json::array({p.x, p.y});
                 }});
    k.push_back(real("sink.update_period_s",
                     [](auto& d) -> auto& { return d.file.scenario.protocol.sink_update_period_s; }));

    auto mob = [](auto& d) -> auto& { return d.file.scenario.mobility; };
    k.push_back(real("mobility.sample_s", [mob](auto& d) -> auto& { return mob(d).sample_s; }));
    k.push_back(real("mobility.speed_min", [mob](auto& d) -> auto& { return mob(d).speed_min; }));
    k.push_back(real("mobility.speed_max", [mob](auto& d) -> auto& { return mob(d).speed_max; }));
    k.push_back(real("mobility.pause_s", [mob](auto& d) -> auto& { return mob(d).pause_s; }));
    k.push_back(integer("mobility.target_count", [mob](auto& d) -> auto& { return mob(d).target_count; }));

    k.push_back(real("failures.percent", [](auto& d) -> auto& { return d.failure_percent; }));
    k.push_back({"failures.time_s", false, [](Draft& d, const json& v) { d.failure_time = as_number(v); },
                 [](const Draft& d) {
                   return json(d.failure_time.value_or(d.file.scenario.duration_s / 2.0));
                 }});
    k.push_back({"failures.plan", false,
                 [](Draft& d, const json& v) {
                   if (!v.is_array()) throw std::invalid_argument("expected [[time_s, percent], ...]");
                   std::vector<FailureStep> plan;
                   for (const json& step : v) {
                     const Point p = as_point(step);
                     plan.push_back({p.x, p.y});
                   }
                   d.failure_plan = std::move(plan);
                 },
                 [](const Draft& d) {
                   json out = json::array();
                   for (const FailureStep& f : d.file.scenario.failure_plan) out.push_back({f.time_s, f.percent});
                   return out;
                 }});

    auto sizes = [](auto& d) -> auto& { return d.file.scenario.protocol.sizes; };
    k.push_back(integer("messages.hello", [sizes](auto& d) -> auto& { return sizes(d).hello; }));
    k.push_back(integer("messages.head_announce", [sizes](auto& d) -> auto& { return sizes(d).head_announce; }));
    k.push_back(integer("messages.ql_base", [sizes](auto& d) -> auto& { return sizes(d).ql_base; }));
    k.push_back(integer("messages.ql_per_cell", [sizes](auto& d) -> auto& { return sizes(d).ql_per_cell; }));
    k.push_back(integer("messages.energy_report", [sizes](auto& d) -> auto& { return sizes(d).energy_report; }));
    k.push_back(integer("messages.crisis_alert", [sizes](auto& d) -> auto& { return sizes(d).crisis_alert; }));
    k.push_back(integer("messages.hole_detected", [sizes](auto& d) -> auto& { return sizes(d).hole_detected; }));
    k.push_back(integer("messages.help_request", [sizes](auto& d) -> auto& { return sizes(d).help_request; }));
    k.push_back(integer("messages.mobile_dispatch", [sizes](auto& d) -> auto& { return sizes(d).mobile_dispatch; }));
    k.push_back(integer("messages.sink_report", [sizes](auto& d) -> auto& { return sizes(d).sink_report; }));
    k.push_back(integer("messages.data", [sizes](auto& d) -> auto& { return sizes(d).data; }));

    k.push_back({"sweep.nodes", false,
                 [](Draft& d, const json& v) {
                   if (!v.is_array()) throw std::invalid_argument("expected an array of node counts");
                   d.file.sweep_nodes.clear();
                   for (const json& x : v) d.file.sweep_nodes.push_back(static_cast<int>(as_integer(x)));
                 },
                 [](const Draft& d) { return json(d.file.sweep_nodes); }});
    k.push_back({"sweep.failures", false,
                 [](Draft& d, const json& v) {
                   if (!v.is_array()) throw std::invalid_argument("expected an array of percentages");
                   d.file.sweep_failures.clear();
                   for (const json& x : v) d.file.sweep_failures.push_back(as_number(x));
                 },
                 [](const Draft& d) { return json(d.file.sweep_failures); }});
    return k;
  }();
  return keys;
}

}  // namespace

json parse_config_text(std::string_view text) { return Parser(text).parse(); }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : key_table()) out.push_back(k.name);
  return out;
}

ScenarioFile scenario_from_document(const json& doc) {
  std::vector<std::string> problems;
  Draft d;
  std::set<std::string> seen;
  const auto& keys = key_table();
  if (!doc.is_object()) throw ValidationError({"document must be a table of sections"});
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) {
      problems.push_back("[" + section + "] is not a section");
      continue;
    }
    for (const auto& [key, value] : body.items()) {
      const std::string name = section + "." + key;
      if (name == "meta.prng") {
        if (value != std::string(Rng::kAlgorithm))
          problems.push_back("meta.prng names a different generator (" + value.dump() + "); this build uses " +
                             std::string(Rng::kAlgorithm));
        continue;
      }
      auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == name; });
      if (it == keys.end()) {
        problems.push_back("unknown key " + name);
        continue;
      }
      try {
        it->set(d, value);
        seen.insert(name);
      } catch (const std::exception& e) {
        problems.push_back(name + ": " + e.what());
      }
    }
  }
  for (const Key& k : keys)
    if (k.required && !seen.count(k.name)) problems.push_back("missing required key " + k.name);

  Scenario& s = d.file.scenario;
  s.grid = GridSpec(d.width, d.height, d.cell_side, d.subregion_side);
  s.protocol.sink_pos = d.sink_pos.value_or(Point{d.width / 2.0, d.height / 2.0});
  std::vector<FailureStep> single;
  if (d.failure_percent > 0.0) single = {{d.failure_time.value_or(s.duration_s / 2.0), d.failure_percent}};
  if (d.failure_plan) {
    // An echoed file carries both forms; accept them when they agree. A zero
    // percent leaves the plan in charge.
    if (d.failure_percent > 0.0) {
      std::vector<FailureStep> nonzero;
      for (const FailureStep& f : *d.failure_plan)
        if (f.percent > 0.0) nonzero.push_back(f);
      const bool same = nonzero.size() == single.size() &&
                        std::equal(nonzero.begin(), nonzero.end(), single.begin(), [](const auto& a, const auto& b) {
                          return a.time_s == b.time_s && a.percent == b.percent;
                        });
      if (!same)
        problems.push_back("failures.plan disagrees with failures.percent and failures.time_s; give one or the other");
    }
    s.failure_plan = *d.failure_plan;
  } else {
    s.failure_plan = single;
  }
  for (int n : d.file.sweep_nodes)
    if (n < 0) problems.push_back("sweep.nodes entries must be >= 0");
  for (double f : d.file.sweep_failures)
    if (!(f >= 0.0 && f <= 100.0)) problems.push_back("sweep.failures entries must be in [0, 100]");

  if (problems.empty())
    for (auto& v : s.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return std::move(d.file);
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return scenario_from_document(parse_config_text(buf.str()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json config_echo(const ScenarioFile& file) {
  Draft d;
  d.file = file;
  d.width = file.scenario.grid.width();
  d.height = file.scenario.grid.height();
  d.cell_side = file.scenario.grid.cell_side();
  d.subregion_side = file.scenario.grid.subregion_side();
  d.sink_pos = file.scenario.protocol.sink_pos;
  if (file.scenario.failure_plan.size() == 1) {
    d.failure_percent = file.scenario.failure_plan.front().percent;
    d.failure_time = file.scenario.failure_plan.front().time_s;
  }
  json out = json::object();
  for (const Key& k : key_table()) {
    const auto dot = k.name.find('.');
    out[k.name.substr(0, dot)][k.name.substr(dot + 1)] = k.get(d);
  }
  out["meta"]["prng"] = std::string(Rng::kAlgorithm);
  return out;
}

}  // namespace holesim
