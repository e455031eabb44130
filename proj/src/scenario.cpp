#include "halcyon/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace halcyon {
namespace {

struct LoaderError {
  std::size_t line;
  std::string message;
};

// Whitespace-separated tokens; double quotes group and `#` outside quotes
// starts a comment.
std::optional<std::vector<std::string>> split_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  std::string current;
  bool in_quotes = false;
  bool any = false;
  for (char c : line) {
    if (c == '"') {
      in_quotes = !in_quotes;
      current.push_back(c);
      any = true;
      continue;
    }
    if (!in_quotes && c == '#') break;
    if (!in_quotes && std::isspace(static_cast<unsigned char>(c))) {
      if (any) tokens.push_back(std::move(current));
      current.clear();
      any = false;
      continue;
    }
    current.push_back(c);
    any = true;
  }
  if (in_quotes) return std::nullopt;  // unterminated quote
  if (any) tokens.push_back(std::move(current));
  return tokens;
}

std::optional<Tick> parse_tick(std::string_view s) {
  if (s.empty()) return std::nullopt;
  Tick value = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + static_cast<Tick>(c - '0');
  }
  return value;
}

// `<lo>..<hi>`, `<lo>..` or `<lo>..inf`.
std::optional<TickRange> parse_range(std::string_view s) {
  std::size_t dots = s.find("..");
  if (dots == std::string_view::npos) return std::nullopt;
  auto lo = parse_tick(s.substr(0, dots));
  if (!lo) return std::nullopt;
  std::string_view rest = s.substr(dots + 2);
  if (rest.empty() || rest == "inf") return TickRange{*lo, std::nullopt};
  auto hi = parse_tick(rest);
  if (!hi) return std::nullopt;
  return TickRange{*lo, *hi};
}

// `key=value` accessor; returns the value or nullopt when the key differs.
std::optional<std::string> key_value(std::string_view token, std::string_view key) {
  if (token.size() <= key.size() + 1) return std::nullopt;
  if (token.substr(0, key.size()) != key || token[key.size()] != '=') return std::nullopt;
  return std::string(token.substr(key.size() + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::optional<std::vector<std::string>> parse_id_list(std::string_view s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') return std::nullopt;
  std::vector<std::string> out;
  std::string current;
  for (char c : s.substr(1, s.size() - 2)) {
    if (c == ',') {
      if (current.empty()) return std::nullopt;
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::optional<std::vector<Modality>> parse_modality_list(std::string_view s) {
  std::vector<Modality> out;
  std::string current;
  auto flush = [&]() -> bool {
    if (current.empty()) return false;
    auto m = parse_modality(current);
    if (!m) return false;
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    current.clear();
    return true;
  };
  for (char c : s) {
    if (c == ',') {
      if (!flush()) return std::nullopt;
    } else {
      current.push_back(c);
    }
  }
  if (!flush()) return std::nullopt;
  return out;
}

class Loader {
 public:
  explicit Loader(std::string base_dir) : base_dir_(std::move(base_dir)) {}

  ScenarioLoad load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      auto tokens_opt = split_tokens(raw);
      if (!tokens_opt) return fail(line_no, "unterminated quote");
      const auto& tokens = *tokens_opt;
      if (tokens.empty()) continue;
      if (auto err = directive(tokens, raw, line_no)) return fail(err->line, err->message);
    }
    if (auto err = validate()) return fail(err->line, err->message);
    return ScenarioLoad{std::move(scenario_), std::nullopt};
  }

 private:
  std::optional<LoaderError> directive(const std::vector<std::string>& t, const std::string& raw,
                                       std::size_t line) {
    const std::string& head = t[0];
    if (head == "scenario") {
      if (t.size() < 2) return LoaderError{line, "scenario: missing name"};
      scenario_.name = t[1];
      return std::nullopt;
    }
    if (head == "tick-duration") {
      std::string value;
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (i > 1) value += ' ';
        value += t[i];
      }
      scenario_.tick_duration = value;
      return std::nullopt;
    }
    if (head == "tick-limit") {
      if (t.size() != 2) return LoaderError{line, "tick-limit: expected one number"};
      auto v = parse_tick(t[1]);
      if (!v) return LoaderError{line, "tick-limit: not a number: '" + t[1] + "'"};
      scenario_.tick_limit = *v;
      return std::nullopt;
    }
    if (head == "recheck-delay") {
      if (t.size() != 2) return LoaderError{line, "recheck-delay: expected one number"};
      auto v = parse_tick(t[1]);
      if (!v || *v == 0) return LoaderError{line, "recheck-delay: expected a positive number"};
      scenario_.recheck_delay = *v;
      return std::nullopt;
    }
    if (head == "principal") return principal_directive(t, line);
    if (head == "device") return device_directive(t, line);
    if (head == "availability") return availability_directive(t, line);
    if (head == "rules") return rules_file_directive(t, line);
    if (head == "rule") return inline_rule_directive(t, raw, line);
    if (head == "fallback") return fallback_directive(t, line);
    if (head == "modality-table") return modality_table_directive(t, line);
    if (head == "at") return send_directive(t, line);
    return LoaderError{line, "unknown directive '" + head + "'"};
  }

  std::optional<LoaderError> principal_directive(const std::vector<std::string>& t,
                                                 std::size_t line) {
    if (t.size() != 2) return LoaderError{line, "principal: expected one id"};
    PrincipalId id{t[1]};
    if (declared(id)) return LoaderError{line, "principal: duplicate id '" + id.id + "'"};
    scenario_.principals.push_back(id);
    return std::nullopt;
  }

  std::optional<LoaderError> device_directive(const std::vector<std::string>& t,
                                              std::size_t line) {
    if (t.size() < 5)
      return LoaderError{line, "device: expected <owner> <id> modality=<m,...> priority=<n>"};
    Device d;
    d.owner = PrincipalId{t[1]};
    d.device_id = t[2];
    bool have_modality = false, have_priority = false;
    for (std::size_t i = 3; i < t.size(); ++i) {
      if (auto v = key_value(t[i], "modality")) {
        auto list = parse_modality_list(*v);
        if (!list) return LoaderError{line, "device: bad modality list '" + *v + "'"};
        d.modalities = *list;
        have_modality = true;
      } else if (auto v = key_value(t[i], "priority")) {
        auto p = parse_tick(*v);
        if (!p || *p == 0) return LoaderError{line, "device: priority must be a positive number"};
        d.priority = static_cast<int>(*p);
        have_priority = true;
      } else if (auto v = key_value(t[i], "present")) {
        auto r = parse_range(*v);
        if (!r) return LoaderError{line, "device: bad present range '" + *v + "'"};
        d.presence = *r;
      } else {
        return LoaderError{line, "device: unexpected token '" + t[i] + "'"};
      }
    }
    if (!have_modality) return LoaderError{line, "device: missing modality=<m,...>"};
    if (!have_priority) return LoaderError{line, "device: missing priority=<n>"};
    devices_lines_.push_back(line);
    scenario_.devices.push_back(std::move(d));
    return std::nullopt;
  }

  std::optional<LoaderError> availability_directive(const std::vector<std::string>& t,
                                                    std::size_t line) {
    if (t.size() != 4)
      return LoaderError{line, "availability: expected <owner> <lo>..<hi|> <free|busy(<activity>)>"};
    AvailabilityDecl decl;
    decl.owner = PrincipalId{t[1]};
    decl.decl_line = line;
    auto range = parse_range(t[2]);
    if (!range) return LoaderError{line, "availability: bad range '" + t[2] + "'"};
    if (range->hi && range->lo > *range->hi)
      return LoaderError{line, "availability: inverted range '" + t[2] + "'"};
    decl.range = *range;
    const std::string& v = t[3];
    if (v == "free") {
      decl.value = Availability{AvailabilityState::Free, ""};
    } else if (v.size() > 6 && v.substr(0, 5) == "busy(" && v.back() == ')') {
      decl.value = Availability{AvailabilityState::Busy, v.substr(5, v.size() - 6)};
    } else {
      return LoaderError{line, "availability: expected free or busy(<activity>), got '" + v + "'"};
    }
    scenario_.availability.push_back(std::move(decl));
    return std::nullopt;
  }

  std::optional<LoaderError> rules_file_directive(const std::vector<std::string>& t,
                                                  std::size_t line) {
    if (t.size() != 3) return LoaderError{line, "rules: expected <owner> <path>"};
    PrincipalId owner{t[1]};
    std::filesystem::path path(t[2]);
    if (path.is_relative()) path = std::filesystem::path(base_dir_) / path;
    std::ifstream in(path);
    if (!in) return LoaderError{line, "rules: cannot open '" + path.string() + "'"};
    std::stringstream buf;
    buf << in.rdbuf();
    ParseResult parsed = parse_rules(buf.str());
    if (!parsed.ok())
      return LoaderError{line, "rules: " + path.string() + ": " + parsed.error->message()};
    return merge_rules(owner, std::move(*parsed.ruleset), line);
  }

  std::optional<LoaderError> inline_rule_directive(const std::vector<std::string>& t,
                                                   const std::string& raw, std::size_t line) {
    if (t.size() < 3) return LoaderError{line, "rule: expected <owner> <name>: when ..."};
    PrincipalId owner{t[1]};
    // Re-synthesize the rule text without the owner token for the DSL parser.
    std::size_t rule_pos = raw.find("rule");
    std::size_t owner_pos = raw.find(t[1], rule_pos + 4);
    std::string rule_text = "rule " + raw.substr(owner_pos + t[1].size());
    ParseResult parsed = parse_rules(rule_text);
    if (!parsed.ok()) return LoaderError{line, "rule: " + parsed.error->message()};
    return merge_rules(owner, std::move(*parsed.ruleset), line);
  }

  std::optional<LoaderError> fallback_directive(const std::vector<std::string>& t,
                                                std::size_t line) {
    if (t.size() != 3) return LoaderError{line, "fallback: expected <owner> <delegate-id>"};
    PrincipalId owner{t[1]}, delegate{t[2]};
    RuleSet& rs = scenario_.rulesets[owner];
    if (rs.fallback) return LoaderError{line, "fallback: already set for '" + owner.id + "'"};
    rs.fallback = delegate;
    fallback_lines_[owner] = line;
    return std::nullopt;
  }

  std::optional<LoaderError> modality_table_directive(const std::vector<std::string>& t,
                                                      std::size_t line) {
    if (t.size() != 3) return LoaderError{line, "modality-table: expected <activity> <m,...>"};
    auto list = parse_modality_list(t[2]);
    if (!list) return LoaderError{line, "modality-table: bad modality list '" + t[2] + "'"};
    if (t[1] == "default")
      scenario_.modality_table.set_default_row(*list);
    else
      scenario_.modality_table.set_row(t[1], *list);
    return std::nullopt;
  }

  std::optional<LoaderError> send_directive(const std::vector<std::string>& t, std::size_t line) {
    // at <tick> send from=<id> to=[...] urgency=<level> valid=<lo>..<hi|inf>
    //   [perishable] payload="<text>"
    if (t.size() < 7 || t[2] != "send")
      return LoaderError{line, "at: expected at <tick> send from=... to=[...] urgency=... "
                               "valid=... [perishable] payload=\"...\""};
    auto at = parse_tick(t[1]);
    if (!at) return LoaderError{line, "at: bad tick '" + t[1] + "'"};

    ScheduledSend send;
    send.at = *at;
    send.decl_line = line;
    std::size_t i = 3;

    auto from = key_value(t[i], "from");
    if (!from) return LoaderError{line, "send: expected from=<id>"};
    send.request.sender = PrincipalId{*from};
    ++i;

    if (i >= t.size()) return LoaderError{line, "send: expected to=[<id>,...]"};
    auto to = key_value(t[i], "to");
    if (!to) return LoaderError{line, "send: expected to=[<id>,...]"};
    auto ids = parse_id_list(*to);
    if (!ids || ids->empty()) return LoaderError{line, "send: bad destination list '" + *to + "'"};
    std::vector<PrincipalId> destinations;
    for (auto& id : *ids) destinations.push_back(PrincipalId{std::move(id)});
    send.request.destinations = AuthorityList(std::move(destinations));
    ++i;

    if (i >= t.size()) return LoaderError{line, "send: expected urgency=<level>"};
    auto urg = key_value(t[i], "urgency");
    if (!urg) return LoaderError{line, "send: expected urgency=<level>"};
    auto level = parse_urgency(*urg);
    if (!level) return LoaderError{line, "send: bad urgency '" + *urg + "'"};
    send.request.urgency = *level;
    ++i;

    if (i >= t.size()) return LoaderError{line, "send: expected valid=<lo>..<hi|inf>"};
    auto valid = key_value(t[i], "valid");
    if (!valid) return LoaderError{line, "send: expected valid=<lo>..<hi|inf>"};
    auto range = parse_range(*valid);
    if (!range) return LoaderError{line, "send: bad validity range '" + *valid + "'"};
    if (range->hi && range->lo > *range->hi)
      return LoaderError{line, "send: inverted validity window '" + *valid + "'"};
    send.request.validity = ValidityWindow{range->lo, range->hi};
    ++i;

    if (i < t.size() && t[i] == "perishable") {
      send.request.perishable = true;
      ++i;
    }

    if (i >= t.size()) return LoaderError{line, "send: expected payload=\"<text>\""};
    auto payload = key_value(t[i], "payload");
    if (!payload) return LoaderError{line, "send: expected payload=\"<text>\""};
    send.request.payload = unquote(*payload);
    if (send.request.payload.empty()) return LoaderError{line, "send: payload must be non-empty"};
    ++i;

    if (i != t.size()) return LoaderError{line, "send: unexpected token '" + t[i] + "'"};
    scenario_.sends.push_back(std::move(send));
    return std::nullopt;
  }

  std::optional<LoaderError> merge_rules(const PrincipalId& owner, RuleSet incoming,
                                         std::size_t line) {
    RuleSet& rs = scenario_.rulesets[owner];
    for (Rule& rule : incoming.rules) {
      for (const Rule& existing : rs.rules) {
        if (existing.name == rule.name)
          return LoaderError{line, "rule: duplicate rule name '" + rule.name + "' for '" +
                                       owner.id + "'"};
      }
      rules_lines_[owner.id + "/" + rule.name] = line;
      rs.rules.push_back(std::move(rule));
    }
    return std::nullopt;
  }

  bool declared(const PrincipalId& p) const {
    return std::find(scenario_.principals.begin(), scenario_.principals.end(), p) !=
           scenario_.principals.end();
  }

  std::optional<LoaderError> validate() {
    for (std::size_t i = 0; i < scenario_.devices.size(); ++i) {
      const Device& d = scenario_.devices[i];
      std::size_t line = devices_lines_[i];
      if (!declared(d.owner))
        return LoaderError{line, "device: undeclared owner '" + d.owner.id + "'"};
      for (std::size_t j = 0; j < i; ++j) {
        const Device& other = scenario_.devices[j];
        if (other.device_id == d.device_id)
          return LoaderError{line, "device: duplicate device id '" + d.device_id + "'"};
        if (other.owner == d.owner && other.priority == d.priority) {
          for (Modality m : d.modalities) {
            if (other.supports(m))
              return LoaderError{line, "device: priority " + std::to_string(d.priority) +
                                           " already used for " + std::string(to_string(m)) +
                                           " on '" + d.owner.id + "'"};
          }
        }
      }
    }

    // Closed availability intervals per owner must not overlap.
    for (std::size_t i = 0; i < scenario_.availability.size(); ++i) {
      const AvailabilityDecl& a = scenario_.availability[i];
      if (!declared(a.owner))
        return LoaderError{a.decl_line, "availability: undeclared owner '" + a.owner.id + "'"};
      for (std::size_t j = 0; j < i; ++j) {
        const AvailabilityDecl& b = scenario_.availability[j];
        if (!(a.owner == b.owner)) continue;
        bool disjoint = (a.range.hi && b.range.lo > *a.range.hi) ||
                        (b.range.hi && a.range.lo > *b.range.hi);
        if (!disjoint)
          return LoaderError{a.decl_line, "availability: overlapping intervals for '" +
                                              a.owner.id + "'"};
      }
    }

    for (const auto& [owner, rs] : scenario_.rulesets) {
      if (!declared(owner))
        return LoaderError{ruleset_line(owner, rs), "rules: undeclared owner '" + owner.id + "'"};
      if (rs.fallback && !declared(*rs.fallback))
        return LoaderError{fallback_lines_[owner],
                           "fallback: undeclared delegate '" + rs.fallback->id + "'"};
      for (const Rule& rule : rs.rules) {
        std::size_t line = rules_lines_[owner.id + "/" + rule.name];
        for (const RuleAction& action : rule.actions) {
          if (const auto* f = std::get_if<ForwardAction>(&action)) {
            if (!declared(f->target))
              return LoaderError{line, "rule '" + rule.name + "': undeclared forward target '" +
                                           f->target.id + "'"};
          } else {
            const auto& r = std::get<ReplyAction>(action);
            if (!r.to_sender && !declared(r.to))
              return LoaderError{line, "rule '" + rule.name + "': undeclared reply target '" +
                                           r.to.id + "'"};
          }
        }
      }
    }

    for (const ScheduledSend& s : scenario_.sends) {
      if (!declared(s.request.sender))
        return LoaderError{s.decl_line,
                           "send: undeclared sender '" + s.request.sender.id + "'"};
      for (const PrincipalId& dest : s.request.destinations.ids()) {
        if (!declared(dest))
          return LoaderError{s.decl_line, "send: undeclared destination '" + dest.id + "'"};
      }
      if (s.at > scenario_.tick_limit)
        return LoaderError{s.decl_line, "send: tick " + std::to_string(s.at) +
                                            " is past tick-limit " +
                                            std::to_string(scenario_.tick_limit)};
    }
    return std::nullopt;
  }

  std::size_t ruleset_line(const PrincipalId& owner, const RuleSet& rs) {
    if (!rs.rules.empty()) {
      auto it = rules_lines_.find(owner.id + "/" + rs.rules.front().name);
      if (it != rules_lines_.end()) return it->second;
    }
    auto it = fallback_lines_.find(owner);
    return it == fallback_lines_.end() ? 0 : it->second;
  }

  ScenarioLoad fail(std::size_t line, std::string message) {
    return ScenarioLoad{std::nullopt, ScenarioError{line, std::move(message)}};
  }

  Scenario scenario_;
  std::string base_dir_;
  std::vector<std::size_t> devices_lines_;
  std::map<std::string, std::size_t> rules_lines_;
  std::map<PrincipalId, std::size_t> fallback_lines_;
};

}  // namespace

std::string ScenarioError::to_string() const {
  return "line " + std::to_string(line) + ": " + message;
}

ScenarioLoad load_scenario(std::string_view text, const std::string& base_dir) {
  return Loader(base_dir).load(text);
}

ScenarioLoad load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    return ScenarioLoad{std::nullopt, ScenarioError{0, "cannot open '" + path + "'"}};
  std::stringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  if (dir.empty()) dir = ".";
  return load_scenario(buf.str(), dir);
}

}  // namespace halcyon
