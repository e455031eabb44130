#include "halcyon/rules.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace halcyon {
namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  std::string h = ascii_lower(haystack);
  std::string n = ascii_lower(needle);
  return h.find(n) != std::string::npos;
}

// --- lexer ------------------------------------------------------------------

enum class TokKind { Word, String, Colon, Semicolon, Arrow, Gte, Equals, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  // nullopt on success; ParseError on a malformed token.
  std::optional<ParseError> tokenize(std::vector<Token>& out) {
    while (true) {
      skip_blanks();
      if (pos_ >= text_.size()) break;

      std::size_t tline = line_, tcol = col_;
      char c = text_[pos_];
      if (c == '"') {
        std::string value;
        advance();
        while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
          value.push_back(text_[pos_]);
          advance();
        }
        if (pos_ >= text_.size() || text_[pos_] != '"')
          return ParseError{tline, tcol, "closing '\"'"};
        advance();
        out.push_back({TokKind::String, std::move(value), tline, tcol});
      } else if (c == ':') {
        advance();
        out.push_back({TokKind::Colon, ":", tline, tcol});
      } else if (c == ';') {
        advance();
        out.push_back({TokKind::Semicolon, ";", tline, tcol});
      } else if (c == '=' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
        advance();
        advance();
        out.push_back({TokKind::Arrow, "=>", tline, tcol});
      } else if (c == '>' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
        advance();
        advance();
        out.push_back({TokKind::Gte, ">=", tline, tcol});
      } else if (c == '=') {
        advance();
        out.push_back({TokKind::Equals, "=", tline, tcol});
      } else if (is_word_char(c) && c != '-') {
        std::string word;
        while (pos_ < text_.size() && is_word_char(text_[pos_])) {
          word.push_back(text_[pos_]);
          advance();
        }
        out.push_back({TokKind::Word, std::move(word), tline, tcol});
      } else {
        return ParseError{tline, tcol, "token"};
      }
    }
    out.push_back({TokKind::End, "", line_, col_});
    return std::nullopt;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// --- parser -----------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ParseResult parse() {
    RuleSet rs;
    while (peek().kind != TokKind::End) {
      if (!expect_keyword("rule", "'rule'")) return fail();
      Rule rule;
      if (peek().kind != TokKind::Word) return fail_at(peek(), "rule name");
      Token name_tok = next();
      rule.name = name_tok.text;
      if (!expect(TokKind::Colon, "':'")) return fail();
      if (!expect_keyword("when", "'when'")) return fail();

      if (auto p = parse_predicate(); p)
        rule.predicates.push_back(std::move(*p));
      else
        return fail();
      while (peek().kind == TokKind::Word && peek().text == "and") {
        next();
        if (auto p = parse_predicate(); p)
          rule.predicates.push_back(std::move(*p));
        else
          return fail();
      }

      if (!expect(TokKind::Arrow, "'=>'")) return fail();

      if (auto a = parse_action(); a)
        rule.actions.push_back(std::move(*a));
      else
        return fail();
      while (peek().kind == TokKind::Semicolon) {
        next();
        if (auto a = parse_action(); a)
          rule.actions.push_back(std::move(*a));
        else
          return fail();
      }

      if (peek().kind != TokKind::End &&
          !(peek().kind == TokKind::Word && peek().text == "rule"))
        return fail_at(peek(), "';' or 'rule'");

      for (const Rule& existing : rs.rules) {
        if (existing.name == rule.name) return fail_at(name_tok, "unique rule name");
      }
      rs.rules.push_back(std::move(rule));
    }
    return ParseResult{std::move(rs), std::nullopt};
  }

 private:
  std::optional<Predicate> parse_predicate() {
    const Token& t = peek();
    if (t.kind != TokKind::Word) {
      error_ = ParseError{t.line, t.column, "predicate"};
      return std::nullopt;
    }
    if (t.text == "payload") {
      next();
      if (!expect_keyword("contains", "'contains'")) return std::nullopt;
      if (peek().kind != TokKind::String) {
        error_ = ParseError{peek().line, peek().column, "quoted keyword"};
        return std::nullopt;
      }
      Token kw = next();
      if (kw.text.empty()) {
        error_ = ParseError{kw.line, kw.column, "non-empty keyword"};
        return std::nullopt;
      }
      return Predicate{PayloadContains{kw.text}};
    }
    if (t.text == "sender") {
      next();
      if (!expect_keyword("is", "'is'")) return std::nullopt;
      if (peek().kind != TokKind::Word) {
        error_ = ParseError{peek().line, peek().column, "principal id"};
        return std::nullopt;
      }
      return Predicate{SenderIs{PrincipalId{next().text}}};
    }
    if (t.text == "urgency") {
      next();
      if (!expect(TokKind::Gte, "'>='")) return std::nullopt;
      auto level = parse_level();
      if (!level) return std::nullopt;
      return Predicate{UrgencyAtLeast{*level}};
    }
    error_ = ParseError{t.line, t.column, "predicate"};
    return std::nullopt;
  }

  std::optional<RuleAction> parse_action() {
    const Token& t = peek();
    if (t.kind != TokKind::Word) {
      error_ = ParseError{t.line, t.column, "action"};
      return std::nullopt;
    }
    if (t.text == "forward") {
      next();
      if (peek().kind != TokKind::Word) {
        error_ = ParseError{peek().line, peek().column, "forward target"};
        return std::nullopt;
      }
      PrincipalId target{next().text};
      if (!expect_keyword("urgency", "'urgency'")) return std::nullopt;
      if (!expect(TokKind::Equals, "'='")) return std::nullopt;
      auto level = parse_level();
      if (!level) return std::nullopt;
      return RuleAction{ForwardAction{std::move(target), *level}};
    }
    if (t.text == "reply") {
      next();
      if (peek().kind != TokKind::Word) {
        error_ = ParseError{peek().line, peek().column, "reply target"};
        return std::nullopt;
      }
      Token target = next();
      if (peek().kind != TokKind::String) {
        error_ = ParseError{peek().line, peek().column, "quoted payload"};
        return std::nullopt;
      }
      Token payload = next();
      ReplyAction reply;
      reply.to_sender = (target.text == "sender");
      if (!reply.to_sender) reply.to = PrincipalId{target.text};
      reply.payload = payload.text;
      return RuleAction{std::move(reply)};
    }
    error_ = ParseError{t.line, t.column, "action"};
    return std::nullopt;
  }

  std::optional<UrgencyLevel> parse_level() {
    if (peek().kind != TokKind::Word) {
      error_ = ParseError{peek().line, peek().column, "urgency level"};
      return std::nullopt;
    }
    Token t = next();
    auto level = parse_urgency(t.text);
    if (!level) {
      error_ = ParseError{t.line, t.column, "urgency level"};
      return std::nullopt;
    }
    return level;
  }

  const Token& peek() const { return tokens_[index_]; }

  Token next() {
    Token t = tokens_[index_];
    if (t.kind != TokKind::End) ++index_;
    return t;
  }

  bool expect(TokKind kind, std::string_view what) {
    if (peek().kind != kind) {
      error_ = ParseError{peek().line, peek().column, std::string(what)};
      return false;
    }
    next();
    return true;
  }

  bool expect_keyword(std::string_view word, std::string_view what) {
    if (peek().kind != TokKind::Word || peek().text != word) {
      error_ = ParseError{peek().line, peek().column, std::string(what)};
      return false;
    }
    next();
    return true;
  }

  ParseResult fail() { return ParseResult{std::nullopt, error_}; }
  ParseResult fail_at(const Token& t, std::string_view expected) {
    return ParseResult{std::nullopt, ParseError{t.line, t.column, std::string(expected)}};
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  std::optional<ParseError> error_;
};

}  // namespace

std::string ParseError::message() const {
  std::ostringstream out;
  out << "parse error at line " << line << ", column " << column << ": expected " << expected;
  return out.str();
}

ParseResult parse_rules(std::string_view text) {
  std::vector<Token> tokens;
  Lexer lexer(text);
  if (auto err = lexer.tokenize(tokens)) return ParseResult{std::nullopt, *err};
  return Parser(std::move(tokens)).parse();
}

std::string pretty_print(const RuleSet& rs) {
  std::ostringstream out;
  for (const Rule& rule : rs.rules) {
    out << "rule " << rule.name << ": when ";
    for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
      if (i > 0) out << " and ";
      const Predicate& p = rule.predicates[i];
      if (const auto* pc = std::get_if<PayloadContains>(&p))
        out << "payload contains \"" << pc->keyword << "\"";
      else if (const auto* si = std::get_if<SenderIs>(&p))
        out << "sender is " << si->sender.id;
      else
        out << "urgency >= " << ascii_lower(to_string(std::get<UrgencyAtLeast>(p).level));
    }
    out << " => ";
    for (std::size_t i = 0; i < rule.actions.size(); ++i) {
      if (i > 0) out << " ; ";
      const RuleAction& a = rule.actions[i];
      if (const auto* f = std::get_if<ForwardAction>(&a)) {
        out << "forward " << f->target.id << " urgency=" << ascii_lower(to_string(f->urgency));
      } else {
        const auto& r = std::get<ReplyAction>(a);
        out << "reply " << (r.to_sender ? "sender" : r.to.id) << " \"" << r.payload << "\"";
      }
    }
    out << "\n";
  }
  return out.str();
}

bool rule_matches(const Envelope& env, const Rule& rule) {
  for (const Predicate& p : rule.predicates) {
    bool holds = std::visit(
        [&env](const auto& pred) -> bool {
          using T = std::decay_t<decltype(pred)>;
          if constexpr (std::is_same_v<T, PayloadContains>)
            return contains_ci(env.payload, pred.keyword);
          else if constexpr (std::is_same_v<T, SenderIs>)
            return env.sender == pred.sender;
          else
            return compare_urgency(env.urgency, pred.level) >= 0;
        },
        p);
    if (!holds) return false;
  }
  return true;
}

std::vector<MatchedAction> match(const Envelope& env, const RuleSet& rs) {
  std::vector<MatchedAction> out;
  for (const Rule& rule : rs.rules) {
    if (!rule_matches(env, rule)) continue;
    for (const RuleAction& a : rule.actions) {
      if (const auto* f = std::get_if<ForwardAction>(&a)) {
        out.push_back(MatchedForward{f->target, f->urgency});
      } else {
        const auto& r = std::get<ReplyAction>(a);
        out.push_back(MatchedReply{r.to_sender ? env.sender : r.to, r.payload});
      }
    }
  }
  return out;
}

std::string forwarded_payload(const Envelope& original) {
  return "fwd[" + original.sender.id + "]: " + original.payload;
}

}  // namespace halcyon
