// SPDX-License-Identifier: Apache-2.0

#include "protomon/parser.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>

namespace protomon {

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::lexical: return "lexical";
    case DiagnosticKind::syntax: return "syntax";
    case DiagnosticKind::duplicate_name: return "duplicate-name";
    case DiagnosticKind::unknown_pattern: return "unknown-pattern";
    case DiagnosticKind::arity_mismatch: return "arity-mismatch";
    case DiagnosticKind::unknown_equation: return "unknown-equation";
    case DiagnosticKind::missing_main: return "missing-main";
    case DiagnosticKind::unbound_variable: return "unbound-variable";
    case DiagnosticKind::unguarded_recursion: return "unguarded-recursion";
  }
  return "unknown";
}

std::string Diagnostic::format() const {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " +
         std::string(to_string(kind)) + ": " + message;
}

ParseError::ParseError(Diagnostic d) : std::runtime_error(d.format()), diag_(std::move(d)) {}

namespace {

std::string join_messages(const std::vector<Diagnostic>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "\n";
    out += e.format();
  }
  return out;
}

}  // namespace

InvalidSpec::InvalidSpec(std::vector<Diagnostic> errors)
    : std::runtime_error(join_messages(errors)), errors_(std::move(errors)) {}

namespace {

enum class Tok {
  lident,
  uident,
  underscore,
  string,
  number,
  kw_matches,
  kw_let,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  semi,
  colon,
  equals,
  bar,
  star,
  or_op,
  and_op,
  end,
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::lident: return "lowercase identifier";
    case Tok::uident: return "uppercase identifier";
    case Tok::underscore: return "'_'";
    case Tok::string: return "string";
    case Tok::number: return "number";
    case Tok::kw_matches: return "'matches'";
    case Tok::kw_let: return "'let'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::comma: return "','";
    case Tok::semi: return "';'";
    case Tok::colon: return "':'";
    case Tok::equals: return "'='";
    case Tok::bar: return "'|'";
    case Tok::star: return "'*'";
    case Tok::or_op: return "'\\/'";
    case Tok::and_op: return "'/\\'";
    case Tok::end: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
  bool adjacent = false;  // no whitespace or comment before this token
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool skipped = skip_trivia();
      Token t = next();
      t.adjacent = !skipped && !out.empty();
      out.push_back(std::move(t));
      if (out.back().kind == Tok::end) return out;
    }
  }

 private:
  [[noreturn]] void fail(SourceLoc loc, std::string msg) {
    throw ParseError({DiagnosticKind::lexical, std::move(msg), loc});
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  SourceLoc here() const { return {line_, col_}; }

  bool skip_trivia() {
    bool skipped = false;
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        skipped = true;
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
        skipped = true;
      } else {
        break;
      }
    }
    return skipped;
  }

  Token next() {
    SourceLoc loc = here();
    if (at_end()) return {Tok::end, "", loc};
    char c = peek();

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (!at_end() && ident_char(peek())) word += advance();
      if (word == "_") return {Tok::underscore, word, loc};
      if (word[0] == '_') fail(loc, "identifiers must start with a letter: '" + word + "'");
      if (word == "matches") return {Tok::kw_matches, word, loc};
      if (word == "let") return {Tok::kw_let, word, loc};
      bool upper = std::isupper(static_cast<unsigned char>(word[0]));
      return {upper ? Tok::uident : Tok::lident, word, loc};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number(loc);
    }
    if (c == '\'') return string(loc);

    advance();
    switch (c) {
      case '(': return {Tok::lparen, "(", loc};
      case ')': return {Tok::rparen, ")", loc};
      case '{': return {Tok::lbrace, "{", loc};
      case '}': return {Tok::rbrace, "}", loc};
      case ',': return {Tok::comma, ",", loc};
      case ';': return {Tok::semi, ";", loc};
      case ':': return {Tok::colon, ":", loc};
      case '=': return {Tok::equals, "=", loc};
      case '|': return {Tok::bar, "|", loc};
      case '*': return {Tok::star, "*", loc};
      case '\\':
        if (peek() == '/') {
          advance();
          return {Tok::or_op, "\\/", loc};
        }
        break;
      case '/':
        if (peek() == '\\') {
          advance();
          return {Tok::and_op, "/\\", loc};
        }
        break;
      default: break;
    }
    fail(loc, std::string("unexpected character '") + c + "'");
  }

  Token number(SourceLoc loc) {
    std::string digits;
    if (peek() == '-') digits += advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      digits += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      digits += advance();
      if (peek() == '+' || peek() == '-') digits += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    }
    if (ident_char(peek())) fail(here(), "malformed number '" + digits + peek() + "'");
    return {Tok::number, digits, loc};
  }

  Token string(SourceLoc loc) {
    advance();  // opening quote
    std::string value;
    for (;;) {
      if (at_end()) fail(loc, "unterminated string literal");
      char c = advance();
      if (c == '\'') break;
      if (c == '\\') {
        if (at_end()) fail(loc, "unterminated string literal");
        c = advance();
      }
      value += c;
    }
    return {Tok::string, value, loc};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Spec parse() {
    Spec spec;
    while (!at(Tok::end)) {
      if (at(Tok::lident)) {
        spec.decls.push_back(decl());
      } else if (at(Tok::uident)) {
        spec.equations.push_back(equation());
      } else {
        fail("expected a pattern declaration or an equation, found " + found());
      }
    }
    return spec;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }
  std::string found() const {
    const auto& t = cur();
    if (t.kind == Tok::end) return std::string(describe(t.kind));
    return std::string(describe(t.kind)) + " '" + t.text + "'";
  }
  [[noreturn]] void fail(std::string msg) const {
    throw ParseError({DiagnosticKind::syntax, std::move(msg), cur().loc});
  }
  Token take() { return toks_[pos_++]; }
  Token expect(Tok k, std::string_view context) {
    if (!at(k)) {
      fail("expected " + std::string(describe(k)) + " " + std::string(context) + ", found " +
           found());
    }
    return take();
  }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }

  // `true` and `false` are boolean literals in field position.
  std::string variable_name(const char* context) {
    if (at(Tok::lident) && (cur().text == "true" || cur().text == "false")) {
      fail("'" + cur().text + "' is a boolean literal, not a variable name");
    }
    return expect(Tok::lident, context).text;
  }

  PatternDecl decl() {
    PatternDecl d;
    Token name = take();
    d.name = name.text;
    d.loc = name.loc;
    if (accept(Tok::lparen)) {
      d.params.push_back(variable_name("as pattern parameter"));
      while (accept(Tok::comma)) {
        d.params.push_back(variable_name("as pattern parameter"));
      }
      expect(Tok::rparen, "after pattern parameters");
    }
    expect(Tok::kw_matches, "after pattern name");
    d.alternatives.push_back(body());
    while (accept(Tok::bar)) d.alternatives.push_back(body());
    expect(Tok::semi, "at end of pattern declaration");
    return d;
  }

  PatternBody body() {
    expect(Tok::lbrace, "to open a pattern body");
    PatternBody b;
    if (!at(Tok::rbrace)) {
      b.constraints.push_back(constraint());
      while (accept(Tok::comma)) b.constraints.push_back(constraint());
    }
    expect(Tok::rbrace, "to close a pattern body");
    return b;
  }

  Constraint constraint() {
    if (!at(Tok::lident) && !at(Tok::uident) && !at(Tok::kw_let) && !at(Tok::kw_matches)) {
      fail("expected a field key, found " + found());
    }
    std::string key = take().text;
    expect(Tok::colon, "after field key");
    return {std::move(key), field_pattern()};
  }

  FieldPattern field_pattern() {
    switch (cur().kind) {
      case Tok::string: return Literal{take().text};
      case Tok::number: {
        Token t = take();
        double v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
          throw ParseError({DiagnosticKind::lexical, "number out of range '" + t.text + "'", t.loc});
        }
        return Literal{v};
      }
      case Tok::underscore: take(); return Wildcard{};
      case Tok::lident: {
        Token t = take();
        if (t.text == "true" || t.text == "false") return Literal{t.text == "true"};
        return Var{t.text};
      }
      case Tok::lbrace: return Nested{std::make_shared<const PatternBody>(body())};
      default: fail("expected a field pattern, found " + found());
    }
  }

  Equation equation() {
    Token name = take();
    expect(Tok::equals, "after equation name");
    TermPtr t = term();
    expect(Tok::semi, "at end of equation");
    return {name.text, std::move(t), name.loc};
  }

  TermPtr term() { return shuffle(); }

  TermPtr shuffle() {
    TermPtr l = or_term();
    while (at(Tok::bar)) {
      take();
      TermPtr r = or_term();
      l = make_term(Shuffle{l, r}, l->loc);
    }
    return l;
  }

  TermPtr or_term() {
    TermPtr l = and_term();
    while (at(Tok::or_op)) {
      take();
      TermPtr r = and_term();
      l = make_term(Or{l, r}, l->loc);
    }
    return l;
  }

  TermPtr and_term() {
    TermPtr l = seq();
    while (at(Tok::and_op)) {
      take();
      TermPtr r = seq();
      l = make_term(And{l, r}, l->loc);
    }
    return l;
  }

  bool starts_atom() const {
    return at(Tok::lident) || at(Tok::uident) || at(Tok::lparen) || at(Tok::lbrace);
  }

  TermPtr seq() {
    if (!starts_atom()) fail("expected a term, found " + found());
    TermPtr l = starred();
    while (starts_atom()) {
      TermPtr r = starred();
      l = make_term(Seq{l, r}, l->loc);
    }
    return l;
  }

  TermPtr starred() {
    TermPtr a = atom();
    if (accept(Tok::star)) a = make_term(Star{a}, a->loc);
    return a;
  }

  TermPtr atom() {
    SourceLoc loc = cur().loc;
    switch (cur().kind) {
      case Tok::lident: {
        PatternRef ref{take().text, {}, {}};
        // An argument list must follow the name directly; `p (t)` is a
        // sequence of p and a parenthesised term.
        if (at(Tok::lparen) && cur().adjacent) {
          take();
          ref.args.push_back(field_pattern());
          while (accept(Tok::comma)) ref.args.push_back(field_pattern());
          expect(Tok::rparen, "after pattern arguments");
        }
        return make_term(std::move(ref), loc);
      }
      case Tok::uident: return make_term(EqRef{take().text}, loc);
      case Tok::lparen: {
        take();
        TermPtr t = term();
        expect(Tok::rparen, "to close a parenthesised term");
        return t;
      }
      case Tok::lbrace: {
        take();
        expect(Tok::kw_let, "after '{' in a term");
        Let let;
        let.vars.push_back(variable_name("as let variable"));
        while (accept(Tok::comma)) let.vars.push_back(variable_name("as let variable"));
        expect(Tok::semi, "after let variables");
        let.body = term();
        expect(Tok::rbrace, "to close a let block");
        return make_term(std::move(let), loc);
      }
      default: fail("expected a term, found " + found());
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Validation

class Validator {
 public:
  explicit Validator(const Spec& spec) : spec_(spec) {}

  std::vector<Diagnostic> run() {
    check_names();
    if (!spec_.find_equation("Main")) {
      SourceLoc loc{1, 1};
      add(DiagnosticKind::missing_main, "no equation named 'Main'", loc);
    }
    for (const auto& eq : spec_.equations) {
      std::set<std::string> scope;
      check_scopes(*eq.body, scope);
    }
    check_guardedness();
    return std::move(errors_);
  }

 private:
  void add(DiagnosticKind kind, std::string message, SourceLoc loc) {
    errors_.push_back({kind, std::move(message), loc});
  }

  void check_names() {
    std::set<std::string> seen;
    for (const auto& d : spec_.decls) {
      if (!seen.insert(d.name).second) {
        add(DiagnosticKind::duplicate_name, "pattern '" + d.name + "' is declared twice", d.loc);
      }
      std::set<std::string> params;
      for (const auto& p : d.params) {
        if (!params.insert(p).second) {
          add(DiagnosticKind::duplicate_name,
              "parameter '" + p + "' repeated in pattern '" + d.name + "'", d.loc);
        }
      }
    }
    seen.clear();
    for (const auto& e : spec_.equations) {
      if (!seen.insert(e.name).second) {
        add(DiagnosticKind::duplicate_name, "equation '" + e.name + "' is defined twice", e.loc);
      }
    }
  }

  void check_scopes(const Term& t, std::set<std::string>& scope) {
    if (const auto* ref = t.as<PatternRef>()) {
      const PatternDecl* decl = spec_.find_decl(ref->name);
      if (!decl) {
        add(DiagnosticKind::unknown_pattern, "undeclared pattern '" + ref->name + "'", t.loc);
        return;
      }
      if (decl->params.size() != ref->args.size()) {
        add(DiagnosticKind::arity_mismatch,
            "pattern '" + ref->name + "' expects " + std::to_string(decl->params.size()) +
                " argument(s), got " + std::to_string(ref->args.size()),
            t.loc);
      }
      std::set<std::string> used;
      for (const auto& a : ref->args) collect_variables(a, used);
      for (const auto& v : used) {
        if (!scope.count(v)) {
          add(DiagnosticKind::unbound_variable,
              "variable '" + v + "' is not declared by an enclosing let", t.loc);
        }
      }
      for (const auto& v : decl->free_variables()) {
        if (!scope.count(v) && !ref->fixed.count(v)) {
          add(DiagnosticKind::unbound_variable,
              "pattern '" + ref->name + "' uses variable '" + v +
                  "' which is neither a parameter nor declared by an enclosing let",
              t.loc);
        }
      }
      return;
    }
    if (const auto* eq = t.as<EqRef>()) {
      if (!spec_.find_equation(eq->name)) {
        add(DiagnosticKind::unknown_equation, "undefined equation '" + eq->name + "'", t.loc);
      }
      return;
    }
    if (const auto* let = t.as<Let>()) {
      std::set<std::string> inner = scope;
      std::set<std::string> here;
      for (const auto& v : let->vars) {
        if (!here.insert(v).second) {
          add(DiagnosticKind::duplicate_name, "variable '" + v + "' repeated in let", t.loc);
        }
        inner.insert(v);
      }
      check_scopes(*let->body, inner);
      return;
    }
    for_each_child(t, [&](const Term& c) { check_scopes(c, scope); });
  }

  static void for_each_child(const Term& t, const std::function<void(const Term&)>& f) {
    if (const auto* s = t.as<Seq>()) {
      f(*s->first);
      f(*s->second);
    } else if (const auto* s = t.as<Shuffle>()) {
      f(*s->left);
      f(*s->right);
    } else if (const auto* s = t.as<And>()) {
      f(*s->left);
      f(*s->right);
    } else if (const auto* s = t.as<Or>()) {
      f(*s->left);
      f(*s->right);
    } else if (const auto* s = t.as<Star>()) {
      f(*s->body);
    } else if (const auto* s = t.as<Let>()) {
      f(*s->body);
    }
  }

  bool nullable(const Term& t) const {
    if (t.is<PatternRef>()) return false;
    if (t.is<Epsilon>() || t.is<Star>()) return true;
    if (const auto* e = t.as<EqRef>()) {
      auto it = eq_nullable_.find(e->name);
      return it != eq_nullable_.end() && it->second;
    }
    if (const auto* s = t.as<Seq>()) return nullable(*s->first) && nullable(*s->second);
    if (const auto* s = t.as<Shuffle>()) return nullable(*s->left) && nullable(*s->right);
    if (const auto* s = t.as<And>()) return nullable(*s->left) && nullable(*s->right);
    if (const auto* s = t.as<Or>()) return nullable(*s->left) || nullable(*s->right);
    if (const auto* s = t.as<Let>()) return nullable(*s->body);
    return false;
  }

  // Equations reachable before any event is consumed.
  void unguarded_refs(const Term& t, std::set<std::string>& out) const {
    if (const auto* e = t.as<EqRef>()) {
      out.insert(e->name);
    } else if (const auto* s = t.as<Seq>()) {
      unguarded_refs(*s->first, out);
      if (nullable(*s->first)) unguarded_refs(*s->second, out);
    } else {
      for_each_child(t, [&](const Term& c) { unguarded_refs(c, out); });
    }
  }

  void check_guardedness() {
    // Least fixpoint of equation nullability.
    for (const auto& e : spec_.equations) eq_nullable_[e.name] = false;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : spec_.equations) {
        if (!eq_nullable_[e.name] && nullable(*e.body)) {
          eq_nullable_[e.name] = true;
          changed = true;
        }
      }
    }
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& e : spec_.equations) unguarded_refs(*e.body, edges[e.name]);

    for (const auto& e : spec_.equations) {
      // Does e reach itself through unguarded references?
      std::set<std::string> visited;
      std::vector<std::string> stack(edges[e.name].begin(), edges[e.name].end());
      bool cyclic = false;
      while (!stack.empty() && !cyclic) {
        std::string n = stack.back();
        stack.pop_back();
        if (n == e.name) cyclic = true;
        if (!visited.insert(n).second) continue;
        auto it = edges.find(n);
        if (it != edges.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
      }
      if (cyclic) {
        add(DiagnosticKind::unguarded_recursion,
            "equation '" + e.name + "' can recurse into itself without consuming an event", e.loc);
      }
    }
  }

  const Spec& spec_;
  std::vector<Diagnostic> errors_;
  std::map<std::string, bool> eq_nullable_;
};

}  // namespace

Spec parse_spec(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.parse();
}

std::vector<ValidationError> validate_spec(const Spec& spec) { return Validator(spec).run(); }

Spec load_spec(std::string_view text) {
  Spec spec = parse_spec(text);
  auto errors = validate_spec(spec);
  if (!errors.empty()) throw InvalidSpec(std::move(errors));
  return spec;
}

}  // namespace protomon
