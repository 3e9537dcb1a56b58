#include "hedp/scenario_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

namespace hedp::dsl {

std::string to_string(Position pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

const char* symbol(Operator op) {
  switch (op) {
    case Operator::kIntersect: return "∩";
    case Operator::kSubset: return "⊂";
    case Operator::kSuperset: return "⊇";
    case Operator::kEmpty: return "∅";
    case Operator::kGreater: return ">";
    case Operator::kLess: return "<";
    case Operator::kEqual: return "=";
    case Operator::kNotEqual: return "≠";
    case Operator::kFarMore: return "≫";
    case Operator::kMinus: return "−";
  }
  return "?";
}

const char* primitive_name(Operator op) {
  switch (op) {
    case Operator::kIntersect: return "intersect";
    case Operator::kSubset: return "subset";
    case Operator::kSuperset: return "superset";
    case Operator::kEmpty: return "empty";
    case Operator::kGreater: return "greater";
    case Operator::kLess: return "less";
    case Operator::kEqual: return "equal";
    case Operator::kNotEqual: return "not_equal";
    case Operator::kFarMore: return "far_more";
    case Operator::kMinus: return "difference";
  }
  return "?";
}

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kTupleOpen: return "tuple-open";
    case TokenKind::kTupleClose: return "tuple-close";
    case TokenKind::kOperator: return "operator";
    case TokenKind::kComma: return "comma";
    case TokenKind::kSemicolon: return "semicolon";
    case TokenKind::kPeriod: return "period";
    case TokenKind::kFreeText: return "free-text";
    case TokenKind::kBraceOpen: return "brace-open";
    case TokenKind::kBraceClose: return "brace-close";
    case TokenKind::kParenOpen: return "paren-open";
    case TokenKind::kParenClose: return "paren-close";
    case TokenKind::kCallName: return "call";
    case TokenKind::kNumber: return "number";
    case TokenKind::kLabel: return "label";
    case TokenKind::kSubscript: return "subscript";
  }
  return "?";
}

const char* to_string(Keyword kw) {
  switch (kw) {
    case Keyword::kIf: return "IF";
    case Keyword::kWhen: return "WHEN";
    case Keyword::kThen: return "THEN";
    case Keyword::kAnd: return "AND";
    case Keyword::kOr: return "OR";
  }
  return "?";
}

DslError::DslError(const std::string& what, Position pos)
    : std::runtime_error(to_string(pos) + ": " + what), pos_(pos) {}

UnknownSymbol::UnknownSymbol(const std::string& symbol, Position pos)
    : DslError("unknown symbol '" + symbol + "'", pos) {}

UnterminatedTuple::UnterminatedTuple(Position pos)
    : DslError("attribute tuple opened here is never closed", pos) {}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(Position pos, std::vector<std::string> expected, const std::string& found)
    : DslError("expected " + join(expected, " or ") + ", found " + found, pos),
      expected_(std::move(expected)) {}

MissingThen::MissingThen(Position pos)
    : DslError("scenario ends without a THEN consequence", pos) {}

UnboundVariable::UnboundVariable(const std::string& name, Position pos)
    : DslError("variable '" + name + "' is not declared by IF or a There Exists binding", pos),
      name_(name) {}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTilde = "\xCC\x83";  // U+0303 COMBINING TILDE

struct Decoded {
  char32_t cp = 0;
  std::size_t len = 1;
};

Decoded decode(const std::string& s, std::size_t i) {
  auto b = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> char32_t {
    if (i + k >= s.size()) return 0;
    return static_cast<unsigned char>(s[i + k]) & 0x3F;
  };
  if (b < 0x80) return {b, 1};
  if ((b >> 5) == 0x6) return {(char32_t(b & 0x1F) << 6) | cont(1), 2};
  if ((b >> 4) == 0xE) return {(char32_t(b & 0x0F) << 12) | (cont(1) << 6) | cont(2), 3};
  if ((b >> 3) == 0x1E)
    return {(char32_t(b & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
  return {b, 1};
}

std::optional<Operator> unicode_operator(char32_t cp) {
  switch (cp) {
    case U'∩': return Operator::kIntersect;
    case U'⊂': return Operator::kSubset;
    case U'⊇': return Operator::kSuperset;
    case U'∅': return Operator::kEmpty;
    case U'≠': return Operator::kNotEqual;
    case U'≫': return Operator::kFarMore;
    case U'−': return Operator::kMinus;
    default: return std::nullopt;
  }
}

std::optional<Operator> alias_operator(const std::string& word) {
  static const std::map<std::string, Operator> kAliases = {
      {"INTERSECT", Operator::kIntersect}, {"SUBSET", Operator::kSubset},
      {"SUPERSET", Operator::kSuperset},   {"EMPTY", Operator::kEmpty},
      {"MINUS", Operator::kMinus},
  };
  auto it = kAliases.find(word);
  if (it == kAliases.end()) return std::nullopt;
  return it->second;
}

std::optional<Keyword> keyword_of(const std::string& word) {
  if (word == "IF") return Keyword::kIf;
  if (word == "WHEN") return Keyword::kWhen;
  if (word == "THEN") return Keyword::kThen;
  if (word == "AND") return Keyword::kAnd;
  if (word == "OR") return Keyword::kOr;
  return std::nullopt;
}

bool is_math_block(char32_t cp) { return cp >= 0x2190 && cp <= 0x22FF; }

bool is_letter(char32_t cp) {
  return (cp < 0x80 && std::isalpha(static_cast<int>(cp))) || (cp >= 0x80 && !is_math_block(cp));
}

bool is_word_char(char32_t cp) {
  if (cp >= 0x80) return !is_math_block(cp) && cp != U'“' && cp != U'”';
  if (std::isalnum(static_cast<int>(cp))) return true;
  switch (cp) {
    case '_': case '\'': case '-': case '~': case '/': case '?': case ':':
      return true;
    default:
      return false;
  }
}

bool is_entity_head(const std::string& w) {
  return w == "Rule" || w == "Task" || w == "Work" || w == "Relation";
}

const std::regex& attribute_re() {
  static const std::regex re("^(Fe|Fu)[A-Z](~|\xCC\x83)?$");
  return re;
}

const std::regex& subscripted_re() {
  static const std::regex re("^[A-Z][A-Za-z]*_[a-z0-9]+$");
  return re;
}

const std::regex& number_re() {
  static const std::regex re("^[0-9]+(\\.[0-9]+)?$");
  return re;
}

std::string normalize_tilde(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '~') out += kTilde;
    else out += c;
  }
  return out;
}

struct RawToken {
  Token token;
  bool space_before = false;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    while (i_ < src_.size()) step();
    if (tuple_depth_ > 0) throw UnterminatedTuple(tuple_open_);
    return merge();
  }

 private:
  const std::string& src_;
  std::size_t i_ = 0;
  Position pos_;
  bool line_start_ = true;
  bool pending_space_ = false;
  int tuple_depth_ = 0;
  Position tuple_open_;
  std::vector<RawToken> raw_;

  Decoded peek(std::size_t offset = 0) const {
    std::size_t j = i_;
    for (std::size_t k = 0; k < offset && j < src_.size(); ++k) j += decode(src_, j).len;
    if (j >= src_.size()) return {0, 0};
    return decode(src_, j);
  }

  void advance() {
    auto d = decode(src_, i_);
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
      line_start_ = true;
    } else {
      ++pos_.column;
    }
    i_ += d.len;
  }

  void emit(TokenKind kind, std::string lexeme, Position at,
            std::optional<Keyword> kw = std::nullopt, std::optional<Operator> op = std::nullopt) {
    raw_.push_back({Token{kind, std::move(lexeme), at, kw, op}, pending_space_});
    pending_space_ = false;
    line_start_ = false;
  }

  void emit_op(Operator op, Position at) {
    emit(TokenKind::kOperator, symbol(op), at, std::nullopt, op);
  }

  void step() {
    auto d = decode(src_, i_);
    char32_t c = d.cp;
    Position at = pos_;

    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      pending_space_ = true;
      return;
    }
    if (line_start_ && c == '#') {
      while (i_ < src_.size() && src_[i_] != '\n') advance();
      return;
    }
    if (line_start_ && c == '[') {
      advance();
      std::string label;
      while (i_ < src_.size() && src_[i_] != ']' && src_[i_] != '\n') {
        label += src_[i_];
        advance();
      }
      if (i_ >= src_.size() || src_[i_] != ']') throw UnknownSymbol("[", at);
      advance();
      auto b = label.find_first_not_of(" \t");
      auto e = label.find_last_not_of(" \t");
      emit(TokenKind::kLabel, b == std::string::npos ? "" : label.substr(b, e - b + 1), at);
      return;
    }
    if (auto op = unicode_operator(c)) {
      advance();
      emit_op(*op, at);
      return;
    }
    switch (c) {
      case ',': advance(); emit(TokenKind::kComma, ",", at); return;
      case ';': advance(); emit(TokenKind::kSemicolon, ";", at); return;
      case '.': advance(); emit(TokenKind::kPeriod, ".", at); return;
      case '{': advance(); emit(TokenKind::kBraceOpen, "{", at); return;
      case '}': advance(); emit(TokenKind::kBraceClose, "}", at); return;
      case '(': advance(); emit(TokenKind::kParenOpen, "(", at); return;
      case '=': advance(); emit_op(Operator::kEqual, at); return;
      case ')':
        advance();
        emit(TokenKind::kParenClose, ")", at);
        lex_subscript();
        return;
      case '!':
        if (peek(1).cp == '=') {
          advance();
          advance();
          emit_op(Operator::kNotEqual, at);
          return;
        }
        break;
      case '<':
        if (tuple_depth_ == 0 && is_letter(peek(1).cp)) {
          advance();
          ++tuple_depth_;
          tuple_open_ = at;
          emit(TokenKind::kTupleOpen, "<", at);
        } else {
          advance();
          emit_op(Operator::kLess, at);
        }
        return;
      case '>':
        if (tuple_depth_ > 0) {
          advance();
          --tuple_depth_;
          emit(TokenKind::kTupleClose, ">", at);
        } else if (peek(1).cp == '>') {
          advance();
          advance();
          emit_op(Operator::kFarMore, at);
        } else {
          advance();
          emit_op(Operator::kGreater, at);
        }
        return;
      case U'“':
        lex_quote(at);
        return;
      default:
        break;
    }
    if (c == '"') {
      lex_ascii_quote(at);
      return;
    }
    if (is_word_char(c)) {
      lex_word(at);
      return;
    }
    throw UnknownSymbol(src_.substr(i_, d.len), at);
  }

  void lex_subscript() {
    if (peek().cp != '_') return;
    std::size_t j = i_ + 1;
    while (j < src_.size() && (std::islower(static_cast<unsigned char>(src_[j])) ||
                               std::isdigit(static_cast<unsigned char>(src_[j]))))
      ++j;
    if (j == i_ + 1) return;
    Position at = pos_;
    std::string sub = src_.substr(i_ + 1, j - i_ - 1);
    while (i_ < j) advance();
    raw_.push_back({Token{TokenKind::kSubscript, sub, at, {}, {}}, false});
  }

  void lex_quote(Position at) {
    std::string text;
    while (i_ < src_.size()) {
      auto d = decode(src_, i_);
      text += src_.substr(i_, d.len);
      advance();
      if (d.cp == U'”') {
        emit(TokenKind::kFreeText, text, at);
        return;
      }
    }
    throw UnknownSymbol("“", at);
  }

  void lex_ascii_quote(Position at) {
    std::string text = "\"";
    advance();
    while (i_ < src_.size() && src_[i_] != '"' && src_[i_] != '\n') {
      text += src_[i_];
      advance();
    }
    if (i_ >= src_.size() || src_[i_] != '"') throw UnknownSymbol("\"", at);
    text += '"';
    advance();
    emit(TokenKind::kFreeText, text, at);
  }

  std::string scan_word() {
    std::string w;
    while (i_ < src_.size()) {
      auto d = decode(src_, i_);
      if (!is_word_char(d.cp)) break;
      w += src_.substr(i_, d.len);
      advance();
    }
    return w;
  }

  // Designator after an entity head: a capital letter, an optional tilde and
  // dotted numeric parts, e.g. "A", "X~", "A.2".
  std::optional<std::string> scan_designator() {
    std::size_t j = i_;
    while (j < src_.size() && (src_[j] == ' ' || src_[j] == '\t')) ++j;
    if (j >= src_.size() || !std::isupper(static_cast<unsigned char>(src_[j]))) return std::nullopt;
    std::string d(1, src_[j]);
    std::size_t k = j + 1;
    if (k < src_.size() && src_[k] == '~') {
      d += kTilde;
      ++k;
    } else if (src_.compare(k, 2, kTilde) == 0) {
      d += kTilde;
      k += 2;
    }
    while (k + 1 < src_.size() && src_[k] == '.' && std::isdigit(static_cast<unsigned char>(src_[k + 1]))) {
      d += '.';
      ++k;
      while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) d += src_[k++];
    }
    if (k < src_.size() && is_word_char(decode(src_, k).cp)) return std::nullopt;
    while (i_ < k) advance();
    return d;
  }

  void lex_word(Position at) {
    std::string w = scan_word();
    if (std::regex_match(w, number_re()) && peek().cp == '.' && peek(1).cp >= '0' &&
        peek(1).cp <= '9') {
      advance();
      w += "." + scan_word();
    }
    if (peek().cp == '(') {
      emit(TokenKind::kCallName, w, at);
      return;
    }
    if (auto kw = keyword_of(w)) {
      emit(TokenKind::kKeyword, w, at, kw);
      return;
    }
    if (auto op = alias_operator(w)) {
      emit_op(*op, at);
      return;
    }
    if (std::regex_match(w, number_re())) {
      emit(TokenKind::kNumber, w, at);
      return;
    }
    if (is_entity_head(w)) {
      if (auto d = scan_designator()) {
        emit(TokenKind::kIdentifier, w + " " + *d, at);
        return;
      }
    }
    if (std::regex_match(w, attribute_re()) || std::regex_match(w, subscripted_re())) {
      emit(TokenKind::kIdentifier, normalize_tilde(w), at);
      return;
    }
    emit(TokenKind::kFreeText, w, at);
  }

  // Numbers only count as operands next to an operator or inside a call;
  // elsewhere they are prose. Adjacent prose tokens collapse into one.
  std::vector<Token> merge() {
    auto is_op = [&](std::size_t k) {
      return k < raw_.size() && raw_[k].token.kind == TokenKind::kOperator;
    };
    for (std::size_t k = 0; k < raw_.size(); ++k) {
      if (raw_[k].token.kind != TokenKind::kNumber) continue;
      bool prev_ok = k > 0 && (is_op(k - 1) || raw_[k - 1].token.kind == TokenKind::kParenOpen ||
                               raw_[k - 1].token.kind == TokenKind::kComma);
      bool next_ok = is_op(k + 1) || (k + 1 < raw_.size() &&
                                      raw_[k + 1].token.kind == TokenKind::kParenClose);
      if (!(prev_ok || next_ok)) raw_[k].token.kind = TokenKind::kFreeText;
    }
    std::vector<Token> out;
    bool prev_text = false;
    for (auto& r : raw_) {
      bool text = r.token.kind == TokenKind::kFreeText;
      if (text && prev_text) {
        out.back().lexeme += (r.space_before ? " " : "") + r.token.lexeme;
      } else {
        out.push_back(std::move(r.token));
      }
      prev_text = text;
    }
    return out;
  }
};

}  // namespace

std::vector<Token> tokenize(const std::string& source) { return Lexer(source).run(); }

// ---------------------------------------------------------------------------
// Condition helpers
// ---------------------------------------------------------------------------

namespace {

bool starts_with_exists(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "there exists" || lower.ends_with(" there exists");
}

}  // namespace

std::optional<std::string> Condition::existential() const {
  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    if (pieces[k].kind == PieceKind::kText && starts_with_exists(pieces[k].text) &&
        pieces[k + 1].kind == PieceKind::kMention)
      return pieces[k + 1].text;
  }
  return std::nullopt;
}

std::optional<Expr> Condition::predicate() const {
  for (const auto& p : pieces)
    if (p.kind == PieceKind::kExpr) return p.expr;
  if (auto v = existential()) {
    Expr call{ExprKind::kCall, "exists", {Expr{ExprKind::kVariable, *v, {}, {}, {}}}, {}, {}};
    return call;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

bool is_relational(Operator op) {
  switch (op) {
    case Operator::kSubset: case Operator::kSuperset: case Operator::kGreater:
    case Operator::kLess: case Operator::kEqual: case Operator::kNotEqual:
    case Operator::kFarMore:
      return true;
    default:
      return false;
  }
}

bool is_set_op(Operator op) { return op == Operator::kIntersect || op == Operator::kMinus; }

Expr variable(std::string name) { return Expr{ExprKind::kVariable, std::move(name), {}, {}, {}}; }

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  bool done() const { return p_ >= t_.size(); }
  void expect_end() const {
    if (!done()) fail({"end of input"});
  }

  ScenarioAST scenario() {
    ScenarioAST ast;
    if (at(TokenKind::kLabel)) ast.scenario_id = t_[p_++].lexeme;
    if (!at_keyword(Keyword::kIf) && !at_keyword(Keyword::kWhen)) fail({"IF", "WHEN"});

    std::vector<ConditionNode> when_clauses;
    bool seen_when = false;
    bool seen_then = false;
    while (true) {
      if (at(TokenKind::kPeriod)) break;
      if (seen_then) fail({"."});
      if (!at(TokenKind::kKeyword)) fail({"IF", "WHEN", "THEN"});
      Keyword kw = *t_[p_].keyword;
      Position kw_pos = t_[p_].position;
      if (kw == Keyword::kAnd || kw == Keyword::kOr) fail({"IF", "WHEN", "THEN"});
      ++p_;
      if (kw == Keyword::kIf) {
        if_group(ast.preconditions);
      } else if (kw == Keyword::kWhen) {
        seen_when = true;
        when_group(when_clauses);
      } else {
        if (!seen_when) {
          p_ -= 1;
          throw ParseError(kw_pos, {"WHEN"}, "THEN");
        }
        seen_then = true;
        then_group(ast.consequences);
      }
    }
    Position end = t_[p_].position;
    ++p_;
    if (!seen_then) throw MissingThen(end);

    ConditionNode root{NodeKind::kAnd, {}, std::move(when_clauses)};
    ast.trigger_conditions = normalize(std::move(root));
    resolve(ast);
    return ast;
  }

 private:
  std::vector<Token> t_;
  std::size_t p_ = 0;

  bool at(TokenKind k) const { return p_ < t_.size() && t_[p_].kind == k; }
  bool at_keyword(Keyword kw) const { return at(TokenKind::kKeyword) && t_[p_].keyword == kw; }
  bool keyword_at(std::size_t q, std::initializer_list<Keyword> kws) const {
    if (q >= t_.size() || t_[q].kind != TokenKind::kKeyword) return false;
    return std::find(kws.begin(), kws.end(), *t_[q].keyword) != kws.end();
  }
  bool group_keyword_at(std::size_t q) const {
    return keyword_at(q, {Keyword::kIf, Keyword::kWhen, Keyword::kThen});
  }

  Position here() const {
    if (p_ < t_.size()) return t_[p_].position;
    return t_.empty() ? Position{} : t_.back().position;
  }
  std::string found() const {
    if (p_ >= t_.size()) return "end of input";
    return "'" + t_[p_].lexeme + "'";
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(here(), std::move(expected), found());
  }

  // A separator before a group keyword ends the current group.
  bool at_group_end() {
    if (p_ >= t_.size()) fail({"."});
    if (at(TokenKind::kPeriod) || group_keyword_at(p_)) return true;
    if ((at(TokenKind::kSemicolon) || at(TokenKind::kComma)) && group_keyword_at(p_ + 1)) {
      ++p_;
      return true;
    }
    return false;
  }

  void if_group(std::vector<Condition>& out) {
    while (true) {
      out.push_back(leaf());
      if (at_group_end()) return;
      if (at(TokenKind::kSemicolon)) {
        ++p_;
        continue;
      }
      if (at(TokenKind::kComma)) {
        ++p_;
        if (at_keyword(Keyword::kOr)) fail({"condition"});
        if (at_keyword(Keyword::kAnd)) ++p_;
        continue;
      }
      if (at_keyword(Keyword::kAnd)) {
        ++p_;
        continue;
      }
      fail({";", ",", "WHEN", "THEN", "."});
    }
  }

  void when_group(std::vector<ConditionNode>& out) {
    while (true) {
      out.push_back(or_clause());
      if (at_group_end()) return;
      if (at(TokenKind::kSemicolon)) {
        ++p_;
        if (at_keyword(Keyword::kAnd)) ++p_;
        continue;
      }
      fail({";", "THEN", "."});
    }
  }

  ConditionNode or_clause() {
    ConditionNode node{NodeKind::kOr, {}, {}};
    node.children.push_back(and_clause());
    while (true) {
      if (at(TokenKind::kComma) && keyword_at(p_ + 1, {Keyword::kOr})) {
        p_ += 2;
      } else if (at_keyword(Keyword::kOr)) {
        ++p_;
      } else {
        break;
      }
      node.children.push_back(and_clause());
    }
    return node;
  }

  ConditionNode and_clause() {
    ConditionNode node{NodeKind::kAnd, {}, {}};
    node.children.push_back(when_leaf());
    while (true) {
      if (at(TokenKind::kComma) && !keyword_at(p_ + 1, {Keyword::kOr}) && !group_keyword_at(p_ + 1)) {
        ++p_;
        if (at_keyword(Keyword::kAnd)) ++p_;
      } else if (at_keyword(Keyword::kAnd)) {
        ++p_;
      } else {
        break;
      }
      node.children.push_back(when_leaf());
    }
    return node;
  }

  ConditionNode when_leaf() {
    Position start = here();
    Condition c = leaf();
    std::size_t structured = 0;
    for (const auto& piece : c.pieces)
      if (piece.kind == PieceKind::kExpr) ++structured;
    if (c.existential()) ++structured;
    if (structured != 1)
      throw ParseError(start, {"exactly one predicate call, operator expression or There Exists"},
                       std::to_string(structured) + " in this condition");
    return ConditionNode{NodeKind::kLeaf, std::move(c), {}};
  }

  void then_group(std::vector<Condition>& out) {
    while (true) {
      Position start = here();
      Condition c = leaf();
      std::size_t calls = 0;
      for (const auto& piece : c.pieces)
        if (piece.kind == PieceKind::kExpr && piece.expr.kind == ExprKind::kCall) ++calls;
      if (calls != 1)
        throw ParseError(start, {"exactly one manifestation call"},
                         std::to_string(calls) + " in this consequence");
      out.push_back(std::move(c));
      if (at(TokenKind::kPeriod)) return;
      if (at(TokenKind::kComma) || at(TokenKind::kSemicolon)) {
        if (group_keyword_at(p_ + 1)) {
          ++p_;
          fail({"consequence", "."});
        }
        ++p_;
        if (at_keyword(Keyword::kAnd)) ++p_;
        continue;
      }
      if (at_keyword(Keyword::kAnd)) {
        ++p_;
        continue;
      }
      fail({",", "."});
    }
  }

  // Collects the tokens of one condition, up to a separator at bracket depth 0.
  Condition leaf() {
    Condition c;
    c.position = here();
    std::size_t begin = p_;
    int depth = 0;
    while (p_ < t_.size()) {
      const Token& tok = t_[p_];
      if (depth == 0 && (tok.kind == TokenKind::kComma || tok.kind == TokenKind::kSemicolon ||
                         tok.kind == TokenKind::kPeriod || tok.kind == TokenKind::kKeyword ||
                         tok.kind == TokenKind::kLabel))
        break;
      if (tok.kind == TokenKind::kBraceOpen || tok.kind == TokenKind::kParenOpen ||
          tok.kind == TokenKind::kTupleOpen)
        ++depth;
      if (tok.kind == TokenKind::kBraceClose || tok.kind == TokenKind::kParenClose ||
          tok.kind == TokenKind::kTupleClose) {
        if (depth == 0) fail({"condition"});
        --depth;
      }
      ++p_;
    }
    std::size_t end = p_;
    if (begin == end) {
      p_ = begin;
      fail({"condition"});
    }
    if (depth != 0) fail({"closing bracket"});
    std::size_t q = begin;
    while (q < end) c.pieces.push_back(piece(q, end));
    return c;
  }

  Piece piece(std::size_t& q, std::size_t end) {
    const Token& tok = t_[q];
    switch (tok.kind) {
      case TokenKind::kFreeText:
        ++q;
        return Piece{PieceKind::kText, tok.lexeme, false, {}, {}};
      case TokenKind::kTupleOpen: {
        Piece note{PieceKind::kNote, "", true, tuple(q, end), {}};
        return note;
      }
      case TokenKind::kIdentifier:
        if (q + 1 < end && t_[q + 1].kind == TokenKind::kTupleOpen) {
          std::string name = tok.lexeme;
          ++q;
          return Piece{PieceKind::kMention, name, true, tuple(q, end), {}};
        }
        if (q + 1 < end && t_[q + 1].kind == TokenKind::kOperator) break;
        ++q;
        return Piece{PieceKind::kMention, tok.lexeme, false, {}, {}};
      case TokenKind::kNumber:
      case TokenKind::kCallName:
      case TokenKind::kBraceOpen:
      case TokenKind::kParenOpen:
        break;
      case TokenKind::kOperator:
        if (tok.op == Operator::kEmpty) break;
        p_ = q;
        fail({"operand"});
      default:
        p_ = q;
        fail({"text", "identifier", "expression"});
    }
    Piece expr{PieceKind::kExpr, "", false, {}, chain(q, end)};
    return expr;
  }

  std::vector<TupleSlot> tuple(std::size_t& q, std::size_t end) {
    ++q;  // '<'
    std::vector<TupleSlot> slots(1);
    while (q < end && t_[q].kind != TokenKind::kTupleClose) {
      const Token& tok = t_[q];
      if (tok.kind == TokenKind::kComma) {
        slots.emplace_back();
      } else if (tok.kind == TokenKind::kFreeText || tok.kind == TokenKind::kNumber) {
        slots.back().push_back({false, tok.lexeme});
      } else if (tok.kind == TokenKind::kIdentifier) {
        slots.back().push_back({true, tok.lexeme});
      } else {
        p_ = q;
        fail({"text", "identifier", ">"});
      }
      ++q;
    }
    if (q >= end) {
      p_ = q;
      fail({">"});
    }
    ++q;  // '>'
    for (const auto& s : slots)
      if (s.empty()) {
        p_ = q - 1;
        fail({"attribute"});
      }
    return slots;
  }

  Expr chain(std::size_t& q, std::size_t end) {
    Expr first = set_expr(q, end);
    Expr out{ExprKind::kChain, "", {std::move(first)}, {}, {}};
    while (q < end && t_[q].kind == TokenKind::kOperator && is_relational(*t_[q].op)) {
      out.ops.push_back(*t_[q].op);
      ++q;
      out.args.push_back(set_expr(q, end));
    }
    if (out.ops.empty()) return std::move(out.args.front());
    return out;
  }

  Expr set_expr(std::size_t& q, std::size_t end) {
    Expr first = operand(q, end);
    Expr out{ExprKind::kBinary, "", {std::move(first)}, {}, {}};
    while (q < end && t_[q].kind == TokenKind::kOperator && is_set_op(*t_[q].op)) {
      out.ops.push_back(*t_[q].op);
      ++q;
      out.args.push_back(operand(q, end));
    }
    if (out.ops.empty()) return std::move(out.args.front());
    return out;
  }

  void expect(std::size_t& q, std::size_t end, TokenKind kind, const char* what) {
    if (q >= end || t_[q].kind != kind) {
      p_ = q;
      fail({what});
    }
    ++q;
  }

  Expr operand(std::size_t& q, std::size_t end) {
    if (q >= end) {
      p_ = q;
      fail({"operand"});
    }
    const Token& tok = t_[q];
    switch (tok.kind) {
      case TokenKind::kIdentifier:
        ++q;
        return variable(tok.lexeme);
      case TokenKind::kNumber:
        ++q;
        return Expr{ExprKind::kNumber, tok.lexeme, {}, {}, {}};
      case TokenKind::kOperator:
        if (tok.op == Operator::kEmpty) {
          ++q;
          return Expr{ExprKind::kEmptySet, "", {}, {}, {}};
        }
        break;
      case TokenKind::kCallName: {
        Expr call{ExprKind::kCall, tok.lexeme, {}, {}, {}};
        ++q;
        expect(q, end, TokenKind::kParenOpen, "(");
        if (q < end && t_[q].kind != TokenKind::kParenClose) {
          call.args.push_back(chain(q, end));
          while (q < end && t_[q].kind == TokenKind::kComma) {
            ++q;
            call.args.push_back(chain(q, end));
          }
        }
        expect(q, end, TokenKind::kParenClose, ")");
        return call;
      }
      case TokenKind::kBraceOpen: {
        ++q;
        std::vector<Expr> elems{chain(q, end)};
        while (q < end && t_[q].kind == TokenKind::kComma) {
          ++q;
          elems.push_back(chain(q, end));
        }
        expect(q, end, TokenKind::kBraceClose, "}");
        if (elems.size() == 1) return Expr{ExprKind::kGroup, "{}", std::move(elems), {}, {}};
        return Expr{ExprKind::kSet, "", std::move(elems), {}, {}};
      }
      case TokenKind::kParenOpen: {
        ++q;
        Expr inner = chain(q, end);
        expect(q, end, TokenKind::kParenClose, ")");
        Expr group{ExprKind::kGroup, "()", {std::move(inner)}, {}, {}};
        if (q < end && t_[q].kind == TokenKind::kSubscript) group.subscript = t_[q++].lexeme;
        return group;
      }
      default:
        break;
    }
    p_ = q;
    fail({"operand"});
  }

  static ConditionNode normalize(ConditionNode node) {
    if (node.kind == NodeKind::kLeaf) return node;
    std::vector<ConditionNode> flat;
    for (auto& child : node.children) {
      ConditionNode c = normalize(std::move(child));
      if (c.kind == node.kind) {
        for (auto& g : c.children) flat.push_back(std::move(g));
      } else {
        flat.push_back(std::move(c));
      }
    }
    if (flat.size() == 1) return std::move(flat.front());
    node.children = std::move(flat);
    return node;
  }

  // ---- declarations, desugaring, binding checks ----

  static void expr_names(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == ExprKind::kVariable) out.push_back(e.name);
    for (const auto& a : e.args) expr_names(a, out);
  }

  static void condition_names(const Condition& c, std::vector<std::string>& out) {
    for (const auto& p : c.pieces) {
      if (p.kind == PieceKind::kMention) out.push_back(p.text);
      for (const auto& slot : p.tuple)
        for (const auto& f : slot)
          if (f.identifier) out.push_back(f.text);
      if (p.kind == PieceKind::kExpr) expr_names(p.expr, out);
    }
  }

  static void declare(ScenarioAST& ast, std::map<std::string, std::size_t>& index,
                      const std::string& name, const std::string& owner) {
    auto it = index.find(name);
    if (it != index.end()) {
      if (ast.free_variables[it->second].owner.empty() && !owner.empty())
        ast.free_variables[it->second].owner = owner;
      return;
    }
    index[name] = ast.free_variables.size();
    ast.free_variables.push_back({name, infer_domain(name), owner});
  }

  static void declare_condition(ScenarioAST& ast, std::map<std::string, std::size_t>& index,
                                const Condition& c) {
    for (const auto& p : c.pieces) {
      if (p.kind == PieceKind::kMention) {
        declare(ast, index, p.text, "");
        for (const auto& slot : p.tuple)
          for (const auto& f : slot)
            if (f.identifier) declare(ast, index, f.text, p.text);
      } else if (p.kind == PieceKind::kNote) {
        for (const auto& slot : p.tuple)
          for (const auto& f : slot)
            if (f.identifier) declare(ast, index, f.text, "");
      } else if (p.kind == PieceKind::kExpr) {
        std::vector<std::string> names;
        expr_names(p.expr, names);
        for (const auto& n : names) declare(ast, index, n, "");
        // `V = {a, b}` makes attribute-typed elements belong to V.
        const Expr& e = p.expr;
        if (e.kind == ExprKind::kChain && e.ops.size() == 1 && e.ops[0] == Operator::kEqual &&
            e.args[0].kind == ExprKind::kVariable && e.args[1].kind == ExprKind::kSet) {
          for (const auto& el : e.args[1].args) {
            if (el.kind != ExprKind::kVariable) continue;
            auto dom = infer_domain(el.name);
            if (dom == "FeatureSet" || dom == "Count" || dom == "Ordinal")
              declare(ast, index, el.name, e.args[0].name);
          }
        }
      }
    }
  }

  static std::string owner_of(const ScenarioAST& ast, const std::string& name) {
    for (const auto& v : ast.free_variables)
      if (v.name == name) return v.owner;
    return "";
  }

  // Fu((FeX ∩ FeB)_i) → usage_in_context(owner of FeB, FeX)
  static void desugar(Expr& e, const ScenarioAST& ast) {
    for (auto& a : e.args) desugar(a, ast);
    if (e.kind != ExprKind::kCall || e.name != "Fu" || e.args.size() != 1) return;
    const Expr* inner = &e.args[0];
    while (inner->kind == ExprKind::kGroup && inner->args.size() == 1) inner = &inner->args[0];
    if (inner->kind != ExprKind::kBinary || inner->ops.size() != 1 ||
        inner->ops[0] != Operator::kIntersect || inner->args[0].kind != ExprKind::kVariable ||
        inner->args[1].kind != ExprKind::kVariable)
      return;
    std::string owner = owner_of(ast, inner->args[1].name);
    if (owner.empty()) return;
    Expr call{ExprKind::kCall, "usage_in_context", {variable(owner), inner->args[0]}, {}, {}};
    e = std::move(call);
  }

  static void desugar_condition(Condition& c, const ScenarioAST& ast) {
    for (auto& p : c.pieces)
      if (p.kind == PieceKind::kExpr) desugar(p.expr, ast);
  }

  static void desugar_node(ConditionNode& n, const ScenarioAST& ast) {
    if (n.kind == NodeKind::kLeaf) desugar_condition(n.leaf, ast);
    for (auto& c : n.children) desugar_node(c, ast);
  }

  static void resolve(ScenarioAST& ast) {
    std::map<std::string, std::size_t> index;
    for (const auto& c : ast.preconditions) declare_condition(ast, index, c);
    for (const Condition* c : leaves(ast.trigger_conditions)) {
      if (!c->existential()) continue;
      for (const auto& p : c->pieces) {
        if (p.kind != PieceKind::kMention) continue;
        declare(ast, index, p.text, "");
        for (const auto& slot : p.tuple)
          for (const auto& f : slot)
            if (f.identifier) declare(ast, index, f.text, p.text);
      }
    }
    for (auto& c : ast.preconditions) desugar_condition(c, ast);
    desugar_node(ast.trigger_conditions, ast);
    for (auto& c : ast.consequences) desugar_condition(c, ast);

    auto check = [&](const Condition& c) {
      std::vector<std::string> names;
      condition_names(c, names);
      for (const auto& n : names)
        if (!index.count(n)) throw UnboundVariable(n, c.position);
    };
    for (const Condition* c : leaves(ast.trigger_conditions)) check(*c);
    for (const auto& c : ast.consequences) check(c);
  }
};

}  // namespace

ScenarioAST parse_scenario(const std::string& source) {
  Parser parser(tokenize(source));
  ScenarioAST ast = parser.scenario();
  parser.expect_end();
  return ast;
}

std::vector<ScenarioAST> parse_scenarios(const std::string& source) {
  Parser parser(tokenize(source));
  std::vector<ScenarioAST> out;
  while (!parser.done()) out.push_back(parser.scenario());
  return out;
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string render_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kVariable:
    case ExprKind::kNumber:
      return e.name;
    case ExprKind::kEmptySet:
      return symbol(Operator::kEmpty);
    case ExprKind::kCall: {
      std::vector<std::string> args;
      for (const auto& a : e.args) args.push_back(render_expr(a));
      return e.name + "(" + join(args, ", ") + ")";
    }
    case ExprKind::kBinary:
    case ExprKind::kChain: {
      std::string out = render_expr(e.args.front());
      for (std::size_t k = 0; k < e.ops.size(); ++k)
        out += std::string(" ") + symbol(e.ops[k]) + " " + render_expr(e.args[k + 1]);
      return out;
    }
    case ExprKind::kSet: {
      std::vector<std::string> elems;
      for (const auto& a : e.args) elems.push_back(render_expr(a));
      return "{" + join(elems, ", ") + "}";
    }
    case ExprKind::kGroup: {
      std::string out = e.name.substr(0, 1) + render_expr(e.args.front()) + e.name.substr(1, 1);
      if (!e.subscript.empty()) out += "_" + e.subscript;
      return out;
    }
  }
  return "";
}

namespace {

std::string render_tuple(const std::vector<TupleSlot>& slots) {
  std::vector<std::string> parts;
  for (const auto& slot : slots) {
    std::vector<std::string> words;
    for (const auto& f : slot) words.push_back(f.text);
    parts.push_back(join(words, " "));
  }
  return "<" + join(parts, ", ") + ">";
}

std::string render_node(const ConditionNode& n) {
  switch (n.kind) {
    case NodeKind::kLeaf:
      return render_condition(n.leaf);
    case NodeKind::kAnd: {
      std::vector<std::string> parts;
      for (const auto& c : n.children) parts.push_back(render_node(c));
      return join(parts, ", AND ");
    }
    case NodeKind::kOr: {
      std::vector<std::string> parts;
      for (const auto& c : n.children) parts.push_back(render_node(c));
      return join(parts, ", OR ");
    }
  }
  return "";
}

}  // namespace

std::string render_condition(const Condition& c) {
  std::vector<std::string> parts;
  for (const auto& p : c.pieces) {
    switch (p.kind) {
      case PieceKind::kText:
        parts.push_back(p.text);
        break;
      case PieceKind::kMention:
        parts.push_back(p.has_tuple ? p.text + " " + render_tuple(p.tuple) : p.text);
        break;
      case PieceKind::kNote:
        parts.push_back(render_tuple(p.tuple));
        break;
      case PieceKind::kExpr:
        parts.push_back(render_expr(p.expr));
        break;
    }
  }
  return join(parts, " ");
}

std::string render_scenario(const ScenarioAST& ast) {
  std::string out;
  if (!ast.scenario_id.empty()) out += "[" + ast.scenario_id + "]\n";
  for (const auto& c : ast.preconditions) out += "IF " + render_condition(c) + ";\n";
  const ConditionNode& root = ast.trigger_conditions;
  if (root.kind == NodeKind::kAnd) {
    for (std::size_t k = 0; k < root.children.size(); ++k)
      out += (k == 0 ? "WHEN " : "") + render_node(root.children[k]) + ";\n";
  } else {
    out += "WHEN " + render_node(root) + ";\n";
  }
  std::vector<std::string> cons;
  for (const auto& c : ast.consequences) cons.push_back(render_condition(c));
  out += "THEN " + join(cons, ", ") + "\n.\n";
  return out;
}

std::vector<const Condition*> leaves(const ConditionNode& node) {
  std::vector<const Condition*> out;
  if (node.kind == NodeKind::kLeaf) {
    out.push_back(&node.leaf);
    return out;
  }
  for (const auto& c : node.children) {
    auto sub = leaves(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

namespace {

void collect_primitives(const Expr& e, std::set<std::string>& seen, std::vector<std::string>& out) {
  auto add = [&](const std::string& name) {
    if (seen.insert(name).second) out.push_back(name);
  };
  if (e.kind == ExprKind::kCall) add(e.name);
  for (Operator op : e.ops) add(primitive_name(op));
  for (const auto& a : e.args) collect_primitives(a, seen, out);
}

}  // namespace

std::vector<std::string> referenced_primitives(const ScenarioAST& ast) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const Condition* c : leaves(ast.trigger_conditions))
    if (auto e = c->predicate()) collect_primitives(*e, seen, out);
  for (const auto& c : ast.consequences)
    for (const auto& p : c.pieces)
      if (p.kind == PieceKind::kExpr) collect_primitives(p.expr, seen, out);
  return out;
}

std::string infer_domain(const std::string& id) {
  if (id.starts_with("Rule ")) return "Rule";
  if (id.starts_with("Task ")) return "Subtask";
  if (id.starts_with("Work ")) return "Review";
  if (id.starts_with("Relation ")) return "Relation";
  if (id.starts_with("FeT_")) return "InfoItem";
  if (id.starts_with("Saliency_") || id.starts_with("LogicImportance_")) return "Ordinal";
  if (id.starts_with("Fe")) return "FeatureSet";
  if (id.starts_with("Fu")) return "Count";
  return "";
}

}  // namespace hedp::dsl
