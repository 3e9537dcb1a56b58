// Lexer, parser and canonical printer for the IF/WHEN/THEN error-scenario
// notation.
//
// A scenario reads like annotated prose:
//
//   [post_completion]
//   IF Task A = {Task A.1, Task A.2};
//   WHEN <Task A.1 is the main subtask> main_subtask(Task A.1),
//   AND <Task A.2 is the last step of Task A> last_step(Task A.2, Task A);
//   THEN Humans tend to omit Task A.2 omit(Task A.2)
//   .
//
// Anything that is not a keyword, identifier, operator, call or punctuation
// is kept as opaque free text attached to its clause. Every WHEN condition
// carries exactly one structured predicate (a call, an operator chain, or a
// "There Exists" binding); every THEN consequence carries one manifestation
// call.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hedp::dsl {

struct Position {
  int line = 1;
  int column = 1;
  bool operator==(const Position&) const = default;
  auto operator<=>(const Position&) const = default;
};

std::string to_string(Position pos);

enum class TokenKind {
  kKeyword,
  kIdentifier,
  kTupleOpen,
  kTupleClose,
  kOperator,
  kComma,
  kSemicolon,
  kPeriod,
  kFreeText,
  kBraceOpen,
  kBraceClose,
  kParenOpen,
  kParenClose,
  kCallName,
  kNumber,
  kLabel,
  kSubscript,
};

enum class Keyword { kIf, kWhen, kThen, kAnd, kOr };

enum class Operator {
  kIntersect,
  kSubset,
  kSuperset,
  kEmpty,
  kGreater,
  kLess,
  kEqual,
  kNotEqual,
  kFarMore,
  kMinus,
};

/// Canonical Unicode spelling, e.g. "∩".
const char* symbol(Operator op);
/// Registry name the operator stands for, e.g. "intersect".
const char* primitive_name(Operator op);
const char* to_string(TokenKind kind);
const char* to_string(Keyword kw);

struct Token {
  TokenKind kind = TokenKind::kFreeText;
  /// Normalized text: canonical identifier spelling, collapsed free text.
  std::string lexeme;
  Position position;
  std::optional<Keyword> keyword;
  std::optional<Operator> op;
};

// ---------------------------------------------------------------------------
// Errors. Every failure carries the position it was detected at.
// ---------------------------------------------------------------------------

class DslError : public std::runtime_error {
 public:
  DslError(const std::string& what, Position pos);
  Position position() const { return pos_; }

 private:
  Position pos_;
};

class UnknownSymbol : public DslError {
 public:
  UnknownSymbol(const std::string& symbol, Position pos);
};

class UnterminatedTuple : public DslError {
 public:
  explicit UnterminatedTuple(Position pos);
};

class ParseError : public DslError {
 public:
  ParseError(Position pos, std::vector<std::string> expected, const std::string& found);
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

class MissingThen : public DslError {
 public:
  explicit MissingThen(Position pos);
};

class UnboundVariable : public DslError {
 public:
  UnboundVariable(const std::string& name, Position pos);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class ExprKind { kVariable, kNumber, kEmptySet, kCall, kBinary, kChain, kSet, kGroup };

/// Expression over variables, calls and operators. `kBinary` holds set
/// operators (∩, −) and `kChain` relational ones; both store n operands and
/// n-1 operators, evaluated left to right. A chain `a ⊇ b ≠ ∅` means
/// `a ⊇ b` and `b ≠ ∅`.
struct Expr {
  ExprKind kind = ExprKind::kVariable;
  /// Variable name, number text, call name, or the bracket pair of a group.
  std::string name;
  std::vector<Expr> args;
  std::vector<Operator> ops;
  /// Subscript written after a parenthesized group, e.g. "i" for `(..)_i`.
  std::string subscript;

  bool operator==(const Expr&) const = default;
};

struct Fragment {
  bool identifier = false;
  std::string text;
  bool operator==(const Fragment&) const = default;
};
using TupleSlot = std::vector<Fragment>;

enum class PieceKind { kText, kMention, kNote, kExpr };

/// One run inside a clause: prose, an identifier mention (optionally with an
/// attribute tuple), a free-standing `<...>` note, or an expression.
struct Piece {
  PieceKind kind = PieceKind::kText;
  std::string text;
  bool has_tuple = false;
  std::vector<TupleSlot> tuple;
  Expr expr;

  bool operator==(const Piece&) const = default;
};

struct Condition {
  std::vector<Piece> pieces;
  Position position;

  /// The structured predicate: the expression piece, or `exists(V)` for a
  /// "There Exists V" binding. Empty for purely descriptive preconditions.
  std::optional<Expr> predicate() const;
  /// Identifiers declared by an existential binding, with their attributes.
  std::optional<std::string> existential() const;

  /// Position is not part of structural identity.
  bool operator==(const Condition& o) const { return pieces == o.pieces; }
};

enum class NodeKind { kLeaf, kAnd, kOr };

struct ConditionNode {
  NodeKind kind = NodeKind::kLeaf;
  Condition leaf;
  std::vector<ConditionNode> children;

  bool operator==(const ConditionNode&) const = default;
};

struct Variable {
  std::string name;
  /// Entity domain or attribute type, e.g. "Rule", "FeatureSet".
  std::string domain;
  /// For attributes: the entity they belong to.
  std::string owner;
  bool operator==(const Variable&) const = default;
};

struct ScenarioAST {
  std::string scenario_id;
  std::vector<Condition> preconditions;
  ConditionNode trigger_conditions;
  std::vector<Condition> consequences;
  /// Declared variables in order of first declaration.
  std::vector<Variable> free_variables;

  bool operator==(const ScenarioAST&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

std::vector<Token> tokenize(const std::string& source);

/// Parses exactly one scenario. The `[id]` label line is optional.
ScenarioAST parse_scenario(const std::string& source);

/// Parses a whole `.eps` file of zero or more scenarios.
std::vector<ScenarioAST> parse_scenarios(const std::string& source);

/// Canonical text: Unicode operators, one clause per line, terminating
/// period on its own line.
std::string render_scenario(const ScenarioAST& ast);

std::string render_expr(const Expr& e);
std::string render_condition(const Condition& c);

/// Leaf conditions of a trigger tree, in reading order.
std::vector<const Condition*> leaves(const ConditionNode& node);

/// Names of every call and operator primitive referenced anywhere in the
/// WHEN tree and THEN consequences.
std::vector<std::string> referenced_primitives(const ScenarioAST& ast);

/// Domain of an identifier by its spelling: "Rule", "Subtask", "Review",
/// "Relation", "InfoItem", "FeatureSet", "Count", "Ordinal", or "".
std::string infer_domain(const std::string& identifier);

}  // namespace hedp::dsl
