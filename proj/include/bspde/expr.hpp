#pragma once

#include "bspde/errors.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace bspde::expr {

// Identifiers available to coefficient/driver expressions. `ux` is the value
// of the spatial gradient of u, `rint` the aggregated jump term.
enum class Ident { T, X, U, Ux, Z, Rint, Pi };

struct Env {
    double t = 0.0;
    double x = 0.0;
    double u = 0.0;
    double ux = 0.0;
    double Z = 0.0;
    double rint = 0.0;
};

struct Node;

// Immutable AST; cheap to copy and safe to share across threads.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const Node> root, std::string source)
        : root_(std::move(root)), source_(std::move(source)) {}

    bool valid() const { return root_ != nullptr; }
    const Node& root() const;
    const std::string& source() const { return source_; }

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

class ParseError : public ConfigError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : ConfigError(msg), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Recursive-descent parser for
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)? ')' | '(' expr ')'
// with '^' right-associative and binding tighter than unary minus.
// Throws ParseError (with byte offset) on lexical errors, unknown
// identifiers or call names, arity errors, and unbalanced parentheses.
Expr parse(std::string_view source);

// Strict evaluation. Domain errors (log/sqrt of a negative, division by
// zero) throw DriverError carrying the offending node's byte offset.
double eval(const Expr& e, const Env& env);

// Minimal-parentheses rendering; parse(to_string(e)) is structurally
// identical to e.
std::string to_string(const Expr& e);

bool uses(const Expr& e, Ident id);
bool structurally_equal(const Expr& a, const Expr& b);

} // namespace bspde::expr
