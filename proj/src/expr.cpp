#include "bspde/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace bspde::expr {

enum class NodeKind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 };
enum class Fn1 { Sin, Cos, Exp, Log, Abs, Sqrt };
enum class Fn2 { Min, Max };

struct Node {
    NodeKind kind;
    std::size_t offset = 0; // byte offset into the source, for diagnostics
    double number = 0.0;
    Ident var = Ident::T;
    Fn1 fn1 = Fn1::Sin;
    Fn2 fn2 = Fn2::Min;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

const Node& Expr::root() const {
    if (!root_) throw LogicError("empty expression");
    return *root_;
}

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Number;
    n->number = v;
    n->offset = off;
    return n;
}

NodePtr make_var(Ident id, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Var;
    n->var = id;
    n->offset = off;
    return n;
}

NodePtr make_unary(NodeKind k, NodePtr a, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->offset = off;
    return n;
}

NodePtr make_binary(NodeKind k, NodePtr a, NodePtr b, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->offset = off;
    return n;
}

struct Parser {
    std::string_view src;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t off) const {
        throw ParseError(msg + " at offset " + std::to_string(off), off);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= src.size();
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    bool consume(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            std::size_t off = pos;
            if (consume('+')) {
                lhs = make_binary(NodeKind::Add, lhs, parse_term(), off);
            } else if (consume('-')) {
                lhs = make_binary(NodeKind::Sub, lhs, parse_term(), off);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            std::size_t off = pos;
            if (consume('*')) {
                lhs = make_binary(NodeKind::Mul, lhs, parse_factor(), off);
            } else if (consume('/')) {
                lhs = make_binary(NodeKind::Div, lhs, parse_factor(), off);
            } else {
                return lhs;
            }
        }
    }

    // '^' binds tighter than unary minus: -x^2 parses as -(x^2).
    NodePtr parse_factor() {
        skip_ws();
        std::size_t off = pos;
        if (consume('-')) return make_unary(NodeKind::Neg, parse_factor(), off);
        NodePtr base = parse_atom();
        skip_ws();
        std::size_t pow_off = pos;
        if (consume('^')) return make_binary(NodeKind::Pow, base, parse_factor(), pow_off);
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression", pos);
        const std::size_t off = pos;
        const char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident_or_call();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!consume(')')) fail("unbalanced parenthesis", off);
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'", off);
    }

    NodePtr parse_number() {
        const std::size_t off = pos;
        std::size_t end = pos;
        while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
        if (end < src.size() && src[end] == '.') {
            ++end;
            while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
        }
        if (end < src.size() && (src[end] == 'e' || src[end] == 'E')) {
            std::size_t exp = end + 1;
            if (exp < src.size() && (src[exp] == '+' || src[exp] == '-')) ++exp;
            if (exp < src.size() && std::isdigit(static_cast<unsigned char>(src[exp]))) {
                ++exp;
                while (exp < src.size() && std::isdigit(static_cast<unsigned char>(src[exp]))) ++exp;
                end = exp;
            }
        }
        double value = 0.0;
        auto [p, ec] = std::from_chars(src.data() + off, src.data() + end, value);
        if (ec != std::errc() || p != src.data() + end) fail("malformed number", off);
        pos = end;
        return make_number(value, off);
    }

    NodePtr parse_ident_or_call() {
        const std::size_t off = pos;
        std::size_t end = pos;
        while (end < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
            ++end;
        const std::string_view name = src.substr(off, end - off);
        pos = end;
        skip_ws();
        if (pos < src.size() && src[pos] == '(') {
            ++pos;
            NodePtr first = parse_expr();
            NodePtr second;
            bool two_args = false;
            if (consume(',')) {
                second = parse_expr();
                two_args = true;
            }
            if (!consume(')')) fail("unbalanced parenthesis in call", off);
            return finish_call(name, off, std::move(first), std::move(second), two_args);
        }
        if (name == "t") return make_var(Ident::T, off);
        if (name == "x") return make_var(Ident::X, off);
        if (name == "u") return make_var(Ident::U, off);
        if (name == "ux") return make_var(Ident::Ux, off);
        if (name == "Z") return make_var(Ident::Z, off);
        if (name == "rint") return make_var(Ident::Rint, off);
        if (name == "pi") return make_var(Ident::Pi, off);
        fail("unknown identifier '" + std::string(name) + "'", off);
    }

    NodePtr finish_call(std::string_view name, std::size_t off, NodePtr a, NodePtr b,
                        bool two_args) {
        static constexpr std::array<std::pair<std::string_view, Fn1>, 6> kUnary = {{
            {"sin", Fn1::Sin}, {"cos", Fn1::Cos}, {"exp", Fn1::Exp},
            {"log", Fn1::Log}, {"abs", Fn1::Abs}, {"sqrt", Fn1::Sqrt},
        }};
        for (const auto& [fname, fn] : kUnary) {
            if (name == fname) {
                if (two_args) fail("'" + std::string(name) + "' takes one argument", off);
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::Call1;
                n->fn1 = fn;
                n->a = std::move(a);
                n->offset = off;
                return n;
            }
        }
        if (name == "min" || name == "max") {
            if (!two_args) fail("'" + std::string(name) + "' takes two arguments", off);
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Call2;
            n->fn2 = (name == "min") ? Fn2::Min : Fn2::Max;
            n->a = std::move(a);
            n->b = std::move(b);
            n->offset = off;
            return n;
        }
        fail("unknown function '" + std::string(name) + "'", off);
    }
};

double eval_node(const Node& n, const Env& env) {
    switch (n.kind) {
        case NodeKind::Number: return n.number;
        case NodeKind::Var:
            switch (n.var) {
                case Ident::T: return env.t;
                case Ident::X: return env.x;
                case Ident::U: return env.u;
                case Ident::Ux: return env.ux;
                case Ident::Z: return env.Z;
                case Ident::Rint: return env.rint;
                case Ident::Pi: return std::numbers::pi;
            }
            throw LogicError("bad identifier tag");
        case NodeKind::Neg: return -eval_node(*n.a, env);
        case NodeKind::Add: return eval_node(*n.a, env) + eval_node(*n.b, env);
        case NodeKind::Sub: return eval_node(*n.a, env) - eval_node(*n.b, env);
        case NodeKind::Mul: return eval_node(*n.a, env) * eval_node(*n.b, env);
        case NodeKind::Div: {
            const double denom = eval_node(*n.b, env);
            if (denom == 0.0)
                throw DriverError("division by zero at offset " + std::to_string(n.offset),
                                  static_cast<long>(n.offset));
            return eval_node(*n.a, env) / denom;
        }
        case NodeKind::Pow: {
            const double base = eval_node(*n.a, env);
            const double exponent = eval_node(*n.b, env);
            const double v = std::pow(base, exponent);
            if (!std::isfinite(v))
                throw DriverError("non-finite power at offset " + std::to_string(n.offset),
                                  static_cast<long>(n.offset));
            return v;
        }
        case NodeKind::Call1: {
            const double a = eval_node(*n.a, env);
            switch (n.fn1) {
                case Fn1::Sin: return std::sin(a);
                case Fn1::Cos: return std::cos(a);
                case Fn1::Exp: return std::exp(a);
                case Fn1::Log:
                    if (a <= 0.0)
                        throw DriverError(
                            "log of non-positive value at offset " + std::to_string(n.offset),
                            static_cast<long>(n.offset));
                    return std::log(a);
                case Fn1::Abs: return std::fabs(a);
                case Fn1::Sqrt:
                    if (a < 0.0)
                        throw DriverError(
                            "sqrt of negative value at offset " + std::to_string(n.offset),
                            static_cast<long>(n.offset));
                    return std::sqrt(a);
            }
            throw LogicError("bad unary function tag");
        }
        case NodeKind::Call2: {
            const double a = eval_node(*n.a, env);
            const double b = eval_node(*n.b, env);
            return n.fn2 == Fn2::Min ? std::min(a, b) : std::max(a, b);
        }
    }
    throw LogicError("bad node kind");
}

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int parent_prec, bool needs_parens_on_tie,
                 std::string& out) {
    const int p = precedence(child);
    const bool parens = p < parent_prec || (p == parent_prec && needs_parens_on_tie);
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number: out += format_number(n.number); return;
        case NodeKind::Var:
            switch (n.var) {
                case Ident::T: out += 't'; return;
                case Ident::X: out += 'x'; return;
                case Ident::U: out += 'u'; return;
                case Ident::Ux: out += "ux"; return;
                case Ident::Z: out += 'Z'; return;
                case Ident::Rint: out += "rint"; return;
                case Ident::Pi: out += "pi"; return;
            }
            return;
        case NodeKind::Neg:
            out += '-';
            print_child(*n.a, 3, false, out);
            return;
        case NodeKind::Add:
        case NodeKind::Sub:
            print_child(*n.a, 1, false, out);
            out += (n.kind == NodeKind::Add ? '+' : '-');
            print_child(*n.b, 1, true, out);
            return;
        case NodeKind::Mul:
        case NodeKind::Div:
            print_child(*n.a, 2, false, out);
            out += (n.kind == NodeKind::Mul ? '*' : '/');
            print_child(*n.b, 2, true, out);
            return;
        case NodeKind::Pow:
            print_child(*n.a, 4, true, out);
            out += '^';
            print_child(*n.b, 4, false, out);
            return;
        case NodeKind::Call1: {
            switch (n.fn1) {
                case Fn1::Sin: out += "sin"; break;
                case Fn1::Cos: out += "cos"; break;
                case Fn1::Exp: out += "exp"; break;
                case Fn1::Log: out += "log"; break;
                case Fn1::Abs: out += "abs"; break;
                case Fn1::Sqrt: out += "sqrt"; break;
            }
            out += '(';
            print_node(*n.a, out);
            out += ')';
            return;
        }
        case NodeKind::Call2:
            out += (n.fn2 == Fn2::Min ? "min" : "max");
            out += '(';
            print_node(*n.a, out);
            out += ',';
            print_node(*n.b, out);
            out += ')';
            return;
    }
}

bool uses_node(const Node& n, Ident id) {
    switch (n.kind) {
        case NodeKind::Number: return false;
        case NodeKind::Var: return n.var == id;
        case NodeKind::Neg:
        case NodeKind::Call1: return uses_node(*n.a, id);
        default: return (n.a && uses_node(*n.a, id)) || (n.b && uses_node(*n.b, id));
    }
}

bool equal_node(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number: return a.number == b.number;
        case NodeKind::Var: return a.var == b.var;
        case NodeKind::Neg: return equal_node(*a.a, *b.a);
        case NodeKind::Call1: return a.fn1 == b.fn1 && equal_node(*a.a, *b.a);
        case NodeKind::Call2: return a.fn2 == b.fn2 && equal_node(*a.a, *b.a) && equal_node(*a.b, *b.b);
        default: return equal_node(*a.a, *b.a) && equal_node(*a.b, *b.b);
    }
}

} // namespace

Expr parse(std::string_view source) {
    Parser parser{source};
    NodePtr root = parser.parse_expr();
    if (!parser.at_end())
        parser.fail(std::string("unexpected character '") + source[parser.pos] + "'", parser.pos);
    return Expr(std::move(root), std::string(source));
}

double eval(const Expr& e, const Env& env) {
    return eval_node(e.root(), env);
}

std::string to_string(const Expr& e) {
    std::string out;
    print_node(e.root(), out);
    return out;
}

bool uses(const Expr& e, Ident id) {
    return uses_node(e.root(), id);
}

bool structurally_equal(const Expr& a, const Expr& b) {
    return equal_node(a.root(), b.root());
}

} // namespace bspde::expr
