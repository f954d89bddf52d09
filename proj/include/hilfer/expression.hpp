#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hilfer/error.hpp"

namespace hilfer {

/**
 * Expression: a compiled f(t, y) from a small arithmetic grammar
 *
 *   expr   := term (('+' | '-') term)*
 *   term   := unary (('*' | '/') unary)*
 *   unary  := '-' unary | power
 *   power  := atom ('^' unary)?
 *   atom   := number | 't' | 'y' | func '(' expr ')' | '(' expr ')'
 *   func   := exp | sin | cos
 *
 * The unicode operators ×, ÷ and − are accepted as aliases. The tree is
 * immutable after parsing, so evaluation is re-entrant.
 */
class Expression {
public:
    static constexpr int kMaxDepth = 64;

    explicit Expression(std::string text) : text_(std::move(text)) {
        Parser p{normalize(text_), 0, 0};
        root_ = p.parse_expr();
        p.skip_space();
        if (p.pos != p.src.size()) p.fail("unexpected trailing input");
    }

    const std::string& text() const { return text_; }

    double operator()(double t, double y) const { return eval(*root_, t, y); }

private:
    enum class Kind { Number, VarT, VarY, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos };

    struct Node {
        Kind kind;
        double value = 0.0;
        std::unique_ptr<Node> lhs;
        std::unique_ptr<Node> rhs;
    };
    using NodePtr = std::unique_ptr<Node>;

    static NodePtr leaf(Kind k, double v = 0.0) { return NodePtr(new Node{k, v, nullptr, nullptr}); }
    static NodePtr unary(Kind k, NodePtr a) { return NodePtr(new Node{k, 0.0, std::move(a), nullptr}); }
    static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
        return NodePtr(new Node{k, 0.0, std::move(a), std::move(b)});
    }

    static std::string normalize(std::string_view s) {
        std::string out;
        for (std::size_t i = 0; i < s.size();) {
            auto starts = [&](std::string_view u) { return s.substr(i, u.size()) == u; };
            if (starts("×")) { out += '*'; i += 2; }
            else if (starts("÷")) { out += '/'; i += 2; }
            else if (starts("−")) { out += '-'; i += 3; }
            else { out += s[i]; ++i; }
        }
        return out;
    }

    struct Parser {
        std::string src;
        std::size_t pos;
        int depth;

        [[noreturn]] void fail(const std::string& what) const {
            throw Error(ErrorCode::ConfigError,
                        "expression: " + what + " at column " + std::to_string(pos + 1));
        }
        void skip_space() {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_space();
            if (pos < src.size() && src[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void enter() {
            if (++depth > kMaxDepth) fail("nesting too deep");
        }

        NodePtr parse_expr() {
            enter();
            NodePtr n = parse_term();
            for (;;) {
                if (accept('+')) n = binary(Kind::Add, std::move(n), parse_term());
                else if (accept('-')) n = binary(Kind::Sub, std::move(n), parse_term());
                else break;
            }
            --depth;
            return n;
        }
        NodePtr parse_term() {
            NodePtr n = parse_unary();
            for (;;) {
                if (accept('*')) n = binary(Kind::Mul, std::move(n), parse_unary());
                else if (accept('/')) n = binary(Kind::Div, std::move(n), parse_unary());
                else break;
            }
            return n;
        }
        NodePtr parse_unary() {
            if (accept('-')) {
                enter();
                NodePtr n = unary(Kind::Neg, parse_unary());
                --depth;
                return n;
            }
            return parse_power();
        }
        NodePtr parse_power() {
            NodePtr base = parse_atom();
            if (accept('^')) {
                enter();
                NodePtr n = binary(Kind::Pow, std::move(base), parse_unary());
                --depth;
                return n;
            }
            return base;
        }
        NodePtr parse_atom() {
            skip_space();
            if (pos >= src.size()) fail("unexpected end of input");
            const char c = src[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = src.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                return leaf(Kind::Number, v);
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
                const std::string name = src.substr(start, pos - start);
                if (name == "t") return leaf(Kind::VarT);
                if (name == "y") return leaf(Kind::VarY);
                Kind k;
                if (name == "exp") k = Kind::Exp;
                else if (name == "sin") k = Kind::Sin;
                else if (name == "cos") k = Kind::Cos;
                else {
                    pos = start;
                    fail("unknown identifier '" + name + "'");
                }
                if (!accept('(')) fail("expected '(' after " + name);
                NodePtr arg = parse_expr();
                if (!accept(')')) fail("expected ')'");
                return unary(k, std::move(arg));
            }
            if (accept('(')) {
                NodePtr n = parse_expr();
                if (!accept(')')) fail("expected ')'");
                return n;
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };

    static double eval(const Node& n, double t, double y) {
        switch (n.kind) {
            case Kind::Number: return n.value;
            case Kind::VarT: return t;
            case Kind::VarY: return y;
            case Kind::Add: return eval(*n.lhs, t, y) + eval(*n.rhs, t, y);
            case Kind::Sub: return eval(*n.lhs, t, y) - eval(*n.rhs, t, y);
            case Kind::Mul: return eval(*n.lhs, t, y) * eval(*n.rhs, t, y);
            case Kind::Div: return eval(*n.lhs, t, y) / eval(*n.rhs, t, y);
            case Kind::Pow: return std::pow(eval(*n.lhs, t, y), eval(*n.rhs, t, y));
            case Kind::Neg: return -eval(*n.lhs, t, y);
            case Kind::Exp: return std::exp(eval(*n.lhs, t, y));
            case Kind::Sin: return std::sin(eval(*n.lhs, t, y));
            case Kind::Cos: return std::cos(eval(*n.lhs, t, y));
        }
        return std::nan("");
    }

    std::string text_;
    NodePtr root_;
};

}  // namespace hilfer
