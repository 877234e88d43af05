#include "jumpldp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "jumpldp/errors.hpp"

namespace jumpldp {
namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& species, int line0, int col0)
        : s_(text), species_(species), line_(line0), col_(col0) {}

    ExprPtr parse() {
        skip_ws();
        if (at_end()) fail("empty expression");
        auto e = expr();
        skip_ws();
        if (!at_end()) fail(std::string("unexpected character '") + s_[pos_] + "'");
        return e;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& species_;
    size_t pos_ = 0;
    int line_;
    int col_;

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    std::shared_ptr<Expr> node(Expr::Kind k) const {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->line = line_;
        e->column = col_;
        return e;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) {
            if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "'");
        }
        advance();
    }

    ExprPtr expr() {
        auto lhs = term();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            auto n = node(c == '+' ? Expr::Kind::Add : Expr::Kind::Sub);
            advance();
            n->args = {lhs, term()};
            lhs = n;
        }
    }

    ExprPtr term() {
        auto lhs = factor();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            auto n = node(c == '*' ? Expr::Kind::Mul : Expr::Kind::Div);
            advance();
            n->args = {lhs, factor()};
            lhs = n;
        }
    }

    // Unary minus binds looser than '^': -2^2 = -4.
    ExprPtr factor() {
        skip_ws();
        if (peek() == '-') {
            auto n = node(Expr::Kind::Neg);
            advance();
            n->args = {factor()};
            return n;
        }
        auto b = base();
        skip_ws();
        if (peek() != '^') return b;
        auto n = node(Expr::Kind::Pow);
        advance();
        n->args = {b, factor()};
        return n;
    }

    std::string ident() {
        std::string out;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
            out += peek();
            advance();
        }
        return out;
    }

    ExprPtr base() {
        skip_ws();
        if (at_end()) fail("unexpected end of input");
        char c = peek();
        if (c == '(') {
            advance();
            auto e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            int line = line_, col = col_;
            std::string name = ident();
            skip_ws();
            if (name == "x" && peek() == '[') return variable(line, col);
            return call(name, line, col);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr number() {
        auto n = node(Expr::Kind::Number);
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        size_t len = static_cast<size_t>(end - begin);
        for (size_t i = 0; i < len; ++i) advance();
        n->value = v;
        return n;
    }

    ExprPtr variable(int line, int col) {
        advance();  // '['
        skip_ws();
        int vline = line_, vcol = col_;
        std::string name;
        while (!at_end() && peek() != ']' && !std::isspace(static_cast<unsigned char>(peek()))) {
            name += peek();
            advance();
        }
        expect(']');
        if (name.empty()) throw ParseError("empty species name", vline, vcol);
        for (size_t i = 0; i < species_.size(); ++i) {
            if (species_[i] == name) {
                auto n = std::make_shared<Expr>();
                n->kind = Expr::Kind::Var;
                n->var = static_cast<int>(i);
                n->line = line;
                n->column = col;
                return n;
            }
        }
        throw ParseError("unknown species '" + name + "'", vline, vcol);
    }

    ExprPtr call(const std::string& name, int line, int col) {
        Expr::Func f;
        size_t arity_min = 1, arity_max = 1;
        if (name == "exp") {
            f = Expr::Func::Exp;
        } else if (name == "log") {
            f = Expr::Func::Log;
        } else if (name == "step") {
            f = Expr::Func::Step;
        } else if (name == "pow") {
            f = Expr::Func::Pow;
            arity_min = arity_max = 2;
        } else if (name == "min" || name == "max") {
            f = name == "min" ? Expr::Func::Min : Expr::Func::Max;
            arity_max = std::numeric_limits<size_t>::max();
        } else {
            throw ParseError("unknown function '" + name + "'", line, col);
        }
        auto n = std::make_shared<Expr>();
        n->kind = Expr::Kind::Call;
        n->func = f;
        n->line = line;
        n->column = col;
        expect('(');
        n->args.push_back(expr());
        for (;;) {
            skip_ws();
            if (peek() == ',') {
                advance();
                n->args.push_back(expr());
                continue;
            }
            break;
        }
        expect(')');
        if (n->args.size() < arity_min || n->args.size() > arity_max)
            throw ParseError("wrong number of arguments to '" + name + "'", line, col);
        return n;
    }
};

[[noreturn]] void domain_fail(const Expr& e, const std::string& what) {
    throw DomainError("domain error: " + what + " at line " + std::to_string(e.line) +
                      ", column " + std::to_string(e.column));
}

double checked(const Expr& e, double v, const char* what) {
    if (std::isnan(v)) domain_fail(e, what);
    return v;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExprPtr parse_expression(const std::string& text, const std::vector<std::string>& species,
                         int line0, int col0) {
    return Parser(text, species, line0, col0).parse();
}

double evaluate(const Expr& e, const double* x) {
    using K = Expr::Kind;
    switch (e.kind) {
        case K::Number:
            return e.value;
        case K::Var:
            return x[e.var];
        case K::Neg:
            return -evaluate(*e.args[0], x);
        case K::Add:
            return checked(e, evaluate(*e.args[0], x) + evaluate(*e.args[1], x), "undefined sum");
        case K::Sub:
            return checked(e, evaluate(*e.args[0], x) - evaluate(*e.args[1], x),
                           "undefined difference");
        case K::Mul:
            return checked(e, evaluate(*e.args[0], x) * evaluate(*e.args[1], x),
                           "undefined product");
        case K::Div: {
            double a = evaluate(*e.args[0], x);
            double b = evaluate(*e.args[1], x);
            return checked(e, a / b, "undefined quotient");
        }
        case K::Pow:
            return checked(e, std::pow(evaluate(*e.args[0], x), evaluate(*e.args[1], x)),
                           "undefined power");
        case K::Call:
            break;
    }
    using F = Expr::Func;
    switch (e.func) {
        case F::Exp:
            return checked(e, std::exp(evaluate(*e.args[0], x)), "undefined exp");
        case F::Log: {
            double a = evaluate(*e.args[0], x);
            if (a < 0) domain_fail(e, "log of a negative number");
            return checked(e, std::log(a), "undefined log");
        }
        case F::Pow:
            return checked(e, std::pow(evaluate(*e.args[0], x), evaluate(*e.args[1], x)),
                           "undefined power");
        case F::Step:
            return evaluate(*e.args[0], x) >= 0.0 ? 1.0 : 0.0;
        case F::Min:
        case F::Max: {
            double best = evaluate(*e.args[0], x);
            for (size_t i = 1; i < e.args.size(); ++i) {
                double a = evaluate(*e.args[i], x);
                best = e.func == F::Min ? std::min(best, a) : std::max(best, a);
            }
            return best;
        }
    }
    return 0.0;
}

namespace {

double plain_log(const Expr& e, const double* x) {
    double v = evaluate(e, x);
    if (v < 0) domain_fail(e, "logarithm of a negative rate");
    return std::log(v);
}

}  // namespace

double evaluate_log(const Expr& e, const double* x) {
    using K = Expr::Kind;
    try {
        switch (e.kind) {
            case K::Mul: {
                double a = evaluate_log(*e.args[0], x), b = evaluate_log(*e.args[1], x);
                double s = a + b;
                return std::isnan(s) ? plain_log(e, x) : s;
            }
            case K::Div: {
                double a = evaluate_log(*e.args[0], x), b = evaluate_log(*e.args[1], x);
                double s = a - b;
                return std::isnan(s) ? plain_log(e, x) : s;
            }
            case K::Pow: {
                double p = evaluate(*e.args[1], x);
                if (p == 0.0) return 0.0;
                double s = p * evaluate_log(*e.args[0], x);
                return std::isnan(s) ? plain_log(e, x) : s;
            }
            case K::Call:
                if (e.func == Expr::Func::Exp) return evaluate(*e.args[0], x);
                if (e.func == Expr::Func::Pow) {
                    double p = evaluate(*e.args[1], x);
                    if (p == 0.0) return 0.0;
                    double s = p * evaluate_log(*e.args[0], x);
                    return std::isnan(s) ? plain_log(e, x) : s;
                }
                if (e.func == Expr::Func::Min || e.func == Expr::Func::Max) {
                    double best = evaluate_log(*e.args[0], x);
                    for (size_t i = 1; i < e.args.size(); ++i) {
                        double a = evaluate_log(*e.args[i], x);
                        best = e.func == Expr::Func::Min ? std::min(best, a) : std::max(best, a);
                    }
                    return best;
                }
                return plain_log(e, x);
            default:
                return plain_log(e, x);
        }
    } catch (const DomainError&) {
        return plain_log(e, x);
    }
}

std::string print_expression(const Expr& e, const std::vector<std::string>& species) {
    using K = Expr::Kind;
    auto bin = [&](const char* op) {
        return "(" + print_expression(*e.args[0], species) + op +
               print_expression(*e.args[1], species) + ")";
    };
    switch (e.kind) {
        case K::Number:
            return fmt17(e.value);
        case K::Var:
            return "x[" + species[e.var] + "]";
        case K::Neg:
            return "(-" + print_expression(*e.args[0], species) + ")";
        case K::Add:
            return bin(" + ");
        case K::Sub:
            return bin(" - ");
        case K::Mul:
            return bin(" * ");
        case K::Div:
            return bin(" / ");
        case K::Pow:
            return bin(" ^ ");
        case K::Call:
            break;
    }
    static const char* names[] = {"exp", "log", "pow", "step", "min", "max"};
    std::string out = names[static_cast<int>(e.func)];
    out += "(";
    for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += print_expression(*e.args[i], species);
    }
    return out + ")";
}

}  // namespace jumpldp
