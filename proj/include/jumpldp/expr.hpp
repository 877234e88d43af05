#pragma once

#include <memory>
#include <string>
#include <vector>

namespace jumpldp {

// Rate expressions over species concentrations x[name].
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?
//   base   := number | 'x' '[' ident ']' | func '(' expr (',' expr)* ')'
//           | '(' expr ')' | '-' base
//   func   := exp | log | pow | step | min | max
//
// Unary minus binds tighter than '^', so -x[A]^2 is (-x[A])^2.
struct Expr {
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Func { Exp, Log, Pow, Step, Min, Max };

    Kind kind = Kind::Number;
    double value = 0.0;  // Number
    int var = -1;        // Var: species index
    Func func = Func::Exp;
    std::vector<std::shared_ptr<const Expr>> args;
    int line = 1;
    int column = 1;
};

using ExprPtr = std::shared_ptr<const Expr>;

// Parses `text`; species names resolve against `species`. Unknown names and
// syntax errors raise ParseError carrying the position of the offending token.
// `line0`/`col0` offset the reported position when the formula is embedded.
ExprPtr parse_expression(const std::string& text, const std::vector<std::string>& species,
                         int line0 = 1, int col0 = 1);

// Evaluates at concentrations x. Operations producing NaN (0/0, log of a
// negative number, inf-inf, ...) raise DomainError. Infinite intermediates are
// allowed so that exp(-k/x) at x = 0 evaluates to 0.
double evaluate(const Expr& e, const double* x);

// log of evaluate(e, x) for nonnegative-valued expressions, computed
// structurally through products, quotients, powers and exp so that values far
// below the double range (exp(-1/x) near x = 0) keep a finite logarithm.
double evaluate_log(const Expr& e, const double* x);

// Fully parenthesized form that parses back to an identical tree.
std::string print_expression(const Expr& e, const std::vector<std::string>& species);

}  // namespace jumpldp
