#pragma once

#include "surfsd/geometry.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surfsd::cli {

class ExpressionError : public std::runtime_error {
public:
    ExpressionError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Arithmetic expression in x, y, z.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | x | y | z | fn '(' expr ')' | '(' expr ')'
///   fn      := sin | cos | exp
///
/// '^' is right-associative and binds tighter than unary minus, so -x^2 is
/// -(x^2).
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(const Vec3& p) const;
    const std::string& text() const noexcept { return text_; }
    /// True when the expression does not reference x, y or z.
    bool is_constant() const noexcept { return constant_; }

    ScalarField as_field() const;

private:
    enum class Op { Push, X, Y, Z, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
    struct Instr {
        Op op;
        double value = 0.0;
    };

    friend class ExpressionParser;

    std::string text_;
    std::vector<Instr> code_;
    bool constant_ = true;
};

VectorField make_vector_field(const Expression& bx, const Expression& by, const Expression& bz);

}  // namespace surfsd::cli
