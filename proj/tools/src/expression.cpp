#include "surfsd/cli/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace surfsd::cli {

namespace {
constexpr int kMaxDepth = 64;
}  // namespace

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

    void run() {
        expr();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression \"" + std::string(text_) + "\": " + what + " at column " +
                                  std::to_string(pos_ + 1),
                              pos_);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Op op, double value = 0.0) { out_.code_.push_back({op, value}); }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit(Op::Add);
            } else if (accept('-')) {
                term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (accept('^')) {
            unary();
            emit(Op::Pow);
        }
    }

    void primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "x" || name == "y" || name == "z") {
                emit(name == "x" ? Op::X : name == "y" ? Op::Y : Op::Z);
                out_.constant_ = false;
                return;
            }
            Op fn;
            if (name == "sin") {
                fn = Op::Sin;
            } else if (name == "cos") {
                fn = Op::Cos;
            } else if (name == "exp") {
                fn = Op::Exp;
            } else {
                pos_ = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            if (!accept('(')) {
                fail("expected '(' after " + std::string(name));
            }
            expr();
            if (!accept(')')) {
                fail("missing ')'");
            }
            emit(fn);
            return;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    void number() {
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) {
            fail("malformed number");
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        emit(Op::Push, value);
    }

    std::string_view text_;
    Expression& out_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = std::string(text);
    ExpressionParser(e.text_, e).run();
    int depth = 0;
    for (const Instr& in : e.code_) {
        const bool push = in.op == Op::Push || in.op == Op::X || in.op == Op::Y || in.op == Op::Z;
        const bool binary = in.op == Op::Add || in.op == Op::Sub || in.op == Op::Mul || in.op == Op::Div ||
                            in.op == Op::Pow;
        depth += push ? 1 : binary ? -1 : 0;
        if (depth > kMaxDepth) {
            throw ExpressionError("expression \"" + e.text_ + "\" is nested too deeply", 0);
        }
    }
    return e;
}

double Expression::operator()(const Vec3& p) const {
    double stack[kMaxDepth];
    int top = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Push: stack[top++] = in.value; break;
            case Op::X: stack[top++] = p.x(); break;
            case Op::Y: stack[top++] = p.y(); break;
            case Op::Z: stack[top++] = p.z(); break;
            case Op::Add: --top; stack[top - 1] += stack[top]; break;
            case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::Div: --top; stack[top - 1] /= stack[top]; break;
            case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        }
    }
    return stack[0];
}

ScalarField Expression::as_field() const {
    ScalarField f{[e = *this](const Vec3& p) { return e(p); }, std::nullopt};
    if (constant_) {
        f.constant = (*this)(Vec3::Zero());
    }
    return f;
}

VectorField make_vector_field(const Expression& bx, const Expression& by, const Expression& bz) {
    return {[bx, by, bz](const Vec3& p) { return Vec3(bx(p), by(p), bz(p)); }, true};
}

}  // namespace surfsd::cli
