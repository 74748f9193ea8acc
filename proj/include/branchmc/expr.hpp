#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "branchmc/errors.hpp"

namespace branchmc {

// ---------------------------------------------------------------------------
// Expression language for initial/boundary data fields.
//
// Grammar (standard precedence, ^ right-associative and binding tighter than
// unary minus, so -x^2 == -(x^2)):
//
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 't' | 'pi' | 'e' | fn '(' sum (',' sum)* ')'
//            | '(' sum ')'
//
// Functions: exp log sin cos tanh abs sqrt heaviside (unary), min max (binary).
// heaviside(0) = 0.5.
// ---------------------------------------------------------------------------

enum class ExprOp : std::uint8_t {
    Number, VarX, VarT,
    Neg, Add, Sub, Mul, Div, Pow,
    Exp, Log, Sin, Cos, Tanh, Abs, Sqrt, Heaviside,
    Min, Max,
};

struct ExprNode {
    ExprOp op = ExprOp::Number;
    double value = 0.0;  // Number only
    std::vector<std::shared_ptr<const ExprNode>> args;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace expr_detail {

struct FnInfo {
    std::string_view name;
    ExprOp op;
    int arity;
};

inline constexpr std::array<FnInfo, 10> kFunctions = {{
    {"exp", ExprOp::Exp, 1},
    {"log", ExprOp::Log, 1},
    {"sin", ExprOp::Sin, 1},
    {"cos", ExprOp::Cos, 1},
    {"tanh", ExprOp::Tanh, 1},
    {"abs", ExprOp::Abs, 1},
    {"sqrt", ExprOp::Sqrt, 1},
    {"heaviside", ExprOp::Heaviside, 1},
    {"min", ExprOp::Min, 2},
    {"max", ExprOp::Max, 2},
}};

inline const FnInfo* find_function(std::string_view name) {
    for (const auto& fn : kFunctions)
        if (fn.name == name) return &fn;
    return nullptr;
}

enum class Tok : std::uint8_t {
    Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End
};

struct Token {
    Tok kind;
    std::size_t offset;
    std::string_view text;
    double value = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= src_.size()) {
            cur_ = {Tok::End, start, {}, 0.0};
            return;
        }
        const char c = src_[pos_];
        switch (c) {
            case '+': cur_ = {Tok::Plus, start, src_.substr(start, 1)}; ++pos_; return;
            case '-': cur_ = {Tok::Minus, start, src_.substr(start, 1)}; ++pos_; return;
            case '*': cur_ = {Tok::Star, start, src_.substr(start, 1)}; ++pos_; return;
            case '/': cur_ = {Tok::Slash, start, src_.substr(start, 1)}; ++pos_; return;
            case '^': cur_ = {Tok::Caret, start, src_.substr(start, 1)}; ++pos_; return;
            case '(': cur_ = {Tok::LParen, start, src_.substr(start, 1)}; ++pos_; return;
            case ')': cur_ = {Tok::RParen, start, src_.substr(start, 1)}; ++pos_; return;
            case ',': cur_ = {Tok::Comma, start, src_.substr(start, 1)}; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number(start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            cur_ = {Tok::Ident, start, src_.substr(start, pos_ - start)};
            return;
        }
        throw parse_error("syntax error at offset " + std::to_string(start) +
                              ": unexpected character '" + std::string(1, c) + "'",
                          start);
    }

    void lex_number(std::size_t start) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // "2e" is the number 2 followed by identifier e
            }
        }
        const std::string_view text = src_.substr(start, pos_ - start);
        double value = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw parse_error("syntax error at offset " + std::to_string(start) +
                                  ": malformed number '" + std::string(text) + "'",
                              start);
        cur_ = {Tok::Number, start, text, value};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token cur_{Tok::End, 0, {}, 0.0};
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        expect(Tok::End, "end of input");
        return e;
    }

    bool uses_x() const { return uses_x_; }
    bool uses_t() const { return uses_t_; }

private:
    [[noreturn]] void fail(const Token& tok, const std::string& expected) {
        throw parse_error("syntax error at offset " + std::to_string(tok.offset) + ": expected " +
                              expected,
                          tok.offset);
    }

    Token expect(Tok kind, const std::string& what) {
        if (lex_.peek().kind != kind) fail(lex_.peek(), what);
        return lex_.take();
    }

    static ExprPtr make(ExprOp op, std::vector<ExprPtr> args, double value = 0.0) {
        auto node = std::make_shared<ExprNode>();
        node->op = op;
        node->value = value;
        node->args = std::move(args);
        return node;
    }

    ExprPtr parse_sum() {
        ExprPtr left = parse_product();
        while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
            const Tok op = lex_.take().kind;
            ExprPtr right = parse_product();
            left = make(op == Tok::Plus ? ExprOp::Add : ExprOp::Sub, {left, right});
        }
        return left;
    }

    ExprPtr parse_product() {
        ExprPtr left = parse_unary();
        while (lex_.peek().kind == Tok::Star || lex_.peek().kind == Tok::Slash) {
            const Tok op = lex_.take().kind;
            ExprPtr right = parse_unary();
            left = make(op == Tok::Star ? ExprOp::Mul : ExprOp::Div, {left, right});
        }
        return left;
    }

    ExprPtr parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            return make(ExprOp::Neg, {parse_unary()});
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            // right-associative; exponent may carry a unary minus (x^-2)
            return make(ExprOp::Pow, {base, parse_unary()});
        }
        return base;
    }

    ExprPtr parse_primary() {
        const Token& tok = lex_.peek();
        switch (tok.kind) {
            case Tok::Number: {
                Token t = lex_.take();
                return make(ExprOp::Number, {}, t.value);
            }
            case Tok::LParen: {
                lex_.take();
                ExprPtr e = parse_sum();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident:
                return parse_ident();
            default:
                fail(tok, "a number, variable, function call, or '('");
        }
    }

    ExprPtr parse_ident() {
        Token t = lex_.take();
        if (t.text == "x") {
            uses_x_ = true;
            return make(ExprOp::VarX, {});
        }
        if (t.text == "t") {
            uses_t_ = true;
            return make(ExprOp::VarT, {});
        }
        if (t.text == "pi") return make(ExprOp::Number, {}, 3.14159265358979323846);
        if (t.text == "e") return make(ExprOp::Number, {}, 2.71828182845904523536);
        const FnInfo* fn = find_function(t.text);
        if (fn == nullptr)
            throw parse_error("unknown identifier '" + std::string(t.text) + "' at offset " +
                                  std::to_string(t.offset),
                              t.offset);
        expect(Tok::LParen, "'(' after function name");
        std::vector<ExprPtr> args;
        args.push_back(parse_sum());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            args.push_back(parse_sum());
        }
        expect(Tok::RParen, "')'");
        if (static_cast<int>(args.size()) != fn->arity)
            throw parse_error("function '" + std::string(t.text) + "' takes " +
                                  std::to_string(fn->arity) + " argument(s), got " +
                                  std::to_string(args.size()) + " at offset " +
                                  std::to_string(t.offset),
                              t.offset);
        return make(fn->op, std::move(args));
    }

    Lexer lex_;
    bool uses_x_ = false;
    bool uses_t_ = false;
};

}  // namespace expr_detail

inline double heaviside(double v) { return v < 0.0 ? 0.0 : (v > 0.0 ? 1.0 : 0.5); }

/// Reference interpreter: direct recursion over the tree.
inline double eval_tree(const ExprNode& node, double x, double t) {
    switch (node.op) {
        case ExprOp::Number: return node.value;
        case ExprOp::VarX: return x;
        case ExprOp::VarT: return t;
        case ExprOp::Neg: return -eval_tree(*node.args[0], x, t);
        case ExprOp::Add: return eval_tree(*node.args[0], x, t) + eval_tree(*node.args[1], x, t);
        case ExprOp::Sub: return eval_tree(*node.args[0], x, t) - eval_tree(*node.args[1], x, t);
        case ExprOp::Mul: return eval_tree(*node.args[0], x, t) * eval_tree(*node.args[1], x, t);
        case ExprOp::Div: return eval_tree(*node.args[0], x, t) / eval_tree(*node.args[1], x, t);
        case ExprOp::Pow:
            return std::pow(eval_tree(*node.args[0], x, t), eval_tree(*node.args[1], x, t));
        case ExprOp::Exp: return std::exp(eval_tree(*node.args[0], x, t));
        case ExprOp::Log: return std::log(eval_tree(*node.args[0], x, t));
        case ExprOp::Sin: return std::sin(eval_tree(*node.args[0], x, t));
        case ExprOp::Cos: return std::cos(eval_tree(*node.args[0], x, t));
        case ExprOp::Tanh: return std::tanh(eval_tree(*node.args[0], x, t));
        case ExprOp::Abs: return std::fabs(eval_tree(*node.args[0], x, t));
        case ExprOp::Sqrt: return std::sqrt(eval_tree(*node.args[0], x, t));
        case ExprOp::Heaviside: return heaviside(eval_tree(*node.args[0], x, t));
        case ExprOp::Min:
            return std::fmin(eval_tree(*node.args[0], x, t), eval_tree(*node.args[1], x, t));
        case ExprOp::Max:
            return std::fmax(eval_tree(*node.args[0], x, t), eval_tree(*node.args[1], x, t));
    }
    return 0.0;
}

inline bool tree_equal(const ExprNode& a, const ExprNode& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == ExprOp::Number &&
        !(a.value == b.value || (std::isnan(a.value) && std::isnan(b.value))))
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!tree_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

namespace expr_detail {

inline int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Add:
        case ExprOp::Sub: return 1;
        case ExprOp::Mul:
        case ExprOp::Div: return 2;
        case ExprOp::Neg: return 3;
        case ExprOp::Pow: return 4;
        default: return 5;  // atoms and calls never need parentheses
    }
}

inline void print_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

inline void print_node(std::string& out, const ExprNode& n);

inline void print_child(std::string& out, const ExprNode& child, bool need_parens) {
    if (need_parens) {
        out += '(';
        print_node(out, child);
        out += ')';
    } else {
        print_node(out, child);
    }
}

inline void print_node(std::string& out, const ExprNode& n) {
    const int p = precedence(n.op);
    switch (n.op) {
        case ExprOp::Number: print_number(out, n.value); return;
        case ExprOp::VarX: out += 'x'; return;
        case ExprOp::VarT: out += 't'; return;
        case ExprOp::Neg:
            out += '-';
            print_child(out, *n.args[0], precedence(n.args[0]->op) < p);
            return;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div: {
            const char* sym = n.op == ExprOp::Add   ? "+"
                              : n.op == ExprOp::Sub ? "-"
                              : n.op == ExprOp::Mul ? "*"
                                                    : "/";
            print_child(out, *n.args[0], precedence(n.args[0]->op) < p);
            out += sym;
            // left-associative: right child at equal precedence needs parens
            print_child(out, *n.args[1], precedence(n.args[1]->op) <= p);
            return;
        }
        case ExprOp::Pow:
            // right-associative, and the base may not be a unary minus
            print_child(out, *n.args[0], precedence(n.args[0]->op) <= p);
            out += '^';
            print_child(out, *n.args[1], precedence(n.args[1]->op) < p && n.args[1]->op != ExprOp::Neg);
            return;
        default: {
            for (const auto& fn : kFunctions) {
                if (fn.op == n.op) {
                    out += fn.name;
                    break;
                }
            }
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                print_node(out, *n.args[i]);
            }
            out += ')';
            return;
        }
    }
}

// Postfix program for the hot evaluation path (one switch per node, no
// recursion, fixed-size stack).
struct Instr {
    ExprOp op;
    double value;
};

inline void compile_node(const ExprNode& n, std::vector<Instr>& prog) {
    for (const auto& a : n.args) compile_node(*a, prog);
    prog.push_back({n.op, n.value});
}

inline int stack_need(const ExprNode& n) {
    // depth needed to evaluate the postfix form of this subtree
    if (n.args.empty()) return 1;
    int need = 0;
    for (std::size_t i = 0; i < n.args.size(); ++i)
        need = std::max(need, static_cast<int>(i) + stack_need(*n.args[i]));
    return std::max(need, static_cast<int>(n.args.size()));
}

}  // namespace expr_detail

/// A parsed, immutable scalar field g(x) or f(x,t).
class ScalarField {
public:
    ScalarField() = default;

    static ScalarField parse(std::string source);

    const std::string& source() const { return source_; }
    const ExprPtr& tree() const { return root_; }
    bool uses_t() const { return uses_t_; }

    /// Evaluate a space-only field.
    double operator()(double x) const {
        if (uses_t_)
            throw argument_error("field '" + source_ + "' depends on t; a time value is required");
        return run(x, 0.0);
    }

    /// Evaluate with both variables bound (t is ignored by space-only fields).
    double operator()(double x, double t) const { return run(x, t); }

    std::string pretty_print() const {
        std::string out;
        expr_detail::print_node(out, *root_);
        return out;
    }

private:
    double run(double x, double t) const {
        double stack[kMaxStack];
        int sp = 0;
        for (const auto& ins : prog_) {
            switch (ins.op) {
                case ExprOp::Number: stack[sp++] = ins.value; break;
                case ExprOp::VarX: stack[sp++] = x; break;
                case ExprOp::VarT: stack[sp++] = t; break;
                case ExprOp::Neg: stack[sp - 1] = -stack[sp - 1]; break;
                case ExprOp::Add: --sp; stack[sp - 1] += stack[sp]; break;
                case ExprOp::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
                case ExprOp::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
                case ExprOp::Div: --sp; stack[sp - 1] /= stack[sp]; break;
                case ExprOp::Pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
                case ExprOp::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
                case ExprOp::Log: stack[sp - 1] = std::log(stack[sp - 1]); break;
                case ExprOp::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
                case ExprOp::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
                case ExprOp::Tanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
                case ExprOp::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
                case ExprOp::Sqrt: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
                case ExprOp::Heaviside: stack[sp - 1] = heaviside(stack[sp - 1]); break;
                case ExprOp::Min: --sp; stack[sp - 1] = std::fmin(stack[sp - 1], stack[sp]); break;
                case ExprOp::Max: --sp; stack[sp - 1] = std::fmax(stack[sp - 1], stack[sp]); break;
            }
        }
        return stack[0];
    }

    static constexpr int kMaxStack = 256;

    std::string source_;
    ExprPtr root_;
    std::vector<expr_detail::Instr> prog_;
    bool uses_t_ = false;
};

inline ScalarField ScalarField::parse(std::string source) {
    expr_detail::Parser parser(source);
    ScalarField field;
    field.root_ = parser.parse();
    field.uses_t_ = parser.uses_t();
    field.source_ = std::move(source);
    if (expr_detail::stack_need(*field.root_) > kMaxStack)
        throw parse_error("expression too deeply nested", 0);
    expr_detail::compile_node(*field.root_, field.prog_);
    return field;
}

/// Convenience: parse a field expected to be a function of x only.
inline ScalarField parse_field(const std::string& source) { return ScalarField::parse(source); }

}  // namespace branchmc
