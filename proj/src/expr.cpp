#include "congruence/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace congruence {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::optional<double> fold_unary(UnaryOp op, double x) {
    switch (op) {
        case UnaryOp::Neg: return -x;
        case UnaryOp::Sin: return std::sin(x);
        case UnaryOp::Cos: return std::cos(x);
        case UnaryOp::Sinh: return std::sinh(x);
        case UnaryOp::Cosh: return std::cosh(x);
        case UnaryOp::Tanh: return std::tanh(x);
        case UnaryOp::Exp: return std::exp(x);
        case UnaryOp::Log:
            if (x <= 0.0) return std::nullopt;
            return std::log(x);
        case UnaryOp::Sqrt:
            if (x < 0.0) return std::nullopt;
            return std::sqrt(x);
    }
    return std::nullopt;
}

}  // namespace

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
    }
    return "?";
}

Expr Expr::constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = v;
    return Expr(std::move(n));
}

Expr Expr::variable(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->var_index = index;
    n->var_name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, const Expr& e) {
    if (e.is_constant()) {
        if (auto v = fold_unary(op, e.node().value)) return constant(*v);
    }
    if (op == UnaryOp::Neg && e.node().kind == Kind::Unary &&
        e.node().uop == UnaryOp::Neg)
        return Expr(e.node().a);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Unary;
    n->uop = op;
    n->a = e.node_;
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& l, const Expr& r) {
    if (l.is_constant() && r.is_constant()) {
        const double a = l.node().value, b = r.node().value;
        switch (op) {
            case BinaryOp::Add: return constant(a + b);
            case BinaryOp::Sub: return constant(a - b);
            case BinaryOp::Mul: return constant(a * b);
            case BinaryOp::Div:
                if (b != 0.0) return constant(a / b);
                break;  // keep the node; evaluation reports the error
        }
    }
    switch (op) {
        case BinaryOp::Add:
            if (l.is_constant(0.0)) return r;
            if (r.is_constant(0.0)) return l;
            break;
        case BinaryOp::Sub:
            if (r.is_constant(0.0)) return l;
            if (l.is_constant(0.0)) return unary(UnaryOp::Neg, r);
            break;
        case BinaryOp::Mul:
            if (l.is_constant(0.0) || r.is_constant(0.0)) return constant(0.0);
            if (l.is_constant(1.0)) return r;
            if (r.is_constant(1.0)) return l;
            if (l.is_constant(-1.0)) return unary(UnaryOp::Neg, r);
            if (r.is_constant(-1.0)) return unary(UnaryOp::Neg, l);
            break;
        case BinaryOp::Div:
            if (r.is_constant(1.0)) return l;
            if (r.is_constant(-1.0)) return unary(UnaryOp::Neg, l);
            break;
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->bop = op;
    n->a = l.node_;
    n->b = r.node_;
    return Expr(std::move(n));
}

Expr Expr::pow(const Expr& base, long long exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant())
        return constant(std::pow(base.node().value, static_cast<double>(exponent)));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->exponent = exponent;
    n->a = base.node_;
    return Expr(std::move(n));
}

double Expr::evaluate(std::span<const double> env) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Variable:
            if (n.var_index < 0 || static_cast<std::size_t>(n.var_index) >= env.size())
                throw GeometryError("unbound variable " + n.var_name);
            return env[static_cast<std::size_t>(n.var_index)];
        case Kind::Unary: {
            const double x = Expr(n.a).evaluate(env);
            if (n.uop == UnaryOp::Log && x <= 0.0)
                throw EvalDomainError("log of nonpositive value", to_string());
            if (n.uop == UnaryOp::Sqrt && x < 0.0)
                throw EvalDomainError("sqrt of negative value", to_string());
            return *fold_unary(n.uop, x);
        }
        case Kind::Binary: {
            const double a = Expr(n.a).evaluate(env);
            const double b = Expr(n.b).evaluate(env);
            switch (n.bop) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalDomainError("division by zero", to_string());
                    return a / b;
            }
            return 0.0;
        }
        case Kind::Pow: {
            const double a = Expr(n.a).evaluate(env);
            if (a == 0.0 && n.exponent < 0)
                throw EvalDomainError("zero raised to negative power", to_string());
            return std::pow(a, static_cast<double>(n.exponent));
        }
    }
    return 0.0;
}

Expr Expr::differentiate(int var) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Constant: return constant(0.0);
        case Kind::Variable: return constant(n.var_index == var ? 1.0 : 0.0);
        case Kind::Unary: {
            const Expr e(n.a);
            const Expr de = e.differentiate(var);
            switch (n.uop) {
                case UnaryOp::Neg: return unary(UnaryOp::Neg, de);
                case UnaryOp::Sin: return mul(unary(UnaryOp::Cos, e), de);
                case UnaryOp::Cos:
                    return unary(UnaryOp::Neg, mul(unary(UnaryOp::Sin, e), de));
                case UnaryOp::Sinh: return mul(unary(UnaryOp::Cosh, e), de);
                case UnaryOp::Cosh: return mul(unary(UnaryOp::Sinh, e), de);
                case UnaryOp::Tanh:
                    return mul(sub(constant(1.0), pow(unary(UnaryOp::Tanh, e), 2)), de);
                case UnaryOp::Exp: return mul(unary(UnaryOp::Exp, e), de);
                case UnaryOp::Log: return div(de, e);
                case UnaryOp::Sqrt:
                    return div(de, mul(constant(2.0), unary(UnaryOp::Sqrt, e)));
            }
            return constant(0.0);
        }
        case Kind::Binary: {
            const Expr l(n.a), r(n.b);
            const Expr dl = l.differentiate(var), dr = r.differentiate(var);
            switch (n.bop) {
                case BinaryOp::Add: return add(dl, dr);
                case BinaryOp::Sub: return sub(dl, dr);
                case BinaryOp::Mul: return add(mul(dl, r), mul(l, dr));
                case BinaryOp::Div:
                    return div(sub(mul(dl, r), mul(l, dr)), pow(r, 2));
            }
            return constant(0.0);
        }
        case Kind::Pow: {
            const Expr e(n.a);
            const Expr de = e.differentiate(var);
            return mul(mul(constant(static_cast<double>(n.exponent)),
                           pow(e, n.exponent - 1)),
                       de);
        }
    }
    return constant(0.0);
}

std::size_t Expr::size() const {
    const Node& n = *node_;
    std::size_t s = 1;
    if (n.a) s += Expr(n.a).size();
    if (n.b) s += Expr(n.b).size();
    return s;
}

namespace {

// precedence levels for printing: 0 add, 1 mul, 2 unary-neg, 3 pow, 4 atom
int node_precedence(const Expr::Node& n) {
    switch (n.kind) {
        case Expr::Kind::Constant:
            return n.value < 0 ? 2 : 4;
        case Expr::Kind::Variable: return 4;
        case Expr::Kind::Unary: return n.uop == UnaryOp::Neg ? 2 : 4;
        case Expr::Kind::Binary:
            return (n.bop == BinaryOp::Add || n.bop == BinaryOp::Sub) ? 0 : 1;
        case Expr::Kind::Pow: return 3;
    }
    return 4;
}

void print_node(const Expr::Node& n, std::string& out);

void print_child(const Expr::Node& child, int min_prec, std::string& out) {
    if (node_precedence(child) < min_prec) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case Expr::Kind::Constant:
            out += format_double(n.value);
            return;
        case Expr::Kind::Variable:
            out += n.var_name;
            return;
        case Expr::Kind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                print_child(*n.a, 2, out);
            } else {
                out += unary_name(n.uop);
                out += '(';
                print_node(*n.a, out);
                out += ')';
            }
            return;
        case Expr::Kind::Binary: {
            const char* sym = "";
            int prec = node_precedence(n);
            int rprec = prec + 1;  // left-associative
            switch (n.bop) {
                case BinaryOp::Add: sym = " + "; rprec = prec; break;
                case BinaryOp::Sub: sym = " - "; break;
                case BinaryOp::Mul: sym = "*"; break;
                case BinaryOp::Div: sym = "/"; break;
            }
            print_child(*n.a, prec, out);
            out += sym;
            print_child(*n.b, rprec, out);
            return;
        }
        case Expr::Kind::Pow:
            print_child(*n.a, 4, out);
            out += '^';
            if (n.exponent < 0) {
                out += '(';
                out += std::to_string(n.exponent);
                out += ')';
            } else {
                out += std::to_string(n.exponent);
            }
            return;
    }
}

}  // namespace

std::string Expr::to_string() const {
    std::string out;
    print_node(*node_, out);
    return out;
}

// ---------------------------------------------------------------------------
// parser

namespace {

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    double number = 0.0;
    bool number_is_integer = false;
    long long integer = 0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        current_ = Token{};
        current_.pos = i_;
        if (i_ >= text_.size()) {
            current_.kind = Token::Kind::End;
            return;
        }
        const char c = text_[i_];
        switch (c) {
            case '+': current_.kind = Token::Kind::Plus; ++i_; return;
            case '-': current_.kind = Token::Kind::Minus; ++i_; return;
            case '*': current_.kind = Token::Kind::Star; ++i_; return;
            case '/': current_.kind = Token::Kind::Slash; ++i_; return;
            case '^': current_.kind = Token::Kind::Caret; ++i_; return;
            case '(': current_.kind = Token::Kind::LParen; ++i_; return;
            case ')': current_.kind = Token::Kind::RParen; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
                ++i_;
            current_.kind = Token::Kind::Ident;
            current_.text = text_.substr(start, i_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at position " +
                             std::to_string(i_),
                         i_);
    }

    void lex_number() {
        std::size_t start = i_;
        bool integral = true;
        while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
        if (i_ < text_.size() && text_[i_] == '.') {
            integral = false;
            ++i_;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
        }
        if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
            std::size_t save = i_;
            ++i_;
            if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
            if (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
                integral = false;
                while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_])))
                    ++i_;
            } else {
                i_ = save;  // 'e' belongs to a following identifier, not this number
            }
        }
        const std::string s = text_.substr(start, i_ - start);
        current_.kind = Token::Kind::Number;
        current_.number = std::strtod(s.c_str(), nullptr);
        current_.number_is_integer = integral;
        if (integral) current_.integer = std::strtoll(s.c_str(), nullptr, 10);
        current_.text = s;
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token current_;
};

bool is_function_name(const std::string& s, UnaryOp* op) {
    static const std::pair<const char*, UnaryOp> table[] = {
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"sinh", UnaryOp::Sinh},
        {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh}, {"exp", UnaryOp::Exp},
        {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
    };
    for (const auto& [name, o] : table) {
        if (s == name) {
            if (op) *op = o;
            return true;
        }
    }
    return false;
}

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars)
        : lexer_(text), vars_(vars) {}

    Expr parse() {
        Expr e = parse_sum();
        const Token& t = lexer_.peek();
        if (t.kind != Token::Kind::End)
            throw ParseError("syntax error: unexpected input at position " +
                                 std::to_string(t.pos),
                             t.pos);
        return e;
    }

private:
    Expr parse_sum() {
        Expr e = parse_product();
        for (;;) {
            const Token& t = lexer_.peek();
            if (t.kind == Token::Kind::Plus) {
                lexer_.take();
                e = Expr::add(e, parse_product());
            } else if (t.kind == Token::Kind::Minus) {
                lexer_.take();
                e = Expr::sub(e, parse_product());
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_unary();
        for (;;) {
            const Token& t = lexer_.peek();
            if (t.kind == Token::Kind::Star) {
                lexer_.take();
                e = Expr::mul(e, parse_unary());
            } else if (t.kind == Token::Kind::Slash) {
                lexer_.take();
                e = Expr::div(e, parse_unary());
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (lexer_.peek().kind == Token::Kind::Minus) {
            lexer_.take();
            return Expr::unary(UnaryOp::Neg, parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr e = parse_primary();
        while (lexer_.peek().kind == Token::Kind::Caret) {
            lexer_.take();
            e = Expr::pow(e, parse_integer_exponent());
        }
        return e;
    }

    long long parse_integer_exponent() {
        bool negate = false;
        if (lexer_.peek().kind == Token::Kind::Minus) {
            lexer_.take();
            negate = true;
        }
        const Token t = lexer_.take();
        if (t.kind != Token::Kind::Number || !t.number_is_integer)
            throw ParseError("exponent must be a literal integer (position " +
                                 std::to_string(t.pos) + ")",
                             t.pos);
        return negate ? -t.integer : t.integer;
    }

    Expr parse_primary() {
        const Token t = lexer_.take();
        switch (t.kind) {
            case Token::Kind::Number:
                return Expr::constant(t.number);
            case Token::Kind::LParen: {
                Expr e = parse_sum();
                expect(Token::Kind::RParen, ")");
                return e;
            }
            case Token::Kind::Ident: {
                UnaryOp op;
                if (lexer_.peek().kind == Token::Kind::LParen) {
                    if (!is_function_name(t.text, &op))
                        throw ParseError("unknown function '" + t.text + "' at position " +
                                             std::to_string(t.pos),
                                         t.pos);
                    lexer_.take();
                    Expr arg = parse_sum();
                    expect(Token::Kind::RParen, ")");
                    return Expr::unary(op, arg);
                }
                for (std::size_t i = 0; i < vars_.size(); ++i)
                    if (vars_[i] == t.text)
                        return Expr::variable(static_cast<int>(i), t.text);
                throw ParseError("unknown identifier '" + t.text + "' at position " +
                                     std::to_string(t.pos),
                                 t.pos);
            }
            default:
                throw ParseError("syntax error at position " + std::to_string(t.pos), t.pos);
        }
    }

    void expect(Token::Kind kind, const char* what) {
        const Token t = lexer_.take();
        if (t.kind != kind)
            throw ParseError(std::string("expected '") + what + "' at position " +
                                 std::to_string(t.pos),
                             t.pos);
    }

    Lexer lexer_;
    const std::vector<std::string>& vars_;
};

}  // namespace

Expr parse_expr(const std::string& text, const std::vector<std::string>& vars) {
    Parser p(text, vars);
    return p.parse();
}

}  // namespace congruence
