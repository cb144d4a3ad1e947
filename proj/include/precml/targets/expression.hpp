#pragma once

// Symbolic target functions: a binarized computation graph plus a small
// recursive-descent parser for infix formulas over x1..xd.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace precml {

enum class Op { var, constant, add, sub, mul, div, pow, neg, sin, cos, exp, log, sqrt, tanh };

inline int op_arity(Op op) {
    switch (op) {
    case Op::var:
    case Op::constant: return 0;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: return 2;
    default: return 1;
    }
}

inline const char* op_name(Op op) {
    switch (op) {
    case Op::var: return "var";
    case Op::constant: return "const";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::pow: return "pow";
    case Op::neg: return "neg";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::tanh: return "tanh";
    }
    return "?";
}

struct Node {
    Op op = Op::constant;
    std::array<int, 2> inputs{-1, -1};
    int var = -1;       // payload for Op::var (0-based)
    double value = 0.0; // payload for Op::constant
};

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// f: R^dim -> R as a DAG whose nodes only reference earlier nodes.
struct TargetSpec {
    std::string name;
    int dim = 0;
    std::vector<Node> graph;
    int output_node = -1;

    /// Throws SpecError when a structural invariant is broken.
    void validate() const {
        if (dim <= 0) throw SpecError("target dimension must be positive");
        if (graph.empty()) throw SpecError("empty computation graph");
        if (output_node < 0 || output_node >= static_cast<int>(graph.size()))
            throw SpecError("output node out of range");
        for (std::size_t i = 0; i < graph.size(); ++i) {
            const Node& n = graph[i];
            const int k = op_arity(n.op);
            for (int j = 0; j < 2; ++j) {
                const int in = n.inputs[static_cast<std::size_t>(j)];
                if (j < k) {
                    if (in < 0 || in >= static_cast<int>(i))
                        throw SpecError("node " + std::to_string(i) + " has an input that is not an earlier node");
                } else if (in != -1) {
                    throw SpecError("node " + std::to_string(i) + " has too many inputs for " + op_name(n.op));
                }
            }
            if (n.op == Op::var && (n.var < 0 || n.var >= dim))
                throw SpecError("node " + std::to_string(i) + " references variable outside [0, dim)");
        }
    }
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Raised when a node is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, int node)
        : std::domain_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

namespace detail {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, int dim) : text_(text), dim_(dim) {}

    TargetSpec run(std::string name) {
        spec_.name = std::move(name);
        spec_.dim = dim_;
        skip_ws();
        const int root = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        spec_.output_node = root;
        spec_.validate();
        return std::move(spec_);
    }

private:
    std::string_view text_;
    int dim_;
    std::size_t pos_ = 0;
    TargetSpec spec_;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Node n) {
        spec_.graph.push_back(n);
        return static_cast<int>(spec_.graph.size()) - 1;
    }

    int binary(Op op, int lhs, int rhs) { return add(Node{op, {lhs, rhs}}); }

    // sum := product (('+' | '-') product)*
    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = binary(Op::add, lhs, parse_product());
            else if (accept('-')) lhs = binary(Op::sub, lhs, parse_product());
            else return lhs;
        }
    }

    // product := unary (('*' | '/') unary)*
    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = binary(Op::mul, lhs, parse_unary());
            else if (accept('/')) lhs = binary(Op::div, lhs, parse_unary());
            else return lhs;
        }
    }

    // unary := '-' unary | power
    int parse_unary() {
        if (accept('-')) {
            const int arg = parse_unary();
            return add(Node{Op::neg, {arg, -1}});
        }
        return parse_power();
    }

    // power := primary ('^' unary)?   -- right associative, binds tighter than unary minus
    int parse_power() {
        const int base = parse_primary();
        if (accept('^')) return binary(Op::pow, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    int parse_number() {
        const std::size_t start = pos_;
        double v = 0.0;
        const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (ec != std::errc()) fail("malformed number");
        pos_ = static_cast<std::size_t>(end - text_.data());
        if (pos_ == start) fail("malformed number");
        return add(Node{Op::constant, {-1, -1}, -1, v});
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);

        if (id.size() > 1 && id[0] == 'x' &&
            id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            int k = 0;
            std::from_chars(id.data() + 1, id.data() + id.size(), k);
            if (k < 1 || k > dim_) {
                pos_ = start;
                fail("variable " + std::string(id) + " exceeds dimension " + std::to_string(dim_));
            }
            return add(Node{Op::var, {-1, -1}, k - 1, 0.0});
        }

        static constexpr std::pair<std::string_view, Op> functions[] = {
            {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
            {"log", Op::log}, {"sqrt", Op::sqrt}, {"tanh", Op::tanh},
        };
        for (const auto& [fname, op] : functions) {
            if (id == fname) {
                if (!accept('(')) fail("expected '(' after " + std::string(id));
                const int arg = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return add(Node{op, {arg, -1}});
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(id) + "'");
    }
};

inline void print_node(const TargetSpec& spec, int i, std::ostringstream& os) {
    const Node& n = spec.graph[static_cast<std::size_t>(i)];
    switch (n.op) {
    case Op::var: os << 'x' << (n.var + 1); return;
    case Op::constant: {
        char buf[32];
        const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
        (void)ec;
        // Negative literals are not part of the grammar.
        if (n.value < 0 || std::signbit(n.value)) os << "(-" << std::string_view(buf + 1, end) << ')';
        else os << std::string_view(buf, end);
        return;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: {
        static constexpr char sym[] = {'+', '-', '*', '/', '^'};
        const char s = sym[static_cast<int>(n.op) - static_cast<int>(Op::add)];
        os << '(';
        print_node(spec, n.inputs[0], os);
        os << ' ' << s << ' ';
        print_node(spec, n.inputs[1], os);
        os << ')';
        return;
    }
    case Op::neg:
        os << "(-";
        print_node(spec, n.inputs[0], os);
        os << ')';
        return;
    default:
        os << op_name(n.op) << '(';
        print_node(spec, n.inputs[0], os);
        os << ')';
        return;
    }
}

} // namespace detail

/// Parses an infix formula over x1..x<dim>. N-ary chains of + and * are
/// left-folded into binary nodes.
inline TargetSpec parse_expression(std::string_view text, int dim, std::string name = {}) {
    if (dim <= 0) throw SpecError("target dimension must be positive");
    return detail::ExpressionParser(text, dim).run(std::move(name));
}

/// Fully parenthesized infix text; parse_expression(format_expression(s)) evaluates identically.
inline std::string format_expression(const TargetSpec& spec) {
    std::ostringstream os;
    detail::print_node(spec, spec.output_node, os);
    return os.str();
}

/// Topological evaluation in f64. `scratch` must hold graph.size() doubles.
inline double eval_target(const TargetSpec& spec, std::span<const double> x, std::span<double> scratch) {
    if (static_cast<int>(x.size()) != spec.dim)
        throw std::invalid_argument("eval_target: input has " + std::to_string(x.size()) + " components, expected " +
                                    std::to_string(spec.dim));
    for (std::size_t i = 0; i < spec.graph.size(); ++i) {
        const Node& n = spec.graph[i];
        const int node = static_cast<int>(i);
        const double a = n.inputs[0] >= 0 ? scratch[static_cast<std::size_t>(n.inputs[0])] : 0.0;
        const double b = n.inputs[1] >= 0 ? scratch[static_cast<std::size_t>(n.inputs[1])] : 0.0;
        double v = 0.0;
        switch (n.op) {
        case Op::var: v = x[static_cast<std::size_t>(n.var)]; break;
        case Op::constant: v = n.value; break;
        case Op::add: v = a + b; break;
        case Op::sub: v = a - b; break;
        case Op::mul: v = a * b; break;
        case Op::div:
            if (b == 0.0) throw DomainError("division by zero", node);
            v = a / b;
            break;
        case Op::pow:
            if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power", node);
            if (a < 0.0 && b != std::trunc(b)) throw DomainError("negative base with non-integer exponent", node);
            v = std::pow(a, b);
            break;
        case Op::neg: v = -a; break;
        case Op::sin: v = std::sin(a); break;
        case Op::cos: v = std::cos(a); break;
        case Op::exp: v = std::exp(a); break;
        case Op::log:
            if (!(a > 0.0)) throw DomainError("log of non-positive value", node);
            v = std::log(a);
            break;
        case Op::sqrt:
            if (a < 0.0) throw DomainError("sqrt of negative value", node);
            v = std::sqrt(a);
            break;
        case Op::tanh: v = std::tanh(a); break;
        }
        scratch[i] = v;
    }
    return scratch[static_cast<std::size_t>(spec.output_node)];
}

inline double eval_target(const TargetSpec& spec, std::span<const double> x) {
    std::vector<double> scratch(spec.graph.size());
    return eval_target(spec, x, scratch);
}

/// Largest input count over non-leaf nodes reachable from the output (d* in
/// the scaling discussion); 0 for a lone leaf.
inline int max_arity(const TargetSpec& spec) {
    std::vector<char> live(spec.graph.size(), 0);
    live[static_cast<std::size_t>(spec.output_node)] = 1;
    int best = 0;
    for (std::size_t i = spec.graph.size(); i-- > 0;) {
        if (!live[i]) continue;
        const Node& n = spec.graph[i];
        const int k = op_arity(n.op);
        best = std::max(best, k);
        for (int j = 0; j < k; ++j) live[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(j)])] = 1;
    }
    return best;
}

} // namespace precml
