#include "okoc/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "okoc/errors.hpp"

namespace okoc {

namespace {

struct FunctionName {
  std::string_view name;
  Expr::Op op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", Expr::Op::Sin},   {"cos", Expr::Op::Cos},   {"exp", Expr::Op::Exp},
    {"tanh", Expr::Op::Tanh}, {"sqrt", Expr::Op::Sqrt}, {"abs", Expr::Op::Abs},
};

std::string_view function_name(Expr::Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return {};
}

class Parser {
 public:
  Parser(std::string_view src, int n, int m) : src_(src), n_(n), m_(m) {}

  std::vector<Expr::Node> run() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "expression");
    expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(pos_, "operator or end of input");
    return std::move(nodes_);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Expr::Node node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Expr::Op op, int lhs, int rhs) { return push({op, 0.0, 0, lhs, rhs}); }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Expr::Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Expr::Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Expr::Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary(Expr::Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) return push({Expr::Op::Neg, 0.0, 0, unary(), -1});
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary(Expr::Op::Pow, base, unary());
    return base;
  }

  int primary() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) throw ParseError(pos_, "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(pos_, "operand");
  }

  int number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(start, "digit");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError(pos_, "exponent digits");
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || end != src_.data() + pos_ || !std::isfinite(value)) {
      throw ParseError(start, "finite numeric literal");
    }
    return push({Expr::Op::Const, value, 0, -1, -1});
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view word = src_.substr(start, pos_ - start);
    std::size_t digit_start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view index_text = src_.substr(digit_start, pos_ - digit_start);

    if (index_text.empty()) {
      if (word == "t") return push({Expr::Op::Time, 0.0, 0, -1, -1});
      for (const auto& f : kFunctions) {
        if (f.name == word) {
          if (!accept('(')) throw ParseError(pos_, "'(' after " + std::string(word));
          const int arg = expr();
          if (!accept(')')) throw ParseError(pos_, "')'");
          return push({f.op, 0.0, 0, arg, -1});
        }
      }
      throw SemanticError("unknown identifier '" + std::string(word) + "' at offset " +
                          std::to_string(start));
    }

    const std::string full(src_.substr(start, pos_ - start));
    if (word != "x" && word != "u") {
      throw SemanticError("unknown identifier '" + full + "' at offset " + std::to_string(start));
    }
    int index = 0;
    const auto [end, ec] =
        std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
    const int limit = word == "x" ? n_ : m_;
    if (ec != std::errc() || index < 1 || index > limit) {
      throw SemanticError("variable '" + full + "' is outside the signature (n=" +
                          std::to_string(n_) + ", m=" + std::to_string(m_) + ")");
    }
    const Expr::Op op = word == "x" ? Expr::Op::State : Expr::Op::Control;
    return push({op, 0.0, index - 1, -1, -1});
  }

  std::string_view src_;
  int n_;
  int m_;
  std::size_t pos_ = 0;
  std::vector<Expr::Node> nodes_;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

}  // namespace

Expr parse(std::string_view source, int n, int m) {
  if (n < 0 || m < 0) throw ArgumentError("negative signature dimension");
  Expr e;
  e.nodes_ = Parser(source, n, m).run();
  e.n_ = n;
  e.m_ = m;
  return e;
}

double Expr::eval(double t, std::span<const double> x, std::span<const double> u) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(u.size()) != m_) {
    throw ArgumentError("expression evaluated with wrong signature: expected (" +
                        std::to_string(n_) + ", " + std::to_string(m_) + "), got (" +
                        std::to_string(x.size()) + ", " + std::to_string(u.size()) + ")");
  }
  return eval_node(static_cast<int>(nodes_.size()) - 1, t, x, u);
}

double Expr::eval_node(int i, double t, std::span<const double> x,
                       std::span<const double> u) const {
  const Node& node = nodes_[static_cast<std::size_t>(i)];
  auto arg = [&](int j) { return eval_node(j, t, x, u); };
  switch (node.op) {
    case Op::Const:
      return node.value;
    case Op::Time:
      return checked(t, "t");
    case Op::State:
      return checked(x[static_cast<std::size_t>(node.index)], "state");
    case Op::Control:
      return checked(u[static_cast<std::size_t>(node.index)], "control");
    case Op::Add:
      return checked(arg(node.lhs) + arg(node.rhs), "+");
    case Op::Sub:
      return checked(arg(node.lhs) - arg(node.rhs), "-");
    case Op::Mul:
      return checked(arg(node.lhs) * arg(node.rhs), "*");
    case Op::Div: {
      const double num = arg(node.lhs);
      const double den = arg(node.rhs);
      if (den == 0.0) throw EvalError("division by zero");
      return checked(num / den, "/");
    }
    case Op::Pow:
      return checked(std::pow(arg(node.lhs), arg(node.rhs)), "^");
    case Op::Neg:
      return -arg(node.lhs);
    case Op::Sin:
      return checked(std::sin(arg(node.lhs)), "sin");
    case Op::Cos:
      return checked(std::cos(arg(node.lhs)), "cos");
    case Op::Exp:
      return checked(std::exp(arg(node.lhs)), "exp");
    case Op::Tanh:
      return std::tanh(arg(node.lhs));
    case Op::Sqrt: {
      const double a = arg(node.lhs);
      if (a < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(a);
    }
    case Op::Abs:
      return std::abs(arg(node.lhs));
  }
  throw EvalError("corrupt expression node");
}

std::string Expr::to_string() const {
  std::string out;
  print_node(static_cast<int>(nodes_.size()) - 1, out);
  return out;
}

void Expr::print_node(int i, std::string& out) const {
  const Node& node = nodes_[static_cast<std::size_t>(i)];
  auto infix = [&](const char* op) {
    out += '(';
    print_node(node.lhs, out);
    out += op;
    print_node(node.rhs, out);
    out += ')';
  };
  switch (node.op) {
    case Op::Const: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof(buf), node.value);
      out.append(buf, res.ptr);
      return;
    }
    case Op::Time:
      out += 't';
      return;
    case Op::State:
      out += 'x' + std::to_string(node.index + 1);
      return;
    case Op::Control:
      out += 'u' + std::to_string(node.index + 1);
      return;
    case Op::Add:
      return infix(" + ");
    case Op::Sub:
      return infix(" - ");
    case Op::Mul:
      return infix(" * ");
    case Op::Div:
      return infix(" / ");
    case Op::Pow:
      return infix(" ^ ");
    case Op::Neg:
      out += "(-";
      print_node(node.lhs, out);
      out += ')';
      return;
    default:
      out += function_name(node.op);
      out += '(';
      print_node(node.lhs, out);
      out += ')';
      return;
  }
}

void eval_all(std::span<const Expr> exprs, double t, std::span<const double> x,
              std::span<const double> u, std::span<double> out) {
  if (out.size() != exprs.size()) throw ArgumentError("output size mismatch");
  for (std::size_t i = 0; i < exprs.size(); ++i) out[i] = exprs[i].eval(t, x, u);
}

}  // namespace okoc
