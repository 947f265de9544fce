#include "coop2/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace coop2 {

struct Expression::Node {
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp, Log } kind;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a, b;

  bool depends_on_state() const {
    if (kind == Kind::Var) return true;
    return (a && a->depends_on_state()) || (b && b->depends_on_state());
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::map<std::string, double>& params)
      : s_(text), params_(params) {}

  NodePtr run() {
    NodePtr n = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + s_ + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = make(Node::Kind::Add, n, term());
      else if (accept('-'))
        n = make(Node::Kind::Sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = make(Node::Kind::Mul, n, unary());
      else if (accept('/'))
        n = make(Node::Kind::Div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Const;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (accept('(')) {
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')' after argument of " + name);
        if (name == "sqrt") return make(Node::Kind::Sqrt, arg);
        if (name == "exp") return make(Node::Kind::Exp, arg);
        if (name == "log") return make(Node::Kind::Log, arg);
        fail("unknown function '" + name + "'");
      }
      auto n = std::make_shared<Node>();
      if (name == "x1" || name == "x2" || name == "x3") {
        n->kind = Node::Kind::Var;
        n->var = name[1] - '1';
        return n;
      }
      const auto it = params_.find(name);
      if (it == params_.end()) fail("unknown name '" + name + "'");
      n->kind = Node::Kind::Const;
      n->value = it->second;
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
};

Dual scale(const Dual& d, double value, double factor) {
  return {value, factor * d.g};
}

Dual eval_node(const Node& n, const Vec3& x) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Const: return {n.value, {}};
    case K::Var: {
      Dual d{x[static_cast<std::size_t>(n.var)], {}};
      d.g[static_cast<std::size_t>(n.var)] = 1.0;
      return d;
    }
    case K::Neg: {
      const Dual a = eval_node(*n.a, x);
      return {-a.v, -1.0 * a.g};
    }
    case K::Add: {
      const Dual a = eval_node(*n.a, x), b = eval_node(*n.b, x);
      return {a.v + b.v, a.g + b.g};
    }
    case K::Sub: {
      const Dual a = eval_node(*n.a, x), b = eval_node(*n.b, x);
      return {a.v - b.v, a.g - b.g};
    }
    case K::Mul: {
      const Dual a = eval_node(*n.a, x), b = eval_node(*n.b, x);
      return {a.v * b.v, b.v * a.g + a.v * b.g};
    }
    case K::Div: {
      const Dual a = eval_node(*n.a, x), b = eval_node(*n.b, x);
      const double v = a.v / b.v;
      return {v, (1.0 / b.v) * (a.g - v * b.g)};
    }
    case K::Pow: {
      const Dual a = eval_node(*n.a, x), b = eval_node(*n.b, x);
      if (!n.b->depends_on_state()) {
        // Constant exponent: valid for negative bases with integer powers.
        const double v = std::pow(a.v, b.v);
        const double dv = b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0);
        return scale(a, v, dv);
      }
      const double v = std::pow(a.v, b.v);
      const double la = std::log(a.v);
      return {v, v * ((b.v / a.v) * a.g + la * b.g)};
    }
    case K::Sqrt: {
      const Dual a = eval_node(*n.a, x);
      const double v = std::sqrt(a.v);
      return scale(a, v, 0.5 / v);
    }
    case K::Exp: {
      const Dual a = eval_node(*n.a, x);
      const double v = std::exp(a.v);
      return scale(a, v, v);
    }
    case K::Log: {
      const Dual a = eval_node(*n.a, x);
      return scale(a, std::log(a.v), 1.0 / a.v);
    }
  }
  return {};
}

Vec3 read_vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument(std::string("model: '") + what + "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Expression Expression::parse(const std::string& text, const std::map<std::string, double>& params) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(e.text_, params).run();
  return e;
}

double Expression::eval(const Vec3& x) const { return eval_node(*root_, x).v; }

Dual Expression::eval_dual(const Vec3& x) const { return eval_node(*root_, x); }

SystemModel model_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw std::invalid_argument("model: expected a JSON object");
  SystemModel m;
  m.name = spec.value("name", std::string("generic"));

  std::map<std::string, double> params;
  if (spec.contains("params")) {
    for (const auto& [k, v] : spec.at("params").items()) {
      if (k == "x1" || k == "x2" || k == "x3")
        throw std::invalid_argument("model: parameter name '" + k + "' is reserved");
      params[k] = v.get<double>();
      m.params.emplace_back(k, params[k]);
    }
  }

  if (!spec.contains("f") || !spec.at("f").is_array() || spec.at("f").size() != 3)
    throw std::invalid_argument("model: 'f' must be an array of 3 expressions");
  std::array<Expression, 3> f;
  for (std::size_t i = 0; i < 3; ++i)
    f[i] = Expression::parse(spec.at("f")[i].get<std::string>(), params);

  m.f = [f](const Vec3& x) -> Vec3 { return {f[0].eval(x), f[1].eval(x), f[2].eval(x)}; };
  m.jac = [f](const Vec3& x) -> Mat3 {
    Mat3 j{};
    for (std::size_t i = 0; i < 3; ++i) {
      const Dual d = f[i].eval_dual(x);
      j[i] = d.g;
    }
    return j;
  };

  if (!spec.contains("box")) throw std::invalid_argument("model: 'box' is required");
  m.box = {read_vec3(spec.at("box").at("lower"), "box.lower"),
           read_vec3(spec.at("box").at("upper"), "box.upper")};
  for (std::size_t i = 0; i < 3; ++i)
    if (!(m.box.lower[i] <= m.box.upper[i]))
      throw std::invalid_argument("model: box.lower must not exceed box.upper");

  if (spec.contains("sign_certificate")) {
    const auto& rows = spec.at("sign_certificate");
    if (!rows.is_array() || rows.size() != 3)
      throw std::invalid_argument("model: 'sign_certificate' must be 3x3");
    SignPattern p(3);
    for (std::size_t i = 0; i < 3; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 3)
        throw std::invalid_argument("model: 'sign_certificate' must be 3x3");
      for (std::size_t j = 0; j < 3; ++j) p(i, j) = parse_sign(rows[i][j].get<std::string>());
    }
    m.sign_certificate = p;
  }
  if (spec.contains("signature")) {
    m.signature = read_vec3(spec.at("signature"), "signature");
    for (double d : m.signature)
      if (d != 1.0 && d != -1.0) throw std::invalid_argument("model: signature entries must be +-1");
  }
  if (spec.contains("x0")) m.default_x0 = read_vec3(spec.at("x0"), "x0");
  return m;
}

}  // namespace coop2
