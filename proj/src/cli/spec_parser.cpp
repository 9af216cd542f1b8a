#include "mmlab/cli/spec_parser.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace mmlab::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); }

// ---------------------------------------------------------------------------
// Syntax tree
// ---------------------------------------------------------------------------

/// Arithmetic expression in the optional index variable `i`.
struct Expr {
  enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow } op = Op::Num;
  double value = 0.0;
  std::shared_ptr<Expr> a, b;

  double eval(std::optional<double> i) const {
    switch (op) {
      case Op::Num: return value;
      case Op::Var:
        if (!i) fail("index variable 'i' used outside a sequence");
        return *i;
      case Op::Neg: return -a->eval(i);
      case Op::Add: return a->eval(i) + b->eval(i);
      case Op::Sub: return a->eval(i) - b->eval(i);
      case Op::Mul: return a->eval(i) * b->eval(i);
      case Op::Div: return a->eval(i) / b->eval(i);
      case Op::Pow: return std::pow(a->eval(i), b->eval(i));
    }
    return 0.0;
  }
  bool uses_index() const {
    if (op == Op::Var) return true;
    return (a && a->uses_index()) || (b && b->uses_index());
  }
};
using ExprPtr = std::shared_ptr<Expr>;

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  enum class Kind { Number, List, Call } kind = Kind::Number;
  ExprPtr expr;                                 // Number
  std::vector<NodePtr> items;                   // List
  std::string name;                             // Call
  std::vector<NodePtr> positional;              // Call
  std::vector<std::pair<std::string, NodePtr>> named;  // Call, in order
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string text) : s_(std::move(text)) {}

  NodePtr parse_all() {
    auto n = value();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
    return n;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "' at position " + std::to_string(pos_));
  }
  bool ident_start() {
    skip();
    return pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_');
  }
  std::string ident() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return s_.substr(b, pos_ - b);
  }

  NodePtr value() {
    skip();
    if (accept('[')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::List;
      if (!accept(']')) {
        do n->items.push_back(value());
        while (accept(','));
        expect(']');
      }
      return n;
    }
    if (ident_start()) {
      const std::size_t save = pos_;
      const std::string name = ident();
      if (name != "i" && name != "inf" && name != "pi") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->name = name;
        if (accept('(')) {
          if (!accept(')')) {
            do argument(*n);
            while (accept(','));
            expect(')');
          }
        }
        return n;
      }
      pos_ = save;
    }
    auto n = std::make_shared<Node>();
    n->expr = additive();
    return n;
  }

  void argument(Node& call) {
    const std::size_t save = pos_;
    if (ident_start()) {
      const std::string key = ident();
      if (accept('=')) {
        for (const auto& [k, v] : call.named)
          if (k == key) fail("duplicate argument '" + key + "'");
        call.named.emplace_back(key, value());
        return;
      }
      pos_ = save;
    }
    call.positional.push_back(value());
  }

  static ExprPtr make(Expr::Op op, ExprPtr a, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }

  ExprPtr additive() {
    auto e = multiplicative();
    while (true) {
      if (accept('+'))
        e = make(Expr::Op::Add, e, multiplicative());
      else if (accept('-'))
        e = make(Expr::Op::Sub, e, multiplicative());
      else
        return e;
    }
  }
  ExprPtr multiplicative() {
    auto e = unary();
    while (true) {
      if (accept('*'))
        e = make(Expr::Op::Mul, e, unary());
      else if (accept('/'))
        e = make(Expr::Op::Div, e, unary());
      else
        return e;
    }
  }
  ExprPtr unary() {
    if (accept('-')) return make(Expr::Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  ExprPtr power() {
    auto base = atom();
    if (!accept('^')) return base;
    // a signed exponent takes the rest of the additive expression:
    // 10^-i^2-i reads as 10^(-(i^2) - i)
    if (peek('-') || peek('+')) return make(Expr::Op::Pow, base, additive());
    return make(Expr::Op::Pow, base, power());
  }
  ExprPtr atom() {
    skip();
    if (accept('(')) {
      auto e = additive();
      expect(')');
      return e;
    }
    if (ident_start()) {
      const std::string name = ident();
      auto e = std::make_shared<Expr>();
      if (name == "i")
        e->op = Expr::Op::Var;
      else if (name == "inf")
        e->value = kInf;
      else if (name == "pi")
        e->value = kPi;
      else
        fail("unknown symbol '" + name + "' in expression");
      return e;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number at position " + std::to_string(pos_));
    pos_ += static_cast<std::size_t>(end - begin);
    auto e = std::make_shared<Expr>();
    e->value = v;
    return e;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

double number(const NodePtr& n, const std::string& what) {
  if (n->kind != Node::Kind::Number) fail(what + " must be a number");
  if (n->expr->uses_index()) fail(what + " must not depend on 'i'");
  const double v = n->expr->eval(std::nullopt);
  if (std::isnan(v)) fail(what + " is not a number");
  return v;
}

int integer(const NodePtr& n, const std::string& what) {
  const double v = number(n, what);
  if (v != std::floor(v) || std::abs(v) > 1e6) fail(what + " must be an integer");
  return static_cast<int>(v);
}

std::vector<double> numbers(const NodePtr& n, const std::string& what) {
  if (n->kind != Node::Kind::List) fail(what + " must be a list");
  std::vector<double> out;
  for (const auto& x : n->items) out.push_back(number(x, what));
  return out;
}

/// Argument lookup that rejects leftovers.
class Args {
 public:
  Args(const Node& call, std::vector<std::string> order) : call_(call) {
    for (std::size_t k = 0; k < call.positional.size(); ++k) {
      if (k >= order.size()) fail(call.name + ": too many arguments");
      map_[order[k]] = call.positional[k];
    }
    for (const auto& [key, v] : call.named) {
      if (std::find(order.begin(), order.end(), key) == order.end())
        fail(call.name + ": unknown argument '" + key + "'");
      if (map_.count(key)) fail(call.name + ": argument '" + key + "' given twice");
      map_[key] = v;
    }
  }
  NodePtr get(const std::string& key) const {
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : it->second;
  }
  NodePtr need(const std::string& key) const {
    auto n = get(key);
    if (!n) fail(call_.name + ": missing argument '" + key + "'");
    return n;
  }

 private:
  const Node& call_;
  std::map<std::string, NodePtr> map_;
};

Point build_point(const NodePtr& n) {
  if (n->kind == Node::Kind::List) return Point::vec(numbers(n, "point coordinate"));
  if (n->kind != Node::Kind::Call) fail("expected a point");
  if (n->name == "polar") {
    Args a(*n, {"r", "theta"});
    return Point::polar(number(a.need("r"), "r"), number(a.need("theta"), "theta"));
  }
  if (n->name == "tree") {
    Args a(*n, {"branch", "offset"});
    return Point::tree(integer(a.need("branch"), "branch"), number(a.need("offset"), "offset"));
  }
  if (n->name == "base") {
    Args a(*n, {"offset"});
    return Point::tree(0, number(a.need("offset"), "offset"));
  }
  fail("unknown point constructor '" + n->name + "'");
}

std::vector<double> sequence(const NodePtr& n, int depth, const std::string& what) {
  if (n->kind == Node::Kind::List) return numbers(n, what);
  if (n->kind != Node::Kind::Number) fail(what + " must be a list or an expression in i");
  std::vector<double> out;
  for (int i = 1; i <= depth; ++i) out.push_back(n->expr->eval(static_cast<double>(i)));
  return out;
}

SpacePtr build_space(const NodePtr& n);

ConvexRegion build_region(const NodePtr& n) {
  if (n->kind != Node::Kind::Call) fail("expected a region");
  if (n->name == "halfspace") {
    Args a(*n, {"normal", "offset"});
    HalfSpaceRegion h;
    h.normal = numbers(a.need("normal"), "normal");
    h.offset = a.get("offset") ? number(a.get("offset"), "offset") : 0.0;
    return h;
  }
  if (n->name == "ball") {
    Args a(*n, {"center", "radius"});
    return BallRegion{build_point(a.need("center")), number(a.need("radius"), "radius")};
  }
  if (n->name == "annulus") {
    Args a(*n, {"center", "inner", "outer"});
    return AnnulusRegion{build_point(a.need("center")), number(a.need("inner"), "inner"),
                         number(a.need("outer"), "outer")};
  }
  fail("unknown region '" + n->name + "'");
}

SpacePtr build_space(const NodePtr& n) {
  if (n->kind != Node::Kind::Call) fail("expected a space name");
  const std::string& name = n->name;
  if (name == "lp") {
    Args a(*n, {"dim", "p"});
    NormSpec s;
    s.dim = a.get("dim") ? integer(a.get("dim"), "dim") : 2;
    s.kind = PNorm{a.get("p") ? number(a.get("p"), "p") : 2.0};
    return make_normed(s);
  }
  if (name == "wlp") {
    Args a(*n, {"dim", "p", "w"});
    NormSpec s;
    s.dim = a.get("dim") ? integer(a.get("dim"), "dim") : 2;
    s.kind = WeightedPNorm{a.get("p") ? number(a.get("p"), "p") : 2.0, numbers(a.need("w"), "w")};
    return make_normed(s);
  }
  if (name == "polygon") {
    Args a(*n, {"vertices", "n"});
    PolygonNorm poly;
    if (a.get("n")) {
      if (a.get("vertices")) fail("polygon: give either vertices or n");
      const int m = integer(a.get("n"), "n");
      if (m < 4 || m % 2) fail("polygon: n must be even and >= 4");
      for (int k = 0; k < m; ++k)
        poly.vertices.push_back({std::cos(2 * kPi * k / m), std::sin(2 * kPi * k / m)});
    } else {
      const auto v = a.need("vertices");
      if (v->kind != Node::Kind::List) fail("polygon: vertices must be a list");
      for (const auto& item : v->items) {
        const auto xy = numbers(item, "vertex");
        if (xy.size() != 2) fail("polygon: vertices are [x, y] pairs");
        poly.vertices.push_back({xy[0], xy[1]});
      }
    }
    return make_normed(NormSpec{2, poly});
  }
  if (name == "hyperbolic") {
    Args a(*n, {});
    return make_hyperbolic();
  }
  if (name == "glued") {
    Args a(*n, {"eps", "delta", "depth"});
    const int depth = a.get("depth") ? integer(a.get("depth"), "depth") : 4;
    if (depth < 1 || depth > 8) fail("glued: depth must lie in [1, 8]");
    GluedIntervalSpec s = GluedIntervalSpec::power_law(depth);
    if (a.get("eps")) s.eps = sequence(a.get("eps"), depth, "eps");
    if (a.get("delta")) s.delta = sequence(a.get("delta"), depth, "delta");
    return make_glued_intervals(s);
  }
  if (name == "subset") {
    Args a(*n, {"base", "region"});
    return make_convex_subset(build_space(a.need("base")), build_region(a.need("region")));
  }
  if (name == "weighted") {
    Args a(*n, {"base", "c"});
    WeightSpec w;
    if (a.get("c")) w.coefficient = number(a.get("c"), "c");
    return make_weighted(build_space(a.need("base")), w);
  }
  if (name == "rescale") {
    Args a(*n, {"base", "lambda", "center"});
    auto base = build_space(a.need("base"));
    const Point c = a.get("center") ? build_point(a.get("center")) : base->origin();
    return rescale(base, number(a.need("lambda"), "lambda"), c);
  }
  fail("unknown space '" + name + "'");
}

}  // namespace

SpacePtr parse_space(const std::string& text) {
  if (text.find_first_not_of(" \t\n") == std::string::npos) fail("empty space spec");
  try {
    return build_space(Parser(text).parse_all());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidSpec) throw;
    // constructor validation failures are spec errors from the caller's view
    throw Error(ErrorKind::InvalidSpec, e.what());
  }
}

Point parse_point(const std::string& text) { return build_point(Parser(text).parse_all()); }

std::string describe_space(const Space& space) {
  std::ostringstream os;
  os << "space:        " << space.describe() << "\n";
  os << "family:       " << to_string(space.family()) << "\n";
  os << "dimension:    n=" << space.dimension() << "\n";
  const char* measure = space.family() == Family::Tree ? "1-D Hausdorff measure"
                        : space.measure_kind() == MeasureKind::Exact
                            ? "Hausdorff measure, exact ball masses"
                            : "weighted measure, Monte Carlo ball masses";
  os << "measure:      " << measure << "\n";
  os << "radius cap:   " << space.radius_cap() << "\n";
  const bool jac = space.radial_jacobian(0.5, 0.5).has_value() &&
                   dynamic_cast<const WeightedSpace*>(&space) == nullptr;
  os << "jacobian:     " << (jac ? "exact Jacobian available" : "none (counting route)") << "\n";
  return os.str();
}

}  // namespace mmlab::cli
