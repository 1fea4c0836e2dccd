#include "maxclass/tape.hpp"

#include <map>
#include <tuple>
#include <unordered_map>

namespace maxclass::geom {

class TapeBuilder {
 public:
  explicit TapeBuilder(Tape& t) : t_(t) {}

  int emit(const expr::NodePtr& p) {
    if (auto it = by_ptr_.find(p.get()); it != by_ptr_.end()) return it->second;
    const expr::Node& n = *p;
    Tape::Instr in;
    in.node = p;
    switch (n.op) {
      case expr::Op::Const:
        in.code = Tape::Code::Const;
        in.value = n.exact ? n.q.to_double() : n.f;
        break;
      case expr::Op::Var:
        if (n.var >= t_.chart_.dim()) throw InputError("geom.dimension", "expression variable outside chart");
        in.code = Tape::Code::Input;
        in.var = n.var;
        break;
      case expr::Op::Neg: in.code = Tape::Code::Neg; break;
      case expr::Op::Add: in.code = Tape::Code::Add; break;
      case expr::Op::Sub: in.code = Tape::Code::Sub; break;
      case expr::Op::Mul: in.code = Tape::Code::Mul; break;
      case expr::Op::Div: in.code = Tape::Code::Div; break;
      case expr::Op::Pow:
        in.code = Tape::Code::Pow;
        in.exponent = n.exponent;
        break;
      case expr::Op::Sin: in.code = Tape::Code::Sin; break;
      case expr::Op::Cos: in.code = Tape::Code::Cos; break;
      case expr::Op::Exp: in.code = Tape::Code::Exp; break;
      case expr::Op::Ln: in.code = Tape::Code::Ln; break;
    }
    if (n.a) in.a = emit(n.a);
    if (n.b) in.b = emit(n.b);
    Key key{static_cast<int>(in.code), in.a, in.b, in.exponent, in.var, in.value};
    int slot;
    if (auto it = by_key_.find(key); it != by_key_.end()) {
      slot = it->second;
    } else {
      slot = static_cast<int>(t_.code_.size());
      t_.code_.push_back(std::move(in));
      by_key_.emplace(key, slot);
    }
    by_ptr_.emplace(p.get(), slot);
    return slot;
  }

 private:
  using Key = std::tuple<int, int, int, int, std::size_t, double>;
  Tape& t_;
  std::unordered_map<const expr::Node*, int> by_ptr_;
  std::map<Key, int> by_key_;
};

Tape::Tape(const std::vector<expr::ScalarExpr>& outputs, const expr::Chart& chart) : chart_(chart) {
  TapeBuilder b(*this);
  for (const auto& e : outputs) outputs_.push_back(b.emit(e.ptr()));
}

void Tape::domain_error(const Instr& in, const char* what) const {
  throw DomainError(expr::to_string(expr::ScalarExpr(in.node), chart_), what);
}

}  // namespace maxclass::geom
