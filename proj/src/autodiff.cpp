#include "acscore/autodiff.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace acscore::ad {

namespace {

Tape* common_tape(const Var& a, const Var& b) {
  if (a.is_constant()) return b.tape();
  if (!b.is_constant() && a.tape() != b.tape()) {
    throw std::logic_error("autodiff: operands recorded on different tapes");
  }
  return a.tape();
}

}  // namespace

Var& Var::operator+=(const Var& rhs) { return *this = *this + rhs; }
Var& Var::operator-=(const Var& rhs) { return *this = *this - rhs; }
Var& Var::operator*=(const Var& rhs) { return *this = *this * rhs; }
Var& Var::operator/=(const Var& rhs) { return *this = *this / rhs; }

Var Tape::variable(double value) { return lift(value); }

Var Tape::lift(double value) {
  const auto edges = static_cast<std::uint32_t>(edges_.size());
  nodes_.push_back({value, 0.0, edges, edges});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

Var Tape::record(double value, std::span<const Var> parents, std::span<const double> partials) {
  assert(parents.size() == partials.size());
  const auto begin = static_cast<std::uint32_t>(edges_.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (parents[i].is_constant()) continue;
    assert(parents[i].tape() == this);
    edges_.push_back({parents[i].index(), partials[i]});
  }
  const auto end = static_cast<std::uint32_t>(edges_.size());
  nodes_.push_back({value, 0.0, begin, end});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

Var Tape::record_unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  const auto begin = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back({a.index(), da});
  nodes_.push_back({value, 0.0, begin, begin + 1});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

Var Tape::record_binary(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant() && b.is_constant()) return Var(value);
  const auto begin = static_cast<std::uint32_t>(edges_.size());
  if (!a.is_constant()) edges_.push_back({a.index(), da});
  if (!b.is_constant()) edges_.push_back({b.index(), db});
  const auto end = static_cast<std::uint32_t>(edges_.size());
  nodes_.push_back({value, 0.0, begin, end});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

std::vector<double> Tape::backward(const Var& root, std::span<const Var> wrt) {
  for (auto& n : nodes_) n.adjoint = 0.0;
  if (!root.is_constant()) {
    if (root.tape() != this) throw std::logic_error("autodiff: root belongs to another tape");
    nodes_[root.index()].adjoint = 1.0;
    for (auto i = static_cast<std::int64_t>(root.index()); i >= 0; --i) {
      const Node& n = nodes_[i];
      if (n.adjoint == 0.0) continue;
      for (auto e = n.edge_begin; e < n.edge_end; ++e) {
        // Append-only recording guarantees parents precede children.
        assert(edges_[e].parent < i);
        nodes_[edges_[e].parent].adjoint += n.adjoint * edges_[e].partial;
      }
    }
  }
  std::vector<double> grads;
  grads.reserve(wrt.size());
  for (const auto& v : wrt) grads.push_back(adjoint(v));
  return grads;
}

double Tape::adjoint(const Var& v) const {
  if (v.is_constant()) return 0.0;
  return nodes_.at(v.index()).adjoint;
}

void Tape::clear() {
  nodes_.clear();
  edges_.clear();
}

Var operator+(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() + b.value();
  return t ? t->record_binary(v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() - b.value();
  return t ? t->record_binary(v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() * b.value();
  return t ? t->record_binary(v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) throw std::domain_error("autodiff: division by zero");
  Tape* t = common_tape(a, b);
  const double v = a.value() / b.value();
  return t ? t->record_binary(v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a) {
  return a.is_constant() ? Var(-a.value()) : a.tape()->record_unary(-a.value(), a, -1.0);
}

Var sqrt(const Var& a) {
  if (a.value() < 0.0) throw std::domain_error("autodiff: sqrt of negative value");
  const double v = std::sqrt(a.value());
  if (a.is_constant()) return Var(v);
  const double d = v > 0.0 ? 0.5 / v : 0.0;
  return a.tape()->record_unary(v, a, d);
}

Var abs_smooth(const Var& a, double eps) { return sqrt(a * a + Var(eps)); }

Var sum(std::span<const Var> terms) {
  Tape* t = nullptr;
  double v = 0.0;
  for (const auto& x : terms) {
    v += x.value();
    if (!x.is_constant()) {
      if (t && t != x.tape()) throw std::logic_error("autodiff: operands recorded on different tapes");
      t = x.tape();
    }
  }
  if (!t) return Var(v);
  std::vector<double> ones(terms.size(), 1.0);
  return t->record(v, terms, ones);
}

}  // namespace acscore::ad
