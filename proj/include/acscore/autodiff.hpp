#pragma once

// Scalar reverse-mode differentiation over an append-only tape.
//
// A Var is either a constant (no tape) or a reference to a node recorded on a
// Tape. Arithmetic between constants stays constant, so generic code written
// against a scalar type T runs unchanged for T = double and T = Var.

#include <cstdint>
#include <span>
#include <vector>

namespace acscore::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit lift

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }
  Tape* tape() const { return tape_; }
  std::int32_t index() const { return index_; }

  Var& operator+=(const Var& rhs);
  Var& operator-=(const Var& rhs);
  Var& operator*=(const Var& rhs);
  Var& operator/=(const Var& rhs);

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::int32_t index_ = -1;
  double value_ = 0.0;
};

class Tape {
 public:
  struct Edge {
    std::int32_t parent;
    double partial;
  };

  /// New differentiable leaf (a parameter).
  Var variable(double value);
  /// Constant node recorded on the tape; it has no parents and receives an
  /// adjoint like any other node.
  Var lift(double value);

  /// Records a node whose value was computed by the caller. Constant parents
  /// are dropped from the edge list.
  Var record(double value, std::span<const Var> parents, std::span<const double> partials);
  Var record_unary(double value, const Var& a, double da);
  Var record_binary(double value, const Var& a, double da, const Var& b, double db);

  /// Reverse sweep from `root`. Adjoints are reset first, so repeated calls
  /// do not accumulate. Returns d root / d v for every v in `wrt`; constant
  /// entries get 0.
  std::vector<double> backward(const Var& root, std::span<const Var> wrt);

  double adjoint(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    double value;
    double adjoint;
    std::uint32_t edge_begin;
    std::uint32_t edge_end;
  };
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);

/// Throws std::domain_error for negative input. The derivative at exactly 0
/// is taken as 0.
Var sqrt(const Var& a);
/// sqrt(a^2 + eps): a smooth stand-in for |a|.
Var abs_smooth(const Var& a, double eps);
Var sum(std::span<const Var> terms);

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

}  // namespace acscore::ad
