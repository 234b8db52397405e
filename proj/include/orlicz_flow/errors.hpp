#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace orlicz_flow {

namespace errors_detail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace errors_detail

// Invalid user-facing configuration: bad dimensions, grid sizes, malformed
// config documents, unparseable expressions referenced from a config.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Expression text that does not conform to the grammar.  `offset` is the
// byte position of the first offending character.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Problem-data functions must stay positive and finite; violations at
// evaluation time surface here.
class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Support function values outside the admissible domain (h <= 0).
class DomainError : public std::runtime_error {
public:
  DomainError(const std::string& what, int node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"),
        node_(node) {}
  int node() const { return node_; }

private:
  int node_;
};

// A principal radius went nonpositive: the body stopped being uniformly
// convex.  Carries the offending node and which quantity failed.
class ConvexityError : public std::runtime_error {
public:
  ConvexityError(const std::string& quantity, int node, double value)
      : std::runtime_error("convexity lost: " + quantity + " = " +
                           errors_detail::num(value) + " at node " +
                           std::to_string(node)),
        quantity_(quantity), node_(node), value_(value) {}
  const std::string& quantity() const { return quantity_; }
  int node() const { return node_; }
  double value() const { return value_; }

private:
  std::string quantity_;
  int node_;
  double value_;
};

// The time stepper halved dt down to dt_min and the trial state still
// violated positivity or convexity.
class GuardFailure : public std::runtime_error {
public:
  GuardFailure(const std::string& quantity, int node, double dt)
      : std::runtime_error("guard failure: " + quantity + " at node " +
                           std::to_string(node) + " with dt already at " +
                           errors_detail::num(dt)),
        quantity_(quantity), node_(node), dt_(dt) {}
  const std::string& quantity() const { return quantity_; }
  int node() const { return node_; }
  double dt() const { return dt_; }

private:
  std::string quantity_;
  int node_;
  double dt_;
};

// Newton ran out of iterations before reaching its residual tolerance.
class NonConvergenceError : public std::runtime_error {
public:
  NonConvergenceError(int iterations, double last_residual)
      : std::runtime_error("no convergence after " + std::to_string(iterations) +
                           " iterations; last sup|R| = " +
                           errors_detail::num(last_residual)),
        iterations_(iterations), last_residual_(last_residual) {}
  int iterations() const { return iterations_; }
  double last_residual() const { return last_residual_; }

private:
  int iterations_;
  double last_residual_;
};

// Operation asked of data it does not apply to (e.g. the uniqueness check
// with an anisotropic G).
class NotApplicableError : public std::runtime_error {
public:
  explicit NotApplicableError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace orlicz_flow
