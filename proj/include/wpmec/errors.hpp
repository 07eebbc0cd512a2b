#pragma once
#include <stdexcept>
#include <string>

namespace wpmec {

/// Parameter or config rejected; carries the offending field path.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ConstraintId {
  kWdDataCausality,   // processed bits <= device queue
  kHapDataCausality,  // edge bits <= HAP queue
  kTimeBudget,        // sum of offload times <= slot duration
  kEnergyCausality,   // scaled spend <= battery, gated on the minimum level
  kBoxConstraint,     // a decision variable outside its box
};

const char* constraint_name(ConstraintId id);

/// An Action that violates the slot dynamics' preconditions.
class InfeasibleActionError : public std::runtime_error {
 public:
  InfeasibleActionError(ConstraintId id, int device, long slot,
                        const std::string& detail);
  ConstraintId constraint() const { return id_; }
  int device() const { return device_; }  // -1 for HAP-level constraints
  long slot() const { return slot_; }

 private:
  ConstraintId id_;
  int device_;
  long slot_;
};

/// Root finder or iterative scheme failed to converge.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested problem size the brute-force oracles refuse to enumerate.
class UnsupportedScaleError : public std::invalid_argument {
 public:
  explicit UnsupportedScaleError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace wpmec
