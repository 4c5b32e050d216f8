#pragma once

#include <stdexcept>
#include <string>

namespace conevol {

// Error taxonomy. The CLI maps categories to exit codes:
// parse errors -> 2, domain errors -> 3, convergence failures -> 4.
enum class ErrorKind {
  Parse,
  Domain,
  Convergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define CONEVOL_DEFINE_ERROR(NAME, KIND)                       \
  class NAME : public Error {                                  \
   public:                                                     \
    explicit NAME(const std::string& what)                     \
        : Error(ErrorKind::KIND, #NAME, what) {}               \
  }

CONEVOL_DEFINE_ERROR(ParseError, Parse);
CONEVOL_DEFINE_ERROR(NotFullDimensional, Domain);
CONEVOL_DEFINE_ERROR(DegenerateGenerators, Domain);
CONEVOL_DEFINE_ERROR(TailMismatch, Domain);
CONEVOL_DEFINE_ERROR(ImproperDivisor, Domain);
CONEVOL_DEFINE_ERROR(NonPositiveDirection, Domain);
CONEVOL_DEFINE_ERROR(NotQGorenstein, Domain);
CONEVOL_DEFINE_ERROR(ReebConeViolation, Domain);
CONEVOL_DEFINE_ERROR(EmptySupport, Domain);
CONEVOL_DEFINE_ERROR(InvalidParams, Domain);
CONEVOL_DEFINE_ERROR(ImproperDegeneration, Domain);
CONEVOL_DEFINE_ERROR(OutsideMomentCone, Domain);
CONEVOL_DEFINE_ERROR(NoFlatDegeneration, Domain);
CONEVOL_DEFINE_ERROR(NotFano, Domain);
CONEVOL_DEFINE_ERROR(EmptyMeasure, Domain);
CONEVOL_DEFINE_ERROR(NonConvergence, Convergence);

#undef CONEVOL_DEFINE_ERROR

}  // namespace conevol
