#pragma once

// Command-line front end: JSON input documents describing toric cones,
// polyhedral divisors on the projective line, or members of the built-in
// one-parameter family, plus a dispatcher that renders deterministic reports
// (aligned tables followed by a JSON block, or plain CSV). Exit codes:
// 0 success, 2 parse/usage error, 3 domain error, 4 convergence failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "conevol/cxone.hpp"
#include "conevol/toric.hpp"

namespace conevol::cli {

enum class InputKind { toric, complexity_one, suss_family };

// Term of a complexity-one document: a marked point of the projective line
// and the vertex list of its polyhedron (the tail cone is shared).
struct DivisorTermDoc {
  cxone::MarkedPoint point;
  std::vector<QVec> vertices;  // rational coordinates, written as "p/q"

  bool operator==(const DivisorTermDoc& o) const {
    return point == o.point && vertices == o.vertices;
  }
};

// Parsed input document. Exactly one payload section is meaningful,
// selected by `kind`. Round-trips through serialize_input/parse_input.
struct InputDocument {
  InputKind kind = InputKind::toric;

  // kind == toric: primitive integer ray generators of a cone in N.
  std::vector<QVec> rays;

  // kind == complexity_one: integer tail rays plus one term per point.
  std::vector<QVec> tail;
  std::vector<DivisorTermDoc> terms;

  // kind == suss_family: collision counts and generic positions.
  cxone::SussFamilyParams suss;

  bool operator==(const InputDocument& o) const;
};

// Parses a JSON document. Integer vectors are JSON arrays of integers;
// every non-integer rational is a string "p/q" (decimal literals are
// rejected). Unknown keys, missing keys, and type mismatches all throw
// ParseError. For suss_family documents the default generic positions
// 1..k-m-mp are filled in when absent, so parsing is idempotent.
InputDocument parse_input(const std::string& text);

// Canonical serialization; parse_input(serialize_input(doc)) == doc.
std::string serialize_input(const InputDocument& doc);

// Geometry builders; throw Domain errors on invalid data.
toric::ToricConeVariety build_toric(const InputDocument& doc);
cxone::PolyhedralDivisor build_divisor(const InputDocument& doc);

// FNV-1a 64-bit digest of a byte string, rendered as 16 lowercase hex
// digits. Used to stamp reports with the identity of their input.
std::string fnv1a_hex(const std::string& bytes);

// Runs one subcommand (argv without the program name), writing the report
// to `out` and diagnostics plus wall time to `err`. Returns the exit code.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conevol::cli
