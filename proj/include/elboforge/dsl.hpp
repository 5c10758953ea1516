#pragma once

#include <stdexcept>
#include <string>

#include "elboforge/model.hpp"

namespace elboforge {

struct ModelSource {
  std::string text;
  std::string origin = "<inline>";
};

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(std::string msg, int line, int column);
};

/// Parses one model file into the IR. Only syntax and name resolution are
/// checked here; structural invariants are validate()'s job.
GraphicalModel parse_model(const ModelSource& src);

/// Canonical text form: variables in declaration order with their generative
/// distribution inline, guides afterwards, numbers in shortest round-trip
/// form. parse_model(render_model(m)) is structurally equal to m and the
/// output is a byte-level fixpoint of parse-then-render.
/// Throws std::invalid_argument for models the grammar cannot express
/// (multi-variable generative target blocks).
std::string render_model(const GraphicalModel& model);

/// Shortest round-trip decimal form of a double (the canonical number syntax).
std::string canonical_number(double v);

}  // namespace elboforge
