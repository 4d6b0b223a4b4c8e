#pragma once

// JSON encodings of states and observables.
//
//   complex      [re, im]
//   StateVector  {"dim": n, "amplitudes": [[re, im], ...]}
//   Observable   {"dim": n, "outcomes": [{"label": s, "span": [state, ...]}, ...]}
//
// Each outcome's projector is projector_from_span over its span. Malformed
// documents raise ParseError; documents that parse but break an invariant
// raise the error of the violated constructor (ValidationError,
// DegenerateSpan, DimensionMismatch).

#include <string>
#include <string_view>

#include "twotime/core.hpp"

namespace twotime {

StateVector parse_state_vector(std::string_view text);
Observable parse_observable(std::string_view text);

std::string to_json(const StateVector& psi);
// Spans are emitted as an orthonormal basis of each outcome's range.
std::string to_json(const Observable& q);

}  // namespace twotime
