#pragma once

#include <string>
#include <variant>

#include "skc/oneshot.hpp"
#include "skc/rate_split.hpp"
#include "skc/scalar.hpp"
#include "skc/sdpi.hpp"
#include "skc/stationary.hpp"
#include "skc/vector_model.hpp"

namespace skc {

enum class Unit { Nats, Bits };

// Structured-text model file: a JSON object with a "kind" tag
// (scalar | product | vector | spectrum | discrete | oneshot), an optional
// "unit" (bits | nats, default nats) and kind-specific payload fields.
// Unknown fields are rejected with their path.
struct ModelFile {
  std::string kind;
  Unit unit = Unit::Nats;
  std::variant<ScalarGaussTriple, ProductGaussSource, GaussVectorModel,
               SpectrumTriple, DiscreteJoint, OneshotInstance>
      payload;
};

// Throws ValidationError with the offending field path on malformed input.
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);

// Canonical serialization (sorted keys, shortest round-trip doubles); feeding
// the output back to parse_model reproduces the model within 1e-12.
std::string serialize_model(const ModelFile& m);

}  // namespace skc
