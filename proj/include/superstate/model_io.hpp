#pragma once

#include <stdexcept>
#include <string>

#include "superstate/pomdp.hpp"

namespace superstate {

class ModelIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a model from JSON text. `source` names the origin (file path or
/// "<string>") so errors carry context. Any invariant violation is rejected.
PomdpModel parse_model(const std::string& text, const std::string& source = "<string>");

PomdpModel load_model(const std::string& path);

/// Canonical serialization: fixed field order, shortest round-tripping
/// doubles. parse_model(serialize_model(m)) reproduces m exactly.
std::string serialize_model(const PomdpModel& model);

void save_model(const PomdpModel& model, const std::string& path);

/// FNV-1a 64-bit hash of the canonical serialization, hex-encoded. Used as
/// the model content hash in run manifests.
std::string model_content_hash(const PomdpModel& model);

std::string fnv1a64_hex(const std::string& bytes);

/// Removes the leading run-manifest block (lines starting with '#') so
/// payloads written with a manifest header can be parsed back.
std::string strip_manifest_header(const std::string& text);

}  // namespace superstate
