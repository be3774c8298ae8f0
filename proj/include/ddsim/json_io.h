#ifndef DDSIM_JSON_IO_H
#define DDSIM_JSON_IO_H

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ddsim/bounds.h"
#include "ddsim/control_group.h"
#include "ddsim/drift_model.h"
#include "ddsim/error_metrics.h"
#include "ddsim/evolution.h"

namespace ddsim {

using Json = nlohmann::json;

// Readers take `where`, a JSON-pointer-like location used in ConfigError messages.

/// Matrix as nested rows of entries, or as a flat row-major list of d^2 entries. An entry is a
/// number or a [re, im] pair. {"pauli_sum": [[coef, "XZ"], ...]} is accepted as well.
Operator operator_from_json(const Json& j, const std::string& where);
/// Nested rows of [re, im] pairs.
Json operator_to_json(const Operator& a);

/// "zero", "plus", or a list of entries (normalized on read only if already unit norm).
StateVector state_from_json(const Json& j, std::size_t dim, const std::string& where);
Json state_to_json(const StateVector& psi);

/// {"kind": "pauli", "n": 2} | {"kind": "custom", "elements": [...], "labels": [...]} |
/// {"kind": "haar", "dim": 2} | {"kind": "trivial", "dim": 2}.
ControlGroup group_from_json(const Json& j, const std::string& where);

/// {"variant": "static" | "piecewise" | "telegraph" | "open-system", ...}.
DriftModel model_from_json(const Json& j, const std::string& where);

/// Parses a file, reporting syntax errors with line and column.
Json load_json_file(const std::filesystem::path& path);
/// Parses text, reporting syntax errors with line and column; `name` labels the source.
Json parse_json_text(const std::string& text, const std::string& name);

/// A string value is a path (relative to base_dir) to a JSON file holding the object.
Json resolve_reference(const Json& j, const std::filesystem::path& base_dir, const std::string& where);

Json to_json(const ErrorEstimate& e);
Json to_json(const BoundReport& r);
Json to_json(const VolumeEstimate& v);
Json to_json(const ConvergenceReport& c);

// Typed field access with ConfigError diagnostics.
const Json& require_key(const Json& obj, const std::string& key, const std::string& where);
double get_double(const Json& obj, const std::string& key, const std::string& where);
double get_double_or(const Json& obj, const std::string& key, double fallback, const std::string& where);
std::size_t get_size_or(const Json& obj, const std::string& key, std::size_t fallback, const std::string& where);
uint64_t get_u64_or(const Json& obj, const std::string& key, uint64_t fallback, const std::string& where);
bool get_bool_or(const Json& obj, const std::string& key, bool fallback, const std::string& where);
std::string get_string(const Json& obj, const std::string& key, const std::string& where);

}  // namespace ddsim

#endif
