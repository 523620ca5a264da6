#pragma once
#include <iosfwd>
#include <string>

#include "asbf/forest.hpp"

namespace asbf {

/// Exact text encoding of a double (C hex-float); round-trips bit-for-bit.
std::string format_double(double v);
double parse_double(const std::string& token);

/// Line-based text format, schema tag "asbf-forest 1": a header with the
/// config, seed, and basis schema, followed by per-tree node lists
/// (direction/threshold/child offsets for splits; count, box, flags, and
/// model coefficients for leaves). Doubles are hex-floats, so re-serializing
/// a fit is byte-identical. Leaf member identities are not stored: a loaded
/// forest predicts and reports diameters but cannot produce weight vectors.
std::string serialize_forest(const Forest& f);
Forest deserialize_forest(std::istream& in);
Forest deserialize_forest_string(const std::string& text);

void save_forest(const Forest& f, const std::string& path);
Forest load_forest(const std::string& path);

/// JSON round-trip for configs (CLI --config files).
std::string config_to_json(const ForestConfig& cfg);
ForestConfig config_from_json(const std::string& text);

}  // namespace asbf
