#pragma once

#include "orbits/classify.hpp"
#include "orbits/continuation.hpp"
#include "orbits/model.hpp"
#include "orbits/perturb.hpp"

#include <string>

namespace orbits {

/// Model JSON schema (see FORMATS.md):
/// {
///   "kinetic": {"a11": [[k1,k2,cos,sin],...], "a12": [...], "a22": [...]},
///   "potential": [[k1,k2,cos,sin],...],
///   "perturbation": [...],
///   "epsilon": 0.0,
///   "cutoff": 8,
///   "name": "optional"
/// }
/// Missing kinetic entries default to the identity metric.
ModelSpec model_from_json(const std::string& text);
ModelSpec model_from_file(const std::string& path);
std::string model_to_json(const ModelSpec& model);

std::string validation_to_json(const ValidationReport& report);
std::string minimizers_to_json(const FindMinimaResult& result, double e);
std::string profile_to_csv(const ActionProfile& profile);
std::string branches_to_json(const GlobalStructure& gs);
std::string crossings_to_json(const GlobalStructure& gs);
std::string summary_to_csv(const GlobalStructure& gs);
std::string monte_carlo_to_json(const MonteCarloReport& report);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace orbits
