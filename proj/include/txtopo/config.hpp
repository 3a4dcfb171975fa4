#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "txtopo/evaluation.hpp"
#include "txtopo/features.hpp"
#include "txtopo/synth.hpp"

namespace txtopo {

/// Everything a pipeline run can be configured with.
struct Settings {
  FeatureConfig features;
  EvaluationConfig evaluation;
  SyntheticScenario scenario;
};

/// Applies `key = value` lines ('#' starts a comment). Unknown keys and
/// malformed values throw ParseError naming the line.
void apply_settings(std::istream& in, Settings& settings);
void load_settings(const std::filesystem::path& path, Settings& settings);

/// Applies one assignment, e.g. ("model.hidden", "32").
void apply_setting(Settings& settings, const std::string& key, const std::string& value);

/// All keys with their current values, one `key = value` per line.
void write_settings(std::ostream& out, const Settings& settings);

}  // namespace txtopo
