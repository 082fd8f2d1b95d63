#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "octbd/phantom.hpp"
#include "octbd/pipeline.hpp"

namespace octbd {

// JSON text forms of the configuration structs. Parsing starts from the
// defaults and overrides only the keys present; unknown keys are rejected
// with ConfigError.

std::string to_json(const PhantomConfig& config);
std::string to_json(const OpticsConfig& config);
std::string to_json(const PipelineConfig& config);

PhantomConfig phantom_config_from_json(std::string_view text, PhantomConfig base = {});
OpticsConfig optics_config_from_json(std::string_view text, OpticsConfig base = {});
PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig base = {});

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_digest(const PipelineConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace octbd
