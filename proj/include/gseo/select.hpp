#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>

#include "gseo/refine.hpp"

namespace gseo::select {

enum class Policy { llm, argmax_mean, final_iteration };
std::string_view policy_name(Policy p);

struct Selection {
  std::size_t index = 0;
  std::string justification;
  Policy policy = Policy::argmax_mean;
};

nlohmann::json selection_to_json(const Selection& s);
Selection selection_from_json(const nlohmann::json& j);

/// Means closer than this count as tied, so rounding noise never beats an
/// earlier version.
inline constexpr double kTieTolerance = 1e-9;

/// Index of the highest vector mean; ties go to the earliest version.
std::size_t argmax_mean(std::span<const PerformanceVector> vectors);
std::size_t argmax_mean(const refine::Trajectory& trajectory);

/// First 500 characters of each version's text shown to the selector.
inline constexpr std::size_t kExcerptChars = 500;

std::string render_selection_prompt(const refine::Trajectory& trajectory);

/// Reads "version: N" and the justification; nullopt if N is not in [0, count).
std::optional<Selection> parse_selection_reply(std::string_view reply, std::size_t count);

/// Lets the selector agent pick from the whole trajectory. After one
/// re-prompt it falls back to argmax_mean, so a valid index always comes back.
Selection select_best_version(providers::ChatBackend& chat, const LlmSettings& llm,
                              const refine::Trajectory& trajectory);

/// Ablation mode: the last version, no agent call.
Selection select_final_iteration(const refine::Trajectory& trajectory);

}  // namespace gseo::select
