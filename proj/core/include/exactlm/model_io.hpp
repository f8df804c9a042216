#pragma once

// Plain-text model and reward files.
//
// Autoregressive models:
//     model autoregressive
//     symbols a b c          # interior symbols, in vector order
//     eos <eos>              # EOS symbol name; last vector position
//     order 1
//     row | 0.5 0.5 0.0 0.0  # start context (empty before '|')
//     row a | 0.4 0.1 0.1 0.4
//
// Tabular models:
//     model tabular
//     item item-1 0.5
//
// Rewards:
//     reward
//     bound 1.0
//     item item-1 0.25
//
// '#' starts a comment; probabilities are exact decimals.

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "exactlm/alignment.hpp"
#include "exactlm/lm.hpp"

namespace exactlm {

using ModelFile = std::variant<TabularLM, AutoregressiveLM>;

ModelFile parse_model(std::string_view text);
ModelFile load_model(const std::filesystem::path& path);

RewardFunction parse_reward(std::string_view text);
RewardFunction load_reward(const std::filesystem::path& path);

std::string format_model(const TabularLM& lm);
std::string format_model(const AutoregressiveLM& lm);
std::string format_reward(const RewardFunction& reward);

}  // namespace exactlm
