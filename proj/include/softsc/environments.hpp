#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "softsc/model.hpp"

namespace softsc {

// Text-game convention shared by the toys: unknown actions yield reward 0
// and the observation "nothing happens".
inline constexpr std::string_view kNothingHappens = "nothing happens";

class Environment {
 public:
  struct StepResult {
    std::string observation;
    double reward = 0.0;
    bool done = false;
  };

  virtual ~Environment() = default;

  virtual std::string reset(const std::string& task_id) = 0;
  // Throws DomainError when stepping a finished episode.
  virtual StepResult step(const std::string& action_text) = 0;
  virtual int max_steps() const = 0;
};

struct EnvTask {
  std::string id;
  std::string prompt;
};

// A parsed environment definition file. Immutable after loading; shared
// across episodes, with one Environment instance per episode.
//
// Formats (all JSON with a versioned "format" field):
//   toy_bash/1  — {"tasks": [{"id","prompt","rewards": {action: reward}}]}
//   toy_shop/1  — {"tasks": [{"id","prompt","items": {item_id: {
//                   "default_options": {k: v},
//                   "variants": [{"options": {k: v}, "reward": r}]}}}]}
//   toy_house/1 — {"tasks": [{"id","prompt","path": [action...],
//                   "observations"?: [text...]}]}
class EnvironmentDefinition {
 public:
  virtual ~EnvironmentDefinition() = default;

  virtual std::string format() const = 0;
  virtual TaskKind task_kind() const = 0;
  virtual const std::vector<EnvTask>& tasks() const = 0;
  virtual int max_steps() const = 0;
  virtual std::unique_ptr<Environment> make_environment() const = 0;
};

std::shared_ptr<const EnvironmentDefinition> load_environment_definition(
    const std::string& path);
std::shared_ptr<const EnvironmentDefinition> parse_environment_definition(
    const std::string& text, const std::string& origin = "<inline>");

// Buy-action grammar for the shop toy: "buy <item_id> [key=value ...]".
struct BuyAction {
  std::string item_id;
  std::map<std::string, std::string> options;
};
std::optional<BuyAction> parse_buy_action(const std::string& action_text);

}  // namespace softsc
