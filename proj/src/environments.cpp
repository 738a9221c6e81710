#include "softsc/environments.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace softsc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// toy_bash: declarative reward table, one command per episode.

struct BashTask {
  std::string id;
  std::string prompt;
  std::map<std::string, double> rewards;
};

class BashDefinition;

class BashEnvironment : public Environment {
 public:
  explicit BashEnvironment(const BashDefinition& definition)
      : definition_(definition) {}

  std::string reset(const std::string& task_id) override;
  StepResult step(const std::string& action_text) override;
  int max_steps() const override { return 1; }

 private:
  const BashDefinition& definition_;
  const BashTask* task_ = nullptr;
  bool done_ = false;
};

class BashDefinition : public EnvironmentDefinition {
 public:
  std::string format() const override { return "toy_bash/1"; }
  TaskKind task_kind() const override { return TaskKind::single_turn; }
  const std::vector<EnvTask>& tasks() const override { return task_list_; }
  int max_steps() const override { return 1; }
  std::unique_ptr<Environment> make_environment() const override {
    return std::make_unique<BashEnvironment>(*this);
  }

  const BashTask& find(const std::string& task_id) const {
    for (const BashTask& t : tasks_)
      if (t.id == task_id) return t;
    throw DomainError("unknown task id: " + task_id);
  }

  std::vector<BashTask> tasks_;
  std::vector<EnvTask> task_list_;
};

std::string BashEnvironment::reset(const std::string& task_id) {
  task_ = &definition_.find(task_id);
  done_ = false;
  return task_->prompt;
}

Environment::StepResult BashEnvironment::step(const std::string& action_text) {
  if (!task_) throw DomainError("step before reset");
  if (done_) throw DomainError("step after episode finished");
  done_ = true;
  auto it = task_->rewards.find(trim(action_text));
  if (it == task_->rewards.end())
    return {std::string(kNothingHappens), 0.0, true};
  return {"executed", it->second, true};
}

// ---------------------------------------------------------------------------
// toy_shop: catalog of items x option variants with per-configuration
// rewards; one buy per episode.

struct ShopVariant {
  std::map<std::string, std::string> options;
  double reward = 0.0;
};

struct ShopItem {
  std::map<std::string, std::string> default_options;
  std::vector<ShopVariant> variants;
};

struct ShopTask {
  std::string id;
  std::string prompt;
  std::map<std::string, ShopItem> items;
};

class ShopDefinition;

class ShopEnvironment : public Environment {
 public:
  explicit ShopEnvironment(const ShopDefinition& definition)
      : definition_(definition) {}

  std::string reset(const std::string& task_id) override;
  StepResult step(const std::string& action_text) override;
  int max_steps() const override { return 1; }

 private:
  const ShopDefinition& definition_;
  const ShopTask* task_ = nullptr;
  bool done_ = false;
};

class ShopDefinition : public EnvironmentDefinition {
 public:
  std::string format() const override { return "toy_shop/1"; }
  TaskKind task_kind() const override { return TaskKind::trajectory; }
  const std::vector<EnvTask>& tasks() const override { return task_list_; }
  int max_steps() const override { return 1; }
  std::unique_ptr<Environment> make_environment() const override {
    return std::make_unique<ShopEnvironment>(*this);
  }

  const ShopTask& find(const std::string& task_id) const {
    for (const ShopTask& t : tasks_)
      if (t.id == task_id) return t;
    throw DomainError("unknown task id: " + task_id);
  }

  std::vector<ShopTask> tasks_;
  std::vector<EnvTask> task_list_;
};

std::string ShopEnvironment::reset(const std::string& task_id) {
  task_ = &definition_.find(task_id);
  done_ = false;
  return task_->prompt;
}

Environment::StepResult ShopEnvironment::step(const std::string& action_text) {
  if (!task_) throw DomainError("step before reset");
  if (done_) throw DomainError("step after episode finished");
  done_ = true;

  std::optional<BuyAction> buy = parse_buy_action(action_text);
  if (!buy) return {std::string(kNothingHappens), 0.0, true};
  auto item_it = task_->items.find(buy->item_id);
  if (item_it == task_->items.end())
    return {std::string(kNothingHappens), 0.0, true};
  const ShopItem& item = item_it->second;

  // Defaults overlaid with whatever the trajectory specified.
  std::map<std::string, std::string> chosen = item.default_options;
  for (const auto& [key, value] : buy->options) chosen[key] = value;

  for (const ShopVariant& variant : item.variants) {
    if (variant.options == chosen)
      return {"bought " + buy->item_id, variant.reward, true};
  }
  return {"no such configuration of " + buy->item_id, 0.0, true};
}

// ---------------------------------------------------------------------------
// toy_house: step graph with one success path.

struct HouseTask {
  std::string id;
  std::string prompt;
  std::vector<std::string> path;
  std::vector<std::string> observations;  // parallel to path; may be empty
};

class HouseDefinition;

class HouseEnvironment : public Environment {
 public:
  explicit HouseEnvironment(const HouseDefinition& definition);

  std::string reset(const std::string& task_id) override;
  StepResult step(const std::string& action_text) override;
  int max_steps() const override;

 private:
  const HouseDefinition& definition_;
  const HouseTask* task_ = nullptr;
  size_t position_ = 0;
  bool done_ = false;
};

class HouseDefinition : public EnvironmentDefinition {
 public:
  std::string format() const override { return "toy_house/1"; }
  TaskKind task_kind() const override { return TaskKind::per_step; }
  const std::vector<EnvTask>& tasks() const override { return task_list_; }
  int max_steps() const override { return max_steps_; }
  std::unique_ptr<Environment> make_environment() const override {
    return std::make_unique<HouseEnvironment>(*this);
  }

  const HouseTask& find(const std::string& task_id) const {
    for (const HouseTask& t : tasks_)
      if (t.id == task_id) return t;
    throw DomainError("unknown task id: " + task_id);
  }

  std::vector<HouseTask> tasks_;
  std::vector<EnvTask> task_list_;
  int max_steps_ = 8;
};

HouseEnvironment::HouseEnvironment(const HouseDefinition& definition)
    : definition_(definition) {}

int HouseEnvironment::max_steps() const { return definition_.max_steps(); }

std::string HouseEnvironment::reset(const std::string& task_id) {
  task_ = &definition_.find(task_id);
  position_ = 0;
  done_ = false;
  return task_->prompt;
}

Environment::StepResult HouseEnvironment::step(const std::string& action_text) {
  if (!task_) throw DomainError("step before reset");
  if (done_) throw DomainError("step after episode finished");

  if (position_ < task_->path.size() &&
      trim(action_text) == task_->path[position_]) {
    std::string observation = position_ < task_->observations.size()
                                  ? task_->observations[position_]
                                  : "ok";
    ++position_;
    if (position_ == task_->path.size()) {
      done_ = true;
      return {"You won!", 1.0, true};
    }
    return {observation, 0.0, false};
  }
  return {std::string(kNothingHappens), 0.0, false};
}

// ---------------------------------------------------------------------------
// Parsing.

[[noreturn]] void bad_definition(const std::string& origin,
                                 const std::string& what) {
  throw DataError("environment definition " + origin + ": " + what);
}

std::shared_ptr<const EnvironmentDefinition> parse_bash(const json& doc,
                                                        const std::string& origin) {
  auto def = std::make_shared<BashDefinition>();
  for (const json& task : doc.at("tasks")) {
    BashTask parsed;
    parsed.id = task.at("id").get<std::string>();
    parsed.prompt = task.at("prompt").get<std::string>();
    for (const auto& [action, reward] : task.at("rewards").items()) {
      double r = reward.get<double>();
      if (r < 0.0 || r > 1.0) bad_definition(origin, "reward out of [0,1]");
      parsed.rewards[action] = r;
    }
    def->task_list_.push_back({parsed.id, parsed.prompt});
    def->tasks_.push_back(std::move(parsed));
  }
  return def;
}

std::shared_ptr<const EnvironmentDefinition> parse_shop(const json& doc,
                                                        const std::string& origin) {
  auto def = std::make_shared<ShopDefinition>();
  for (const json& task : doc.at("tasks")) {
    ShopTask parsed;
    parsed.id = task.at("id").get<std::string>();
    parsed.prompt = task.at("prompt").get<std::string>();
    for (const auto& [item_id, item] : task.at("items").items()) {
      ShopItem parsed_item;
      if (item.contains("default_options")) {
        for (const auto& [key, value] : item.at("default_options").items())
          parsed_item.default_options[key] = value.get<std::string>();
      }
      for (const json& variant : item.at("variants")) {
        ShopVariant parsed_variant;
        for (const auto& [key, value] : variant.at("options").items())
          parsed_variant.options[key] = value.get<std::string>();
        parsed_variant.reward = variant.at("reward").get<double>();
        if (parsed_variant.reward < 0.0 || parsed_variant.reward > 1.0)
          bad_definition(origin, "reward out of [0,1]");
        parsed_item.variants.push_back(std::move(parsed_variant));
      }
      parsed.items[item_id] = std::move(parsed_item);
    }
    def->task_list_.push_back({parsed.id, parsed.prompt});
    def->tasks_.push_back(std::move(parsed));
  }
  return def;
}

std::shared_ptr<const EnvironmentDefinition> parse_house(const json& doc,
                                                         const std::string& origin) {
  auto def = std::make_shared<HouseDefinition>();
  def->max_steps_ = doc.value("max_steps", 8);
  for (const json& task : doc.at("tasks")) {
    HouseTask parsed;
    parsed.id = task.at("id").get<std::string>();
    parsed.prompt = task.at("prompt").get<std::string>();
    for (const json& action : task.at("path"))
      parsed.path.push_back(action.get<std::string>());
    if (parsed.path.empty()) bad_definition(origin, "empty success path");
    if (task.contains("observations")) {
      for (const json& obs : task.at("observations"))
        parsed.observations.push_back(obs.get<std::string>());
    }
    def->task_list_.push_back({parsed.id, parsed.prompt});
    def->tasks_.push_back(std::move(parsed));
  }
  return def;
}

}  // namespace

std::optional<BuyAction> parse_buy_action(const std::string& action_text) {
  std::istringstream stream(trim(action_text));
  std::string verb;
  stream >> verb;
  if (verb != "buy") return std::nullopt;
  BuyAction buy;
  if (!(stream >> buy.item_id)) return std::nullopt;
  std::string pair;
  while (stream >> pair) {
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) return std::nullopt;
    buy.options[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return buy;
}

std::shared_ptr<const EnvironmentDefinition> parse_environment_definition(
    const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    bad_definition(origin, e.what());
  }
  try {
    std::string format = doc.at("format").get<std::string>();
    if (format == "toy_bash/1") return parse_bash(doc, origin);
    if (format == "toy_shop/1") return parse_shop(doc, origin);
    if (format == "toy_house/1") return parse_house(doc, origin);
    bad_definition(origin, "unknown format '" + format + "'");
  } catch (const json::exception& e) {
    bad_definition(origin, e.what());
  }
}

std::shared_ptr<const EnvironmentDefinition> load_environment_definition(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open environment definition: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_environment_definition(buffer.str(), path);
}

}  // namespace softsc
