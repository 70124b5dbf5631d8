#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptforge/adapter.hpp"
#include "promptforge/prompt.hpp"
#include "promptforge/testgen.hpp"
#include "promptforge/types.hpp"

namespace promptforge {

struct BackendConfig {
  std::string kind = "scripted";  // "scripted" or "http"
  std::string model_id = "code-davinci-002";
  std::string base_url = "http://localhost:8000/v1";
  /// Scripted bank file.
  std::string bank;
  /// Extra scripted banks pinned to one variant.
  std::map<PromptVariant, std::string> variant_banks;
  int max_in_flight = 10;
  int request_timeout_s = 120;
};

/// Everything one run needs. Relative paths are resolved against the
/// directory of the config file when loaded.
struct TaskConfig {
  ToolTask task = ToolTask::Mutation;
  /// Directory the config was loaded from; corpus globs are relative to it.
  std::filesystem::path base_dir = ".";
  std::vector<std::string> corpus;
  /// Project label attached to instances; defaults to the top directory of each path.
  std::string project;

  BackendConfig backend;
  PromptVariant variant = PromptVariant::Default;
  std::vector<PromptVariant> ablation_variants{std::begin(kAllVariants), std::end(kAllVariants)};

  std::string example_bank;
  ExampleSelection example_selection = ExampleSelection::SameClass;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::size_t context_budget = kDefaultContextBudget;
  TemperatureSchedule schedule;

  AdapterSpec adapter;
  int workers = 4;
  std::string out_dir = "out";
  bool strict = false;
  bool allow_partial = false;

  // evaluation inputs
  std::string allowlist;
  std::string baseline_mutants;
  std::string ground_truth;
  std::string symbols;
  std::string candidates;
  std::string coverage_map;
};

/// Parses the TOML subset used by config files (tables, dotted table headers,
/// strings incl. multi-line, numbers, booleans, arrays, inline tables).
/// Throws Error(InvalidConfig) with a line number.
nlohmann::json parse_toml(const std::string& text);

/// Builds a config from its JSON form; relative paths are resolved against base_dir.
TaskConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a .toml or .json config file.
TaskConfig load_config(const std::string& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// The process environment.
std::optional<std::string> process_env(const std::string& name);

/// Applies PROMPTFORGE_BACKEND, PROMPTFORGE_MODEL, PROMPTFORGE_BASE_URL and
/// PROMPTFORGE_WORKERS on top of the file values.
void apply_env(TaskConfig& config, const EnvLookup& env = process_env);

/// Throws Error(InvalidConfig) for inconsistent settings.
void validate(const TaskConfig& config);

/// Expands corpus globs ("**" matches any number of directories) and loads
/// the files, sorted by path. Unit paths of relative globs stay relative to
/// base_dir so instance ids do not depend on the checkout location.
/// Throws Error(InvalidCorpus) when nothing matches.
std::vector<SourceUnit> load_corpus(const std::vector<std::string>& globs, const std::filesystem::path& base_dir,
                                    const std::string& language_tag = "java");

/// True when `path` (with '/' separators) matches the glob.
bool glob_match(std::string_view pattern, std::string_view path);

}  // namespace promptforge
