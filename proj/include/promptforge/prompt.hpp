#pragma once

// Prompt templates for the three tools and budget-aware prompt assembly.

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "promptforge/types.hpp"

namespace promptforge {

/// One in-prompt example; field names depend on the task.
using PromptExample = std::map<std::string, std::string>;

/// Data behind a template. `examples` feed every variant that shows
/// examples; `bad_examples` are the adversarial additions for BadEx.
struct ExampleBank {
  std::string description;
  /// Description used by the NLOnly variant when it differs from `description`.
  std::string nl_only_description;
  std::vector<PromptExample> examples;
  std::vector<PromptExample> bad_examples;
};

/// Bank JSON: {description, nl_only_description?, examples: [..], bad_examples: [..]}.
/// Array-valued example fields are joined with newlines.
ExampleBank parse_example_bank(const std::string& json_text);
ExampleBank load_example_bank(const std::string& path);
/// The bank shipped with the library for a task.
ExampleBank default_example_bank(ToolTask task);

/// How the testgen template picks its one-shot example.
enum class ExampleSelection { SameClass, Random };

class PromptTemplate {
 public:
  virtual ~PromptTemplate() = default;

  virtual ToolTask task() const = 0;
  /// Context keys that must be present on an instance before rendering.
  virtual std::vector<std::string> required_keys() const = 0;
  virtual std::vector<std::string> stop_sequences() const = 0;
  virtual double temperature() const = 0;
  virtual int max_tokens() const = 0;

  /// Examples the variant would show for this instance, oldest first.
  virtual std::vector<PromptExample> examples_for(const Instance& instance, PromptVariant variant) const = 0;
  /// Full prompt text for the given example list.
  virtual std::string render(const Instance& instance, PromptVariant variant,
                             const std::vector<PromptExample>& examples) const = 0;
};

std::unique_ptr<PromptTemplate> make_mutation_template(ExampleBank bank, double temperature = 0.2,
                                                       int max_tokens = 256);
std::unique_ptr<PromptTemplate> make_oracle_template(ExampleBank bank, double temperature = 0.0,
                                                     int max_tokens = 256);
std::unique_ptr<PromptTemplate> make_testgen_template(ExampleBank bank, int max_tokens = 512,
                                                      ExampleSelection selection = ExampleSelection::SameClass);

inline constexpr std::size_t kDefaultContextBudget = 4096;

/// Renders the prompt, dropping the oldest examples until prompt tokens plus
/// max_tokens fit the budget. Throws MissingContextKey for an absent key and
/// Error(InvalidArgument) when the prompt does not fit even without examples.
PromptBundle assemble_prompt(const PromptTemplate& tmpl, const Instance& instance, PromptVariant variant,
                             std::size_t context_budget = kDefaultContextBudget);

}  // namespace promptforge
