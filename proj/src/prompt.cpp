#include "promptforge/prompt.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace detail {
// Generated from data/*.json at configure time.
extern const char* const kMutationBankJson;
extern const char* const kOracleBankJson;
extern const char* const kTestgenBankJson;
}  // namespace detail

namespace {

std::vector<PromptExample> parse_examples(const nlohmann::json& arr) {
  std::vector<PromptExample> out;
  if (arr.is_null()) return out;
  if (!arr.is_array()) throw Error(ErrorCode::InvalidConfig, "example list must be an array");
  for (const auto& e : arr) {
    if (!e.is_object()) throw Error(ErrorCode::InvalidConfig, "example must be an object");
    PromptExample ex;
    for (const auto& item : e.items()) {
      if (item.value().is_array()) {
        std::vector<std::string> lines;
        for (const auto& v : item.value()) lines.push_back(v.get<std::string>());
        ex[item.key()] = text::join(lines, "\n");
      } else {
        ex[item.key()] = item.value().get<std::string>();
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

const std::string& field(const PromptExample& ex, const std::string& key) {
  static const std::string kEmpty;
  const auto it = ex.find(key);
  return it == ex.end() ? kEmpty : it->second;
}

const std::string& context(const Instance& instance, const std::string& key) {
  const auto it = instance.context.find(key);
  if (it == instance.context.end()) throw MissingContextKey(key);
  return it->second;
}

// Stable pseudo-random index derived from the instance id.
std::size_t stable_pick(const std::string& seed, std::size_t n) {
  const std::string digest = text::sha256_hex(seed);
  return static_cast<std::size_t>(std::stoull(digest.substr(0, 12), nullptr, 16) % n);
}

void append_line(std::string& out, std::string_view line) {
  out.append(line);
  out.push_back('\n');
}

class MutationTemplate final : public PromptTemplate {
 public:
  MutationTemplate(ExampleBank bank, double temperature, int max_tokens)
      : bank_(std::move(bank)), temperature_(temperature), max_tokens_(max_tokens) {}

  ToolTask task() const override { return ToolTask::Mutation; }
  std::vector<std::string> required_keys() const override { return {"path"}; }
  std::vector<std::string> stop_sequences() const override { return {"[[Code]]"}; }
  double temperature() const override { return temperature_; }
  int max_tokens() const override { return max_tokens_; }

  std::vector<PromptExample> examples_for(const Instance&, PromptVariant variant) const override {
    if (variant == PromptVariant::NLOnly) return {};
    std::vector<PromptExample> out = bank_.examples;
    if (variant == PromptVariant::BadEx) out.insert(out.end(), bank_.bad_examples.begin(), bank_.bad_examples.end());
    return out;
  }

  std::string render(const Instance& instance, PromptVariant variant,
                     const std::vector<PromptExample>& examples) const override {
    std::string out;
    if (variant != PromptVariant::ExOnly) {
      const std::string& desc = variant == PromptVariant::NLOnly && !bank_.nl_only_description.empty()
                                    ? bank_.nl_only_description
                                    : bank_.description;
      append_line(out, desc);
    }
    for (const auto& ex : examples) {
      append_line(out, "[[Code]]");
      append_line(out, field(ex, "code"));
      append_line(out, "[[Mutations]]");
      for (std::string_view m : text::split_lines(field(ex, "mutations")))
        if (!text::is_blank(m)) append_line(out, "- " + std::string(text::trim(m)));
    }
    append_line(out, "[[Code]]");
    append_line(out, instance.payload);
    append_line(out, "[[Mutations]]");
    return out;
  }

 private:
  ExampleBank bank_;
  double temperature_;
  int max_tokens_;
};

class OracleTemplate final : public PromptTemplate {
 public:
  OracleTemplate(ExampleBank bank, double temperature, int max_tokens)
      : bank_(std::move(bank)), temperature_(temperature), max_tokens_(max_tokens) {}

  ToolTask task() const override { return ToolTask::OracleGen; }
  std::vector<std::string> required_keys() const override { return {"signature"}; }
  std::vector<std::string> stop_sequences() const override { return {"### Signature"}; }
  double temperature() const override { return temperature_; }
  int max_tokens() const override { return max_tokens_; }

  std::vector<PromptExample> examples_for(const Instance&, PromptVariant variant) const override {
    if (variant == PromptVariant::NLOnly) return {};
    std::vector<PromptExample> out = bank_.examples;
    if (variant == PromptVariant::BadEx) out.insert(out.end(), bank_.bad_examples.begin(), bank_.bad_examples.end());
    return out;
  }

  std::string render(const Instance& instance, PromptVariant variant,
                     const std::vector<PromptExample>& examples) const override {
    // The task description lives in the per-example analysis sections.
    const bool analysis = variant == PromptVariant::Default || variant == PromptVariant::BadEx;
    std::string out;
    if (variant == PromptVariant::NLOnly)
      append_line(out, bank_.nl_only_description.empty() ? bank_.description : bank_.nl_only_description);
    for (const auto& ex : examples) {
      append_line(out, "### Signature");
      append_line(out, field(ex, "signature"));
      append_line(out, "### Comment");
      append_line(out, field(ex, "comment"));
      if (analysis) {
        append_line(out, "### Analysis");
        append_line(out, field(ex, "analysis"));
      }
      append_line(out, "### Equivalence");
      if (!field(ex, "equivalence").empty()) append_line(out, field(ex, "equivalence"));
    }
    append_line(out, "### Signature");
    append_line(out, context(instance, "signature"));
    append_line(out, "### Comment");
    append_line(out, instance.payload);
    append_line(out, analysis ? "### Analysis" : "### Equivalence");
    return out;
  }

 private:
  ExampleBank bank_;
  double temperature_;
  int max_tokens_;
};

class TestgenTemplate final : public PromptTemplate {
 public:
  TestgenTemplate(ExampleBank bank, int max_tokens, ExampleSelection selection)
      : bank_(std::move(bank)), max_tokens_(max_tokens), selection_(selection) {}

  ToolTask task() const override { return ToolTask::TestGen; }
  std::vector<std::string> required_keys() const override { return {"signature", "helpers"}; }
  std::vector<std::string> stop_sequences() const override { return {"---"}; }
  // The schedule sets the real temperature per query.
  double temperature() const override { return 0.0; }
  int max_tokens() const override { return max_tokens_; }

  std::vector<PromptExample> examples_for(const Instance& instance, PromptVariant variant) const override {
    if (variant == PromptVariant::NLOnly) return {};
    if (variant == PromptVariant::BadEx) {
      const auto project = instance.context.count("project") ? instance.context.at("project") : std::string();
      std::vector<PromptExample> pool;
      for (const auto* list : {&bank_.examples, &bank_.bad_examples})
        for (const auto& ex : *list)
          if (field(ex, "project") != project) pool.push_back(ex);
      if (pool.empty()) pool = bank_.bad_examples.empty() ? bank_.examples : bank_.bad_examples;
      if (pool.empty()) return {};
      return {pool[stable_pick(instance.id, pool.size())]};
    }
    if (bank_.examples.empty()) return {};
    if (selection_ == ExampleSelection::SameClass) {
      const auto cls = instance.context.count("class_name") ? instance.context.at("class_name") : std::string();
      for (const auto& ex : bank_.examples)
        if (!cls.empty() && field(ex, "class_name") == cls && field(ex, "method") != instance.payload) return {ex};
    }
    return {bank_.examples[stable_pick(instance.id, bank_.examples.size())]};
  }

  std::string render(const Instance& instance, PromptVariant variant,
                     const std::vector<PromptExample>& examples) const override {
    std::string out;
    if (variant != PromptVariant::ExOnly)
      append_line(out, "Suggest a test for a method with the " + context(instance, "signature") + " signature.");
    append_line(out, "Helper constructors and methods:");
    for (std::string_view h : text::split_lines(context(instance, "helpers")))
      if (!text::is_blank(h)) append_line(out, "  " + std::string(text::trim(h)));
    for (const auto& ex : examples) {
      append_line(out, "Method: " + field(ex, "method"));
      append_line(out, "Test: " + field(ex, "test"));
      append_line(out, "---");
    }
    out += "Method: " + instance.payload + "\nTest:";
    return out;
  }

 private:
  ExampleBank bank_;
  int max_tokens_;
  ExampleSelection selection_;
};

}  // namespace

ExampleBank parse_example_bank(const std::string& json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "example bank must be a JSON object");
    ExampleBank bank;
    bank.description = doc.value("description", std::string());
    bank.nl_only_description = doc.value("nl_only_description", std::string());
    bank.examples = parse_examples(doc.value("examples", nlohmann::json()));
    bank.bad_examples = parse_examples(doc.value("bad_examples", nlohmann::json()));
    return bank;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("example bank is not valid: ") + e.what());
  }
}

ExampleBank load_example_bank(const std::string& path) { return parse_example_bank(text::read_file(path)); }

ExampleBank default_example_bank(ToolTask task) {
  switch (task) {
    case ToolTask::Mutation: return parse_example_bank(detail::kMutationBankJson);
    case ToolTask::OracleGen: return parse_example_bank(detail::kOracleBankJson);
    case ToolTask::TestGen: return parse_example_bank(detail::kTestgenBankJson);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown task");
}

std::unique_ptr<PromptTemplate> make_mutation_template(ExampleBank bank, double temperature, int max_tokens) {
  return std::make_unique<MutationTemplate>(std::move(bank), temperature, max_tokens);
}

std::unique_ptr<PromptTemplate> make_oracle_template(ExampleBank bank, double temperature, int max_tokens) {
  return std::make_unique<OracleTemplate>(std::move(bank), temperature, max_tokens);
}

std::unique_ptr<PromptTemplate> make_testgen_template(ExampleBank bank, int max_tokens, ExampleSelection selection) {
  return std::make_unique<TestgenTemplate>(std::move(bank), max_tokens, selection);
}

PromptBundle assemble_prompt(const PromptTemplate& tmpl, const Instance& instance, PromptVariant variant,
                             std::size_t context_budget) {
  for (const auto& key : tmpl.required_keys())
    if (!instance.context.count(key)) throw MissingContextKey(key);

  PromptBundle bundle;
  bundle.instance_id = instance.id;
  bundle.variant = variant;
  bundle.stop_sequences = tmpl.stop_sequences();
  bundle.temperature = tmpl.temperature();
  bundle.max_tokens = tmpl.max_tokens();

  const auto examples = tmpl.examples_for(instance, variant);
  for (std::size_t drop = 0; drop <= examples.size(); ++drop) {
    const std::vector<PromptExample> kept(examples.begin() + static_cast<std::ptrdiff_t>(drop), examples.end());
    std::string text = tmpl.render(instance, variant, kept);
    if (text::estimate_tokens(text) + static_cast<std::size_t>(bundle.max_tokens) <= context_budget) {
      bundle.text = std::move(text);
      bundle.dropped_examples = static_cast<int>(drop);
      return bundle;
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "prompt for " + instance.id + " exceeds the context budget of " + std::to_string(context_budget) +
                  " tokens even without examples");
}

}  // namespace promptforge
