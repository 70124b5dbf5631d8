#pragma once

// The three-step flow shared by every tool: instance extraction, prompt
// assembly plus model calls, and post-processing of the raw completions.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "promptforge/adapter.hpp"
#include "promptforge/backend.hpp"
#include "promptforge/config.hpp"
#include "promptforge/error.hpp"
#include "promptforge/mutation.hpp"
#include "promptforge/oracle.hpp"
#include "promptforge/prompt.hpp"
#include "promptforge/testgen.hpp"

namespace promptforge {

using Artifact = std::variant<Mutant, OracleSpec, TestCandidate>;

struct Discard {
  std::string raw;
  std::string reason;
  /// Raw completion the discard came from; -1 when it has none.
  int completion_index = -1;

  bool operator==(const Discard&) const = default;
};

// Discard reasons that reports rely on.
inline constexpr const char* kDiscardNoCompile = "does not compile";
inline constexpr const char* kDiscardExtraction = "extraction failed";

struct RunRecord {
  Instance instance;
  std::vector<PromptBundle> prompts;
  std::vector<std::string> raw_completions;
  std::vector<Artifact> artifacts;
  std::vector<Discard> discards;
  /// Some model call failed; the record holds what was obtained.
  bool incomplete = false;
  /// Coverage of the compiling tests (testgen only).
  std::optional<CoverageMap> coverage;

  bool operator==(const RunRecord&) const = default;
};

struct Extraction {
  std::vector<Instance> instances;
  /// Reason when extraction of the unit failed part way.
  std::optional<std::string> failure;
};

class Tool {
 public:
  virtual ~Tool() = default;

  virtual ToolTask task() const = 0;
  virtual Extraction extract(const SourceUnit& unit) const = 0;
  virtual const PromptTemplate& prompt_template() const = 0;
  /// One bundle per model query.
  virtual std::vector<PromptBundle> build_prompts(const Instance& instance, PromptVariant variant) const;
  /// Derives artifacts and discards from record.raw_completions, replacing
  /// any earlier ones.
  virtual void post_process(RunRecord& record, const SourceUnit& unit) const = 0;
};

/// Registered tool names: "mutate", "oracle", "testgen".
std::vector<std::string> registered_tools();
/// Builds the tool for config.task, loading the auxiliary inputs it names.
std::unique_ptr<Tool> make_tool(const TaskConfig& config);

/// Raised when a run stops early; carries the records finished so far.
class PipelineAborted : public Error {
 public:
  PipelineAborted(ErrorCode code, const std::string& message, std::vector<RunRecord> partial)
      : Error(code, message), partial_(std::move(partial)) {}
  const std::vector<RunRecord>& partial() const noexcept { return partial_; }

 private:
  std::vector<RunRecord> partial_;
};

/// One record per extracted instance, sorted by (path, offset, id). A failed
/// model call marks its record incomplete; with config.strict the run is
/// aborted instead. Adapter failures always abort. Throws Error(InvalidCorpus)
/// for an empty corpus.
std::vector<RunRecord> run_pipeline(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                    ModelBackend& backend);

/// Same run with an explicit variant (used by ablations).
std::vector<RunRecord> run_pipeline(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                    ModelBackend& backend, PromptVariant variant);

/// Re-derives artifacts of stored records (used to check traceability).
void reprocess(const Tool& tool, std::vector<RunRecord>& records, const std::vector<SourceUnit>& corpus);

/// Directory name for a method id ("A.f(int)" -> "A.f_int_").
std::string sanitize_for_path(std::string_view id);

}  // namespace promptforge
