#pragma once

// JSON form of run records (records.json), used to rebuild reports later.

#include <string>
#include <vector>

#include "promptforge/pipeline.hpp"

namespace promptforge {

struct RecordSet {
  ToolTask task = ToolTask::Mutation;
  PromptVariant variant = PromptVariant::Default;
  std::vector<RunRecord> records;

  bool operator==(const RecordSet&) const = default;
};

std::string records_to_json(const RecordSet& set);
/// Throws Error(InvalidConfig) when the text is not a record set.
RecordSet records_from_json(const std::string& json_text);

RecordSet load_records(const std::string& path);
void save_records(const RecordSet& set, const std::string& path);

}  // namespace promptforge
