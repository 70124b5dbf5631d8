#include "promptforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace fs = std::filesystem;

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  return std::nullopt;
}

std::string_view extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return "json";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

std::string render_cell_plain(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::Text: return cell.text;
    case CellKind::Integer: return std::to_string(std::llround(cell.value));
    case CellKind::Percent: return text::fixed(cell.value * 100.0, 1);
    case CellKind::Ratio: return text::fixed(cell.value, 2);
    case CellKind::Missing: return "";
  }
  return "";
}

namespace {

std::string render_cell_markdown(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::Percent: return render_cell_plain(cell) + "%";
    case CellKind::Missing: return "-";
    case CellKind::Text: return text::replace_all(cell.text, "|", "\\|");
    default: return render_cell_plain(cell);
  }
}

bool left_aligned(const Table& t, std::size_t col) {
  if (col == 0) return true;
  return std::any_of(t.rows.begin(), t.rows.end(),
                     [&](const auto& row) { return col < row.size() && row[col].kind == CellKind::Text; });
}

std::string render_markdown(const Report& report) {
  std::string out;
  for (std::size_t ti = 0; ti < report.tables.size(); ++ti) {
    const Table& t = report.tables[ti];
    if (ti) out += "\n";
    out += "## " + t.title + "\n\n|";
    for (const auto& c : t.columns) out += " " + c + " |";
    out += "\n|";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += left_aligned(t, c) ? ":---|" : "---:|";
    out += "\n";
    for (const auto& row : t.rows) {
      out += "|";
      for (const auto& cell : row) out += " " + render_cell_markdown(cell) + " |";
      out += "\n";
    }
  }
  return out;
}

std::string render_csv(const Report& report) {
  std::string out;
  for (std::size_t ti = 0; ti < report.tables.size(); ++ti) {
    const Table& t = report.tables[ti];
    if (ti) out += "\n";
    out += "table";
    for (const auto& c : t.columns) out += "," + text::csv_escape(c);
    out += "\n";
    for (const auto& row : t.rows) {
      out += text::csv_escape(t.title);
      for (const auto& cell : row) out += "," + text::csv_escape(render_cell_plain(cell));
      out += "\n";
    }
  }
  return out;
}

std::string render_json(const Report& report) {
  using nlohmann::json;
  json tables = json::array();
  for (const auto& t : report.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::array();
      for (const auto& cell : row) {
        if (cell.kind == CellKind::Missing) r.push_back(nullptr);
        else if (cell.kind == CellKind::Text) r.push_back(cell.text);
        // Numbers go through the same text as CSV so both carry identical values.
        else r.push_back(json::parse(render_cell_plain(cell)));
      }
      rows.push_back(std::move(r));
    }
    tables.push_back({{"title", t.title}, {"columns", t.columns}, {"rows", rows}});
  }
  return json{{"tables", tables}}.dump(2) + "\n";
}

// Percentages of the parts rounded to 0.1 so that they add up to exactly 100
// (largest remainder; ties go to the earlier column).
std::vector<double> shares_summing_to_one(const std::vector<std::size_t>& counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  std::vector<std::size_t> tenths(counts.size());
  std::vector<std::pair<std::size_t, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    tenths[i] = counts[i] * 1000 / total;
    assigned += tenths[i];
    remainders.emplace_back(counts[i] * 1000 % total, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < 1000 && k < remainders.size(); ++k, ++assigned) ++tenths[remainders[k].second];
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(tenths[i]) / 1000.0;
  return out;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return render_json(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Markdown: return render_markdown(report);
  }
  return {};
}

void emit_report(const Report& report, ReportFormat format, const fs::path& file) {
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  text::write_file(file.string(), render_report(report, format));
}

void emit_all_formats(const Report& report, const fs::path& dir, const std::string& stem) {
  for (auto f : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown})
    emit_report(report, f, dir / (stem + "." + std::string(extension(f))));
}

std::string variant_label(PromptVariant variant) {
  if (variant == PromptVariant::Default) return "FSLM";
  return "FSLM (" + std::string(display_name(variant)) + ")";
}

// ---------------------------------------------------------------------------

MutationStats mutation_stats(const std::vector<RunRecord>& records, const std::set<MutantKey>* baseline) {
  MutationStats s;
  std::set<MutantKey> generated;
  long long tokens = 0;
  for (const auto& r : records) {
    for (const auto& d : r.discards)
      if (d.reason == kDiscardNoCompile) ++s.total;
    for (const auto& a : r.artifacts) {
      const auto* m = std::get_if<Mutant>(&a);
      if (!m) continue;
      ++s.total;
      ++s.compilable;
      ++s.classes[m->mutant_class];
      tokens += m->tokens_changed;
      generated.insert(mutant_key(m->path, m->line, m->mutated_line));
    }
  }
  if (s.compilable) s.mean_tokens_changed = static_cast<double>(tokens) / static_cast<double>(s.compilable);
  if (baseline) s.overlap = compute_overlap(generated, *baseline);
  return s;
}

Table mutation_table(const std::vector<std::pair<std::string, MutationStats>>& rows) {
  Table t;
  t.title = "Generated mutants";
  t.columns = {"Variant",        "Total",         "Overlap", "Compilable",    "Delete statement",
               "Replace operator", "Replace value", "Other",   "Tokens changed"};
  for (const auto& [label, s] : rows) {
    std::vector<Cell> row{Cell::of_text(label), Cell::integer(static_cast<long long>(s.total))};
    const bool any = s.compilable > 0;
    row.push_back(s.overlap && any ? Cell::percent(*s.overlap) : Cell::missing());
    row.push_back(s.total ? Cell::percent(static_cast<double>(s.compilable) / static_cast<double>(s.total))
                          : Cell::missing());
    std::vector<std::size_t> counts;
    for (auto c : {MutantClass::DeleteStatement, MutantClass::ReplaceOperator, MutantClass::ReplaceValue,
                   MutantClass::Other})
      counts.push_back(s.classes.count(c) ? s.classes.at(c) : 0);
    for (double share : shares_summing_to_one(counts)) row.push_back(any ? Cell::percent(share) : Cell::missing());
    row.push_back(any ? Cell::ratio(s.mean_tokens_changed) : Cell::missing());
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------

std::vector<OracleSpec> collect_oracles(const std::vector<RunRecord>& records) {
  std::vector<OracleSpec> out;
  for (const auto& r : records)
    for (const auto& a : r.artifacts)
      if (const auto* o = std::get_if<OracleSpec>(&a)) out.push_back(*o);
  return out;
}

Table oracle_table(const OracleScore& score) {
  Table t;
  t.title = "Oracle generation";
  t.columns = {"Project", "Precision", "Recall", "F1", "Correct", "Predicted", "Ground truth"};
  auto row = [](const std::string& label, const PrfScore& s) {
    return std::vector<Cell>{Cell::of_text(label),
                             Cell::ratio(s.precision),
                             Cell::ratio(s.recall),
                             Cell::ratio(s.f1),
                             Cell::integer(static_cast<long long>(s.correct)),
                             Cell::integer(static_cast<long long>(s.predicted)),
                             Cell::integer(static_cast<long long>(s.truths))};
  };
  for (const auto& [project, s] : score.per_project) t.rows.push_back(row(project.empty() ? "(none)" : project, s));
  t.rows.push_back(row("Total", score.total));
  return t;
}

Table near_miss_table(const OracleScore& score) {
  Table t;
  t.title = "Near misses (expressions match, condition differs)";
  t.columns = {"Method", "Predicted", "Ground truth"};
  for (const auto& [pred, truth] : score.near_misses) {
    GroundTruthOracle tr = truth;
    OracleSpec as_spec{tr.condition, tr.lhs, tr.rhs, tr.method_id, 0};
    t.rows.push_back({Cell::of_text(pred.method_id), Cell::of_text(serialize(pred)), Cell::of_text(serialize(as_spec))});
  }
  return t;
}

namespace {

Table oracle_listing(const std::vector<OracleSpec>& oracles) {
  Table t;
  t.title = "Generated oracles";
  t.columns = {"Method", "Oracle"};
  for (const auto& o : oracles) t.rows.push_back({Cell::of_text(o.method_id), Cell::of_text(serialize(o))});
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

std::map<std::string, CoverageMap> parse_method_coverage_csv(const std::string& csv) {
  std::map<std::string, CoverageMap> out;
  std::size_t n = 0;
  for (std::string_view line : text::split_lines(csv)) {
    ++n;
    if (text::is_blank(line)) continue;
    const auto f = text::parse_csv_record(line);
    if (n == 1 && !f.empty() && f[0] == "method_id") continue;
    if (f.size() != 4) throw Error(ErrorCode::UnparseableReport, "coverage map row " + std::to_string(n) + " needs 4 fields");
    try {
      const int ln = std::stoi(f[2]);
      const std::string flag(text::trim(f[3]));
      if (flag != "0" && flag != "1") throw std::invalid_argument("flag");
      out[f[0]].set(std::string(text::trim(f[1])), ln, flag == "1");
    } catch (const std::exception&) {
      throw Error(ErrorCode::UnparseableReport, "coverage map row " + std::to_string(n) + " is malformed");
    }
  }
  return out;
}

std::vector<MethodCoverageRow> testgen_rows(const std::vector<RunRecord>& records,
                                            const std::map<std::string, CoverageMap>* baseline) {
  std::vector<MethodCoverageRow> out;
  for (const auto& r : records) {
    if (r.instance.task != ToolTask::TestGen || !r.instance.context.count("method_id")) continue;
    ToolCoverage fslm;
    fslm.map = r.coverage;
    int tests = 0, lines = 0;
    for (const auto& a : r.artifacts)
      if (const auto* t = std::get_if<TestCandidate>(&a)) {
        ++tests;
        lines += test_size_lines(t->body);
      }
    fslm.compiling_tests = tests;
    fslm.mean_test_size = tests ? static_cast<int>(std::lround(static_cast<double>(lines) / tests)) : 0;

    std::vector<std::pair<std::string, ToolCoverage>> tools{{"FSLM", fslm}};
    if (baseline) {
      ToolCoverage base;
      if (const auto it = baseline->find(r.instance.context.at("method_id")); it != baseline->end())
        base.map = it->second.restricted_to(r.instance.path);
      tools.emplace_back("Baseline", base);
    }
    MethodCoverageRow row;
    row.project = r.instance.context.count("project") ? r.instance.context.at("project") : "";
    row.method = r.instance.context.count("signature") ? r.instance.context.at("signature") : r.instance.id;
    row.table = coverage_report(tools);
    out.push_back(std::move(row));
  }
  return out;
}

Table testgen_table(const std::vector<MethodCoverageRow>& rows, bool with_baseline) {
  Table t;
  t.title = "Test generation";
  t.columns = {"Project", "Method", "CT", "TS", "LC"};
  if (with_baseline) t.columns.push_back("Baseline LC");
  t.columns.push_back("Combined LC");

  auto lc = [](const std::optional<double>& v) { return v ? Cell::percent(*v) : Cell::missing(); };
  long long ct = 0, weighted_ts = 0;
  std::size_t instrumented = 0, fslm_cov = 0, base_cov = 0, combined_cov = 0;
  bool any_map = false;
  for (const auto& r : rows) {
    const CoverageRow& f = r.table.tools.at(0);
    std::vector<Cell> row{Cell::of_text(r.project), Cell::of_text(r.method),
                          Cell::integer(f.compiling_tests.value_or(0)), Cell::integer(f.mean_test_size.value_or(0)),
                          lc(f.line_coverage)};
    if (with_baseline) row.push_back(lc(r.table.tools.at(1).line_coverage));
    row.push_back(lc(r.table.combined));
    t.rows.push_back(std::move(row));

    ct += f.compiling_tests.value_or(0);
    weighted_ts += static_cast<long long>(f.compiling_tests.value_or(0)) * f.mean_test_size.value_or(0);
    if (r.table.combined) {
      any_map = true;
      instrumented += r.table.instrumented;
      combined_cov += r.table.combined_covered;
      fslm_cov += f.covered_lines;
      if (with_baseline) base_cov += r.table.tools.at(1).covered_lines;
    }
  }
  if (!rows.empty()) {
    auto pooled = [&](std::size_t covered) {
      return any_map && instrumented ? Cell::percent(static_cast<double>(covered) / static_cast<double>(instrumented))
                                     : Cell::missing();
    };
    std::vector<Cell> total{Cell::of_text("Total"), Cell::of_text(""), Cell::integer(ct),
                            Cell::integer(ct ? std::llround(static_cast<double>(weighted_ts) / static_cast<double>(ct)) : 0),
                            pooled(fslm_cov)};
    if (with_baseline) total.push_back(pooled(base_cov));
    total.push_back(pooled(combined_cov));
    t.rows.push_back(std::move(total));
  }
  return t;
}

std::pair<std::size_t, std::size_t> pooled_coverage(const std::vector<RunRecord>& records) {
  std::size_t covered = 0, instrumented = 0;
  for (const auto& r : records)
    if (r.coverage) {
      covered += r.coverage->covered();
      instrumented += r.coverage->instrumented();
    }
  return {covered, instrumented};
}

// ---------------------------------------------------------------------------

ReportInputs load_report_inputs(const TaskConfig& config) {
  ReportInputs in;
  if (!config.baseline_mutants.empty()) in.baseline_mutants = parse_baseline_mutants(text::read_file(config.baseline_mutants));
  if (!config.ground_truth.empty()) in.ground_truth = parse_ground_truth(text::read_file(config.ground_truth));
  if (!config.coverage_map.empty()) in.baseline_coverage = parse_method_coverage_csv(text::read_file(config.coverage_map));
  return in;
}

Report build_report(ToolTask task, PromptVariant variant, const std::vector<RunRecord>& records,
                    const ReportInputs& inputs) {
  Report report;
  switch (task) {
    case ToolTask::Mutation: {
      const auto stats = mutation_stats(records, inputs.baseline_mutants ? &*inputs.baseline_mutants : nullptr);
      report.tables.push_back(mutation_table({{variant_label(variant), stats}}));
      break;
    }
    case ToolTask::OracleGen: {
      const auto oracles = collect_oracles(records);
      if (inputs.ground_truth) {
        const auto score = score_oracles(oracles, *inputs.ground_truth);
        report.tables.push_back(oracle_table(score));
        report.tables.push_back(near_miss_table(score));
      }
      report.tables.push_back(oracle_listing(oracles));
      break;
    }
    case ToolTask::TestGen: {
      const auto rows = testgen_rows(records, inputs.baseline_coverage ? &*inputs.baseline_coverage : nullptr);
      report.tables.push_back(testgen_table(rows, inputs.baseline_coverage.has_value()));
      break;
    }
  }
  return report;
}

}  // namespace promptforge
