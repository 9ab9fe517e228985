#include <chrono>
#include <iomanip>
#include <sstream>

#include "docaff/pipeline.hpp"
#include "docaff/synth.hpp"

namespace docaff {

BenchmarkReport run_benchmark(const std::vector<SynthSpec>& corpus, const PipelineConfig& cfg) {
  BenchmarkReport report;
  std::map<std::string, std::vector<const BenchmarkRow*>> by_template;
  std::map<std::string, std::pair<double, int>> scribble_acc;
  report.rows.reserve(corpus.size());
  for (const auto& spec : corpus) {
    const auto start = std::chrono::steady_clock::now();
    SynthDocument synth = generate_document(spec);
    const RefineSession s = run_pipeline(std::move(synth.doc), cfg);
    BenchmarkRow row;
    row.template_name = std::string(to_string(spec.kind));
    row.seed = spec.seed;
    row.words = s.doc.words.size();
    row.lines = s.doc.lines.size();
    row.clusters = s.assignment.cluster_count();
    row.constraints = s.auto_constraints.constraints.size();
    row.purity = purity(s.assignment, synth.truth);
    for (const auto& category : synth.truth.categories()) {
      const int n = scribble_estimate(s.assignment, synth.truth, category);
      row.scribbles[category] = n;
      auto& acc = scribble_acc[category];
      acc.first += n;
      ++acc.second;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.total_seconds += row.seconds;
    report.rows.push_back(std::move(row));
  }
  for (const auto& row : report.rows) by_template[row.template_name].push_back(&row);

  double purity_sum = 0.0;
  for (const auto& row : report.rows) purity_sum += row.purity;
  if (!report.rows.empty()) report.mean_purity = purity_sum / static_cast<double>(report.rows.size());
  for (const auto& [category, acc] : scribble_acc) report.mean_scribbles[category] = acc.first / acc.second;

  for (const auto& [name, rows] : by_template) {
    TemplateSummary t;
    t.template_name = name;
    t.documents = rows.size();
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto* row : rows) {
      t.mean_purity += row->purity;
      t.mean_words += static_cast<double>(row->words);
      t.mean_seconds += row->seconds;
      for (const auto& [category, n] : row->scribbles) {
        acc[category].first += n;
        ++acc[category].second;
      }
    }
    const double n = static_cast<double>(rows.size());
    t.mean_purity /= n;
    t.mean_words /= n;
    t.mean_seconds /= n;
    for (const auto& [category, a] : acc) t.mean_scribbles[category] = a.first / a.second;
    report.summaries.push_back(std::move(t));
  }
  return report;
}

std::string benchmark_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "template,seed,words,lines,clusters,constraints,purity,scribbles,seconds\n";
  for (const auto& row : report.rows) {
    os << row.template_name << ',' << row.seed << ',' << row.words << ',' << row.lines << ',' << row.clusters << ','
       << row.constraints << ',' << row.purity << ',';
    bool first = true;
    for (const auto& [category, n] : row.scribbles) {
      os << (first ? "" : ";") << category << '=' << n;
      first = false;
    }
    os << ',' << row.seconds << '\n';
  }
  return os.str();
}

}  // namespace docaff
