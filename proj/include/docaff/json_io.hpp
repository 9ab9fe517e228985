#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "docaff/clustering.hpp"
#include "docaff/constraints.hpp"
#include "docaff/document.hpp"
#include "docaff/edits.hpp"
#include "docaff/model.hpp"
#include "docaff/refine.hpp"
#include "docaff/synth.hpp"

namespace docaff {

using Json = nlohmann::json;

// Parses JSON text; throws ParseError naming `what` on malformed input.
Json parse_json(std::string_view text, const std::string& what = "body");

// Document file format, extended with line ids and lines when present.
Json document_to_json(const DocumentModel& doc);
// Inverse of document_to_json for already-validated documents (keeps lines).
DocumentModel document_from_json(const Json& j);

Json style_to_json(const StyleAttrs& s);
StyleAttrs style_from_json(const Json& j, const std::string& field);

// {"clusters": [{"id", "word_ids"}]}
Json clusters_to_json(const ClusterAssignment& assignment);
ClusterAssignment clusters_from_json(const Json& j);

// {"points": [{"word_id", "xy": [x, y], "cluster_id"}]}; rows follow word_ids.
Json projection_to_json(const std::vector<int>& word_ids, const Eigen::MatrixXd& projection,
                        const ClusterAssignment& assignment);

Json constraint_to_json(const Constraint& c);
Constraint constraint_from_json(const Json& j);
// One {i, j, kind, source} object per line.
std::string constraints_jsonl(std::span<const Constraint> constraints);
Json constraint_stats_to_json(const ConstraintStats& stats);

Json train_report_to_json(const TrainReport& report);
TrainReport train_report_from_json(const Json& j);

// {"kind": "MUST_GROUP", "word_ids": [...]} or
// {"kind": "CANNOT_GROUP", "group_a": [...], "group_b": [...]}
UserSelection selection_from_json(const Json& j);
Json selection_to_json(const UserSelection& sel);

// {"op": "TIME_SHIFT", "delta_minutes": 60}, ...
EditSpec edit_spec_from_json(const Json& j);
Json edit_spec_to_json(const EditSpec& spec);
Json edit_entry_to_json(const EditLogEntry& entry);
EditLogEntry edit_entry_from_json(const Json& j);

// {"template", "seed", "items", optional layout fields and "categories"}.
SynthSpec synth_spec_from_json(const Json& j);
Json synth_spec_to_json(const SynthSpec& spec);
// {"documents": [synth spec...]}
std::vector<SynthSpec> corpus_from_json(const Json& j);
Json ground_truth_to_json(const GroundTruth& truth);
Json benchmark_to_json(const BenchmarkReport& report);

// Accepts either a flat {"train.epochs": 10} object or nested sections
// {"train": {"epochs": 10}}; values may be strings, numbers or booleans.
void apply_config_overrides(PipelineConfig& cfg, const Json& overrides);

}  // namespace docaff
