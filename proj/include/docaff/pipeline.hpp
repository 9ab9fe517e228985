#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "docaff/clustering.hpp"
#include "docaff/config.hpp"
#include "docaff/constraints.hpp"
#include "docaff/document.hpp"
#include "docaff/features.hpp"
#include "docaff/model.hpp"

namespace docaff {

// The pipeline trains in single precision; the single-core training budget
// dominates end-to-end runtime.
using PipelineScalar = float;
using PipelineModel = EmbeddingModel<PipelineScalar>;

struct RefineRecord {
  int epochs = 0;
  std::size_t user_constraints = 0;
  std::size_t training_constraints = 0;
  std::size_t clusters = 0;
  TrainReport report;
};

// State of one document through the pipeline and its refinement rounds.
struct RefineSession {
  DocumentModel doc;  // with contextual lines
  PipelineConfig config;
  Representations reps;
  PipelineModel model;
  ConstraintSet auto_constraints;
  std::vector<Constraint> user_constraints;
  TrainReport report;  // initial training
  Eigen::MatrixXd latents;
  Eigen::MatrixXd projection;
  ClusterAssignment assignment;
  std::vector<RefineRecord> history;
  bool trained = false;
};

// Lines, features, constraints and an initialized (untrained) model.
RefineSession prepare_session(DocumentModel doc, const PipelineConfig& cfg);

// Embeds every word with the current model, rebuilds the line graph, the
// clusters and the 2-D projection.
void recluster(RefineSession& session);

// prepare_session + training + recluster.
RefineSession run_pipeline(DocumentModel doc, const PipelineConfig& cfg);

}  // namespace docaff
