#include "docaff/pipeline.hpp"

namespace docaff {

RefineSession prepare_session(DocumentModel doc, const PipelineConfig& cfg) {
  cfg.check();
  validate(doc);
  RefineSession s;
  s.config = cfg;
  build_contextual_lines(doc, cfg.lines);
  s.doc = std::move(doc);
  s.reps = assemble_representations(s.doc, cfg.features);
  s.auto_constraints = generate_constraints(s.doc, style_matrix(s.doc, cfg.features), cfg.constraints);
  const LayerDims dims{s.reps.dim(), cfg.train.hidden1, cfg.train.hidden2, cfg.train.latent_dim};
  s.model = init_model<PipelineScalar>(dims, cfg.train.seed, cfg.train.init_std);
  return s;
}

void recluster(RefineSession& session) {
  session.latents = embed_all(session.model, session.reps);
  const auto graph = build_line_graph(session.doc, session.latents, session.config.cluster);
  session.assignment = connected_components(graph, session.doc);
  session.projection = project_2d(session.latents);
}

RefineSession run_pipeline(DocumentModel doc, const PipelineConfig& cfg) {
  RefineSession s = prepare_session(std::move(doc), cfg);
  s.report = train(s.model, s.reps, s.auto_constraints.constraints, cfg.train);
  s.trained = true;
  recluster(s);
  return s;
}

}  // namespace docaff
