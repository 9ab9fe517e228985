#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "docaff/edits.hpp"
#include "docaff/json_io.hpp"
#include "docaff/pipeline.hpp"
#include "docaff/service.hpp"
#include "docaff/synth.hpp"

namespace fs = std::filesystem;
using namespace docaff;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'", "path");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

struct ConfigArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed for every stochastic stage");
    app->add_option("--set", overrides, "config override key=value (repeatable)");
  }

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_file(config_path));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'", "set");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.set_seed(*seed);
    cfg.check();
    return cfg;
  }
};

std::unique_ptr<HttpService> g_service;

extern "C" void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"docaff: learned word affinities and semantic grouping for document images"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the full pipeline on one document");
  std::string run_doc;
  std::string run_out = "out";
  ConfigArgs run_cfg;
  run->add_option("document", run_doc, "document JSON file")->required();
  run->add_option("--out", run_out, "output directory");
  run_cfg.attach(run);

  auto* bench = app.add_subcommand("bench", "benchmark a synthetic corpus");
  std::string bench_corpus;
  std::string bench_out = "bench-out";
  ConfigArgs bench_cfg;
  bench->add_option("corpus", bench_corpus, "corpus JSON file")->required();
  bench->add_option("--out", bench_out, "output directory");
  bench_cfg.attach(bench);

  auto* synth = app.add_subcommand("synth", "generate a synthetic document with ground truth");
  std::string synth_spec;
  std::optional<std::uint64_t> synth_seed;
  std::string synth_out = "synth-out";
  synth->add_option("spec", synth_spec, "synthetic spec JSON file")->required();
  synth->add_option("--seed", synth_seed, "generator seed (overrides the spec)");
  synth->add_option("--out", synth_out, "output directory");

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  ServiceOptions serve_opts;
  std::string host = "127.0.0.1";
  int port = 8080;
  int timeout_s = 120;
  ConfigArgs serve_cfg;
  serve->add_option("--port", port, "listen port")->envname("DOCAFF_PORT");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--data-dir", serve_opts.data_dir, "session storage directory")->envname("DOCAFF_DATA_DIR");
  serve->add_option("--cors-origin", serve_opts.cors_origin, "Access-Control-Allow-Origin value");
  serve->add_option("--run-timeout", timeout_s, "seconds before run/refine answer 202");
  serve_cfg.attach(serve);

  auto* dump = app.add_subcommand("constraints", "print the automatic constraints as JSON lines");
  std::string dump_doc;
  ConfigArgs dump_cfg;
  dump->add_option("document", dump_doc, "document JSON file")->required();
  dump_cfg.attach(dump);

  auto* render = app.add_subcommand("render", "render a document (and optional clusters) to SVG");
  std::string render_doc;
  std::string render_clusters;
  std::string render_out = "render.svg";
  double render_width = 1000.0;
  render->add_option("document", render_doc, "document JSON file")->required();
  render->add_option("--clusters", render_clusters, "clusters.json to overlay")->check(CLI::ExistingFile);
  render->add_option("--out", render_out, "output SVG path");
  render->add_option("--width", render_width, "page width in pixels");

  auto* config = app.add_subcommand("config", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const PipelineConfig cfg = run_cfg.load();
      IngestResult ingest = ingest_document(read_file(run_doc));
      for (const auto& w : ingest.warnings) std::cerr << "warning: " << w << '\n';
      const RefineSession s = run_pipeline(std::move(ingest.doc), cfg);
      fs::create_directories(run_out);
      const fs::path out(run_out);
      write_file(out / "clusters.json", clusters_to_json(s.assignment).dump(1) + "\n");
      write_file(out / "projection.json",
                 projection_to_json(s.reps.word_ids, s.projection, s.assignment).dump(1) + "\n");
      Json report{{"doc_id", s.doc.doc_id},
                  {"words", s.doc.words.size()},
                  {"lines", s.doc.lines.size()},
                  {"clusters", s.assignment.cluster_count()},
                  {"constraints", constraint_stats_to_json(s.auto_constraints.stats)},
                  {"train", train_report_to_json(s.report)},
                  {"warnings", ingest.warnings},
                  {"config", format_config(cfg)}};
      write_file(out / "report.json", report.dump(1) + "\n");
      PagePx page{1000.0, 1000.0 / s.doc.aspect_ratio};
      write_file(out / "render.svg", render_svg(s.doc, &s.assignment, page));
      std::ostringstream model;
      save_checkpoint(s.model, model);
      write_file(out / "model.bin", model.str());
      write_file(out / "constraints.jsonl", constraints_jsonl(s.auto_constraints.constraints));
      std::cout << s.doc.words.size() << " words, " << s.doc.lines.size() << " lines, "
                << s.assignment.cluster_count() << " clusters -> " << run_out << '\n';
    } else if (*bench) {
      const PipelineConfig cfg = bench_cfg.load();
      const auto corpus = corpus_from_json(parse_json(read_file(bench_corpus), bench_corpus));
      fs::create_directories(bench_out);
      const BenchmarkReport report = run_benchmark(corpus, cfg);
      write_file(fs::path(bench_out) / "bench.csv", benchmark_csv(report));
      write_file(fs::path(bench_out) / "bench.json", benchmark_to_json(report).dump(1) + "\n");
      for (const auto& t : report.summaries) {
        std::cout << t.template_name << ": " << t.documents << " docs, mean purity " << t.mean_purity
                  << ", mean words " << t.mean_words;
        for (const auto& [category, n] : t.mean_scribbles) std::cout << ", " << category << "=" << n;
        std::cout << '\n';
      }
      std::cout << "mean purity " << report.mean_purity << ", total " << report.total_seconds << " s\n";
    } else if (*synth) {
      SynthSpec spec = synth_spec_from_json(parse_json(read_file(synth_spec), synth_spec));
      if (synth_seed) {
        Json j = synth_spec_to_json(spec);
        j["seed"] = *synth_seed;
        spec = synth_spec_from_json(j);
      }
      const SynthDocument generated = generate_document(spec);
      fs::create_directories(synth_out);
      write_file(fs::path(synth_out) / "document.json", document_to_json(generated.doc).dump(1) + "\n");
      write_file(fs::path(synth_out) / "truth.json", ground_truth_to_json(generated.truth).dump(1) + "\n");
      std::cout << generated.doc.words.size() << " words -> " << synth_out << '\n';
    } else if (*serve) {
      serve_opts.base_config = serve_cfg.load();
      serve_opts.run_timeout = std::chrono::seconds(timeout_s);
      g_service = std::make_unique<HttpService>(serve_opts);
      const int bound = g_service->bind(host, port);
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (data in " << serve_opts.data_dir << ")"
                << std::endl;
      g_service->listen();
      g_service.reset();
    } else if (*dump) {
      const PipelineConfig cfg = dump_cfg.load();
      const RefineSession s = prepare_session(ingest_document(read_file(dump_doc)).doc, cfg);
      std::cout << constraints_jsonl(s.auto_constraints.constraints);
    } else if (*render) {
      IngestResult ingest = ingest_document(read_file(render_doc));
      std::optional<ClusterAssignment> clusters;
      if (!render_clusters.empty()) clusters = clusters_from_json(parse_json(read_file(render_clusters)));
      const PagePx page{render_width, render_width / ingest.doc.aspect_ratio};
      write_file(render_out, render_svg(ingest.doc, clusters ? &*clusters : nullptr, page));
    } else if (*config) {
      std::cout << format_config(PipelineConfig{});
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
