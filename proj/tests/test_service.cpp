#include <doctest.h>

#include <thread>

#include "docaff/json_io.hpp"
#include "docaff/service.hpp"
#include "fixtures.hpp"

// after Eigen: the resolver header defines a macro named _res
#include <httplib.h>

using namespace docaff;

namespace {

const char* kFastRun = R"({"config":{"train.epochs":15,"train.hidden2":200,"seed":4}})";

HttpResponse call(ServiceCore& core, std::string method, std::string path, std::string body = {},
                  std::map<std::string, std::string> query = {}) {
  return core.handle({std::move(method), std::move(path), std::move(query), std::move(body)});
}

std::string sample_document() {
  const auto generated = docaff::testing::small_menu(5, 5);
  return document_to_json(generated.doc).dump();
}

std::string upload(ServiceCore& core) {
  const auto r = call(core, "POST", "/documents", sample_document());
  REQUIRE(r.status == 201);
  return parse_json(r.body)["doc_id"].get<std::string>();
}

}  // namespace

TEST_CASE("service state machine and errors") {
  docaff::testing::TempDir dir("svc");
  ServiceOptions opts;
  opts.data_dir = dir.path().string();
  ServiceCore core(opts);

  CHECK(call(core, "GET", "/health").status == 200);
  CHECK(call(core, "GET", "/documents/nope").status == 404);
  CHECK(call(core, "GET", "/elsewhere").status == 404);
  const auto bad = call(core, "POST", "/documents", R"({"doc_id":"x","aspect_ratio":1,"words":[{"id":1}]})");
  CHECK(bad.status == 422);
  CHECK(parse_json(bad.body)["field"] == "words[0].text");

  const std::string id = upload(core);
  CHECK(id == "d1");
  const auto early = call(core, "GET", "/documents/" + id + "/clusters");
  CHECK(early.status == 409);
  CHECK(parse_json(early.body)["code"] == "NOT_RUN");
  CHECK(call(core, "POST", "/documents/" + id + "/clusters").status == 405);
  CHECK(call(core, "POST", "/documents/" + id + "/refine", "{}").status == 409);

  const auto run = call(core, "POST", "/documents/" + id + "/run", kFastRun);
  REQUIRE(run.status == 200);
  const Json summary = parse_json(run.body)["summary"];
  CHECK(summary["clusters"].get<int>() >= 1);

  const Json clusters = parse_json(call(core, "GET", "/documents/" + id + "/clusters").body);
  const Json projection = parse_json(call(core, "GET", "/documents/" + id + "/projection").body);
  std::size_t words = 0;
  for (const auto& c : clusters["clusters"]) words += c["word_ids"].size();
  CHECK(projection["points"].size() == words);

  // A lasso of four words posts six must-links.
  std::vector<int> ids;
  for (const auto& p : projection["points"]) ids.push_back(p["word_id"].get<int>());
  Json lasso = Json::array({{{"kind", "MUST_GROUP"}, {"word_ids", {ids[0], ids[1], ids[2], ids[3]}}}});
  const auto added = call(core, "POST", "/documents/" + id + "/constraints", lasso.dump());
  REQUIRE(added.status == 200);
  CHECK(parse_json(added.body)["added"] == 6);

  const auto refined = call(core, "POST", "/documents/" + id + "/refine", R"({"epochs":2})");
  REQUIRE(refined.status == 200);
  CHECK(parse_json(refined.body)["user_constraints"] == 6);

  Json contradiction = Json::array({{{"kind", "CANNOT_GROUP"}, {"group_a", {ids[0]}}, {"group_b", {ids[1]}}}});
  const auto conflicted = call(core, "POST", "/documents/" + id + "/constraints", contradiction.dump());
  REQUIRE(conflicted.status == 200);
  CHECK(parse_json(conflicted.body)["conflicts"].size() == 1);
  const auto rejected = call(core, "POST", "/documents/" + id + "/refine", R"({"epochs":1})");
  CHECK(rejected.status == 422);
  const Json err = parse_json(rejected.body);
  CHECK(err["code"] == "CONSTRAINT_CONFLICT");
  CHECK(err["pairs"] == Json::array({{std::min(ids[0], ids[1]), std::max(ids[0], ids[1])}}));

  CHECK(call(core, "DELETE", "/documents/" + id + "/constraints").status == 200);
  const auto edit = call(core, "POST", "/documents/" + id + "/edits", R"({"cluster_id":0,"spec":{"op":"SET_WEIGHT","bold":true}})");
  REQUIRE(edit.status == 200);
  CHECK(parse_json(edit.body)["affected"].size() >= 1);
  CHECK(call(core, "POST", "/documents/" + id + "/edits", R"({"cluster_id":999,"op":"DELETE"})").status == 422);
  const auto svg = call(core, "GET", "/documents/" + id + "/render.svg", {}, {{"width", "500"}});
  CHECK(svg.status == 200);
  CHECK(svg.content_type == "image/svg+xml");
  CHECK(svg.body.find("width=\"500\"") != std::string::npos);
}

TEST_CASE("sessions survive a restart with identical reads") {
  docaff::testing::TempDir dir("persist");
  ServiceOptions opts;
  opts.data_dir = dir.path().string();
  std::vector<std::string> paths;
  std::vector<std::string> bodies;
  {
    ServiceCore core(opts);
    const std::string id = upload(core);
    REQUIRE(call(core, "POST", "/documents/" + id + "/run", kFastRun).status == 200);
    Json sel = Json::array({{{"kind", "CANNOT_GROUP"}, {"group_a", {0}}, {"group_b", {1}}}});
    REQUIRE(call(core, "POST", "/documents/" + id + "/constraints", sel.dump()).status == 200);
    REQUIRE(call(core, "POST", "/documents/" + id + "/refine", R"({"epochs":2})").status == 200);
    REQUIRE(call(core, "POST", "/documents/" + id + "/edits", R"({"cluster_id":0,"op":"EMPHASIZE","intensity":0.5})")
                .status == 200);
    for (const char* what : {"", "/clusters", "/projection", "/edits", "/constraints", "/render.svg"}) {
      paths.push_back("/documents/" + id + what);
      bodies.push_back(call(core, "GET", paths.back()).body);
    }
    core.wait_idle();
  }
  ServiceCore restarted(opts);
  // Job records are in-memory only; everything else must match byte for byte.
  Json summary = parse_json(bodies[0]);
  summary.erase("jobs");
  Json reloaded = parse_json(call(restarted, "GET", paths[0]).body);
  CHECK(reloaded["jobs"].empty());
  reloaded.erase("jobs");
  CHECK(reloaded == summary);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    INFO(paths[i]);
    CHECK(call(restarted, "GET", paths[i]).body == bodies[i]);
  }
  CHECK(call(restarted, "POST", "/documents", sample_document()).status == 201);
  CHECK(parse_json(call(restarted, "GET", "/documents").body)["documents"].size() == 2);
}

TEST_CASE("long runs answer 202 and refuse concurrent mutations") {
  docaff::testing::TempDir dir("busy");
  ServiceOptions opts;
  opts.data_dir = dir.path().string();
  opts.run_timeout = std::chrono::milliseconds(0);
  ServiceCore core(opts);
  const std::string id = upload(core);
  const auto accepted = call(core, "POST", "/documents/" + id + "/run", R"({"train.epochs":60})");
  REQUIRE(accepted.status == 202);
  const Json handle = parse_json(accepted.body);
  const auto busy = call(core, "POST", "/documents/" + id + "/run", kFastRun);
  CHECK(busy.status == 409);
  CHECK(parse_json(busy.body)["code"] == "BUSY");
  core.wait_idle();
  const Json job = parse_json(call(core, "GET", handle["poll"].get<std::string>()).body);
  CHECK(job["status"] == "done");
  CHECK(job["http_status"] == 200);
  CHECK(call(core, "GET", "/documents/" + id + "/clusters").status == 200);
}

TEST_CASE("live HTTP server") {
  docaff::testing::TempDir dir("http");
  ServiceOptions opts;
  opts.data_dir = dir.path().string();
  HttpService service(opts);
  const int port = service.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { service.listen(); });

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto created = client.Post("/documents", sample_document(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = parse_json(created->body)["doc_id"].get<std::string>();
  const auto early = client.Get("/documents/" + id + "/projection");
  REQUIRE(early);
  CHECK(early->status == 409);
  const auto options = client.Options("/documents");
  REQUIRE(options);
  CHECK(options->status == 204);
  const auto svg = client.Get("/documents/" + id + "/render.svg?width=300");
  REQUIRE(svg);
  CHECK(svg->status == 200);
  CHECK(svg->body.find("width=\"300\"") != std::string::npos);

  service.stop();
  server.join();
}
