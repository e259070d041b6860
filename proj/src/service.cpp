#include "heatpat/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <array>
#include <iostream>
#include <sstream>

#include "heatpat/artifacts.hpp"
#include "heatpat/error.hpp"
#include "heatpat/pipeline.hpp"

namespace heatpat {

using nlohmann::json;

namespace {

struct Route {
  std::string_view path;
  std::string_view file;
  bool required;
};

constexpr std::array kRoutes = {
    Route{"/api/manifest", store::kManifest, true},
    Route{"/api/profiles", store::kProfiles, true},
    Route{"/api/models/initial", store::kModelInitial, true},
    Route{"/api/models/final", store::kModelFinal, true},
    Route{"/api/anomalies", store::kAnomalyReport, true},
    Route{"/api/anomalies/final", store::kAnomalyReportFinal, true},
    Route{"/api/sweep", store::kSweepJson, false},
    Route{"/api/suggestions", store::kSuggestions, false},
};

ServiceResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, "application/json", json{{"error", code}, {"message", message}}.dump() + "\n"};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::StaleLabeling: return 409;
    case ErrorCode::MissingArtifact: return 404;
    case ErrorCode::ParseError:
    case ErrorCode::InputError:
    case ErrorCode::MissingMetadata: return 400;
    default: return 500;
  }
}

}  // namespace

ArtifactService::ArtifactService(std::filesystem::path store) : store_(std::move(store)) {
  for (const auto& r : kRoutes) {
    if (r.required && !std::filesystem::exists(store_ / std::string(r.file))) {
      throw Error(ErrorCode::MissingArtifact, "store " + store_.string() + " has no " + std::string(r.file));
    }
  }
  model_ = model_from_json(read_text_file(store_ / std::string(store::kModelFinal)));
  fingerprint_ = model_fingerprint(model_);
  (void)profiles_from_json(read_text_file(store_ / std::string(store::kProfiles)), &categories_);
  const auto labeling_path = store_ / std::string(store::kLabeling);
  labeling_ = std::filesystem::exists(labeling_path) ? load_labeling(labeling_path, model_) : unlabeled(model_);
  flags_ = flag_unsuitable(model_, labeling_, categories_);
}

std::string ArtifactService::flags_json() const {
  json rows = json::array();
  for (const auto& f : flags_) {
    rows.push_back({{"building_id", f.building_id},
                    {"category", to_string(f.category)},
                    {"cluster", f.cluster},
                    {"strategy", to_string(f.strategy)},
                    {"verdict", to_string(f.outcome.verdict)},
                    {"rule", f.outcome.rule ? json(to_string(*f.outcome.rule)) : json(nullptr)}});
  }
  const auto summary = summarize(flags_);
  json by_strategy = json::object();
  for (auto s : {ControlStrategy::COC, ControlStrategy::NSB, ControlStrategy::TCO7, ControlStrategy::TCO5}) {
    by_strategy[std::string(to_string(s))] = summary.strategy_total(s);
  }
  json by_category = json::object();
  for (auto c : kAllCategories) by_category[std::string(to_string(c))] = summary.category_total(c);
  json doc;
  doc["fingerprint"] = fingerprint_;
  doc["unsuitable"] = {{"total", summary.total()}, {"by_strategy", by_strategy}, {"by_category", by_category}};
  doc["flags"] = std::move(rows);
  return doc.dump(1) + "\n";
}

ServiceResponse ArtifactService::get(std::string_view path) {
  if (path == "/api/labeling") {
    std::lock_guard lock(mutex_);
    return {200, "application/json", labeling_to_json(labeling_)};
  }
  if (path == "/api/flags") {
    std::lock_guard lock(mutex_);
    return {200, "application/json", flags_json()};
  }
  if (path == "/api/flags.csv") {
    std::lock_guard lock(mutex_);
    return {200, "text/csv", flags_csv(flags_)};
  }
  for (const auto& r : kRoutes) {
    if (r.path == path) {
      const auto file = store_ / std::string(r.file);
      if (!std::filesystem::exists(file)) {
        return error_response(404, "MissingArtifact", "this run produced no " + std::string(r.file));
      }
      return {200, "application/json", read_text_file(file)};
    }
  }
  return error_response(404, "NotFound", "no route " + std::string(path));
}

ServiceResponse ArtifactService::put_labeling(std::string_view body) {
  try {
    auto labeling = labeling_from_json(body);
    if (labeling.fingerprint != fingerprint_) {
      return error_response(409, "StaleLabeling",
                            "labeling is for model " + labeling.fingerprint + ", current model is " + fingerprint_);
    }
    if (labeling.clusters.size() != model_.k) {
      return error_response(400, "ParseError",
                            "labeling covers " + std::to_string(labeling.clusters.size()) + " clusters, model has " +
                                std::to_string(model_.k));
    }
    auto flags = flag_unsuitable(model_, labeling, categories_);
    std::lock_guard lock(mutex_);
    save_labeling(store_ / std::string(store::kLabeling), labeling, true);
    write_text_file(store_ / std::string(store::kFlags), flags_csv(flags));
    labeling_ = std::move(labeling);
    flags_ = std::move(flags);
    return {200, "application/json", flags_json()};
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  }
}

ServiceResponse ArtifactService::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (method == "GET") return get(path);
    if (method == "PUT" && path == "/api/labeling") return put_labeling(body);
    return error_response(405, "MethodNotAllowed", std::string(method) + " " + std::string(path));
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  }
}

void ArtifactService::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/api/.*)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle("GET", req.path));
  });
  server.Put("/api/labeling", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle("PUT", req.path, req.body));
  });
}

bool serve(const std::filesystem::path& store, const std::string& host, int port) {
  ArtifactService service(store);
  httplib::Server server;
  service.mount(server);
  std::cerr << "serving " << store.string() << " on http://" << host << ':' << port << "\n";
  return server.listen(host, port);
}

}  // namespace heatpat
