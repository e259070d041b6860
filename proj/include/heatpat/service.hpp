#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "heatpat/kshape.hpp"
#include "heatpat/meter_csv.hpp"
#include "heatpat/strategy.hpp"

namespace httplib {
class Server;
}

namespace heatpat {

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// HTTP face of an artifact store. Routing lives in `handle` so it can be
/// exercised without a socket.
///
///   GET /api/manifest | profiles | models/initial | models/final |
///       anomalies | anomalies/final | sweep | labeling | flags | flags.csv | suggestions
///   PUT /api/labeling
class ArtifactService {
 public:
  /// Throws MissingArtifact naming the first required file that is absent.
  explicit ArtifactService(std::filesystem::path store);

  ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body = {});

  /// Replaces the labeling when its fingerprint matches the final model, then
  /// rewrites flags.csv. 409 for a stale fingerprint, 400 for malformed input.
  ServiceResponse put_labeling(std::string_view body);

  void mount(httplib::Server& server);

  const std::filesystem::path& store() const { return store_; }

 private:
  ServiceResponse get(std::string_view path);
  std::string flags_json() const;

  std::filesystem::path store_;
  ClusterModel model_;
  std::string fingerprint_;
  CategoryTable categories_;
  std::mutex mutex_;  // guards labeling_ and flags_
  StrategyLabeling labeling_;
  std::vector<SuitabilityFlag> flags_;
};

/// Blocks until the server stops. Returns false if the address cannot be bound.
bool serve(const std::filesystem::path& store, const std::string& host, int port);

}  // namespace heatpat
