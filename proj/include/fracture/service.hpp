#pragma once

#include "fracture/artifact.hpp"
#include "fracture/impact.hpp"
#include "fracture/mesh.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace fracture {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Read-only HTTP front end over one loaded artifact.
///
///   GET  /api/mesh          mesh, base-piece labels, bounding box
///   GET  /api/modes/{i}     per-element field and energy of mode i (1-based)
///   POST /api/impact        {point, normal, sigma?, method?, magnitude?}
///
/// Every endpoint answers 503 until `load` has finished. Handlers only read
/// shared state, so requests are served concurrently without locks.
class Service {
 public:
  Service();
  ~Service();

  void load(Mesh mesh, ModesArtifact artifact, CacheOptions options = {});
  bool ready() const { return ready_.load(std::memory_order_acquire); }
  /// API requests answered since construction, including error replies.
  std::uint64_t requests() const { return requests_.load(std::memory_order_relaxed); }

  HttpResponse get_mesh() const;
  HttpResponse get_mode(int index) const;
  HttpResponse post_impact(const std::string& body) const;

  /// Serve static files (the UI) from `directory` at `/`.
  void mount_static(const std::string& directory);

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until `stop`.
  void run();
  void stop();

 private:
  struct State;
  struct Server;

  std::shared_ptr<const State> state_;
  std::atomic<bool> ready_{false};
  mutable std::atomic<std::uint64_t> requests_{0};
  std::unique_ptr<Server> server_;
};

}  // namespace fracture
