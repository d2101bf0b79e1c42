#include "fracture/service.hpp"

#include "fracture/error.hpp"
#include "fracture/log.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>

namespace fracture {

using nlohmann::json;

struct Service::State {
  Mesh mesh;
  ModesArtifact artifact;
  ProjectionCache cache;
  std::string mesh_document;
};

struct Service::Server {
  httplib::Server http;
};

namespace {

HttpResponse error_response(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

HttpResponse unavailable() { return error_response(503, "artifact is still loading"); }

std::vector<std::vector<double>> rows(const Field& field) {
  std::vector<std::vector<double>> out(field.rows());
  for (Eigen::Index r = 0; r < field.rows(); ++r) out[r].assign(field.row(r).data(), field.row(r).data() + field.cols());
  return out;
}

Eigen::VectorXd read_vector(const json& body, const char* key, int dimension) {
  if (!body.contains(key) || !body.at(key).is_array()) {
    throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be an array");
  }
  const json& array = body.at(key);
  if (static_cast<int>(array.size()) != dimension) {
    throw Error(ErrorCode::invalid_argument,
                std::string("'") + key + "' must have " + std::to_string(dimension) + " components");
  }
  Eigen::VectorXd out(dimension);
  for (int c = 0; c < dimension; ++c) {
    if (!array[c].is_number()) throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be numeric");
    out[c] = array[c].get<double>();
  }
  if (!out.allFinite()) throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be finite");
  return out;
}

}  // namespace

Service::Service() : server_(std::make_unique<Server>()) {
  httplib::Server& http = server_->http;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, const HttpResponse& out) {
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  http.Get("/api/mesh", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, get_mesh()); });
  http.Get(R"(/api/modes/(-?\d+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    int index = 0;
    try {
      index = std::stoi(req.matches[1].str());
    } catch (const std::exception&) {
      index = -1;
    }
    reply(res, get_mode(index));
  });
  http.Post("/api/impact",
            [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, post_impact(req.body)); });
}

Service::~Service() { stop(); }

void Service::load(Mesh mesh, ModesArtifact artifact, CacheOptions options) {
  ready_.store(false, std::memory_order_release);
  ProjectionCache cache = build_projection_cache(artifact, mesh, options);
  const BoundingBox box = bounding_box(mesh);
  std::vector<std::vector<double>> vertices(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    vertices[v].assign(mesh.vertices.row(v).data(), mesh.vertices.row(v).data() + mesh.dimension());
  }
  std::vector<std::vector<int>> elements(mesh.num_elements());
  for (int f = 0; f < mesh.num_elements(); ++f) {
    elements[f].assign(mesh.elements.row(f).data(), mesh.elements.row(f).data() + mesh.dimension() + 1);
  }
  json doc = {
      {"dimension", mesh.dimension()},
      {"vertices", vertices},
      {"elements", elements},
      {"piece_labels", cache.pieces().labels},
      {"piece_count", cache.pieces().count},
      {"bounding_box",
       {{"min", std::vector<double>(box.min.data(), box.min.data() + box.min.size())},
        {"max", std::vector<double>(box.max.data(), box.max.data() + box.max.size())}}},
      {"num_modes", artifact.modes.k()},
      {"energies", artifact.modes.energies},
      {"tau", options.tau},
  };
  auto state = std::make_shared<State>(State{std::move(mesh), std::move(artifact), std::move(cache), doc.dump()});
  std::atomic_store(&state_, std::shared_ptr<const State>(std::move(state)));
  ready_.store(true, std::memory_order_release);
}

HttpResponse Service::get_mesh() const {
  requests_.fetch_add(1, std::memory_order_relaxed);
  if (!ready()) return unavailable();
  return {200, std::atomic_load(&state_)->mesh_document};
}

HttpResponse Service::get_mode(int index) const {
  requests_.fetch_add(1, std::memory_order_relaxed);
  if (!ready()) return unavailable();
  const auto state = std::atomic_load(&state_);
  const FractureModes& modes = state->artifact.modes;
  if (index < 1 || index > modes.k()) {
    return error_response(404, "mode index must be in 1.." + std::to_string(modes.k()));
  }
  json doc = {
      {"index", index},
      {"energy", modes.energies[index - 1]},
      {"objective", modes.objectives[index - 1]},
      {"dimension", modes.dimension},
      {"field", rows(modes.fields[index - 1])},
  };
  return {200, doc.dump()};
}

HttpResponse Service::post_impact(const std::string& body) const {
  requests_.fetch_add(1, std::memory_order_relaxed);
  if (!ready()) return unavailable();
  const auto started = std::chrono::steady_clock::now();
  const auto state = std::atomic_load(&state_);
  const int d = state->mesh.dimension();
  ImpactQuery query;
  try {
    const json request = json::parse(body);
    if (!request.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
    query.point = read_vector(request, "point", d);
    query.normal = read_vector(request, "normal", d);
    const double length = query.normal.norm();
    if (!(length > 0.0)) throw Error(ErrorCode::invalid_argument, "'normal' must be nonzero");
    query.normal /= length;
    if (request.contains("sigma")) {
      if (!request.at("sigma").is_number()) throw Error(ErrorCode::invalid_argument, "'sigma' must be numeric");
      query.sigma = request.at("sigma").get<double>();
    }
    if (request.contains("magnitude")) {
      if (!request.at("magnitude").is_number()) throw Error(ErrorCode::invalid_argument, "'magnitude' must be numeric");
      query.magnitude = request.at("magnitude").get<double>();
    }
    if (request.contains("method")) {
      if (!request.at("method").is_string()) throw Error(ErrorCode::invalid_argument, "'method' must be a string");
      query.method = parse_impact_method(request.at("method").get<std::string>());
    }
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }

  FracturePattern pattern;
  try {
    pattern = state->cache.apply(query);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::off_body) return error_response(422, e.what());
    if (e.code() == ErrorCode::invalid_argument) return error_response(400, e.what());
    return error_response(500, e.what());
  }
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  json doc = {
      {"labels", pattern.labels},
      {"fragment_count", pattern.count},
      {"fragment_translations", rows(pattern.translations)},
      {"sigma", query.sigma},
      {"method", to_string(query.method)},
      {"elapsed_ms", elapsed},
  };
  return {200, doc.dump()};
}

void Service::mount_static(const std::string& directory) {
  if (!server_->http.set_mount_point("/", directory)) {
    throw Error(ErrorCode::io, "cannot serve static files from " + directory);
  }
}

int Service::bind(const std::string& host, int port) {
  httplib::Server& http = server_->http;
  const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() {
  logger().info("serving");
  server_->http.listen_after_bind();
}

void Service::stop() {
  if (server_) server_->http.stop();
}

}  // namespace fracture
