#include "fracture/cli.hpp"

#include "fracture/artifact.hpp"
#include "fracture/export.hpp"
#include "fracture/impact.hpp"
#include "fracture/log.hpp"
#include "fracture/mesh_io.hpp"
#include "fracture/modes.hpp"
#include "fracture/pattern.hpp"
#include "fracture/service.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace fracture {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return kExitUsage;
    case ErrorCode::infeasible:
    case ErrorCode::not_converged:
      return kExitSolver;
    default:
      return kExitData;
  }
}

Eigen::VectorXd parse_vector(const std::string& text, int dimension, const char* what) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || token.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error(ErrorCode::invalid_argument, std::string(what) + ": '" + text + "' is not a number list");
    }
    values.push_back(value);
  }
  if (static_cast<int>(values.size()) != dimension) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("{}: expected {} comma-separated values, got {}", what, dimension, values.size()));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), dimension);
}

FacetWeights parse_eta(const std::string& text, const ExplodedMesh& em) {
  const int d = em.dimension();
  if (text.find_first_not_of("0123456789.,eE+- ") == std::string::npos) {
    const Eigen::VectorXd axis = parse_vector(text, d, "--eta");
    if ((axis.array() <= 0.0).any()) throw Error(ErrorCode::invalid_argument, "--eta weights must be positive");
    return uniform_eta(em, axis);
  }
  std::ifstream in(text);
  if (!in) throw Error(ErrorCode::io, "cannot read eta file " + text);
  std::string kind;
  in >> kind;
  const int rows = kind == "facet" ? em.num_facets() : kind == "element" ? em.num_elements() : -1;
  if (rows < 0) throw Error(ErrorCode::parse, "eta file must start with 'facet' or 'element'");
  Field values(rows, d);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < d; ++c) {
      if (!(in >> values(r, c))) throw Error(ErrorCode::parse, fmt::format("eta file has fewer than {} rows", rows));
      if (!(values(r, c) > 0.0)) throw Error(ErrorCode::parse, "eta weights must be positive");
    }
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::parse, fmt::format("eta file has more than {} rows", rows));
  if (kind == "facet") return values;
  FacetWeights eta(em.num_facets(), d);
  for (int e = 0; e < em.num_facets(); ++e) {
    const auto& pair = em.interior_facets[e].elements;
    eta.row(e) = 0.5 * (values.row(pair[0]) + values.row(pair[1]));
  }
  return eta;
}

namespace {

Service* active_service = nullptr;

void stop_service(int) {
  if (active_service) active_service->stop();
}

struct Options {
  std::string mesh;
  std::string modes;
  std::string out;
  std::string eta;
  std::string point;
  std::string normal;
  std::string method = "modal";
  std::string host = "127.0.0.1";
  std::string static_dir;
  int k = 10;
  int port = 8080;
  double rho = 1.0;
  double tau = 1e-2;
  double sigma = 1e-3;
  double smooth = 0.0;
  bool translate = false;
};

struct Loaded {
  Mesh mesh;
  ModesArtifact artifact;
};

Loaded load_pair(const Options& opt) {
  Loaded loaded{load_mesh(opt.mesh), load_artifact(opt.modes)};
  check_artifact_mesh(loaded.artifact, loaded.mesh);
  return loaded;
}

int cmd_precompute(const Options& opt, std::ostream& out) {
  const Mesh mesh = load_mesh(opt.mesh);
  const ExplodedMesh em = explode(mesh);
  SolverConfig config;
  config.k = opt.k;
  config.density = opt.rho;
  std::optional<FacetWeights> eta;
  if (!opt.eta.empty()) eta = parse_eta(opt.eta, em);
  const FractureModes modes = compute_modes(em, config, eta);
  const ModesArtifact artifact = make_artifact(mesh, modes, config);
  save_artifact(artifact, opt.out);

  out << fmt::format("{:>4} {:>18} {:>6} {:>7} {:>10}\n", "mode", "energy", "inner", "admm", "time_s");
  for (int i = 0; i < modes.k(); ++i) {
    const ModeStats& s = modes.stats[i];
    out << fmt::format("{:>4} {:>18.10g} {:>6} {:>7} {:>10.3f}\n", i + 1, modes.energies[i], s.inner_iterations,
                       s.conic_iterations, s.seconds);
  }
  out << fmt::format("modes={} pieces={} out={}\n", modes.k(), artifact.pieces.count, opt.out);
  return kExitOk;
}

int cmd_apply(const Options& opt, std::ostream& out) {
  const Loaded loaded = load_pair(opt);
  const int d = loaded.mesh.dimension();
  ImpactQuery query;
  query.point = parse_vector(opt.point, d, "--point");
  query.normal = parse_vector(opt.normal, d, "--normal");
  const double length = query.normal.norm();
  if (!(length > 0.0)) throw Error(ErrorCode::invalid_argument, "--normal must be nonzero");
  query.normal /= length;
  query.sigma = opt.sigma;
  query.method = parse_impact_method(opt.method);
  CacheOptions options;
  options.tau = opt.tau;
  const ProjectionCache cache = build_projection_cache(loaded.artifact, loaded.mesh, options);
  const FracturePattern pattern = cache.apply(query);
  if (!opt.out.empty()) export_pattern(opt.out, loaded.mesh, pattern, opt.translate);
  out << fmt::format("fragments={} sigma={}\n", pattern.count, opt.sigma);
  return kExitOk;
}

int cmd_pattern(const Options& opt, std::ostream& out) {
  const Loaded loaded = load_pair(opt);
  const ExplodedMesh em = explode(loaded.mesh);
  std::vector<bool> cut(em.num_facets(), false);
  for (int e : loaded.artifact.pieces.cut_facets) cut[e] = true;
  BasePiecePartition partition = partition_from_cuts(em, cut, loaded.artifact.pieces.tolerance);
  if (opt.smooth > 0.0) partition = smooth_labels(em, partition, opt.smooth);
  if (!opt.out.empty()) export_pieces(opt.out, loaded.mesh, partition);
  out << fmt::format("pieces={}\n", partition.count);
  return kExitOk;
}

int cmd_serve(const Options& opt, std::ostream& out) {
  Loaded loaded = load_pair(opt);
  Service service;
  if (!opt.static_dir.empty()) service.mount_static(opt.static_dir);
  const int port = service.bind(opt.host, opt.port);
  CacheOptions options;
  options.tau = opt.tau;
  service.load(std::move(loaded.mesh), std::move(loaded.artifact), options);
  out << fmt::format("listening on http://{}:{}\n", opt.host, port) << std::flush;
  active_service = &service;
  std::signal(SIGINT, stop_service);
  std::signal(SIGTERM, stop_service);
  service.run();
  active_service = nullptr;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Fracture modes: precompute, apply impacts, export prefracture patterns, serve"};
  app.name("fracture");
  app.require_subcommand(1);

  auto* pre = app.add_subcommand("precompute", "compute fracture modes and write an artifact");
  pre->add_option("--mesh", opt.mesh, "input mesh (.obj for 2D, .verts/.tets for 3D)")->required();
  pre->add_option("-k,--num-modes", opt.k, "number of modes, including translations")->check(CLI::PositiveNumber);
  pre->add_option("--rho", opt.rho, "density")->check(CLI::PositiveNumber);
  pre->add_option("--eta", opt.eta, "anisotropy: 'a,b[,c]' or a weight file");
  pre->add_option("-o,--out", opt.out, "artifact path")->required();

  auto* app_apply = app.add_subcommand("apply", "project an impact and report the fracture pattern");
  app_apply->add_option("--mesh", opt.mesh, "input mesh")->required();
  app_apply->add_option("--modes", opt.modes, "modes artifact")->required();
  app_apply->add_option("--point", opt.point, "impact point 'x,y[,z]'")->required();
  app_apply->add_option("--normal", opt.normal, "impact direction 'x,y[,z]'")->required();
  app_apply->add_option("--sigma", opt.sigma, "glue tolerance")->check(CLI::PositiveNumber);
  app_apply->add_option("--tau", opt.tau, "shockwave timestep")->check(CLI::PositiveNumber);
  app_apply->add_option("--method", opt.method, "projection method")->check(CLI::IsMember({"modal", "lsq"}));
  app_apply->add_option("-o,--out", opt.out, "fragment OBJ export");
  app_apply->add_flag("--translate", opt.translate, "offset exported fragments by their translations");

  auto* app_pattern = app.add_subcommand("pattern", "export the prefractured base pieces");
  app_pattern->add_option("--mesh", opt.mesh, "input mesh")->required();
  app_pattern->add_option("--modes", opt.modes, "modes artifact")->required();
  app_pattern->add_option("-o,--out", opt.out, "OBJ file, or a directory for one file per piece");
  app_pattern->add_option("--smooth", opt.smooth, "interface smoothing timestep")->check(CLI::NonNegativeNumber);

  auto* app_serve = app.add_subcommand("serve", "serve the artifact over HTTP");
  app_serve->add_option("--mesh", opt.mesh, "input mesh")->required();
  app_serve->add_option("--modes", opt.modes, "modes artifact")->required();
  app_serve->add_option("--port", opt.port, "listen port")->check(CLI::Range(0, 65535));
  app_serve->add_option("--host", opt.host, "listen address");
  app_serve->add_option("--tau", opt.tau, "shockwave timestep")->check(CLI::PositiveNumber);
  app_serve->add_option("--static", opt.static_dir, "directory of UI assets served at /");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'fracture --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (pre->parsed()) return cmd_precompute(opt, out);
    if (app_apply->parsed()) return cmd_apply(opt, out);
    if (app_pattern->parsed()) return cmd_pattern(opt, out);
    if (app_serve->parsed()) return cmd_serve(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace fracture
