// Copyright 2026 The scmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP API for interactive matrix refinement. One robot session per
// process. Reads take a shared lock, mutations an exclusive one.
//
//   GET  /robot              model summary
//   GET  /shapes/{type}      render meshes + shape_index_map
//   POST /config             {"values": [...]} | {"random": true} | "random"
//   POST /select             {"i", "j"}
//   POST /skip               {"i", "j", "on"}
//   POST /skip/bulk          {"mode": "raw"|"normalized", "threshold"}
//   POST /export             {"format": "json"|"yaml"|"both"}
//   POST /shape_type         {"name"}
//   POST /load               {"robot_dir"}
//
// Errors are {"error": message} with status 400 (bad request) or 404 (no
// robot loaded).

#ifndef SCMAT_SERVICE_HPP_
#define SCMAT_SERVICE_HPP_

#include <sys/socket.h>

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmat/asset_dir.hpp"
#include "scmat/matrix.hpp"
#include "scmat/mesh.hpp"
#include "scmat/proximity.hpp"
#include "scmat/rng.hpp"
#include "scmat/shapes.hpp"

#include "httplib.h"

namespace scmat {

using Json = nlohmann::ordered_json;

struct SessionState {
  std::filesystem::path robot_dir;
  RobotModel model;
  std::vector<LinkShapes> shapes;
  std::map<ShapeType, StatsTable> stats;
  std::map<ShapeType, SkipMatrix> matrices;
  Configuration current_config;
  ShapeType active_shape_type = ShapeType::kHullLink;
  std::optional<std::pair<std::size_t, std::size_t>> selected_pair;
  bool dirty = false;
};

// Loads model, shapes, stats and matrices for all six types.
inline SessionState LoadSession(const std::filesystem::path& robot_dir) {
  const AssetDir dir(robot_dir);
  SessionState s;
  s.robot_dir = robot_dir;
  s.model = dir.LoadModel();
  s.shapes = dir.LoadShapes(s.model);
  for (const auto type : kAllShapeTypes) {
    const auto expected = ShapeIndexSpace(s.shapes, type);
    SkipMatrix m = dir.LoadMatrix(type);
    if (m.shape_index_map != expected) {
      throw AssetError("matrix " + std::string(ToString(type)) +
                       " does not match the preprocessed shapes");
    }
    StatsTable st = dir.LoadStats(type);
    if (st.num_shapes != expected.size()) {
      throw AssetError("stats " + std::string(ToString(type)) +
                       " do not match the preprocessed shapes");
    }
    s.matrices.emplace(type, std::move(m));
    s.stats.emplace(type, std::move(st));
  }
  s.current_config = s.model.ZeroConfiguration();
  return s;
}

namespace detail {

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline Json Vec3Json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json MeshJson(const TriangleMesh& mesh) {
  Json vertices = Json::array();
  for (const auto& v : mesh.vertices) vertices.push_back(Vec3Json(v));
  Json triangles = Json::array();
  for (const auto& t : mesh.triangles) triangles.push_back(Json::array({t[0], t[1], t[2]}));
  Json out;
  out["vertices"] = std::move(vertices);
  out["triangles"] = std::move(triangles);
  return out;
}

inline TriangleMesh PolytopeMesh(const ConvexPolytope& p) {
  TriangleMesh mesh;
  mesh.vertices = p.vertices;
  for (const auto& f : p.faces) {
    for (std::size_t k = 1; k + 1 < f.size(); ++k) mesh.triangles.push_back({f[0], f[k], f[k + 1]});
  }
  return mesh;
}

inline TriangleMesh ObbMesh(const Obb& b) {
  TriangleMesh mesh;
  RigidTransform t;
  t.rotation = b.axes;
  t.translation = b.center;
  AppendTransformed(mesh, BoxMesh(2.0 * b.half_extents), t);
  return mesh;
}

inline TriangleMesh SphereRenderMesh(const Sphere& s) {
  TriangleMesh mesh;
  AppendTransformed(mesh, SphereMesh(s.radius), RigidTransform::FromTranslation(s.center));
  return mesh;
}

inline Json ShapeJson(const ShapeGeometry& g) {
  Json out;
  if (const auto* s = std::get_if<Sphere>(&g)) {
    out["kind"] = "sphere";
    out["sphere"] = {{"center", Vec3Json(s->center)}, {"radius", s->radius}};
    out["mesh"] = MeshJson(SphereRenderMesh(*s));
  } else if (const auto* b = std::get_if<Obb>(&g)) {
    out["kind"] = "obb";
    out["obb"] = {{"center", Vec3Json(b->center)},
                  {"axes", Json::array({Vec3Json(b->axes.col(0)), Vec3Json(b->axes.col(1)),
                                        Vec3Json(b->axes.col(2))})},
                  {"half_extents", Vec3Json(b->half_extents)}};
    out["mesh"] = MeshJson(ObbMesh(*b));
  } else {
    out["kind"] = "polytope";
    out["mesh"] = MeshJson(PolytopeMesh(*std::get<const ConvexPolytope*>(g)));
  }
  return out;
}

inline Json PairJson(const PairDistance& p) {
  Json out;
  out["i"] = p.i;
  out["j"] = p.j;
  out["d"] = p.d;
  out["d_normalized"] = p.d_normalized ? Json(*p.d_normalized) : Json();
  out["skipped"] = p.skipped;
  out["point_a"] = Vec3Json(p.point_a);
  out["point_b"] = Vec3Json(p.point_b);
  return out;
}

inline Json IndexMapJson(const std::vector<ShapeIndexEntry>& map) {
  Json out = Json::array();
  for (const auto& e : map) {
    out.push_back({{"index", e.index},
                   {"link_name", e.link_name},
                   {"part", e.part ? Json(*e.part) : Json()}});
  }
  return out;
}

inline std::size_t IndexField(const Json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_number_integer() || body[key].get<long long>() < 0) {
    throw HttpError(400, std::string("field '") + key + "' must be a non-negative integer");
  }
  return body[key].get<std::size_t>();
}

inline Json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError(400, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace detail

struct ServiceOptions {
  std::uint64_t seed = 0;  // random configurations
  std::filesystem::path viewer_dir;  // static assets; empty = built-in page
};

class Service {
 public:
  explicit Service(ServiceOptions options = {}) : options_(std::move(options)), rng_(options_.seed) {
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                 sizeof(yes));
    });
    Routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() { Stop(); }

  void Load(const std::filesystem::path& robot_dir) {
    SessionState s = LoadSession(robot_dir);
    const std::unique_lock lock(mutex_);
    session_ = std::move(s);
  }

  void SetSession(SessionState s) {
    const std::unique_lock lock(mutex_);
    session_ = std::move(s);
  }

  // False when the port cannot be bound. Port 0 picks a free port.
  bool Bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      return port_ > 0;
    }
    port_ = port;
    return server_.bind_to_port(host, port);
  }

  int port() const { return port_; }

  // Blocks until Stop().
  bool Listen() { return server_.listen_after_bind(); }

  void Stop() {
    if (server_.is_running()) server_.stop();
  }

  void WaitUntilReady() const { server_.wait_until_ready(); }

  // Runs `fn` on the session under the exclusive lock.
  template <typename Fn>
  auto WithSession(Fn&& fn) {
    const std::unique_lock lock(mutex_);
    if (!session_) throw detail::HttpError(404, "no robot loaded");
    return fn(*session_);
  }

 private:
  using Handler = std::function<Json(const httplib::Request&)>;

  void Reply(httplib::Response& res, const Handler& handler, const httplib::Request& req) {
    try {
      res.set_content(handler(req).dump(), "application/json");
    } catch (const detail::HttpError& e) {
      res.status = e.status();
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    }
  }

  void Get(const std::string& pattern, Handler handler) {
    server_.Get(pattern, [this, handler](const httplib::Request& req, httplib::Response& res) {
      Reply(res, handler, req);
    });
  }

  void Post(const std::string& pattern, Handler handler) {
    server_.Post(pattern, [this, handler](const httplib::Request& req, httplib::Response& res) {
      Reply(res, handler, req);
    });
  }

  const SessionState& Require() const {
    if (!session_) throw detail::HttpError(404, "no robot loaded");
    return *session_;
  }

  SessionState& RequireMut() {
    if (!session_) throw detail::HttpError(404, "no robot loaded");
    return *session_;
  }

  static Json RobotJson(const SessionState& s) {
    const RobotModel& m = s.model;
    Json links = Json::array();
    for (std::size_t i = 0; i < m.links.size(); ++i) {
      links.push_back({{"index", i},
                       {"name", m.links[i].name},
                       {"has_geometry", m.links[i].HasGeometry()}});
    }
    Json joints = Json::array();
    for (std::size_t j = 0; j < m.joints.size(); ++j) {
      const Joint& joint = m.joints[j];
      Json row;
      row["name"] = joint.name;
      row["type"] = std::string(ToString(joint.type));
      row["parent"] = m.links[joint.parent].name;
      row["child"] = m.links[joint.child].name;
      row["axis"] = detail::Vec3Json(joint.axis);
      row["slot"] = m.config_slot[j] ? Json(*m.config_slot[j]) : Json();
      row["lower"] = joint.limits ? Json(joint.limits->lower) : Json();
      row["upper"] = joint.limits ? Json(joint.limits->upper) : Json();
      joints.push_back(std::move(row));
    }
    Json limits = Json::array();
    for (const auto& b : ConfigurationBounds(m)) limits.push_back({{"lower", b.lower}, {"upper", b.upper}});
    Json out;
    out["name"] = m.name;
    out["dof"] = m.dof;
    out["root_link"] = m.links[m.root_link_index].name;
    out["links"] = std::move(links);
    out["joints"] = std::move(joints);
    out["limits"] = std::move(limits);
    out["active_shape_type"] = std::string(ToString(s.active_shape_type));
    out["config"] = s.current_config.values;
    return out;
  }

  static std::vector<PairDistance> PairList(const SessionState& s) {
    const PosedShapes posed =
        PoseShapes(s.model, s.shapes, s.active_shape_type, s.current_config);
    return QueryProximity(posed, s.matrices.at(s.active_shape_type),
                          &s.stats.at(s.active_shape_type), /*include_skipped=*/true);
  }

  static Json StateJson(const SessionState& s) {
    const auto poses = ForwardKinematics(s.model, s.current_config);
    Json link_poses = Json::array();
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const Mat3& r = poses[i].rotation;
      link_poses.push_back(
          {{"link", i},
           {"name", s.model.links[i].name},
           {"translation", detail::Vec3Json(poses[i].translation)},
           {"rotation", Json::array({detail::Vec3Json(r.row(0)), detail::Vec3Json(r.row(1)),
                                     detail::Vec3Json(r.row(2))})}});
    }
    Json pairs = Json::array();
    for (const auto& p : PairList(s)) pairs.push_back(detail::PairJson(p));
    Json out;
    out["config"] = s.current_config.values;
    out["shape_type"] = std::string(ToString(s.active_shape_type));
    out["link_poses"] = std::move(link_poses);
    out["pairs"] = std::move(pairs);
    return out;
  }

  static Json SkipSummary(const SessionState& s) {
    const SkipMatrix& m = s.matrices.at(s.active_shape_type);
    Json counts = Json::object();
    for (const auto& [reason, n] : m.CountsByReason()) counts[std::string(ToString(reason))] = n;
    Json out;
    out["shape_type"] = std::string(ToString(s.active_shape_type));
    out["counts"] = std::move(counts);
    out["total_skips"] = m.skips.size();
    out["candidate_pairs"] = m.NumCandidatePairs();
    out["dirty"] = s.dirty;
    return out;
  }

  void Routes() {
    Get("/robot", [this](const httplib::Request&) {
      const std::shared_lock lock(mutex_);
      return RobotJson(Require());
    });

    Get(R"(/shapes/([A-Za-z_]+))", [this](const httplib::Request& req) {
      const auto type = ParseShapeType(req.matches[1].str());
      if (!type) throw detail::HttpError(400, "unknown shape type '" + req.matches[1].str() + "'");
      const std::shared_lock lock(mutex_);
      const SessionState& s = Require();
      const PosedShapes local =
          PoseShapesAt(std::vector<RigidTransform>(s.model.links.size()), s.shapes, *type);
      const auto index_map = ShapeIndexSpace(s.shapes, *type);
      Json shapes = Json::array();
      for (std::size_t k = 0; k < local.shapes.size(); ++k) {
        Json row = detail::ShapeJson(local.shapes[k].geometry);
        row["index"] = k;
        row["link_index"] = local.shapes[k].owner_link;
        row["link_name"] = index_map[k].link_name;
        row["part"] = index_map[k].part ? Json(*index_map[k].part) : Json();
        shapes.push_back(std::move(row));
      }
      Json out;
      out["shape_type"] = std::string(ToString(*type));
      out["shape_index_map"] = detail::IndexMapJson(index_map);
      out["shapes"] = std::move(shapes);
      return out;
    });

    Post("/config", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      const bool random = (body.is_string() && body.get<std::string>() == "random") ||
                          (body.is_object() && body.contains("random") &&
                           body["random"].is_boolean() && body["random"].get<bool>());
      Configuration config;
      if (random) {
        config = SampleConfiguration(s.model, rng_);
      } else {
        if (!body.is_object() || !body.contains("values") || !body["values"].is_array()) {
          throw detail::HttpError(400, "expected {\"values\": [...]} or {\"random\": true}");
        }
        for (const auto& v : body["values"]) {
          if (!v.is_number()) throw detail::HttpError(400, "values must be numbers");
          config.values.push_back(v.get<double>());
        }
        if (config.size() != s.model.dof) {
          throw detail::HttpError(400, "configuration has " + std::to_string(config.size()) +
                                           " values, robot has " + std::to_string(s.model.dof) +
                                           " dof");
        }
      }
      s.current_config = std::move(config);
      return StateJson(s);
    });

    Post("/select", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      const std::size_t i = detail::IndexField(body, "i");
      const std::size_t j = detail::IndexField(body, "j");
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      const SkipMatrix& m = s.matrices.at(s.active_shape_type);
      if (i >= m.num_shapes || j >= m.num_shapes) throw detail::HttpError(400, "shape index out of range");
      if (i == j || m.SameLink(i, j)) throw detail::HttpError(400, "shapes belong to the same link");
      const PosedShapes posed =
          PoseShapes(s.model, s.shapes, s.active_shape_type, s.current_config);
      const auto [a, b] = std::minmax(i, j);
      const DistanceResult r = Distance(posed.shapes[a], posed.shapes[b]);
      s.selected_pair = std::make_pair(a, b);
      Json out;
      out["i"] = a;
      out["j"] = b;
      out["d"] = r.distance;
      out["intersecting"] = r.intersecting;
      out["point_a"] = detail::Vec3Json(r.point_a);
      out["point_b"] = detail::Vec3Json(r.point_b);
      out["skipped"] = m.IsSkipped(a, b);
      const PairStats* st = s.stats.at(s.active_shape_type).Find(a, b);
      out["d_normalized"] = st != nullptr && st->samples > 0 && st->d_mean() > 0.0
                                ? Json(r.distance / st->d_mean())
                                : Json();
      return out;
    });

    Post("/skip", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      const std::size_t i = detail::IndexField(body, "i");
      const std::size_t j = detail::IndexField(body, "j");
      if (!body.contains("on") || !body["on"].is_boolean()) {
        throw detail::HttpError(400, "field 'on' must be a boolean");
      }
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      SkipMatrix& m = s.matrices.at(s.active_shape_type);
      SkipMatrix updated = SetSkip(m, i, j, body["on"].get<bool>());
      if (!(updated == m)) s.dirty = true;
      m = std::move(updated);
      return SkipSummary(s);
    });

    Post("/skip/bulk", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      if (!body.contains("mode") || !body["mode"].is_string()) {
        throw detail::HttpError(400, "field 'mode' must be \"raw\" or \"normalized\"");
      }
      const auto mode = ParseBulkMode(body["mode"].get<std::string>());
      if (!mode) throw detail::HttpError(400, "unknown bulk mode " + body["mode"].dump());
      if (!body.contains("threshold") || !body["threshold"].is_number()) {
        throw detail::HttpError(400, "field 'threshold' must be a number");
      }
      const double threshold = body["threshold"].get<double>();
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      SkipMatrix& m = s.matrices.at(s.active_shape_type);
      const auto live = PairList(s);
      SkipMatrix updated = ApplyBulkRule(m, live, *mode, threshold);
      const std::size_t changed = updated.skips.size() - m.skips.size();
      if (changed > 0) s.dirty = true;
      m = std::move(updated);
      Json out = SkipSummary(s);
      out["changed"] = changed;
      return out;
    });

    Post("/export", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      const std::string name =
          body.is_object() && body.contains("format") && body["format"].is_string()
              ? body["format"].get<std::string>()
              : "";
      std::vector<MatrixFormat> formats;
      if (name == "both") {
        formats = {MatrixFormat::kJson, MatrixFormat::kYaml};
      } else if (const auto f = ParseMatrixFormat(name)) {
        formats = {*f};
      } else {
        throw detail::HttpError(400, "format must be \"json\", \"yaml\" or \"both\"");
      }
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      const AssetDir dir(s.robot_dir);
      Json written = Json::array();
      for (const auto& [type, m] : s.matrices) {
        for (const auto& p : dir.SaveMatrix(m, formats)) written.push_back(p.string());
      }
      s.dirty = false;
      Json out;
      out["written"] = std::move(written);
      out["dirty"] = false;
      return out;
    });

    Post("/shape_type", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      if (!body.contains("name") || !body["name"].is_string()) {
        throw detail::HttpError(400, "field 'name' must be a string");
      }
      const auto type = ParseShapeType(body["name"].get<std::string>());
      if (!type) throw detail::HttpError(400, "unknown shape type " + body["name"].dump());
      const std::unique_lock lock(mutex_);
      SessionState& s = RequireMut();
      s.active_shape_type = *type;
      s.selected_pair.reset();
      return StateJson(s);
    });

    Post("/load", [this](const httplib::Request& req) {
      const Json body = detail::ParseBody(req);
      if (!body.contains("robot_dir") || !body["robot_dir"].is_string()) {
        throw detail::HttpError(400, "field 'robot_dir' must be a string");
      }
      SessionState loaded = LoadSession(body["robot_dir"].get<std::string>());
      const std::unique_lock lock(mutex_);
      session_ = std::move(loaded);
      return RobotJson(*session_);
    });

    if (!options_.viewer_dir.empty() && std::filesystem::is_directory(options_.viewer_dir)) {
      server_.set_mount_point("/", options_.viewer_dir.string());
    } else {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!doctype html><html><head><title>scmat</title></head><body>"
            "<h1>scmat refinement service</h1><p>No viewer bundle installed. "
            "The JSON API is available at /robot, /shapes/{type}, /config, "
            "/select, /skip, /skip/bulk, /export and /shape_type.</p></body></html>",
            "text/html");
      });
    }
  }

  ServiceOptions options_;
  httplib::Server server_;
  int port_ = 0;
  mutable std::shared_mutex mutex_;
  std::optional<SessionState> session_;
  Xoshiro256 rng_;
};

}  // namespace scmat

#endif  // SCMAT_SERVICE_HPP_
