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

// Kinematic tree parsed from URDF, forward kinematics, link adjacency and
// configuration sampling.

#ifndef SCMAT_MODEL_HPP_
#define SCMAT_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "scmat/math.hpp"
#include "scmat/rng.hpp"

namespace scmat {

class ModelError : public Error {
 public:
  using Error::Error;
};

enum class JointType { kRevolute, kContinuous, kPrismatic, kFixed };

inline std::string_view ToString(JointType type) {
  switch (type) {
    case JointType::kRevolute:
      return "revolute";
    case JointType::kContinuous:
      return "continuous";
    case JointType::kPrismatic:
      return "prismatic";
    case JointType::kFixed:
      return "fixed";
  }
  return "unknown";
}

// One <visual> or <collision> element. Meshes carry a resolved file path;
// primitives carry their dimensions and are tessellated by the geometry layer.
struct GeometrySource {
  enum class Kind { kMesh, kBox, kCylinder, kSphere };

  Kind kind = Kind::kMesh;
  std::string mesh_path;  // resolved against the mesh root
  Vec3 scale = Vec3::Ones();
  Vec3 box_size = Vec3::Zero();
  double radius = 0.0;
  double length = 0.0;
  RigidTransform origin;  // element origin in the link frame
};

struct Link {
  std::string name;
  std::vector<GeometrySource> visuals;
  std::vector<GeometrySource> collisions;
  RigidTransform inertial_origin;

  // Geometry used for shape construction: collision if any, else visual.
  const std::vector<GeometrySource>& Geometry() const {
    return collisions.empty() ? visuals : collisions;
  }
  bool HasGeometry() const { return !Geometry().empty(); }

  std::optional<std::string> CollisionMeshRef() const {
    return FirstMesh(collisions);
  }
  std::optional<std::string> VisualMeshRef() const {
    return FirstMesh(visuals);
  }

 private:
  static std::optional<std::string> FirstMesh(
      const std::vector<GeometrySource>& sources) {
    for (const auto& s : sources) {
      if (s.kind == GeometrySource::Kind::kMesh) return s.mesh_path;
    }
    return std::nullopt;
  }
};

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;
};

struct Joint {
  std::string name;
  JointType type = JointType::kFixed;
  std::size_t parent = 0;
  std::size_t child = 0;
  RigidTransform origin;
  Vec3 axis = Vec3::UnitX();
  std::optional<JointLimits> limits;

  bool Actuated() const { return type != JointType::kFixed; }

  // Motion transform for joint value `q`.
  RigidTransform Motion(double q) const {
    switch (type) {
      case JointType::kRevolute:
      case JointType::kContinuous:
        return RigidTransform::FromRotation(RotationAboutAxis(axis, q));
      case JointType::kPrismatic:
        return RigidTransform::FromTranslation(axis * q);
      case JointType::kFixed:
        break;
    }
    return RigidTransform::Identity();
  }
};

// Joint values ordered like the actuated joints in RobotModel::joints.
struct Configuration {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

using LinkPair = std::pair<std::size_t, std::size_t>;

struct RobotModel {
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::size_t root_link_index = 0;
  std::size_t dof = 0;

  // Joints in parent-before-child order, and for each joint its slot in the
  // configuration vector (unset for fixed joints).
  std::vector<std::size_t> traversal_order;
  std::vector<std::optional<std::size_t>> config_slot;

  std::optional<std::size_t> FindLink(std::string_view link_name) const {
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (links[i].name == link_name) return i;
    }
    return std::nullopt;
  }

  std::vector<const Joint*> ActuatedJoints() const {
    std::vector<const Joint*> out;
    for (const auto& j : joints) {
      if (j.Actuated()) out.push_back(&j);
    }
    return out;
  }

  Configuration ZeroConfiguration() const {
    return Configuration{std::vector<double>(dof, 0.0)};
  }
};

namespace detail {

using Ptree = boost::property_tree::ptree;

inline std::vector<double> ParseNumbers(const std::string& text,
                                        std::size_t expected,
                                        const std::string& what) {
  std::istringstream in(text);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof() || values.size() != expected) {
    throw ModelError("expected " + std::to_string(expected) +
                     " numbers in " + what + ", got '" + text + "'");
  }
  return values;
}

inline Vec3 ParseVec3(const std::string& text, const std::string& what) {
  const auto v = ParseNumbers(text, 3, what);
  return {v[0], v[1], v[2]};
}

inline RigidTransform ParseOrigin(const Ptree& element) {
  RigidTransform out;
  const auto origin = element.get_child_optional("origin");
  if (!origin) return out;
  if (auto xyz = origin->get_optional<std::string>("<xmlattr>.xyz")) {
    out.translation = ParseVec3(*xyz, "origin xyz");
  }
  if (auto rpy = origin->get_optional<std::string>("<xmlattr>.rpy")) {
    const Vec3 a = ParseVec3(*rpy, "origin rpy");
    out.rotation = RotationFromRpy(a.x(), a.y(), a.z());
  }
  return out;
}

}  // namespace detail

// Maps a URDF mesh filename to a filesystem path. `package://name/rest` and
// `file://rest` drop their scheme (and package name); relative paths are taken
// against `mesh_root`.
inline std::string ResolveMeshPath(std::string_view uri,
                                   const std::filesystem::path& mesh_root) {
  std::string rest(uri);
  constexpr std::string_view kPackage = "package://";
  constexpr std::string_view kFile = "file://";
  if (rest.starts_with(kPackage)) {
    rest = rest.substr(kPackage.size());
    const auto slash = rest.find('/');
    rest = slash == std::string::npos ? std::string() : rest.substr(slash + 1);
    return (mesh_root / rest).lexically_normal().string();
  }
  if (rest.starts_with(kFile)) {
    rest = rest.substr(kFile.size());
  }
  std::filesystem::path p(rest);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (mesh_root / p).lexically_normal().string();
}

namespace detail {

inline GeometrySource ParseGeometryElement(const Ptree& element,
                                           const std::string& link_name,
                                           const std::filesystem::path& root) {
  GeometrySource source;
  source.origin = ParseOrigin(element);
  const auto geometry = element.get_child_optional("geometry");
  if (!geometry) {
    throw ModelError("link '" + link_name + "' has an element without <geometry>");
  }
  if (auto mesh = geometry->get_child_optional("mesh")) {
    source.kind = GeometrySource::Kind::kMesh;
    const auto filename = mesh->get_optional<std::string>("<xmlattr>.filename");
    if (!filename || filename->empty()) {
      throw ModelError("link '" + link_name + "' mesh has no filename");
    }
    source.mesh_path = ResolveMeshPath(*filename, root);
    if (auto scale = mesh->get_optional<std::string>("<xmlattr>.scale")) {
      source.scale = ParseVec3(*scale, "mesh scale");
    }
  } else if (auto box = geometry->get_child_optional("box")) {
    source.kind = GeometrySource::Kind::kBox;
    source.box_size =
        ParseVec3(box->get<std::string>("<xmlattr>.size", ""), "box size");
  } else if (auto cyl = geometry->get_child_optional("cylinder")) {
    source.kind = GeometrySource::Kind::kCylinder;
    source.radius = cyl->get<double>("<xmlattr>.radius");
    source.length = cyl->get<double>("<xmlattr>.length");
  } else if (auto sphere = geometry->get_child_optional("sphere")) {
    source.kind = GeometrySource::Kind::kSphere;
    source.radius = sphere->get<double>("<xmlattr>.radius");
  } else {
    throw ModelError("link '" + link_name + "' has unsupported geometry");
  }
  return source;
}

inline JointType ParseJointType(const std::string& text,
                                const std::string& joint_name) {
  if (text == "revolute") return JointType::kRevolute;
  if (text == "continuous") return JointType::kContinuous;
  if (text == "prismatic") return JointType::kPrismatic;
  if (text == "fixed") return JointType::kFixed;
  throw ModelError("joint '" + joint_name + "' has unknown or unsupported type '" +
                   text + "' (supported: revolute, continuous, prismatic, fixed)");
}

}  // namespace detail

// Parses URDF text. Mesh references are resolved against `mesh_root` but not
// loaded. Throws ModelError on malformed XML or an invalid kinematic tree.
inline RobotModel ParseUrdf(const std::string& urdf_text,
                            const std::filesystem::path& mesh_root) {
  using detail::Ptree;
  Ptree doc;
  try {
    std::istringstream in(urdf_text);
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw ModelError(std::string("malformed XML: ") + e.what());
  }
  const auto robot = doc.get_child_optional("robot");
  if (!robot) throw ModelError("malformed URDF: missing <robot> element");

  RobotModel model;
  model.name = robot->get<std::string>("<xmlattr>.name", "robot");

  try {
    std::map<std::string, std::size_t> link_index;
    for (const auto& [tag, node] : *robot) {
      if (tag != "link") continue;
      Link link;
      link.name = node.get<std::string>("<xmlattr>.name", "");
      if (link.name.empty()) throw ModelError("link without a name");
      if (link_index.contains(link.name)) {
        throw ModelError("duplicate link name '" + link.name + "'");
      }
      for (const auto& [child_tag, child] : node) {
        if (child_tag == "visual") {
          link.visuals.push_back(
              detail::ParseGeometryElement(child, link.name, mesh_root));
        } else if (child_tag == "collision") {
          link.collisions.push_back(
              detail::ParseGeometryElement(child, link.name, mesh_root));
        } else if (child_tag == "inertial") {
          link.inertial_origin = detail::ParseOrigin(child);
        }
      }
      link_index.emplace(link.name, model.links.size());
      model.links.push_back(std::move(link));
    }
    if (model.links.empty()) throw ModelError("URDF has no links");

    std::set<std::string> joint_names;
    for (const auto& [tag, node] : *robot) {
      if (tag != "joint") continue;
      Joint joint;
      joint.name = node.get<std::string>("<xmlattr>.name", "");
      if (!joint_names.insert(joint.name).second) {
        throw ModelError("duplicate joint name '" + joint.name + "'");
      }
      joint.type = detail::ParseJointType(
          node.get<std::string>("<xmlattr>.type", ""), joint.name);
      const auto parent = node.get<std::string>("parent.<xmlattr>.link", "");
      const auto child = node.get<std::string>("child.<xmlattr>.link", "");
      const auto p = link_index.find(parent);
      const auto c = link_index.find(child);
      if (p == link_index.end()) {
        throw ModelError("joint '" + joint.name + "' references missing link '" +
                         parent + "'");
      }
      if (c == link_index.end()) {
        throw ModelError("joint '" + joint.name + "' references missing link '" +
                         child + "'");
      }
      if (p->second == c->second) {
        throw ModelError("joint '" + joint.name +
                         "' connects a link to itself: not a tree");
      }
      joint.parent = p->second;
      joint.child = c->second;
      joint.origin = detail::ParseOrigin(node);
      if (auto axis = node.get_optional<std::string>("axis.<xmlattr>.xyz")) {
        joint.axis = detail::ParseVec3(*axis, "joint axis");
      }
      if (joint.Actuated()) {
        const double n = joint.axis.norm();
        if (n < 1e-12) {
          throw ModelError("joint '" + joint.name + "' has a zero axis");
        }
        joint.axis /= n;
      }
      if (joint.type == JointType::kRevolute ||
          joint.type == JointType::kPrismatic) {
        const auto limit = node.get_child_optional("limit");
        if (!limit) {
          throw ModelError("joint '" + joint.name + "' requires <limit>");
        }
        JointLimits limits{limit->get<double>("<xmlattr>.lower", 0.0),
                           limit->get<double>("<xmlattr>.upper", 0.0)};
        if (limits.lower > limits.upper) {
          throw ModelError("joint '" + joint.name + "' has lower > upper limit");
        }
        joint.limits = limits;
      }
      model.joints.push_back(std::move(joint));
    }
  } catch (const boost::property_tree::ptree_error& e) {
    throw ModelError(std::string("malformed URDF: ") + e.what());
  }

  // Tree check: every link has at most one parent, exactly one root, and
  // every link is reachable from it.
  const std::size_t n = model.links.size();
  std::vector<std::optional<std::size_t>> parent_joint(n);
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    const auto child = model.joints[j].child;
    if (parent_joint[child]) {
      throw ModelError("link '" + model.links[child].name +
                       "' has more than one parent: not a tree");
    }
    parent_joint[child] = j;
  }
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (!parent_joint[i]) roots.push_back(i);
  }
  if (roots.size() != 1) {
    throw ModelError("joint graph is not a tree (" + std::to_string(roots.size()) +
                     " root links)");
  }
  model.root_link_index = roots.front();

  std::vector<std::vector<std::size_t>> child_joints(n);
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    child_joints[model.joints[j].parent].push_back(j);
  }
  std::vector<bool> reached(n, false);
  std::vector<std::size_t> stack{model.root_link_index};
  reached[model.root_link_index] = true;
  while (!stack.empty()) {
    const std::size_t link = stack.back();
    stack.pop_back();
    // Reverse push keeps siblings in document order.
    for (auto it = child_joints[link].rbegin(); it != child_joints[link].rend();
         ++it) {
      model.traversal_order.push_back(*it);
      const std::size_t child = model.joints[*it].child;
      reached[child] = true;
      stack.push_back(child);
    }
  }
  if (std::find(reached.begin(), reached.end(), false) != reached.end()) {
    throw ModelError("joint graph is not a tree (cycle or unreachable link)");
  }

  model.config_slot.resize(model.joints.size());
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    if (model.joints[j].Actuated()) model.config_slot[j] = model.dof++;
  }
  return model;
}

// One world-frame pose per link. Throws ModelError on a dimension mismatch.
inline std::vector<RigidTransform> ForwardKinematics(const RobotModel& model,
                                                     const Configuration& config) {
  if (config.size() != model.dof) {
    throw ModelError("configuration has " + std::to_string(config.size()) +
                     " values, robot has " + std::to_string(model.dof) + " dof");
  }
  std::vector<RigidTransform> poses(model.links.size());
  for (const std::size_t j : model.traversal_order) {
    const Joint& joint = model.joints[j];
    const auto& slot = model.config_slot[j];
    const double q = slot ? config.values[*slot] : 0.0;
    poses[joint.child] = poses[joint.parent] * joint.origin * joint.Motion(q);
  }
  return poses;
}

// Parent/child pairs of every joint, closed over rigid (fixed-joint) groups:
// links welded together are mutually adjacent, and a moving joint makes every
// link of the parent group adjacent to every link of the child group.
inline std::set<LinkPair> AdjacentLinkPairs(const RobotModel& model) {
  const std::size_t n = model.links.size();
  std::vector<std::size_t> group(n);
  std::iota(group.begin(), group.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (group[x] != x) x = group[x] = group[group[x]];
    return x;
  };
  for (const auto& joint : model.joints) {
    if (!joint.Actuated()) group[find(joint.child)] = find(joint.parent);
  }
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[find(i)].push_back(i);

  std::set<LinkPair> out;
  const auto add = [&](std::size_t a, std::size_t b) {
    if (a != b) out.emplace(std::min(a, b), std::max(a, b));
  };
  for (const auto& joint : model.joints) {
    add(joint.parent, joint.child);
    for (const auto a : members[find(joint.parent)]) {
      for (const auto b : members[find(joint.child)]) add(a, b);
    }
  }
  return out;
}

// Uniform over [lower, upper] for limited joints, [-pi, pi] for continuous.
inline Configuration SampleConfiguration(const RobotModel& model,
                                         Xoshiro256& rng) {
  Configuration config;
  config.values.reserve(model.dof);
  for (const auto& joint : model.joints) {
    if (!joint.Actuated()) continue;
    if (joint.limits) {
      config.values.push_back(rng.Uniform(joint.limits->lower, joint.limits->upper));
    } else {
      config.values.push_back(rng.Uniform(-kPi, kPi));
    }
  }
  return config;
}

// Lower/upper sampling bounds per configuration slot.
inline std::vector<JointLimits> ConfigurationBounds(const RobotModel& model) {
  std::vector<JointLimits> out;
  for (const auto& joint : model.joints) {
    if (!joint.Actuated()) continue;
    out.push_back(joint.limits.value_or(JointLimits{-kPi, kPi}));
  }
  return out;
}

}  // namespace scmat

#endif  // SCMAT_MODEL_HPP_
