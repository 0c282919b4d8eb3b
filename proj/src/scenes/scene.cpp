#include "tapush/scene.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include "world/collision.hpp"

namespace tapush {

using nlohmann::json;

double min_object_clearance(const std::vector<ObjectState>& objects) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      const ObjectState& a = objects[i];
      const ObjectState& b = objects[j];
      const double far = (a.position - b.position).norm() - a.shape.bounding_radius() - b.shape.bounding_radius();
      // Within this margin the exact separation is computed; beyond it the bounding
      // gap is a lower bound, which is all callers need.
      constexpr double kExactRange = 0.05;
      if (far > kExactRange) {
        best = std::min(best, far);
        continue;
      }
      detail::Manifold m;
      const double margin = kExactRange + a.shape.bounding_radius() + b.shape.bounding_radius();
      if (detail::collide(detail::CollisionShape::from(a.shape), Frame(a.position, a.heading),
                          detail::CollisionShape::from(b.shape), Frame(b.position, b.heading), margin, m)) {
        for (int k = 0; k < m.count; ++k) {
          best = std::min(best, m.points[k].separation);
        }
      }
    }
  }
  return best;
}

void SceneSpec::validate() const {
  table.validate();
  if (objects.empty()) {
    throw std::invalid_argument("scene has no objects");
  }
  if (target >= objects.size()) {
    throw std::invalid_argument("target index out of range");
  }
  if (!(b >= 0.0)) {
    throw std::invalid_argument("uncertainty slope b must be >= 0");
  }
  if (task == TaskKind::kPush && !table.goal) {
    throw std::invalid_argument("push scene needs a goal region");
  }
  WorldModel model;
  model.table = table;
  try {
    validate_state(model, initial_state());
  } catch (const PhysicsError& e) {
    throw std::invalid_argument(e.what());
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].fallen || !table.contains(objects[i].position)) {
      throw std::invalid_argument("object " + std::to_string(i) + " does not start on the table");
    }
  }
  if (min_object_clearance(objects) < 0.0) {
    throw std::invalid_argument("objects overlap in the initial layout");
  }
}

WorldState SceneSpec::initial_state() const {
  WorldState s;
  s.robot = robot;
  s.objects = objects;
  return s;
}

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("expected a 2-element array");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json rect(const Rect& r) { return json::array({r.min.x(), r.min.y(), r.max.x(), r.max.y()}); }

Rect rect(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument("rectangles are [x_min, y_min, x_max, y_max]");
  }
  return Rect{{j.at(0).get<double>(), j.at(1).get<double>()}, {j.at(2).get<double>(), j.at(3).get<double>()}};
}

json object_json(const ObjectState& o) {
  json j;
  if (o.shape.kind == ShapeKind::kDisc) {
    j["shape"] = "disc";
    j["radius"] = o.shape.radius;
  } else {
    j["shape"] = "box";
    j["half_extents"] = vec(o.shape.half_extents);
  }
  j["height"] = o.shape.height;
  j["mass"] = o.mass;
  j["friction"] = o.friction;
  j["position"] = vec(o.position);
  j["heading"] = o.heading;
  return j;
}

ObjectState object_from(const json& j) {
  ObjectState o;
  const std::string shape = j.at("shape").get<std::string>();
  const double height = j.value("height", 0.04);
  if (shape == "disc") {
    o.shape = Shape::disc(j.at("radius").get<double>(), height);
  } else if (shape == "box") {
    const Vec2 h = vec(j.at("half_extents"));
    o.shape = Shape::box(h.x(), h.y(), height);
  } else {
    throw std::invalid_argument("unknown object shape '" + shape + "'");
  }
  o.mass = j.at("mass").get<double>();
  o.friction = j.at("friction").get<double>();
  o.position = vec(j.at("position"));
  o.heading = j.value("heading", 0.0);
  return o;
}

}  // namespace

json to_json(const SceneSpec& scene) {
  json j;
  j["name"] = scene.name;
  j["task"] = std::string(to_string(scene.task));
  j["target"] = scene.target;
  j["b"] = scene.b;
  json table;
  table["regions"] = json::array();
  for (const Rect& r : scene.table.regions) {
    table["regions"].push_back(rect(r));
  }
  table["safe_margin"] = scene.table.safe_margin;
  table["obstacles"] = json::array();
  for (const Rect& r : scene.table.obstacles) {
    table["obstacles"].push_back(rect(r));
  }
  if (scene.table.goal) {
    table["goal"] = {{"center", vec(scene.table.goal->center)}, {"radius", scene.table.goal->radius}};
  }
  j["table"] = table;
  j["robot"] = {{"position", vec(scene.robot.position)},
                {"rotation", scene.robot.rotation},
                {"opening", scene.robot.opening}};
  j["objects"] = json::array();
  for (const ObjectState& o : scene.objects) {
    j["objects"].push_back(object_json(o));
  }
  return j;
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec s;
  s.name = j.value("name", std::string());
  s.task = parse_task_kind(j.value("task", std::string("push")));
  s.target = j.value("target", std::size_t{0});
  s.b = j.value("b", 0.0);
  const json& t = j.at("table");
  for (const json& r : t.at("regions")) {
    s.table.regions.push_back(rect(r));
  }
  s.table.safe_margin = t.value("safe_margin", s.table.safe_margin);
  if (t.contains("obstacles")) {
    for (const json& r : t.at("obstacles")) {
      s.table.obstacles.push_back(rect(r));
    }
  }
  if (t.contains("goal") && !t.at("goal").is_null()) {
    s.table.goal = Goal{vec(t.at("goal").at("center")), t.at("goal").at("radius").get<double>()};
  }
  const json& r = j.at("robot");
  s.robot.position = vec(r.at("position"));
  s.robot.rotation = r.value("rotation", 0.0);
  s.robot.opening = r.value("opening", 0.0);
  for (const json& o : j.at("objects")) {
    s.objects.push_back(object_from(o));
  }
  s.validate();
  return s;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read scene file " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("scene file " + path.string() + ": " + e.what());
  }
  try {
    return scene_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("scene file " + path.string() + ": " + e.what());
  }
}

void save_scene(const SceneSpec& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write scene file " + path.string());
  }
  out << to_json(scene).dump(2) << '\n';
}

}  // namespace tapush
