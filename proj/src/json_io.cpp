#include "spatial_arena/json_io.hpp"

#include <fmt/format.h>

#include "spatial_arena/error.hpp"

namespace arena {

namespace {

void dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        dump_into(value, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        dump_into(value, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      std::string s = fmt::format("{:.4f}", v);
      if (s == "-0.0000") s = "0.0000";
      out += s;
      break;
    }
    default:
      out += j.dump(-1, ' ', false, Json::error_handler_t::replace);
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_into(j, out);
  return out;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("malformed JSON: {}", e.what()));
  }
}

Json to_json(Vec2 v) { return Json::array({v.x, v.y}); }
Json to_json(Vec3 v) { return Json::array({v.x, v.y, v.z}); }
Json to_json(const Rect& r) { return Json::array({r.x0, r.y0, r.x1, r.y1}); }
Json to_json(const Box3& b) { return Json::array({b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z}); }
Json to_json(const BBox2D& b) { return Json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

namespace {

double num(const Json& j, std::size_t i, std::size_t n) {
  if (!j.is_array() || j.size() != n || !j[i].is_number()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("expected array of {} numbers", n));
  }
  return j[i].get<double>();
}

}  // namespace

Vec2 vec2_from_json(const Json& j) { return {num(j, 0, 2), num(j, 1, 2)}; }
Vec3 vec3_from_json(const Json& j) { return {num(j, 0, 3), num(j, 1, 3), num(j, 2, 3)}; }
Rect rect_from_json(const Json& j) { return {num(j, 0, 4), num(j, 1, 4), num(j, 2, 4), num(j, 3, 4)}; }
Box3 box3_from_json(const Json& j) {
  return {{num(j, 0, 6), num(j, 1, 6), num(j, 2, 6)}, {num(j, 3, 6), num(j, 4, 6), num(j, 5, 6)}};
}
BBox2D bbox_from_json(const Json& j) { return {num(j, 0, 4), num(j, 1, 4), num(j, 2, 4), num(j, 3, 4)}; }

Json to_json(const Scene& scene) {
  Json floors = Json::array();
  for (const auto& f : scene.floors) {
    Json rooms = Json::array();
    for (const auto& r : f.rooms) {
      Json doors = Json::array();
      for (const auto& d : r.door_edges) {
        doors.push_back(Json{{"a", to_json(d.a)}, {"b", to_json(d.b)}, {"to", d.other_room}});
      }
      rooms.push_back(Json{{"room_id", r.room_id},
                           {"category", to_string(r.category)},
                           {"rect", to_json(r.rect)},
                           {"doors", std::move(doors)}});
    }
    floors.push_back(Json{{"index", f.index},
                          {"footprint", to_json(f.footprint)},
                          {"elevation_z", f.elevation_z},
                          {"rooms", std::move(rooms)}});
  }
  Json objects = Json::array();
  for (const auto& o : scene.objects) {
    objects.push_back(Json{{"object_id", o.object_id},
                           {"class", o.class_name},
                           {"room_id", o.room_id},
                           {"floor", o.floor_index},
                           {"aabb", to_json(o.aabb)},
                           {"color", to_string(o.color)},
                           {"material", to_string(o.material)},
                           {"shape", to_string(o.shape)},
                           {"state", to_string(o.state)}});
  }
  return Json{{"v", 1},
              {"scene_id", scene.scene_id},
              {"seed", scene.seed},
              {"total_area", scene.total_area},
              {"floors", std::move(floors)},
              {"objects", std::move(objects)}};
}

Scene scene_from_json(const Json& j) {
  try {
    Scene s;
    s.scene_id = j.at("scene_id").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.total_area = j.at("total_area").get<double>();
    for (const auto& jf : j.at("floors")) {
      Floor f;
      f.index = jf.at("index").get<int>();
      f.footprint = rect_from_json(jf.at("footprint"));
      f.elevation_z = jf.at("elevation_z").get<double>();
      for (const auto& jr : jf.at("rooms")) {
        Room r;
        r.room_id = jr.at("room_id").get<std::string>();
        r.category = parse_room_category(jr.at("category").get<std::string>());
        r.rect = rect_from_json(jr.at("rect"));
        for (const auto& jd : jr.at("doors")) {
          r.door_edges.push_back(
              {vec2_from_json(jd.at("a")), vec2_from_json(jd.at("b")), jd.at("to").get<std::string>()});
        }
        f.rooms.push_back(std::move(r));
      }
      s.floors.push_back(std::move(f));
    }
    for (const auto& jo : j.at("objects")) {
      SceneObject o;
      o.object_id = jo.at("object_id").get<std::string>();
      o.class_name = jo.at("class").get<std::string>();
      o.room_id = jo.at("room_id").get<std::string>();
      o.floor_index = jo.at("floor").get<int>();
      o.aabb = box3_from_json(jo.at("aabb"));
      o.color = parse_color(jo.at("color").get<std::string>());
      o.material = parse_material(jo.at("material").get<std::string>());
      o.shape = parse_shape(jo.at("shape").get<std::string>());
      o.state = parse_state(jo.at("state").get<std::string>());
      s.objects.push_back(std::move(o));
    }
    std::ranges::sort(s.objects, {}, &SceneObject::object_id);
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad scene document: {}", e.what()));
  }
}

std::string serialize_scene(const Scene& scene) { return canonical_dump(to_json(scene)) + "\n"; }

Scene deserialize_scene(std::string_view text) { return scene_from_json(parse_json(text)); }

namespace {

Json range_json(IntRange r) { return Json::array({r.min, r.max}); }
Json range_json(RealRange r) { return Json::array({r.min, r.max}); }

}  // namespace

Json to_json(const GeneratorProfile& p) {
  return Json{{"floor_count", range_json(p.floor_count)},
              {"total_rooms", range_json(p.total_rooms)},
              {"rooms_per_floor", range_json(p.rooms_per_floor)},
              {"objects_per_room", range_json(p.objects_per_room)},
              {"footprint_width", range_json(p.footprint_width)},
              {"footprint_depth", range_json(p.footprint_depth)},
              {"min_total_area", p.min_total_area},
              {"min_room_width", p.min_room_width},
              {"color_weights", p.color_weights},
              {"material_weights", p.material_weights},
              {"shape_weights", p.shape_weights},
              {"max_retries", p.max_retries}};
}

GeneratorProfile profile_from_json(const Json& j) {
  GeneratorProfile p;
  try {
    auto int_range = [&](const char* key, IntRange& r) {
      if (j.contains(key)) r = {j[key].at(0).get<int>(), j[key].at(1).get<int>()};
    };
    auto real_range = [&](const char* key, RealRange& r) {
      if (j.contains(key)) r = {j[key].at(0).get<double>(), j[key].at(1).get<double>()};
    };
    int_range("floor_count", p.floor_count);
    int_range("total_rooms", p.total_rooms);
    int_range("rooms_per_floor", p.rooms_per_floor);
    int_range("objects_per_room", p.objects_per_room);
    real_range("footprint_width", p.footprint_width);
    real_range("footprint_depth", p.footprint_depth);
    if (j.contains("min_total_area")) p.min_total_area = j["min_total_area"].get<double>();
    if (j.contains("min_room_width")) p.min_room_width = j["min_room_width"].get<double>();
    if (j.contains("color_weights")) p.color_weights = j["color_weights"].get<std::vector<double>>();
    if (j.contains("material_weights")) p.material_weights = j["material_weights"].get<std::vector<double>>();
    if (j.contains("shape_weights")) p.shape_weights = j["shape_weights"].get<std::vector<double>>();
    if (j.contains("max_retries")) p.max_retries = j["max_retries"].get<int>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad generator profile: {}", e.what()));
  }
  p.validate();
  return p;
}

}  // namespace arena
