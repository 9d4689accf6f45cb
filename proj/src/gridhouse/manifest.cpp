#include "lcrl/gridhouse/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "lcrl/common/rng.hpp"

namespace lcrl::gridhouse {
namespace {

using nlohmann::json;

json tile_json(Tile t) { return json::array({t.x, t.y}); }
Tile tile_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json config_json(const DatasetConfig& c) {
  return {{"num_houses", c.num_houses},
          {"house_width", c.house.width},
          {"house_height", c.house.height},
          {"min_rooms", c.house.min_rooms},
          {"max_rooms", c.house.max_rooms},
          {"objects_per_house", c.house.num_objects},
          {"min_tasks_per_house", c.min_tasks_per_house},
          {"max_tasks_per_house", c.max_tasks_per_house},
          {"test_house_fraction", c.test_house_fraction},
          {"test_task_fraction", c.test_task_fraction},
          {"horizon", c.mdp.horizon},
          {"gamma", c.mdp.gamma},
          {"success_reward", c.mdp.success_reward}};
}

DatasetConfig config_from(const json& j) {
  DatasetConfig c;
  c.num_houses = j.at("num_houses");
  c.house.width = j.at("house_width");
  c.house.height = j.at("house_height");
  c.house.min_rooms = j.at("min_rooms");
  c.house.max_rooms = j.at("max_rooms");
  c.house.num_objects = j.at("objects_per_house");
  c.min_tasks_per_house = j.at("min_tasks_per_house");
  c.max_tasks_per_house = j.at("max_tasks_per_house");
  c.test_house_fraction = j.at("test_house_fraction");
  c.test_task_fraction = j.at("test_task_fraction");
  c.mdp.horizon = j.at("horizon");
  c.mdp.gamma = j.at("gamma");
  c.mdp.success_reward = j.at("success_reward");
  return c;
}

// Everything except the checksum; grid bytes live in the blob.
json manifest_body(const Dataset& ds, std::vector<std::uint8_t>& blob) {
  json j;
  j["format"] = "lcrl-dataset";
  j["version"] = kManifestVersion;
  j["seed"] = ds.seed;
  j["config"] = config_json(ds.config);
  json objects = json::array();
  for (int o = 0; o < kNumObjects; ++o) {
    objects.push_back(ds.vocab.words[static_cast<std::size_t>(ds.vocab.object_token[o])]);
  }
  j["vocabulary"] = {{"words", ds.vocab.words}, {"objects", objects}};

  json houses = json::array();
  for (const auto& h : ds.houses) {
    json hj;
    hj["id"] = h.house_id;
    hj["seed"] = h.seed;
    hj["width"] = h.width;
    hj["height"] = h.height;
    hj["grid_offset"] = blob.size();
    for (auto c : h.grid) blob.push_back(static_cast<std::uint8_t>(c));
    json rooms = json::array();
    for (std::size_t r = 0; r < h.rooms.size(); ++r) {
      json tiles = json::array(), slots = json::array();
      for (Tile t : h.rooms[r].tiles) tiles.push_back(tile_json(t));
      for (Tile t : h.object_slots[r]) slots.push_back(tile_json(t));
      rooms.push_back({{"type", room_type_name(h.rooms[r].type)},
                       {"tiles", tiles},
                       {"slots", slots}});
    }
    hj["rooms"] = rooms;
    json objs = json::array();
    for (const auto& o : h.objects) {
      objs.push_back({{"object", o.object}, {"tile", tile_json(o.tile)}});
    }
    hj["objects"] = objs;
    houses.push_back(std::move(hj));
  }
  j["houses"] = std::move(houses);

  json tasks = json::array();
  for (const auto& t : ds.tasks) {
    json tj;
    tj["id"] = t.task_id;
    tj["kind"] = t.kind == TaskKind::kNav ? "NAV" : "PICK";
    tj["house"] = t.house_id;
    if (t.kind == TaskKind::kNav) {
      tj["target"] = t.nav_target == NavTarget::kObject ? "object" : "room";
    } else {
      tj["source"] = tile_json(t.source);
      tj["destination"] = tile_json(t.destination);
    }
    tj["object"] = t.object;
    tj["room"] = room_type_name(t.room);
    tj["command"] = t.command;
    tj["text"] = ds.vocab.render(t.command);
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  j["split"] = {{"train", ds.split.train},
                {"test_task", ds.split.test_task},
                {"test_house", ds.split.test_house}};
  return j;
}

std::uint64_t checksum_of(const json& body, const std::vector<std::uint8_t>& blob) {
  const std::string text = body.dump();
  auto h = fnv1a(std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                           text.size()));
  return fnv1a(blob, h);
}

}  // namespace

std::uint64_t dataset_checksum(const Dataset& ds) {
  std::vector<std::uint8_t> blob;
  return checksum_of(manifest_body(ds, blob), blob);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> blob;
  json j = manifest_body(ds, blob);
  j["checksum"] = hex64(checksum_of(j, blob));
  std::ofstream grids(dir / "grids.bin", std::ios::binary);
  grids.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size()));
  std::ofstream manifest(dir / "manifest.json");
  manifest << j.dump(1) << '\n';
  if (!grids || !manifest) {
    throw ManifestError("failed writing dataset to " + dir.string());
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ManifestError("missing manifest " + (dir / "manifest.json").string());
  std::ifstream gf(dir / "grids.bin", std::ios::binary);
  if (!gf) throw ManifestError("missing grid blob " + (dir / "grids.bin").string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(gf)),
                                 std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(mf);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "lcrl-dataset") {
    throw ManifestError("manifest format tag is not lcrl-dataset");
  }
  if (j.value("version", -1) != kManifestVersion) {
    throw ManifestError("manifest version mismatch: file has v" +
                        std::to_string(j.value("version", -1)) +
                        ", expected v" + std::to_string(kManifestVersion));
  }

  Dataset ds;
  try {
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.config = config_from(j.at("config"));
    std::array<std::string, kNumObjects> objects;
    for (int o = 0; o < kNumObjects; ++o) {
      objects[static_cast<std::size_t>(o)] = j.at("vocabulary").at("objects").at(o);
    }
    ds.vocab = make_vocabulary(objects);
    if (ds.vocab.words != j.at("vocabulary").at("words").get<std::vector<std::string>>()) {
      throw ManifestError("vocabulary word list does not match its object table");
    }
    for (const auto& hj : j.at("houses")) {
      House h;
      h.house_id = hj.at("id");
      h.seed = hj.at("seed").get<std::uint64_t>();
      h.width = hj.at("width");
      h.height = hj.at("height");
      const std::size_t off = hj.at("grid_offset");
      const std::size_t n = static_cast<std::size_t>(h.width * h.height);
      if (off + n > blob.size()) throw ManifestError("grid blob too short");
      for (std::size_t i = 0; i < n; ++i) {
        if (blob[off + i] >= kNumClasses) throw ManifestError("bad grid class");
        h.grid.push_back(static_cast<SemanticClass>(blob[off + i]));
      }
      for (const auto& rj : hj.at("rooms")) {
        Room room;
        room.type = room_type_from_name(rj.at("type").get<std::string>());
        for (const auto& t : rj.at("tiles")) room.tiles.push_back(tile_from(t));
        std::vector<Tile> slots;
        for (const auto& t : rj.at("slots")) slots.push_back(tile_from(t));
        h.rooms.push_back(std::move(room));
        h.object_slots.push_back(std::move(slots));
      }
      for (const auto& oj : hj.at("objects")) {
        h.objects.push_back({oj.at("object").get<int>(), tile_from(oj.at("tile"))});
      }
      ds.houses.push_back(std::move(h));
    }
    for (const auto& tj : j.at("tasks")) {
      TaskSpec t;
      t.task_id = tj.at("id");
      t.kind = tj.at("kind") == "NAV" ? TaskKind::kNav : TaskKind::kPick;
      t.house_id = tj.at("house");
      if (t.kind == TaskKind::kNav) {
        t.nav_target = tj.at("target") == "object" ? NavTarget::kObject
                                                   : NavTarget::kRoom;
      } else {
        t.source = tile_from(tj.at("source"));
        t.destination = tile_from(tj.at("destination"));
      }
      t.object = tj.at("object");
      t.room = room_type_from_name(tj.at("room").get<std::string>());
      t.command = tj.at("command").get<std::vector<int>>();
      ds.tasks.push_back(std::move(t));
    }
    ds.split.train = j.at("split").at("train").get<std::vector<int>>();
    ds.split.test_task = j.at("split").at("test_task").get<std::vector<int>>();
    ds.split.test_house = j.at("split").at("test_house").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }

  std::vector<std::uint8_t> check_blob;
  const auto sum = checksum_of(manifest_body(ds, check_blob), check_blob);
  if (hex64(sum) != j.value("checksum", "")) {
    throw ManifestError("manifest checksum mismatch (file " +
                        j.value("checksum", std::string("<none>")) +
                        ", computed " + hex64(sum) + ")");
  }
  ds.split.checksum = sum;
  return ds;
}

}  // namespace lcrl::gridhouse
