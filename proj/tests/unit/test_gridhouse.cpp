#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <tuple>
#include <fstream>
#include <queue>
#include <set>

#include "lcrl/gridhouse/dataset.hpp"
#include "lcrl/gridhouse/manifest.hpp"
#include "lcrl/gridhouse/mdp_builder.hpp"

using namespace lcrl;
using namespace lcrl::gridhouse;

namespace {

std::size_t flood_fill_count(const House& h, Tile start) {
  std::set<Tile> seen{start};
  std::queue<Tile> q;
  q.push(start);
  while (!q.empty()) {
    const Tile t = q.front();
    q.pop();
    for (Tile d : {Tile{1, 0}, Tile{-1, 0}, Tile{0, 1}, Tile{0, -1}}) {
      const Tile n{t.x + d.x, t.y + d.y};
      if (h.walkable(n) && seen.insert(n).second) q.push(n);
    }
  }
  return seen.size();
}

std::vector<Tile> floor_tiles(const House& h) {
  std::vector<Tile> out;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x)
      if (h.walkable({x, y})) out.push_back({x, y});
  return out;
}

bool in_any_crop(Tile pos, Tile t) {
  const Tile fwd[] = {{0, -1}, {0, 1}, {1, 0}, {-1, 0}};
  for (Tile f : fwd) {
    const Tile right{-f.y, f.x};
    for (int depth = 0; depth < kViewSize; ++depth)
      for (int lat = -2; lat <= 2; ++lat)
        if (Tile{pos.x + f.x * depth + right.x * lat, pos.y + f.y * depth + right.y * lat} == t)
          return true;
  }
  return false;
}

HouseConfig cfg(int w, int h, int min_rooms, int max_rooms) {
  HouseConfig c;
  c.width = w;
  c.height = h;
  c.min_rooms = min_rooms;
  c.max_rooms = max_rooms;
  return c;
}

const TaskSpec* first_task(const std::vector<TaskSpec>& tasks, TaskKind kind) {
  for (const auto& t : tasks)
    if (t.kind == kind) return &t;
  return nullptr;
}

}  // namespace

TEST_CASE("house generation is deterministic") {
  const auto a = generate_house(0, {});
  const auto b = generate_house(0, {});
  CHECK(a.grid == b.grid);
  CHECK(a.objects.size() == b.objects.size());
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    CHECK(a.objects[i].object == b.objects[i].object);
    CHECK(a.objects[i].tile == b.objects[i].tile);
  }
}

TEST_CASE("every floor tile is reachable") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto h = generate_house(seed, seed == 0 ? cfg(9, 9, 2, 2) : HouseConfig{});
    const auto tiles = floor_tiles(h);
    REQUIRE(!tiles.empty());
    CHECK(flood_fill_count(h, tiles.front()) == tiles.size());
  }
}

TEST_CASE("boundary tiles are walls and room counts stay in range") {
  const auto h = generate_house(1, cfg(7, 7, 2, 2));
  for (int x = 0; x < h.width; ++x) {
    CHECK(h.at({x, 0}) == SemanticClass::kWall);
    CHECK(h.at({x, h.height - 1}) == SemanticClass::kWall);
  }
  for (int y = 0; y < h.height; ++y) {
    CHECK(h.at({0, y}) == SemanticClass::kWall);
    CHECK(h.at({h.width - 1, y}) == SemanticClass::kWall);
  }
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = generate_house(seed, {});
    CHECK(g.rooms.size() >= 2);
    CHECK(g.rooms.size() <= 4);
    CHECK_NOTHROW(validate_house(g));
  }
}

TEST_CASE("degenerate configurations fail loudly") {
  CHECK_THROWS_AS(generate_house(0, cfg(5, 5, 2, 2)), GenerationError);
  CHECK_THROWS_AS(generate_house(0, cfg(9, 9, 1, 1)), GenerationError);
  CHECK_THROWS_AS(generate_house(0, cfg(9, 9, 3, 5)), GenerationError);
}

TEST_CASE("commands follow the two templates") {
  const auto vocab = default_vocabulary();
  const auto h = generate_house(4, {});
  Rng rng(4);
  const auto tasks = make_tasks(h, vocab, rng);
  int nav_obj = 0, nav_room = 0, pick = 0;
  for (const auto& t : tasks) {
    for (int tok : t.command) CHECK((tok >= 0 && tok < vocab.size()));
    if (t.kind == TaskKind::kNav && t.nav_target == NavTarget::kObject) {
      ++nav_obj;
      CHECK(t.command == std::vector<int>{vocab.go, vocab.to, vocab.the,
                                          vocab.object_token[static_cast<std::size_t>(t.object)]});
      CHECK(h.find_object(t.object) != nullptr);
    } else if (t.kind == TaskKind::kNav) {
      ++nav_room;
      CHECK(t.command == std::vector<int>{vocab.go, vocab.to, vocab.the,
                                          vocab.room_token[static_cast<std::size_t>(t.room)]});
      CHECK(h.room_index(t.room) >= 0);
    } else {
      ++pick;
      CHECK(t.command ==
            std::vector<int>{vocab.move, vocab.the,
                             vocab.object_token[static_cast<std::size_t>(t.object)], vocab.to,
                             vocab.the, vocab.room_token[static_cast<std::size_t>(t.room)]});
      CHECK(t.source != t.destination);
      CHECK(h.walkable(t.source));
      CHECK(h.walkable(t.destination));
      CHECK(h.rooms[static_cast<std::size_t>(h.room_of(t.destination))].type == t.room);
    }
  }
  CHECK(nav_obj == static_cast<int>(h.objects.size()));
  CHECK(nav_room == static_cast<int>(h.rooms.size()));
  CHECK(pick > 0);
  CHECK(vocab.render({vocab.go, vocab.to, vocab.the, vocab.room_token[1]}) == "go to the kitchen");
}

TEST_CASE("state counts and wall self-transitions") {
  const auto vocab = default_vocabulary();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto h = generate_house(seed, {});
    Rng rng(seed);
    const auto tasks = make_tasks(h, vocab, rng);
    const auto* nav = first_task(tasks, TaskKind::kNav);
    const auto* pick = first_task(tasks, TaskKind::kPick);
    REQUIRE(nav != nullptr);
    REQUIRE(pick != nullptr);
    solver::TabularMDP mn, mp;
    try {
      mn = build_mdp(h, *nav);
      mp = build_mdp(h, *pick);
    } catch (const UnsolvableTask&) {
      continue;
    }
    CHECK(mn.num_states <= 9 * 9 * 4 + 1);
    CHECK(mp.num_states - 1 == 3 * (mn.num_states - 1));
    CHECK_NOTHROW(solver::validate_mdp(mn));
    for (int s = 0; s < mn.num_states; ++s) {
      if (s == mn.sink || mn.success[static_cast<std::size_t>(s)]) continue;
      const auto& st = mn.states[static_cast<std::size_t>(s)];
      const Tile ahead[] = {{st.x, st.y - 1}, {st.x + 1, st.y}, {st.x, st.y + 1}, {st.x - 1, st.y}};
      if (!h.walkable(ahead[st.orientation])) CHECK(mn.successor(s, solver::kForward) == s);
    }
    for (int a = 0; a < solver::kNumActions; ++a) CHECK(mn.successor(mn.sink, a) == mn.sink);
    CHECK_FALSE(mn.success[static_cast<std::size_t>(mn.initial_state)]);
  }
}

TEST_CASE("ground-truth reward sits on success states only") {
  const auto vocab = default_vocabulary();
  const auto h = generate_house(2, {});
  Rng rng(2);
  for (const auto& t : make_tasks(h, vocab, rng)) {
    solver::TabularMDP m;
    try {
      m = build_mdp(h, t);
    } catch (const UnsolvableTask&) {
      continue;
    }
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < solver::kNumActions; ++a) {
        const double r = m.ground_truth_reward[static_cast<std::size_t>(s) * 4 + a];
        CHECK(r == (m.success[static_cast<std::size_t>(s)] ? 10.0 : 0.0));
        if (m.success[static_cast<std::size_t>(s)]) CHECK(m.successor(s, a) == m.sink);
      }
    }
  }
}

TEST_CASE("observations ignore orientation and show the held object") {
  const auto vocab = default_vocabulary();
  const auto h = generate_house(5, {});
  Rng rng(5);
  const auto tasks = make_tasks(h, vocab, rng);
  const auto* pick = first_task(tasks, TaskKind::kPick);
  REQUIRE(pick != nullptr);
  const auto m = build_mdp(h, *pick);
  std::map<std::tuple<int, int, int>, int> by_place;
  for (int s = 0; s < m.num_states; ++s) {
    if (s == m.sink) continue;
    const auto& st = m.states[static_cast<std::size_t>(s)];
    const auto [it, inserted] =
        by_place.emplace(std::tuple{st.x, st.y, st.status}, m.obs_index[static_cast<std::size_t>(s)]);
    if (!inserted) CHECK(it->second == m.obs_index[static_cast<std::size_t>(s)]);
  }
  CHECK(by_place.size() * 4 == static_cast<std::size_t>(m.num_states - 1));
  const Tile p = pick->source;
  const auto src = render_observation(h, *pick, p, ObjectStatus::kAtSource);
  const auto held = render_observation(h, *pick, p, ObjectStatus::kHeld);
  CHECK(src.key != held.key);
  CHECK(render_observation(h, *pick, p, ObjectStatus::kAtSource).key == src.key);
}

TEST_CASE("object status is invisible when neither slot is in view") {
  DatasetConfig dc;
  dc.num_houses = 12;
  dc.house.width = 13;
  dc.house.height = 13;
  const auto ds = make_dataset(dc, 3);
  int found = 0;
  for (const auto& t : ds.tasks) {
    if (t.kind != TaskKind::kPick) continue;
    const auto& h = ds.house(t.house_id);
    for (Tile p : floor_tiles(h)) {
      if (in_any_crop(p, t.source) || in_any_crop(p, t.destination)) continue;
      const auto a = render_observation(h, t, p, ObjectStatus::kAtSource);
      const auto b = render_observation(h, t, p, ObjectStatus::kAtDestination);
      CHECK(a.key == b.key);
      CHECK(a == b);
      ++found;
    }
  }
  CHECK(found > 0);
}

TEST_CASE("cells outside every crop never change an observation") {
  const auto vocab = default_vocabulary();
  auto h = generate_house(7, cfg(13, 13, 2, 4));
  Rng rng(7);
  const auto tasks = make_tasks(h, vocab, rng);
  const auto& task = tasks.front();
  const auto tiles = floor_tiles(h);
  for (std::size_t k = 0; k < tiles.size(); k += 5) {
    const Tile p = tiles[k];
    const auto before = render_observation(h, task, p, ObjectStatus::kAtSource);
    auto mutated = h;
    for (int y = 0; y < h.height; ++y)
      for (int x = 0; x < h.width; ++x)
        if (!in_any_crop(p, {x, y})) mutated.grid[static_cast<std::size_t>(y * h.width + x)] = SemanticClass::kDoor;
    CHECK(render_observation(mutated, task, p, ObjectStatus::kAtSource).key == before.key);
  }
}

TEST_CASE("dataset splits are disjoint, hygienic and near 71/17/12") {
  const auto ds = make_dataset({}, 0);
  CHECK_NOTHROW(check_split(ds));
  const double n = static_cast<double>(ds.tasks.size());
  CHECK(n >= 190);
  CHECK(n <= 230);
  CHECK(std::abs(ds.split.train.size() / n - 0.71) <= 0.03);
  CHECK(std::abs(ds.split.test_task.size() / n - 0.17) <= 0.03);
  CHECK(std::abs(ds.split.test_house.size() / n - 0.12) <= 0.03);

  std::set<int> train_houses, test_houses, all;
  for (int id : ds.split.train) train_houses.insert(ds.task(id).house_id);
  for (int id : ds.split.test_task) train_houses.insert(ds.task(id).house_id);
  for (int id : ds.split.test_house) test_houses.insert(ds.task(id).house_id);
  for (int h : test_houses) CHECK_FALSE(train_houses.contains(h));
  for (const auto* list : {&ds.split.train, &ds.split.test_task, &ds.split.test_house})
    for (int id : *list) CHECK(all.insert(id).second);
  CHECK(all.size() == ds.tasks.size());

  std::set<TaskTarget> seen;
  for (int id : ds.split.train) seen.insert(task_target(ds.task(id)));
  for (int id : ds.split.test_task) CHECK_FALSE(seen.contains(task_target(ds.task(id))));

  int nav = 0;
  for (const auto& t : ds.tasks) nav += t.kind == TaskKind::kNav ? 1 : 0;
  CHECK(std::abs(nav / n - 0.5) < 0.1);
}

TEST_CASE("dataset checksum is reproducible and seed dependent") {
  DatasetConfig dc;
  dc.num_houses = 10;
  const auto a = make_dataset(dc, 11);
  const auto b = make_dataset(dc, 11);
  const auto c = make_dataset(dc, 12);
  CHECK(a.split.checksum == b.split.checksum);
  CHECK(a.split.checksum != c.split.checksum);
  CHECK(dataset_checksum(a) == a.split.checksum);
  dc.num_houses = 9;
  CHECK_THROWS_AS(make_dataset(dc, 0), DatasetError);
}

TEST_CASE("split checker catches leakage") {
  DatasetConfig dc;
  dc.num_houses = 10;
  auto ds = make_dataset(dc, 1);
  auto leaky = ds;
  leaky.split.test_task.push_back(leaky.split.train.front());
  CHECK_THROWS_AS(check_split(leaky), DatasetError);
  auto moved = ds;
  moved.split.train.push_back(moved.split.test_house.front());
  moved.split.test_house.erase(moved.split.test_house.begin());
  CHECK_THROWS_AS(check_split(moved), DatasetError);
}

TEST_CASE("manifest round-trips and detects tampering") {
  DatasetConfig dc;
  dc.num_houses = 10;
  const auto ds = make_dataset(dc, 5);
  const auto dir = std::filesystem::temp_directory_path() / "lcrl_test_manifest";
  std::filesystem::remove_all(dir);
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  CHECK(back.split.checksum == ds.split.checksum);
  CHECK(back.tasks.size() == ds.tasks.size());
  CHECK(back.houses[3].grid == ds.houses[3].grid);
  CHECK(back.vocab.words == ds.vocab.words);

  {
    std::fstream f(dir / "grids.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    f.put(static_cast<char>(SemanticClass::kDoor));
  }
  CHECK_THROWS_AS(load_dataset(dir), ManifestError);
  CHECK_THROWS_AS(load_dataset(dir / "nope"), ManifestError);
}
