#include "core/vocab.hpp"

#include "core/rng.hpp"

namespace taskplan {

Vocab Vocab::default_domain() {
  Vocab v;
  v.actions = {"open",      "grasp",     "put into", "move to",
               "put under", "pour into", "wash"};
  v.objects = {"bowl",      "cup",  "pot",       "water-dispenser", "tea-box",
               "ramen-cup", "ramen-bag", "tap", "basin",           "apple"};
  return v;
}

namespace {
int find_name(const std::vector<std::string>& names, std::string_view name) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}
}  // namespace

int Vocab::action_index(std::string_view name) const { return find_name(actions, name); }
int Vocab::object_index(std::string_view name) const { return find_name(objects, name); }
int Vocab::task_index(std::string_view name) const { return find_name(tasks, name); }

uint64_t Vocab::fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_list = [&h](const std::vector<std::string>& names) {
    for (const auto& n : names) {
      h = fnv1a(n, h);
      h = fnv1a(std::string_view("\x1f", 1), h);
    }
    h = fnv1a(std::string_view("\x1e", 1), h);
  };
  mix_list(actions);
  mix_list(objects);
  mix_list(tasks);
  return h;
}

}  // namespace taskplan
