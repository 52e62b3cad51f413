#ifndef TASKPLAN_CORE_VOCAB_HPP
#define TASKPLAN_CORE_VOCAB_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace taskplan {

// Primitive-action, object-class and task name tables. Indices into these
// lists are the ids used everywhere else; order is the order of appearance
// in the grammar-set file.
struct Vocab {
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::vector<std::string> tasks;

  // The 7 primitive actions and 10 object classes of the bundled domain.
  static Vocab default_domain();

  int action_index(std::string_view name) const;
  int object_index(std::string_view name) const;
  int task_index(std::string_view name) const;

  // Stable hash over all three name lists; models and datasets carry it so
  // mismatched artifacts are refused instead of silently misread.
  uint64_t fingerprint() const;
};

}  // namespace taskplan

#endif
