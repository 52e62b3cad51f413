#ifndef TASKPLAN_CORE_GRAMMAR_HPP
#define TASKPLAN_CORE_GRAMMAR_HPP

#include <compare>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/vocab.hpp"

namespace taskplan {

// (primitive action, object class) pair; the unit of a plan.
struct AtomicAction {
  int action = 0;
  int object = 0;
  auto operator<=>(const AtomicAction&) const = default;
};

using ActionSequence = std::vector<AtomicAction>;

enum class NodeKind { And, Or, Terminal };

struct Node {
  std::string label;            // node id string from the grammar file
  NodeKind kind = NodeKind::Terminal;
  std::vector<int> children;    // declaration order; chronological for and-nodes
  std::vector<double> prior;    // or-nodes only, optional; one weight per child
  std::optional<AtomicAction> atomic;  // terminals only
};

// Rooted tree of and/or/terminal nodes encoding all valid action sequences
// for one task. Immutable after load; prune() returns a new graph.
struct AndOrGraph {
  std::string name;
  int root = 0;
  std::vector<Node> nodes;

  const Node& at(int id) const;
  int find_label(std::string_view label) const;  // -1 if absent
  int count_kind(NodeKind kind) const;
};

// One resolved or-node choice; or_node is the node label so entries stay
// valid across pruning.
struct SelectionStep {
  std::string or_node;
  int child = 0;
  bool operator==(const SelectionStep&) const = default;
};

using SelectionList = std::vector<SelectionStep>;

struct ParsingGraph {
  const AndOrGraph* source = nullptr;
  SelectionList selections;
};

// Global node-id -> feature-index map shared by all task grammars of a set,
// assigned by first appearance (task order, then pre-order DFS within a task).
struct NodeIndexMap {
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(index.size()); }
  int lookup(const std::string& label) const;  // -1 if absent
};

struct GrammarSet {
  Vocab vocab;
  std::vector<AndOrGraph> tasks;
  NodeIndexMap node_index;

  int task_index(std::string_view name) const;
  const AndOrGraph& task(int id) const;
  // Longest derivable sequence over all tasks.
  int max_sequence_length() const;
};

// Parses and validates a grammar-set JSON document. Throws Error with kind
// Parse (malformed JSON, with line/column) or Validation (naming the
// offending node or task).
GrammarSet load_grammar_set(const std::string& json_text);

// Serializes back to the grammar-set file format (round-trips through
// load_grammar_set).
std::string save_grammar_set(const GrammarSet& gs);

// Pre-order depth-first or-node ids, children visited in declaration order.
std::vector<int> or_nodes_dfs(const AndOrGraph& g);

// New graph in which `or_node` keeps only `child_index`; the other child
// subtrees are removed. Surviving nodes keep their relative order.
AndOrGraph prune(const AndOrGraph& g, int or_node, int child_index);

// Applies every selection in DFS or-node order; the result has no or-node
// with more than one child.
AndOrGraph apply_selections(const AndOrGraph& g, const SelectionList& sel);

// Left-to-right terminal sequence of the tree selected by pg.selections.
ActionSequence extract_sequence(const ParsingGraph& pg);

// Exact, deduplicated language of g. Throws if the derivation count exceeds
// max_sequences (guards combinatorial blowup; the guard counts derivations,
// which bounds the set size from above).
std::vector<ActionSequence> enumerate_language(const AndOrGraph& g, size_t max_sequences);

// Membership test; agrees with enumerate_language but runs by position-set
// matching instead of full enumeration.
bool contains(const AndOrGraph& g, const ActionSequence& seq);

// Row-major flattening of the n_max x n_max parent->child adjacency matrix
// of g under the global index map.
Vec encode_adjacency(const AndOrGraph& g, const NodeIndexMap& index, int n_max);

// Random full selection list; or-node priors weight the draw when present
// (use_priors), otherwise children are uniform.
SelectionList sample_random_parse(const AndOrGraph& g, Rng& rng, bool use_priors = true);

int max_derivation_length(const AndOrGraph& g);
int max_or_branching(const AndOrGraph& g);

std::string format_sequence(const ActionSequence& seq, const Vocab& vocab);

}  // namespace taskplan

#endif
