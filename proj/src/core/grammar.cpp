#include "core/grammar.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/jsonio.hpp"

namespace taskplan {

const Node& AndOrGraph::at(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes.size()))
    throw Error(ErrorKind::InvalidArgument,
                "node id " + std::to_string(id) + " out of range in grammar '" + name + "'");
  return nodes[id];
}

int AndOrGraph::find_label(std::string_view label) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].label == label) return static_cast<int>(i);
  return -1;
}

int AndOrGraph::count_kind(NodeKind kind) const {
  int n = 0;
  for (const auto& node : nodes)
    if (node.kind == kind) ++n;
  return n;
}

int NodeIndexMap::lookup(const std::string& label) const {
  auto it = index.find(label);
  return it == index.end() ? -1 : it->second;
}

int GrammarSet::task_index(std::string_view name) const {
  return vocab.task_index(name);
}

const AndOrGraph& GrammarSet::task(int id) const {
  if (id < 0 || id >= static_cast<int>(tasks.size()))
    throw Error(ErrorKind::InvalidArgument, "task id " + std::to_string(id) + " out of range");
  return tasks[id];
}

int GrammarSet::max_sequence_length() const {
  int longest = 0;
  for (const auto& g : tasks) longest = std::max(longest, max_derivation_length(g));
  return longest;
}

namespace {

NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "and") return NodeKind::And;
  if (s == "or") return NodeKind::Or;
  if (s == "terminal") return NodeKind::Terminal;
  throw Error(ErrorKind::Validation, where + ": unknown node kind '" + s + "'");
}

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
    case NodeKind::Terminal: return "terminal";
  }
  return "?";
}

void validate_tree(const AndOrGraph& g) {
  const std::string where = "task '" + g.name + "'";
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> parent_count(n, 0);
  for (int id = 0; id < n; ++id) {
    const Node& node = g.nodes[id];
    std::set<int> seen;
    for (int c : node.children) {
      if (!seen.insert(c).second)
        throw Error(ErrorKind::Validation,
                    where + ": node '" + node.label + "' lists child '" + g.nodes[c].label +
                        "' more than once");
      ++parent_count[c];
    }
  }
  if (parent_count[g.root] != 0)
    throw Error(ErrorKind::Validation,
                where + ": root node '" + g.nodes[g.root].label + "' has a parent");
  for (int id = 0; id < n; ++id) {
    if (id == g.root) continue;
    if (parent_count[id] == 0)
      throw Error(ErrorKind::Validation,
                  where + ": node '" + g.nodes[id].label + "' is not reachable from the root");
    if (parent_count[id] > 1)
      throw Error(ErrorKind::Validation,
                  where + ": node '" + g.nodes[id].label + "' has more than one parent");
  }
  // single root + unique parents + full reachability => tree, no cycles
}

void validate_node(const AndOrGraph& g, const Node& node, const Vocab& vocab) {
  const std::string where = "task '" + g.name + "', node '" + node.label + "'";
  switch (node.kind) {
    case NodeKind::Terminal:
      if (!node.children.empty())
        throw Error(ErrorKind::Validation, where + ": terminal node has children");
      if (!node.atomic)
        throw Error(ErrorKind::Validation, where + ": terminal node lacks an atomic action");
      break;
    case NodeKind::And:
    case NodeKind::Or:
      if (node.children.empty())
        throw Error(ErrorKind::Validation,
                    where + ": " + std::string(kind_name(node.kind)) + "-node has no children");
      if (node.atomic)
        throw Error(ErrorKind::Validation, where + ": non-terminal node carries an atomic action");
      break;
  }
  if (!node.prior.empty()) {
    if (node.kind != NodeKind::Or)
      throw Error(ErrorKind::Validation, where + ": prior on a non-or node");
    if (node.prior.size() != node.children.size())
      throw Error(ErrorKind::Validation,
                  where + ": prior has " + std::to_string(node.prior.size()) + " weights for " +
                      std::to_string(node.children.size()) + " children");
    double sum = 0.0;
    for (double w : node.prior) {
      if (w < 0.0)
        throw Error(ErrorKind::Validation, where + ": negative prior weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorKind::Validation,
                  where + ": prior weights sum to " + std::to_string(sum) + ", expected 1");
  }
  if (node.atomic) {
    if (node.atomic->action < 0 || node.atomic->action >= static_cast<int>(vocab.actions.size()))
      throw Error(ErrorKind::Validation, where + ": action id out of vocabulary");
    if (node.atomic->object < 0 || node.atomic->object >= static_cast<int>(vocab.objects.size()))
      throw Error(ErrorKind::Validation, where + ": object id out of vocabulary");
  }
}

AndOrGraph load_task(const json& jt, const Vocab& vocab) {
  AndOrGraph g;
  g.name = require_string(jt, "name", "task");
  const std::string where = "task '" + g.name + "'";
  const json& jnodes = require_object(jt, "nodes", where);
  if (jnodes.empty()) throw Error(ErrorKind::Validation, where + ": empty node table");

  // First pass: allocate ids in key order so labels can be resolved.
  std::unordered_map<std::string, int> ids;
  for (auto it = jnodes.begin(); it != jnodes.end(); ++it) {
    ids.emplace(it.key(), static_cast<int>(g.nodes.size()));
    Node node;
    node.label = it.key();
    g.nodes.push_back(std::move(node));
  }

  for (auto it = jnodes.begin(); it != jnodes.end(); ++it) {
    Node& node = g.nodes[ids[it.key()]];
    const json& jn = it.value();
    const std::string nwhere = where + ", node '" + node.label + "'";
    if (!jn.is_object()) throw Error(ErrorKind::Validation, nwhere + ": not an object");
    node.kind = parse_kind(require_string(jn, "kind", nwhere), nwhere);
    if (jn.contains("children")) {
      for (const auto& jc : require_array(jn, "children", nwhere)) {
        if (!jc.is_string())
          throw Error(ErrorKind::Validation, nwhere + ": child reference is not a string");
        auto found = ids.find(jc.get<std::string>());
        if (found == ids.end())
          throw Error(ErrorKind::Validation,
                      nwhere + ": unknown child node '" + jc.get<std::string>() + "'");
        node.children.push_back(found->second);
      }
    }
    if (jn.contains("prior")) {
      for (const auto& jw : require_array(jn, "prior", nwhere)) {
        if (!jw.is_number())
          throw Error(ErrorKind::Validation, nwhere + ": prior weight is not a number");
        node.prior.push_back(jw.get<double>());
      }
    }
    if (jn.contains("action") || jn.contains("object")) {
      const std::string action = require_string(jn, "action", nwhere);
      const std::string object = require_string(jn, "object", nwhere);
      int ai = vocab.action_index(action);
      if (ai < 0) throw Error(ErrorKind::Validation, nwhere + ": unknown action '" + action + "'");
      int oi = vocab.object_index(object);
      if (oi < 0) throw Error(ErrorKind::Validation, nwhere + ": unknown object '" + object + "'");
      node.atomic = AtomicAction{ai, oi};
    }
  }

  const std::string root_label = require_string(jt, "root", where);
  auto root_it = ids.find(root_label);
  if (root_it == ids.end())
    throw Error(ErrorKind::Validation, where + ": root node '" + root_label + "' not defined");
  g.root = root_it->second;

  for (const Node& node : g.nodes) validate_node(g, node, vocab);
  validate_tree(g);
  return g;
}

std::vector<std::string> load_name_list(const json& j, const char* key, const std::string& where) {
  std::vector<std::string> names;
  for (const auto& jn : require_array(j, key, where)) {
    if (!jn.is_string())
      throw Error(ErrorKind::Validation, where + ": " + key + " entry is not a string");
    names.push_back(jn.get<std::string>());
  }
  for (size_t i = 0; i < names.size(); ++i)
    for (size_t k = i + 1; k < names.size(); ++k)
      if (names[i] == names[k])
        throw Error(ErrorKind::Validation, where + ": duplicate name '" + names[i] + "' in " + key);
  return names;
}

// Pre-order traversal visiting children in declaration order.
template <typename Fn>
void dfs_preorder(const AndOrGraph& g, Fn&& visit) {
  std::vector<int> stack = {g.root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    visit(id);
    const auto& children = g.nodes[id].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
  }
}

}  // namespace

GrammarSet load_grammar_set(const std::string& json_text) {
  const json j = parse_json(json_text, "grammar set");
  if (!j.is_object()) throw Error(ErrorKind::Validation, "grammar set: top level is not an object");

  GrammarSet gs;
  const json& jvocab = require_object(j, "vocab", "grammar set");
  gs.vocab.actions = load_name_list(jvocab, "actions", "vocab");
  gs.vocab.objects = load_name_list(jvocab, "objects", "vocab");
  if (gs.vocab.actions.empty() || gs.vocab.objects.empty())
    throw Error(ErrorKind::Validation, "vocab: empty action or object list");

  const json& jtasks = require_array(j, "tasks", "grammar set");
  if (jtasks.empty()) throw Error(ErrorKind::Validation, "grammar set: no tasks");
  for (const auto& jt : jtasks) {
    AndOrGraph g = load_task(jt, gs.vocab);
    if (gs.vocab.task_index(g.name) >= 0)
      throw Error(ErrorKind::Validation, "duplicate task name '" + g.name + "'");
    gs.vocab.tasks.push_back(g.name);
    gs.tasks.push_back(std::move(g));
  }

  // Global feature indices by first appearance: file task order, pre-order
  // DFS within each task. Shared node ids across tasks share an index.
  for (const auto& g : gs.tasks) {
    dfs_preorder(g, [&](int id) {
      const std::string& label = g.nodes[id].label;
      if (gs.node_index.index.find(label) == gs.node_index.index.end()) {
        int next = gs.node_index.size();
        gs.node_index.index.emplace(label, next);
      }
    });
  }
  return gs;
}

std::string save_grammar_set(const GrammarSet& gs) {
  json j;
  j["vocab"]["actions"] = gs.vocab.actions;
  j["vocab"]["objects"] = gs.vocab.objects;
  j["tasks"] = json::array();
  for (const auto& g : gs.tasks) {
    json jt;
    jt["name"] = g.name;
    jt["root"] = g.nodes[g.root].label;
    json jnodes = json::object();
    for (const auto& node : g.nodes) {
      json jn;
      switch (node.kind) {
        case NodeKind::And: jn["kind"] = "and"; break;
        case NodeKind::Or: jn["kind"] = "or"; break;
        case NodeKind::Terminal: jn["kind"] = "terminal"; break;
      }
      if (!node.children.empty()) {
        json jc = json::array();
        for (int c : node.children) jc.push_back(g.nodes[c].label);
        jn["children"] = jc;
      }
      if (!node.prior.empty()) jn["prior"] = node.prior;
      if (node.atomic) {
        jn["action"] = gs.vocab.actions[node.atomic->action];
        jn["object"] = gs.vocab.objects[node.atomic->object];
      }
      jnodes[node.label] = jn;
    }
    jt["nodes"] = jnodes;
    j["tasks"].push_back(jt);
  }
  return j.dump(2) + "\n";
}

std::vector<int> or_nodes_dfs(const AndOrGraph& g) {
  std::vector<int> out;
  dfs_preorder(g, [&](int id) {
    if (g.nodes[id].kind == NodeKind::Or) out.push_back(id);
  });
  return out;
}

AndOrGraph prune(const AndOrGraph& g, int or_node, int child_index) {
  const Node& node = g.at(or_node);
  if (node.kind != NodeKind::Or)
    throw Error(ErrorKind::InvalidArgument,
                "prune: node '" + node.label + "' is not an or-node");
  if (child_index < 0 || child_index >= static_cast<int>(node.children.size()))
    throw Error(ErrorKind::InvalidArgument,
                "prune: child index " + std::to_string(child_index) + " out of range for node '" +
                    node.label + "'");

  // Mark every node under an unselected child as removed.
  std::vector<char> removed(g.nodes.size(), 0);
  std::vector<int> stack;
  for (size_t i = 0; i < node.children.size(); ++i)
    if (static_cast<int>(i) != child_index) stack.push_back(node.children[i]);
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    removed[id] = 1;
    for (int c : g.nodes[id].children) stack.push_back(c);
  }

  AndOrGraph out;
  out.name = g.name;
  std::vector<int> remap(g.nodes.size(), -1);
  for (size_t id = 0; id < g.nodes.size(); ++id) {
    if (removed[id]) continue;
    remap[id] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(g.nodes[id]);
  }
  for (auto& n : out.nodes) {
    std::vector<int> kept;
    for (int c : n.children)
      if (remap[c] >= 0) kept.push_back(remap[c]);
    // Prior weights no longer apply once the choice is made.
    if (n.kind == NodeKind::Or && kept.size() != n.children.size()) n.prior.clear();
    n.children = std::move(kept);
  }
  out.root = remap[g.root];
  return out;
}

namespace {

// Walks reachable or-nodes in DFS order, calling choose(graph, or_id) for the
// first unresolved one until none remain. "Resolved" is tracked by label so
// the walk survives re-indexing across prunes.
template <typename ChooseFn>
AndOrGraph resolve_or_nodes(const AndOrGraph& g, ChooseFn&& choose) {
  AndOrGraph cur = g;
  std::set<std::string> done;
  for (;;) {
    int next = -1;
    for (int id : or_nodes_dfs(cur)) {
      if (!done.count(cur.nodes[id].label)) {
        next = id;
        break;
      }
    }
    if (next < 0) break;
    done.insert(cur.nodes[next].label);
    int pick = choose(cur, next);
    cur = prune(cur, next, pick);
  }
  return cur;
}

}  // namespace

AndOrGraph apply_selections(const AndOrGraph& g, const SelectionList& sel) {
  size_t cursor = 0;
  AndOrGraph out = resolve_or_nodes(g, [&](const AndOrGraph& cur, int id) {
    if (cursor >= sel.size())
      throw Error(ErrorKind::InvalidArgument,
                  "selection list exhausted at or-node '" + cur.nodes[id].label + "'");
    const SelectionStep& step = sel[cursor++];
    if (step.or_node != cur.nodes[id].label)
      throw Error(ErrorKind::InvalidArgument,
                  "selection names or-node '" + step.or_node + "' but DFS order expects '" +
                      cur.nodes[id].label + "'");
    return step.child;
  });
  if (cursor != sel.size())
    throw Error(ErrorKind::InvalidArgument, "selection list has unused trailing entries");
  return out;
}

ActionSequence extract_sequence(const ParsingGraph& pg) {
  if (!pg.source) throw Error(ErrorKind::InvalidArgument, "parsing graph has no source grammar");
  AndOrGraph resolved = apply_selections(*pg.source, pg.selections);
  ActionSequence seq;
  dfs_preorder(resolved, [&](int id) {
    const Node& n = resolved.nodes[id];
    if (n.kind == NodeKind::Terminal) seq.push_back(*n.atomic);
  });
  return seq;
}

namespace {

std::vector<ActionSequence> enumerate_node(const AndOrGraph& g, int id, size_t max_sequences) {
  const Node& node = g.nodes[id];
  switch (node.kind) {
    case NodeKind::Terminal:
      return {{*node.atomic}};
    case NodeKind::And: {
      std::vector<ActionSequence> acc = {{}};
      for (int c : node.children) {
        auto part = enumerate_node(g, c, max_sequences);
        if (!part.empty() && acc.size() > max_sequences / part.size())
          throw Error(ErrorKind::State,
                      "language of '" + g.name + "' exceeds " + std::to_string(max_sequences) +
                          " sequences");
        std::vector<ActionSequence> next;
        next.reserve(acc.size() * part.size());
        for (const auto& a : acc)
          for (const auto& b : part) {
            ActionSequence s = a;
            s.insert(s.end(), b.begin(), b.end());
            next.push_back(std::move(s));
          }
        acc = std::move(next);
      }
      return acc;
    }
    case NodeKind::Or: {
      std::vector<ActionSequence> acc;
      for (int c : node.children) {
        auto part = enumerate_node(g, c, max_sequences);
        if (acc.size() + part.size() > max_sequences)
          throw Error(ErrorKind::State,
                      "language of '" + g.name + "' exceeds " + std::to_string(max_sequences) +
                          " sequences");
        acc.insert(acc.end(), part.begin(), part.end());
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

std::vector<ActionSequence> enumerate_language(const AndOrGraph& g, size_t max_sequences) {
  auto seqs = enumerate_node(g, g.root, max_sequences);
  std::sort(seqs.begin(), seqs.end());
  seqs.erase(std::unique(seqs.begin(), seqs.end()), seqs.end());
  return seqs;
}

namespace {

// End positions reachable by matching the subtree at `id` starting at each
// position in `starts`. Position sets stay sorted and deduplicated.
std::vector<int> match_node(const AndOrGraph& g, int id, const std::vector<int>& starts,
                            const ActionSequence& seq) {
  const Node& node = g.nodes[id];
  std::vector<int> out;
  switch (node.kind) {
    case NodeKind::Terminal:
      for (int p : starts)
        if (p < static_cast<int>(seq.size()) && seq[p] == *node.atomic) out.push_back(p + 1);
      break;
    case NodeKind::And: {
      std::vector<int> cur = starts;
      for (int c : node.children) {
        cur = match_node(g, c, cur, seq);
        if (cur.empty()) return {};
      }
      out = cur;
      break;
    }
    case NodeKind::Or: {
      for (int c : node.children) {
        auto part = match_node(g, c, starts, seq);
        out.insert(out.end(), part.begin(), part.end());
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
  }
  return out;
}

}  // namespace

bool contains(const AndOrGraph& g, const ActionSequence& seq) {
  auto ends = match_node(g, g.root, {0}, seq);
  return std::find(ends.begin(), ends.end(), static_cast<int>(seq.size())) != ends.end();
}

Vec encode_adjacency(const AndOrGraph& g, const NodeIndexMap& index, int n_max) {
  Vec v(static_cast<size_t>(n_max) * n_max, 0.0);
  for (const Node& node : g.nodes) {
    int i = index.lookup(node.label);
    if (i < 0)
      throw Error(ErrorKind::InvalidArgument,
                  "encode_adjacency: node '" + node.label + "' missing from index map");
    if (i >= n_max)
      throw Error(ErrorKind::InvalidArgument,
                  "encode_adjacency: index of node '" + node.label + "' exceeds nMax");
    for (int c : node.children) {
      int j = index.lookup(g.nodes[c].label);
      if (j < 0)
        throw Error(ErrorKind::InvalidArgument,
                    "encode_adjacency: node '" + g.nodes[c].label + "' missing from index map");
      if (j >= n_max)
        throw Error(ErrorKind::InvalidArgument,
                    "encode_adjacency: index of node '" + g.nodes[c].label + "' exceeds nMax");
      v[static_cast<size_t>(i) * n_max + j] = 1.0;
    }
  }
  return v;
}

SelectionList sample_random_parse(const AndOrGraph& g, Rng& rng, bool use_priors) {
  SelectionList sel;
  resolve_or_nodes(g, [&](const AndOrGraph& cur, int id) {
    const Node& node = cur.nodes[id];
    int pick;
    if (use_priors && !node.prior.empty()) {
      double u = rng.uniform01();
      double cum = 0.0;
      pick = static_cast<int>(node.children.size()) - 1;
      for (size_t i = 0; i < node.prior.size(); ++i) {
        cum += node.prior[i];
        if (u < cum) {
          pick = static_cast<int>(i);
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.index(node.children.size()));
    }
    sel.push_back({node.label, pick});
    return pick;
  });
  return sel;
}

namespace {

int derivation_length(const AndOrGraph& g, int id) {
  const Node& node = g.nodes[id];
  switch (node.kind) {
    case NodeKind::Terminal: return 1;
    case NodeKind::And: {
      int sum = 0;
      for (int c : node.children) sum += derivation_length(g, c);
      return sum;
    }
    case NodeKind::Or: {
      int best = 0;
      for (int c : node.children) best = std::max(best, derivation_length(g, c));
      return best;
    }
  }
  return 0;
}

}  // namespace

int max_derivation_length(const AndOrGraph& g) { return derivation_length(g, g.root); }

int max_or_branching(const AndOrGraph& g) {
  int best = 0;
  for (const Node& n : g.nodes)
    if (n.kind == NodeKind::Or) best = std::max(best, static_cast<int>(n.children.size()));
  return best;
}

std::string format_sequence(const ActionSequence& seq, const Vocab& vocab) {
  std::ostringstream os;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) os << " ";
    os << "(" << vocab.actions[seq[i].action] << ", " << vocab.objects[seq[i].object] << ")";
  }
  return os.str();
}

}  // namespace taskplan
