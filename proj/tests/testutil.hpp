// Shared fixtures and independent oracles for the test suites. The oracles
// here (derivation counting, selection enumeration, scalar LSTM reference,
// finite differences) are deliberately written against the math rather than
// the library internals so they can catch implementation errors.
#ifndef TASKPLAN_TESTS_TESTUTIL_HPP
#define TASKPLAN_TESTS_TESTUTIL_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/grammar.hpp"
#include "core/jsonio.hpp"
#include "core/lstm.hpp"
#include "core/scene.hpp"

namespace testutil {

using namespace taskplan;

inline std::string data_path(const std::string& name) {
  return std::string(TASKPLAN_DATA_DIR) + "/" + name;
}

inline GrammarSet load_bundled_grammars() {
  return load_grammar_set(read_text_file(data_path("grammars.json")));
}

// Two small tasks over the full action/object vocabulary; 9 distinct node
// ids, fits nMax = 12.
inline const char* kTinyGrammarJson = R"json({
  "vocab": {
    "actions": ["open", "grasp", "put into", "move to", "put under", "pour into", "wash"],
    "objects": ["bowl", "cup", "pot", "water-dispenser", "tea-box", "ramen-cup", "ramen-bag", "tap", "basin", "apple"]
  },
  "tasks": [
    {"name": "tiny pick", "root": "root", "nodes": {
      "root": {"kind": "and", "children": ["pick", "fill"]},
      "pick": {"kind": "or", "children": ["pa", "pb"]},
      "pa": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "pb": {"kind": "terminal", "action": "grasp", "object": "bowl"},
      "fill": {"kind": "terminal", "action": "pour into", "object": "cup"}}},
    {"name": "tiny source", "root": "root", "nodes": {
      "root": {"kind": "and", "children": ["src"]},
      "src": {"kind": "or", "children": ["sa", "sb", "sc"]},
      "sa": {"kind": "terminal", "action": "open", "object": "tap"},
      "sb": {"kind": "terminal", "action": "open", "object": "water-dispenser"},
      "sc": {"kind": "terminal", "action": "wash", "object": "basin"}}}
  ]})json";

inline GrammarSet load_tiny_grammars() { return load_grammar_set(kTinyGrammarJson); }

inline Scene make_scene(const Vocab& vocab,
                        const std::vector<std::pair<std::string, std::array<double, 3>>>& objs,
                        const std::string& id = "test") {
  Scene s;
  s.id = id;
  for (const auto& [name, loc] : objs) {
    int ci = vocab.object_index(name);
    REQUIRE(ci >= 0);
    s.objects.push_back({ci, loc});
  }
  return s;
}

// ---- grammar oracles -------------------------------------------------------

// Independent product-sum derivation count: and-node = product of child
// counts (concatenation), or-node = sum, terminal = 1.
inline unsigned long long count_derivations(const AndOrGraph& g, int id) {
  const Node& n = g.at(id);
  switch (n.kind) {
    case NodeKind::Terminal: return 1;
    case NodeKind::And: {
      unsigned long long prod = 1;
      for (int c : n.children) prod *= count_derivations(g, c);
      return prod;
    }
    case NodeKind::Or: {
      unsigned long long sum = 0;
      for (int c : n.children) sum += count_derivations(g, c);
      return sum;
    }
  }
  return 0;
}

inline unsigned long long count_derivations(const AndOrGraph& g) {
  return count_derivations(g, g.root);
}

// All full selection lists of a grammar by brute-force recursion over the
// progressively pruned graph (the same notion of "reachable or-node in DFS
// order" the library uses, but re-derived here).
inline void enumerate_selections_rec(const AndOrGraph& g, SelectionList prefix,
                                     std::vector<SelectionList>& out) {
  // find first or-node not already chosen in prefix
  for (int id : or_nodes_dfs(g)) {
    const std::string& label = g.at(id).label;
    bool chosen = false;
    for (const auto& s : prefix)
      if (s.or_node == label) chosen = true;
    if (chosen) continue;
    for (size_t i = 0; i < g.at(id).children.size(); ++i) {
      SelectionList next = prefix;
      next.push_back({label, static_cast<int>(i)});
      enumerate_selections_rec(prune(g, id, static_cast<int>(i)), next, out);
    }
    return;
  }
  out.push_back(std::move(prefix));
}

inline std::vector<SelectionList> enumerate_selections(const AndOrGraph& g) {
  std::vector<SelectionList> out;
  enumerate_selections_rec(g, {}, out);
  return out;
}

// Random grammar with globally distinct terminal atomics, so the derivation
// count equals the language size exactly.
struct RandomGrammarSpec {
  int max_or_nodes = 5;
  int max_branching = 4;
  int max_depth = 4;
  int n_actions = 7;
  int n_objects = 10;
};

struct RandomGrammarBuilder {
  const RandomGrammarSpec& spec;
  Rng& rng;
  AndOrGraph& g;
  int or_budget;
  int next_atomic = 0;

  int fresh_terminal() {
    Node n;
    n.label = "n" + std::to_string(g.nodes.size());
    n.kind = NodeKind::Terminal;
    // distinct (action, object) pairs in row-major order
    n.atomic = AtomicAction{next_atomic / spec.n_objects, next_atomic % spec.n_objects};
    ++next_atomic;
    g.nodes.push_back(n);
    return static_cast<int>(g.nodes.size()) - 1;
  }

  int build(int depth) {
    const double roll = rng.uniform01();
    if (depth >= spec.max_depth || next_atomic + 8 >= spec.n_actions * spec.n_objects ||
        roll < 0.35)
      return fresh_terminal();
    if (roll < 0.55 && or_budget > 0) {
      --or_budget;
      Node n;
      n.label = "n" + std::to_string(g.nodes.size());
      n.kind = NodeKind::Or;
      g.nodes.push_back(n);
      int id = static_cast<int>(g.nodes.size()) - 1;
      int arity = 2 + static_cast<int>(rng.index(spec.max_branching - 1));
      std::vector<int> kids;  // building children reallocates g.nodes
      for (int i = 0; i < arity; ++i) kids.push_back(build(depth + 1));
      g.nodes[id].children = std::move(kids);
      return id;
    }
    Node n;
    n.label = "n" + std::to_string(g.nodes.size());
    n.kind = NodeKind::And;
    g.nodes.push_back(n);
    int id = static_cast<int>(g.nodes.size()) - 1;
    int arity = 1 + static_cast<int>(rng.index(3));
    std::vector<int> kids;
    for (int i = 0; i < arity; ++i) kids.push_back(build(depth + 1));
    g.nodes[id].children = std::move(kids);
    return id;
  }
};

inline AndOrGraph random_grammar(uint64_t seed, const RandomGrammarSpec& spec = {}) {
  Rng rng(seed);
  AndOrGraph g;
  g.name = "random" + std::to_string(seed);
  RandomGrammarBuilder builder{spec, rng, g, spec.max_or_nodes};
  g.root = builder.build(0);
  return g;
}

// ---- scalar-loop LSTM reference --------------------------------------------

// Direct transcription of the cell equations over plain 2-D arrays indexed
// [row][column] with the logical hidden x (input+hidden) layout.
struct RefLstm {
  int input = 0, hidden = 0;
  std::vector<std::vector<double>> Wi, Wf, Wo, Wg;  // hidden x (input+hidden)
  std::vector<double> bi, bf, bo, bg;

  static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  void step(const std::vector<double>& x, const std::vector<double>& h_prev,
            const std::vector<double>& c_prev, std::vector<double>& h_out,
            std::vector<double>& c_out) const {
    h_out.assign(hidden, 0.0);
    c_out.assign(hidden, 0.0);
    for (int r = 0; r < hidden; ++r) {
      double zi = bi[r], zf = bf[r], zo = bo[r], zg = bg[r];
      for (int j = 0; j < input; ++j) {
        zi += Wi[r][j] * x[j];
        zf += Wf[r][j] * x[j];
        zo += Wo[r][j] * x[j];
        zg += Wg[r][j] * x[j];
      }
      for (int k = 0; k < hidden; ++k) {
        zi += Wi[r][input + k] * h_prev[k];
        zf += Wf[r][input + k] * h_prev[k];
        zo += Wo[r][input + k] * h_prev[k];
        zg += Wg[r][input + k] * h_prev[k];
      }
      const double i = sig(zi), f = sig(zf), o = sig(zo), gq = std::tanh(zg);
      c_out[r] = f * c_prev[r] + i * gq;
      h_out[r] = o * std::tanh(c_out[r]);
    }
  }
};

// Fills both the reference and an LstmParams from one random draw.
inline void random_cell_pair(int input, int hidden, double bound, Rng& rng, RefLstm& ref,
                             LstmParams& p) {
  ref.input = input;
  ref.hidden = hidden;
  auto mat = [&](std::vector<std::vector<double>>& m) {
    m.assign(hidden, std::vector<double>(input + hidden));
    for (auto& row : m)
      for (auto& w : row) w = rng.uniform(-bound, bound);
  };
  mat(ref.Wi);
  mat(ref.Wf);
  mat(ref.Wo);
  mat(ref.Wg);
  auto vec = [&](std::vector<double>& v) {
    v.assign(hidden, 0.0);
    for (auto& w : v) w = rng.uniform(-bound, bound);
  };
  vec(ref.bi);
  vec(ref.bf);
  vec(ref.bo);
  vec(ref.bg);

  p.input = input;
  p.hidden = hidden;
  p.w_i = Mat(input + hidden, hidden);
  p.w_f = Mat(input + hidden, hidden);
  p.w_o = Mat(input + hidden, hidden);
  p.w_g = Mat(input + hidden, hidden);
  for (int r = 0; r < hidden; ++r)
    for (int j = 0; j < input + hidden; ++j) {
      p.w_i.at(j, r) = ref.Wi[r][j];
      p.w_f.at(j, r) = ref.Wf[r][j];
      p.w_o.at(j, r) = ref.Wo[r][j];
      p.w_g.at(j, r) = ref.Wg[r][j];
    }
  p.b_i = ref.bi;
  p.b_f = ref.bf;
  p.b_o = ref.bo;
  p.b_g = ref.bg;
}

// ---- finite differences -----------------------------------------------------

struct GradCheckWorst {
  double rel_err = 0.0;
  std::string tensor;
  size_t index = 0;
};

// Central differences with eps = 1e-5 against analytic gradients; the
// relative error denominator is floored so near-zero gradients do not inflate
// the ratio past what float64 differencing can resolve.
inline GradCheckWorst finite_difference_check(std::vector<TensorRef> params,
                                              const std::vector<TensorRef>& analytic,
                                              const std::function<double()>& loss_fn,
                                              double eps = 1e-5) {
  GradCheckWorst worst;
  for (size_t t = 0; t < params.size(); ++t) {
    for (size_t k = 0; k < params[t].n; ++k) {
      double& w = params[t].data[k];
      const double saved = w;
      w = saved + eps;
      const double up = loss_fn();
      w = saved - eps;
      const double down = loss_fn();
      w = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[t].data[k];
      const double rel = std::fabs(a - numeric) / std::max(std::fabs(a) + std::fabs(numeric), 1e-4);
      if (rel > worst.rel_err) {
        worst.rel_err = rel;
        worst.tensor = params[t].name;
        worst.index = k;
      }
    }
  }
  return worst;
}

}  // namespace testutil

#endif
