#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "core/error.hpp"
#include "testutil.hpp"

using namespace taskplan;
using namespace testutil;

namespace {

AtomicAction atom(const Vocab& v, const char* action, const char* object) {
  return {v.action_index(action), v.object_index(object)};
}

GrammarSet single_task(const std::string& nodes_json, const std::string& root = "root") {
  std::string text = R"({"vocab": {"actions": ["open","grasp","put into","move to","put under","pour into","wash"],
    "objects": ["bowl","cup","pot","water-dispenser","tea-box","ramen-cup","ramen-bag","tap","basin","apple"]},
    "tasks": [{"name": "t", "root": ")" +
                     root + R"(", "nodes": )" + nodes_json + "}]}";
  return load_grammar_set(text);
}

}  // namespace

TEST_CASE("minimal grammar: one terminal node") {
  GrammarSet gs = single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
  const AndOrGraph& g = gs.task(0);
  CHECK(g.nodes.size() == 1);
  auto language = enumerate_language(g, 10);
  REQUIRE(language.size() == 1);
  CHECK(language[0] == ActionSequence{atom(gs.vocab, "grasp", "cup")});
  CHECK(or_nodes_dfs(g).empty());
}

TEST_CASE("bundled pour-water-with-the-cup grammar has the 2-way source choice") {
  GrammarSet gs = load_bundled_grammars();
  int t = gs.task_index("pour water with the cup");
  REQUIRE(t >= 0);
  const AndOrGraph& g = gs.task(t);
  auto ors = or_nodes_dfs(g);
  REQUIRE(ors.size() == 1);
  const Node& src = g.at(ors[0]);
  REQUIRE(src.children.size() == 2);
  // one branch reaches the water dispenser, the other the pot
  auto subtree_objects = [&](int id) {
    std::set<int> objs;
    std::vector<int> stack = {id};
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (g.at(cur).atomic) objs.insert(g.at(cur).atomic->object);
      for (int c : g.at(cur).children) stack.push_back(c);
    }
    return objs;
  };
  CHECK(subtree_objects(src.children[0]).count(gs.vocab.object_index("water-dispenser")) == 1);
  CHECK(subtree_objects(src.children[1]).count(gs.vocab.object_index("pot")) == 1);
}

TEST_CASE("or-node prior that does not sum to 1 is a validation error") {
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "or", "children": ["a", "b"], "prior": [0.5, 0.6]},
        "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
        "b": {"kind": "terminal", "action": "grasp", "object": "pot"}})"),
      doctest::Contains("prior weights sum"), Error);
}

TEST_CASE("structural validation names the offending node") {
  // orphan
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup"},
        "stray": {"kind": "terminal", "action": "grasp", "object": "pot"}})"),
      doctest::Contains("stray"), Error);
  // duplicate parent
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "and", "children": ["a", "b"]},
        "a": {"kind": "and", "children": ["shared"]},
        "b": {"kind": "and", "children": ["shared"]},
        "shared": {"kind": "terminal", "action": "grasp", "object": "cup"}})"),
      doctest::Contains("shared"), Error);
  // empty children on an and-node
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "and", "children": []}})"),
      doctest::Contains("no children"), Error);
  // unknown child reference
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "and", "children": ["missing"]}})"),
      doctest::Contains("missing"), Error);
  // terminal with children
  CHECK_THROWS_WITH_AS(
      single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup", "children": ["a"]},
        "a": {"kind": "terminal", "action": "grasp", "object": "pot"}})"),
      doctest::Contains("terminal"), Error);
}

TEST_CASE("malformed JSON reports line and column") {
  CHECK_THROWS_WITH_AS(load_grammar_set("{\n  \"vocab\": [,]\n}"), doctest::Contains("line 2"),
                       Error);
}

TEST_CASE("empty grammar set is a load error") {
  CHECK_THROWS_AS(load_grammar_set(R"({"vocab": {"actions": ["a"], "objects": ["o"]}, "tasks": []})"),
                  Error);
}

TEST_CASE("or_nodes_dfs ordering") {
  SUBCASE("no or-nodes") {
    GrammarSet gs = single_task(R"({"root": {"kind": "and", "children": ["a"]},
      "a": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
    CHECK(or_nodes_dfs(gs.task(0)).empty());
  }
  SUBCASE("two or-children in declaration order") {
    GrammarSet gs = single_task(R"({"root": {"kind": "and", "children": ["or1", "or2"]},
      "or1": {"kind": "or", "children": ["a", "b"]},
      "or2": {"kind": "or", "children": ["c", "d"]},
      "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "b": {"kind": "terminal", "action": "grasp", "object": "pot"},
      "c": {"kind": "terminal", "action": "open", "object": "tap"},
      "d": {"kind": "terminal", "action": "open", "object": "basin"}})");
    const AndOrGraph& g = gs.task(0);
    auto ors = or_nodes_dfs(g);
    REQUIRE(ors.size() == 2);
    CHECK(g.at(ors[0]).label == "or1");
    CHECK(g.at(ors[1]).label == "or2");
  }
  SUBCASE("nested or-nodes follow pre-order") {
    // root = Or1(branch containing Or2, branch containing Or3)
    GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["left", "right"]},
      "left": {"kind": "and", "children": ["or2", "t1"]},
      "or2": {"kind": "or", "children": ["a", "b"]},
      "right": {"kind": "and", "children": ["or3"]},
      "or3": {"kind": "or", "children": ["c", "d"]},
      "t1": {"kind": "terminal", "action": "wash", "object": "apple"},
      "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "b": {"kind": "terminal", "action": "grasp", "object": "pot"},
      "c": {"kind": "terminal", "action": "open", "object": "tap"},
      "d": {"kind": "terminal", "action": "open", "object": "basin"}})");
    const AndOrGraph& g = gs.task(0);
    auto ors = or_nodes_dfs(g);
    REQUIRE(ors.size() == 3);
    CHECK(g.at(ors[0]).label == "root");
    CHECK(g.at(ors[1]).label == "or2");
    CHECK(g.at(ors[2]).label == "or3");
  }
}

TEST_CASE("dfs order is deterministic across save/load round trips") {
  GrammarSet gs = load_bundled_grammars();
  GrammarSet reloaded = load_grammar_set(save_grammar_set(gs));
  REQUIRE(reloaded.tasks.size() == gs.tasks.size());
  for (size_t t = 0; t < gs.tasks.size(); ++t) {
    auto a = or_nodes_dfs(gs.tasks[t]);
    auto b = or_nodes_dfs(reloaded.tasks[t]);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
      CHECK(gs.tasks[t].at(a[i]).label == reloaded.tasks[t].at(b[i]).label);
  }
  CHECK(reloaded.node_index.index == gs.node_index.index);
}

TEST_CASE("prune removes exactly the unselected subtrees") {
  // 7-node graph: or with a 3-terminal chain and a 1-terminal chain
  GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["long", "short"]},
    "long": {"kind": "and", "children": ["l1", "l2", "l3"]},
    "short": {"kind": "and", "children": ["s1"]},
    "l1": {"kind": "terminal", "action": "grasp", "object": "cup"},
    "l2": {"kind": "terminal", "action": "grasp", "object": "pot"},
    "l3": {"kind": "terminal", "action": "grasp", "object": "tap"},
    "s1": {"kind": "terminal", "action": "wash", "object": "apple"}})");
  const AndOrGraph& g = gs.task(0);
  REQUIRE(g.nodes.size() == 7);

  AndOrGraph keep_long = prune(g, g.find_label("root"), 0);
  CHECK(keep_long.nodes.size() == 7 - 2);  // "short" subtree has 2 nodes
  CHECK(keep_long.find_label("short") == -1);
  CHECK(keep_long.find_label("l2") != -1);

  AndOrGraph keep_short = prune(g, g.find_label("root"), 1);
  CHECK(keep_short.nodes.size() == 7 - 4);  // "long" subtree has 4 nodes

  SUBCASE("errors") {
    CHECK_THROWS_AS(prune(g, g.find_label("long"), 0), Error);   // not an or-node
    CHECK_THROWS_AS(prune(g, g.find_label("root"), 2), Error);   // index out of range
    CHECK_THROWS_AS(prune(g, 99, 0), Error);                     // unknown id
  }
}

TEST_CASE("prune on a unary or-node keeps the graph isomorphic") {
  GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["only"]},
    "only": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
  const AndOrGraph& g = gs.task(0);
  AndOrGraph pruned = prune(g, g.root, 0);
  REQUIRE(pruned.nodes.size() == g.nodes.size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(pruned.nodes[i].label == g.nodes[i].label);
    CHECK(pruned.nodes[i].children == g.nodes[i].children);
  }
}

TEST_CASE("applying a full selection list leaves no unresolved or-node") {
  Rng rng(11);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    AndOrGraph g = random_grammar(seed);
    SelectionList sel = sample_random_parse(g, rng);
    AndOrGraph resolved = apply_selections(g, sel);
    for (const Node& n : resolved.nodes)
      if (n.kind == NodeKind::Or) CHECK(n.children.size() == 1);
  }
}

TEST_CASE("extract_sequence") {
  SUBCASE("degenerate single terminal") {
    GrammarSet gs =
        single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
    ActionSequence seq = extract_sequence({&gs.task(0), {}});
    CHECK(seq.size() == 1);
  }
  SUBCASE("pot branch of the figure grammar") {
    GrammarSet gs = load_bundled_grammars();
    const AndOrGraph& g = gs.task(gs.task_index("pour water with the cup"));
    ActionSequence seq = extract_sequence({&g, {{"w_src", 1}}});
    ActionSequence expected = {
        atom(gs.vocab, "move to", "cup"), atom(gs.vocab, "grasp", "cup"),
        atom(gs.vocab, "move to", "pot"), atom(gs.vocab, "grasp", "pot"),
        atom(gs.vocab, "pour into", "cup")};
    CHECK(seq == expected);
  }
  SUBCASE("unresolved or-node is an error") {
    GrammarSet gs = load_bundled_grammars();
    const AndOrGraph& g = gs.task(gs.task_index("pour water with the cup"));
    CHECK_THROWS_AS(extract_sequence({&g, {}}), Error);
  }
}

TEST_CASE("language closure: every full selection extracts a member sequence") {
  for (uint64_t seed = 100; seed < 110; ++seed) {
    AndOrGraph g = random_grammar(seed);
    auto language = enumerate_language(g, 100000);
    for (const auto& sel : enumerate_selections(g)) {
      ActionSequence seq = extract_sequence({&g, sel});
      CHECK(std::find(language.begin(), language.end(), seq) != language.end());
    }
  }
}

TEST_CASE("enumerate_language") {
  SUBCASE("single 2-way or over distinct chains") {
    GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["a", "b"]},
      "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "b": {"kind": "terminal", "action": "grasp", "object": "pot"}})");
    CHECK(enumerate_language(gs.task(0), 10).size() == 2);
  }
  SUBCASE("nested choice: Or(A, chain containing Or(B, C)) gives 3") {
    GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["a", "chain"]},
      "chain": {"kind": "and", "children": ["pre", "inner"]},
      "inner": {"kind": "or", "children": ["b", "c"]},
      "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "pre": {"kind": "terminal", "action": "move to", "object": "tap"},
      "b": {"kind": "terminal", "action": "open", "object": "tap"},
      "c": {"kind": "terminal", "action": "wash", "object": "apple"}})");
    CHECK(enumerate_language(gs.task(0), 10).size() == 3);
  }
  SUBCASE("blowup guard") {
    AndOrGraph g = random_grammar(7, {.max_or_nodes = 5, .max_branching = 4});
    unsigned long long n = count_derivations(g);
    if (n > 1) CHECK_THROWS_AS(enumerate_language(g, n - 1), Error);
    CHECK(enumerate_language(g, n).size() == n);
  }
}

TEST_CASE("enumeration count matches the product-sum oracle on random grammars") {
  int tested = 0;
  for (uint64_t seed = 0; tested < 25; ++seed) {
    AndOrGraph g = random_grammar(seed);
    unsigned long long expected = count_derivations(g);
    if (expected > 4096) continue;
    auto language = enumerate_language(g, 100000);
    CHECK(language.size() == expected);
    ++tested;
  }
}

TEST_CASE("pruning monotonicity and first-or union") {
  for (uint64_t seed = 40; seed < 52; ++seed) {
    AndOrGraph g = random_grammar(seed);
    auto ors = or_nodes_dfs(g);
    if (ors.empty()) continue;
    auto language = enumerate_language(g, 100000);
    const int first = ors[0];
    std::vector<ActionSequence> unioned;
    for (size_t i = 0; i < g.at(first).children.size(); ++i) {
      auto sub = enumerate_language(prune(g, first, static_cast<int>(i)), 100000);
      for (const auto& s : sub) {
        CHECK(std::find(language.begin(), language.end(), s) != language.end());
        unioned.push_back(s);
      }
    }
    std::sort(unioned.begin(), unioned.end());
    unioned.erase(std::unique(unioned.begin(), unioned.end()), unioned.end());
    // the DFS-first or-node is always reachable, so its branches cover the language
    CHECK(unioned == language);
  }
}

TEST_CASE("contains agrees with enumeration membership") {
  Rng rng(5);
  int grammars = 0;
  for (uint64_t seed = 200; grammars < 6; ++seed) {
    AndOrGraph g = random_grammar(seed, {.max_or_nodes = 4});
    if (or_nodes_dfs(g).size() < 2) continue;
    ++grammars;
    auto language = enumerate_language(g, 100000);

    for (const auto& seq : language) CHECK(contains(g, seq));
    CHECK_FALSE(contains(g, {}));  // no empty derivation exists

    // random members and random mutations
    for (int trial = 0; trial < 170; ++trial) {
      ActionSequence seq = language[rng.index(language.size())];
      switch (rng.index(3)) {
        case 0:  // mutate one atomic
          if (!seq.empty()) {
            auto& a = seq[rng.index(seq.size())];
            a.action = static_cast<int>(rng.index(7));
            a.object = static_cast<int>(rng.index(10));
          }
          break;
        case 1:  // truncate
          if (!seq.empty()) seq.resize(rng.index(seq.size()));
          break;
        default:  // append
          seq.push_back({static_cast<int>(rng.index(7)), static_cast<int>(rng.index(10))});
          break;
      }
      const bool expected = std::find(language.begin(), language.end(), seq) != language.end();
      CHECK(contains(g, seq) == expected);
    }
  }
}

TEST_CASE("encode_adjacency") {
  SUBCASE("single node has no edges") {
    GrammarSet gs =
        single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
    Vec v = encode_adjacency(gs.task(0), gs.node_index, 4);
    REQUIRE(v.size() == 16);
    for (double x : v) CHECK(x == 0.0);
  }
  SUBCASE("three-node chain sets row-major positions 1 and 6") {
    GrammarSet gs = single_task(R"({"root": {"kind": "and", "children": ["a"]},
      "a": {"kind": "and", "children": ["b"]},
      "b": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
    // DFS-first-appearance indexing: root=0, a=1, b=2
    Vec v = encode_adjacency(gs.task(0), gs.node_index, 4);
    REQUIRE(v.size() == 16);
    for (size_t i = 0; i < v.size(); ++i)
      CHECK(v[i] == ((i == 1 || i == 6) ? 1.0 : 0.0));
  }
  SUBCASE("pruning k edges flips exactly k entries to zero") {
    GrammarSet gs = load_bundled_grammars();
    const AndOrGraph& g = gs.task(gs.task_index("pour water with the cup"));
    Vec before = encode_adjacency(g, gs.node_index, 64);
    AndOrGraph pruned = prune(g, g.find_label("w_src"), 0);
    // dropped: the pot subtree's 3 internal edges plus the or->child edge
    Vec after = encode_adjacency(pruned, gs.node_index, 64);
    int flipped = 0;
    for (size_t i = 0; i < before.size(); ++i) {
      if (before[i] != after[i]) {
        ++flipped;
        CHECK(before[i] == 1.0);
        CHECK(after[i] == 0.0);
      }
    }
    CHECK(flipped == 4);
  }
  SUBCASE("node missing from the index map") {
    GrammarSet gs =
        single_task(R"({"root": {"kind": "terminal", "action": "grasp", "object": "cup"}})");
    NodeIndexMap empty;
    CHECK_THROWS_AS(encode_adjacency(gs.task(0), empty, 4), Error);
  }
  SUBCASE("index beyond nMax") {
    GrammarSet gs = load_bundled_grammars();
    CHECK_THROWS_AS(encode_adjacency(gs.task(0), gs.node_index, 4), Error);
  }
  SUBCASE("invariant under node insertion order given the same index map") {
    GrammarSet a = single_task(R"({"root": {"kind": "and", "children": ["x", "y"]},
      "x": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "y": {"kind": "terminal", "action": "grasp", "object": "pot"}})");
    GrammarSet b = single_task(R"({"y": {"kind": "terminal", "action": "grasp", "object": "pot"},
      "x": {"kind": "terminal", "action": "grasp", "object": "cup"},
      "root": {"kind": "and", "children": ["x", "y"]}})");
    CHECK(a.node_index.index == b.node_index.index);
    CHECK(encode_adjacency(a.task(0), a.node_index, 8) ==
          encode_adjacency(b.task(0), b.node_index, 8));
  }
}

TEST_CASE("sample_random_parse honors degenerate priors") {
  GrammarSet gs = single_task(R"({"root": {"kind": "or", "children": ["a", "b"], "prior": [1.0, 0.0]},
    "a": {"kind": "terminal", "action": "grasp", "object": "cup"},
    "b": {"kind": "terminal", "action": "grasp", "object": "pot"}})");
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    SelectionList sel = sample_random_parse(gs.task(0), rng);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0].child == 0);
  }
}

TEST_CASE("bundled grammar set respects the global index budget") {
  GrammarSet gs = load_bundled_grammars();
  CHECK(gs.tasks.size() == 13);
  CHECK(gs.node_index.size() <= 64);
  CHECK(gs.max_sequence_length() <= 11);
  for (const auto& g : gs.tasks) CHECK(max_or_branching(g) <= 4);
}
