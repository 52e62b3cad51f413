#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "testutil.hpp"

using namespace taskplan;
using namespace testutil;

TEST_CASE("encode_scene") {
  Vocab vocab = Vocab::default_domain();
  SUBCASE("empty scene is a 40-long zero vector") {
    Vec v = encode_scene({}, vocab);
    REQUIRE(v.size() == 40);
    for (double x : v) CHECK(x == 0.0);
  }
  SUBCASE("a single cup fills exactly its slot") {
    Scene s = make_scene(vocab, {{"cup", {0.5, 0.5, 0.0}}});
    Vec v = encode_scene(s, vocab);
    const int slot = vocab.object_index("cup") * 4;
    for (int i = 0; i < 40; ++i) {
      if (i == slot) CHECK(v[i] == 1.0);
      else if (i == slot + 1) CHECK(v[i] == 0.5);
      else if (i == slot + 2) CHECK(v[i] == 0.5);
      else if (i == slot + 3) CHECK(v[i] == 0.0);
      else CHECK(v[i] == 0.0);
    }
  }
  SUBCASE("multiple instances collapse to the representative nearest the origin") {
    Scene s = make_scene(vocab, {{"cup", {0.9, 0.9, 0.9}}, {"cup", {0.1, 0.2, 0.3}}});
    Vec v = encode_scene(s, vocab);
    const int slot = vocab.object_index("cup") * 4;
    CHECK(v[slot] == 1.0);
    CHECK(v[slot + 1] == 0.1);
    CHECK(v[slot + 2] == 0.2);
    CHECK(v[slot + 3] == 0.3);
  }
  SUBCASE("representative ties break toward the lower instance index") {
    Scene s = make_scene(vocab, {{"cup", {0.3, 0.0, 0.0}}, {"cup", {0.0, 0.3, 0.0}}});
    Vec v = encode_scene(s, vocab);
    const int slot = vocab.object_index("cup") * 4;
    CHECK(v[slot + 1] == 0.3);
    CHECK(v[slot + 2] == 0.0);
  }
}

TEST_CASE("encode_task one-hots") {
  Vocab vocab = Vocab::default_domain();
  for (int i = 0; i < 13; ++i) vocab.tasks.push_back("task" + std::to_string(i));
  Vec first = encode_task(0, vocab);
  REQUIRE(first.size() == 13);
  CHECK(first[0] == 1.0);
  Vec last = encode_task(12, vocab);
  CHECK(last[12] == 1.0);
  for (int t = 0; t < 13; ++t) {
    Vec v = encode_task(t, vocab);
    double sum = 0.0;
    for (double x : v) sum += x;
    CHECK(sum == 1.0);
  }
  CHECK_THROWS_AS(encode_task(13, vocab), Error);
  CHECK_THROWS_AS(encode_task(-1, vocab), Error);
}

TEST_CASE("encode_atomic") {
  Vocab vocab = Vocab::default_domain();
  SUBCASE("(grasp, cup) with END slots") {
    Vec v = encode_atomic({vocab.action_index("grasp"), vocab.object_index("cup")}, vocab, true);
    REQUIRE(v.size() == 19);
    CHECK(v[1] == 1.0);       // grasp
    CHECK(v[8 + 1] == 1.0);   // cup
  }
  SUBCASE("END marker sets the two extra slots") {
    Vec v = encode_atomic_end(vocab);
    CHECK(v[7] == 1.0);
    CHECK(v[18] == 1.0);
  }
  SUBCASE("every encoding has exactly two nonzero entries") {
    for (int a = 0; a < 8; ++a)
      for (int o = 0; o < 11; ++o) {
        Vec v = encode_atomic({a, o}, vocab, true);
        CHECK(nonzero_indices(v).size() == 2);
      }
  }
  SUBCASE("without END slots the width shrinks to 17") {
    Vec v = encode_atomic({0, 0}, vocab, false);
    CHECK(v.size() == 17);
    CHECK_THROWS_AS(encode_atomic({7, 0}, vocab, false), Error);
  }
  SUBCASE("start marker is all zero") {
    Vec v = encode_atomic_start(vocab);
    CHECK(v.size() == 19);
    CHECK(nonzero_indices(v).empty());
  }
}

TEST_CASE("oracle_selections on the figure grammar") {
  GrammarSet gs = load_bundled_grammars();
  const AndOrGraph& g = gs.task(gs.task_index("pour water with the cup"));
  const SelectionRules rules;

  SUBCASE("dispenser present, pot absent: dispenser branch") {
    Scene s = make_scene(gs.vocab, {{"cup", {0.2, 0.2, 0.2}}, {"water-dispenser", {0.8, 0.8, 0.8}}});
    SelectionList sel = oracle_selections(s, g, rules);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0].or_node == "w_src");
    CHECK(sel[0].child == 0);
  }
  SUBCASE("both present, dispenser nearer: dispenser branch") {
    Scene s = make_scene(gs.vocab, {{"cup", {0.0, 0.0, 0.1}},
                                    {"water-dispenser", {0.1, 0.1, 0.1}},
                                    {"pot", {0.9, 0.9, 0.9}}});
    CHECK(oracle_selections(s, g, rules)[0].child == 0);
  }
  SUBCASE("both present, pot branch wins when pot and cup are very near") {
    // dispenser branch scores 3*d(dispenser); pot branch 2*d(pot)+d(cup)
    Scene s = make_scene(gs.vocab, {{"cup", {0.0, 0.0, 0.05}},
                                    {"water-dispenser", {0.5, 0.5, 0.5}},
                                    {"pot", {0.05, 0.0, 0.0}}});
    CHECK(oracle_selections(s, g, rules)[0].child == 1);
  }
  SUBCASE("neither source present: infeasible") {
    Scene s = make_scene(gs.vocab, {{"cup", {0.2, 0.2, 0.2}}});
    CHECK_THROWS_AS(oracle_selections(s, g, rules), Error);
  }
  SUBCASE("pure function: identical inputs give identical output") {
    Scene s = make_scene(gs.vocab, {{"cup", {0.3, 0.1, 0.6}},
                                    {"water-dispenser", {0.4, 0.2, 0.9}},
                                    {"pot", {0.5, 0.1, 0.2}}});
    CHECK(oracle_selections(s, g, rules) == oracle_selections(s, g, rules));
  }
  SUBCASE("feasibility-only rules fall back to the lower index") {
    Scene s = make_scene(gs.vocab, {{"cup", {0.0, 0.0, 0.05}},
                                    {"water-dispenser", {0.5, 0.5, 0.5}},
                                    {"pot", {0.05, 0.0, 0.0}}});
    SelectionRules no_distance{.distance_tiebreak = false};
    CHECK(oracle_selections(s, g, no_distance)[0].child == 0);
  }
}

TEST_CASE("sample_feasible_scene keeps the task feasible") {
  GrammarSet gs = load_bundled_grammars();
  const SelectionRules rules;
  for (size_t t = 0; t < gs.tasks.size(); ++t) {
    Rng rng(mix_seed({99, t}));
    for (int i = 0; i < 20; ++i) {
      Scene s = sample_feasible_scene(gs.tasks[t], gs.vocab, 0.4, rng);
      CHECK_NOTHROW(oracle_selections(s, gs.tasks[t], rules));
      for (const auto& o : s.objects)
        for (double c : o.loc) CHECK((c >= 0.0 && c <= 1.0));
    }
  }
}

TEST_CASE("gen_dataset") {
  GrammarSet gs = load_bundled_grammars();

  SUBCASE("split arithmetic: 11 tasks x 50 at 0.6/0.4 gives 330/220") {
    DataGenSpec spec;
    spec.count_per_task = 50;
    spec.seed = 7;
    spec.split = {0.6, 0.4};
    for (int t = 0; t < 11; ++t) spec.tasks.push_back(t);
    auto [train, test] = gen_dataset(gs, spec);
    CHECK(train.samples.size() == 330);
    CHECK(test.samples.size() == 220);
  }

  SUBCASE("seeded generation is byte-identical across runs") {
    DataGenSpec spec;
    spec.count_per_task = 6;
    spec.seed = 7;
    auto [train1, test1] = gen_dataset(gs, spec);
    auto [train2, test2] = gen_dataset(gs, spec);
    json prov = {{"seed", 7}};
    CHECK(dataset_to_jsonl(train1, gs, prov) == dataset_to_jsonl(train2, gs, prov));
    CHECK(dataset_to_jsonl(test1, gs, prov) == dataset_to_jsonl(test2, gs, prov));
  }

  SUBCASE("every generated sequence is grammar-valid and replayable") {
    DataGenSpec spec;
    spec.count_per_task = 8;
    spec.seed = 21;
    auto [train, test] = gen_dataset(gs, spec);
    std::vector<Sample> all = train.samples;
    all.insert(all.end(), test.samples.begin(), test.samples.end());
    CHECK(all.size() == 13 * 8);
    for (const auto& s : all) {
      CHECK(contains(gs.task(s.task), s.sequence));
      REQUIRE(s.selections.has_value());
      CHECK(extract_sequence({&gs.task(s.task), *s.selections}) == s.sequence);
      CHECK(s.provenance == Provenance::Annotated);
    }
  }

  SUBCASE("bad specs are rejected") {
    DataGenSpec spec;
    spec.count_per_task = 0;
    CHECK_THROWS_AS(gen_dataset(gs, spec), Error);
    spec.count_per_task = 5;
    spec.split = {0.5, 0.4};
    CHECK_THROWS_AS(gen_dataset(gs, spec), Error);
  }
}

TEST_CASE("dataset JSONL round trip") {
  GrammarSet gs = load_bundled_grammars();
  DataGenSpec spec;
  spec.count_per_task = 3;
  spec.seed = 5;
  auto [train, test] = gen_dataset(gs, spec);
  json prov = {{"seed", 5}};
  std::string text = dataset_to_jsonl(train, gs, prov);
  Dataset reloaded = parse_dataset_jsonl(text, gs, "roundtrip");
  REQUIRE(reloaded.samples.size() == train.samples.size());
  for (size_t i = 0; i < reloaded.samples.size(); ++i) {
    const Sample& a = train.samples[i];
    const Sample& b = reloaded.samples[i];
    CHECK(a.task == b.task);
    CHECK(a.sequence == b.sequence);
    CHECK(a.scene.id == b.scene.id);
    REQUIRE(b.selections.has_value());
    CHECK(*a.selections == *b.selections);
    REQUIRE(a.scene.objects.size() == b.scene.objects.size());
    for (size_t k = 0; k < a.scene.objects.size(); ++k) {
      CHECK(a.scene.objects[k].class_id == b.scene.objects[k].class_id);
      CHECK(a.scene.objects[k].loc == b.scene.objects[k].loc);  // exact f64 round trip
    }
  }

  SUBCASE("unknown names and bad locations are rejected") {
    CHECK_THROWS_AS(parse_dataset_jsonl(
                        R"({"scene": {"objects": [{"class": "spoon", "loc": [0,0,0]}]}, "task": "make tea", "sequence": [["grasp","cup"]], "provenance": "annotated"})",
                        gs, "bad"),
                    Error);
    CHECK_THROWS_AS(parse_dataset_jsonl(
                        R"({"scene": {"objects": [{"class": "cup", "loc": [0,0,2.0]}]}, "task": "make tea", "sequence": [["grasp","cup"]], "provenance": "annotated"})",
                        gs, "bad"),
                    Error);
  }

  SUBCASE("vocab fingerprint mismatch is refused") {
    std::string bad = R"({"provenance": {"vocabFingerprint": "0000000000000000"}})";
    CHECK_THROWS_AS(parse_dataset_jsonl(bad + "\n", gs, "bad"), Error);
  }
}
