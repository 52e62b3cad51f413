#ifndef TASKPLAN_CORE_DATASET_IO_HPP
#define TASKPLAN_CORE_DATASET_IO_HPP

#include <string>

#include "core/jsonio.hpp"
#include "core/scene.hpp"

namespace taskplan {

// JSON-lines dataset files: one sample per line,
//   {"scene": {"id": ..., "objects": [{"class": name, "loc": [x,y,z]}...]},
//    "task": name, "sequence": [[action, object]...],
//    "selections": [[orNodeId, idx]...]?, "provenance": "annotated"|"augmented"}
// A provenance record (config hash, seed, vocab fingerprint) is written as
// the first line and skipped on load.

std::string dataset_to_jsonl(const Dataset& ds, const GrammarSet& gs, const json& provenance);
void save_dataset_jsonl(const std::string& path, const Dataset& ds, const GrammarSet& gs,
                        const json& provenance);

// Validates names against the grammar set's vocab and, when the provenance
// line carries a vocab fingerprint, refuses mismatched files.
Dataset load_dataset_jsonl(const std::string& path, const GrammarSet& gs);
Dataset parse_dataset_jsonl(const std::string& text, const GrammarSet& gs,
                            const std::string& origin);

json sample_to_json(const Sample& s, const GrammarSet& gs);
Sample sample_from_json(const json& j, const GrammarSet& gs, const std::string& where);

}  // namespace taskplan

#endif
