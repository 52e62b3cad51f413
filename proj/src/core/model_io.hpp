#ifndef TASKPLAN_CORE_MODEL_IO_HPP
#define TASKPLAN_CORE_MODEL_IO_HPP

#include <string>

#include "core/decoder.hpp"
#include "core/jsonio.hpp"
#include "core/selector.hpp"

namespace taskplan {

// Checkpoint layout: 8-byte magic "TPMODEL1", little-endian uint32 header
// length, a JSON header (kind, vocab fingerprint, dimensions, tensor table,
// provenance), then each tensor's raw float64 values in header order.
// Round-trips are bit-exact.

void save_selector_model(const std::string& path, const SelectorModel& m, const json& provenance);
void save_decoder_model(const std::string& path, const DecoderModel& m, const json& provenance);

// Throws ErrorKind::State on kind/fingerprint mismatch against gs, and
// ErrorKind::Io / Parse on truncated or corrupt files.
SelectorModel load_selector_model(const std::string& path, const GrammarSet& gs);
DecoderModel load_decoder_model(const std::string& path, const GrammarSet& gs);

// Header of any checkpoint, without loading tensors.
json read_model_header(const std::string& path);

}  // namespace taskplan

#endif
