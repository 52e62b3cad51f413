#include "core/model_io.hpp"

#include <cstring>
#include <fstream>

namespace taskplan {

namespace {

constexpr char kMagic[8] = {'T', 'P', 'M', 'O', 'D', 'E', 'L', '1'};

void write_checkpoint(const std::string& path, json header,
                      const std::vector<TensorRef>& tensors) {
  json jt = json::array();
  for (const auto& t : tensors)
    jt.push_back({{"name", t.name}, {"count", t.n}, {"shape", t.shape}});
  header["tensors"] = jt;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  const uint32_t hlen = static_cast<uint32_t>(htext.size());
  unsigned char lenb[4] = {static_cast<unsigned char>(hlen & 0xff),
                           static_cast<unsigned char>((hlen >> 8) & 0xff),
                           static_cast<unsigned char>((hlen >> 16) & 0xff),
                           static_cast<unsigned char>((hlen >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(lenb), 4);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& t : tensors)
    out.write(reinterpret_cast<const char*>(t.data), static_cast<std::streamsize>(t.n * 8));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

struct CheckpointReader {
  std::ifstream in;
  json header;
  std::string path;

  explicit CheckpointReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
      throw Error(ErrorKind::Parse, "'" + path + "' is not a taskplan model checkpoint");
    unsigned char lenb[4];
    in.read(reinterpret_cast<char*>(lenb), 4);
    if (!in) throw Error(ErrorKind::Parse, "'" + path + "': truncated header");
    const uint32_t hlen = static_cast<uint32_t>(lenb[0]) | (static_cast<uint32_t>(lenb[1]) << 8) |
                          (static_cast<uint32_t>(lenb[2]) << 16) |
                          (static_cast<uint32_t>(lenb[3]) << 24);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    if (!in) throw Error(ErrorKind::Parse, "'" + path + "': truncated header");
    header = parse_json(htext, path + " header");
  }

  void read_tensors(const std::vector<TensorRef>& tensors) {
    const json& jt = require_array(header, "tensors", path);
    if (jt.size() != tensors.size())
      throw Error(ErrorKind::State, "'" + path + "': tensor table size mismatch");
    for (size_t i = 0; i < tensors.size(); ++i) {
      const std::string name = jt[i].at("name").get<std::string>();
      const size_t count = jt[i].at("count").get<size_t>();
      if (name != tensors[i].name || count != tensors[i].n)
        throw Error(ErrorKind::State, "'" + path + "': tensor '" + name +
                                          "' does not match expected shape of '" +
                                          tensors[i].name + "'");
      in.read(reinterpret_cast<char*>(tensors[i].data),
              static_cast<std::streamsize>(tensors[i].n * 8));
      if (!in)
        throw Error(ErrorKind::Parse, "'" + path + "': truncated tensor data for '" + name + "'");
    }
    char extra;
    in.read(&extra, 1);
    if (!in.eof())
      throw Error(ErrorKind::Parse, "'" + path + "': trailing bytes after tensor data");
  }
};

void check_fingerprint(const json& header, const GrammarSet& gs, const std::string& path) {
  const std::string fp = header.at("vocabFingerprint").get<std::string>();
  if (fp != to_hex(gs.vocab.fingerprint()))
    throw Error(ErrorKind::State,
                "'" + path + "': model vocab fingerprint " + fp +
                    " does not match the grammar set (" + to_hex(gs.vocab.fingerprint()) + ")");
}

}  // namespace

void save_selector_model(const std::string& path, const SelectorModel& m, const json& provenance) {
  json header;
  header["kind"] = "selector";
  header["formatVersion"] = 1;
  header["vocabFingerprint"] = to_hex(m.vocab_fp);
  header["nMax"] = m.n_max;
  header["bMax"] = m.b_max;
  header["hidden"] = m.cell.hidden;
  header["featIn"] = m.init.w.cols;
  header["provenance"] = provenance;
  auto tensors = model_tensors(const_cast<SelectorModel&>(m));
  write_checkpoint(path, header, tensors);
}

void save_decoder_model(const std::string& path, const DecoderModel& m, const json& provenance) {
  json header;
  header["kind"] = "decoder";
  header["formatVersion"] = 1;
  header["vocabFingerprint"] = to_hex(m.vocab_fp);
  header["maxLen"] = m.max_len;
  header["hidden"] = m.cell.hidden;
  header["featIn"] = m.init.w.cols;
  header["provenance"] = provenance;
  auto tensors = model_tensors(const_cast<DecoderModel&>(m));
  write_checkpoint(path, header, tensors);
}

SelectorModel load_selector_model(const std::string& path, const GrammarSet& gs) {
  CheckpointReader reader(path);
  if (reader.header.at("kind").get<std::string>() != "selector")
    throw Error(ErrorKind::State, "'" + path + "' is not a selector checkpoint");
  check_fingerprint(reader.header, gs, path);
  const int hidden = reader.header.at("hidden").get<int>();
  const int n_max = reader.header.at("nMax").get<int>();
  const int b_max = reader.header.at("bMax").get<int>();
  SelectorModel m = make_selector_model(gs, hidden, n_max, b_max, /*seed=*/0);
  const int feat_in = reader.header.at("featIn").get<int>();
  if (feat_in != m.init.w.cols)
    throw Error(ErrorKind::State, "'" + path + "': feature width mismatch");
  reader.read_tensors(model_tensors(m));
  return m;
}

DecoderModel load_decoder_model(const std::string& path, const GrammarSet& gs) {
  CheckpointReader reader(path);
  if (reader.header.at("kind").get<std::string>() != "decoder")
    throw Error(ErrorKind::State, "'" + path + "' is not a decoder checkpoint");
  check_fingerprint(reader.header, gs, path);
  const int hidden = reader.header.at("hidden").get<int>();
  const int max_len = reader.header.at("maxLen").get<int>();
  DecoderModel m = make_decoder_model(gs, hidden, max_len, /*seed=*/0);
  const int feat_in = reader.header.at("featIn").get<int>();
  if (feat_in != m.init.w.cols)
    throw Error(ErrorKind::State, "'" + path + "': feature width mismatch");
  reader.read_tensors(model_tensors(m));
  return m;
}

json read_model_header(const std::string& path) {
  CheckpointReader reader(path);
  return reader.header;
}

}  // namespace taskplan
