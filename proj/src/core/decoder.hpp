#ifndef TASKPLAN_CORE_DECODER_HPP
#define TASKPLAN_CORE_DECODER_HPP

#include "core/scene.hpp"
#include "core/train.hpp"

namespace taskplan {

// Autoregressive (action, object) decoder. The initial hidden state projects
// [scene features, task one-hot]; each step consumes the previous atomic
// action's one-hot pair (an all-zero start marker first) and two softmax
// heads predict the next primitive action and object independently. An END
// token extends both vocabularies and is supervised on both heads.
struct DecoderModel {
  uint64_t vocab_fp = 0;
  int max_len = 12;
  DenseHead init;         // hidden x (4*|objects| + |tasks|)
  LstmParams cell;        // input = |actions|+1 + |objects|+1
  DenseHead action_head;  // (|actions|+1) x hidden
  DenseHead object_head;  // (|objects|+1) x hidden
};

DecoderModel make_decoder_model(const GrammarSet& gs, int hidden, int max_len, uint64_t seed);

std::vector<TensorRef> model_tensors(DecoderModel& m);
DecoderModel zeros_like(const DecoderModel& m);

// Greedy decode: argmax of each head per step; stops when the action head's
// argmax is END or max_len pairs were emitted. The object argmax is taken
// over real objects only (a mid-sequence END object has no meaning).
ActionSequence decode(const DecoderModel& m, const Vocab& vocab, const Scene& scene, int task);

// Teacher-forced log-probability of seq, including the final END step:
// sum over steps of ln p(a_t) + ln p(o_t). Always <= 0.
double score(const DecoderModel& m, const Vocab& vocab, const Scene& scene, int task,
             const ActionSequence& seq);

// Teacher-forced summed cross-entropy of both heads over seq + END.
double decoder_sample_loss(const DecoderModel& m, const Vocab& vocab, const Sample& sample);

double decoder_accumulate_grads(const DecoderModel& m, const Vocab& vocab, const Sample& sample,
                                DecoderModel& grads, int& correct, int& tokens);

struct DecoderTrainResult {
  DecoderModel model;  // final-epoch parameters (or early-stopped)
  std::vector<TrainLogEntry> log;
  int epochs_run = 0;
  int steps_per_epoch = 0;
};

DecoderTrainResult train_decoder(const GrammarSet& gs, const std::vector<Sample>& samples,
                                 const TrainConfig& cfg, int max_len);

// Teacher-forced per-token accuracy (both heads, END step included).
double token_accuracy(const DecoderModel& m, const Vocab& vocab,
                      const std::vector<Sample>& samples);

}  // namespace taskplan

#endif
