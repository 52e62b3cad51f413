/*
 * taskplan C API
 *
 * Task-planning toolkit: temporal and-or grammar engine plus two recurrent
 * networks — an or-node selector that generates grammar-valid training data
 * and an action-sequence decoder trained on the enlarged corpus.
 *
 * All functions return tp_status; on failure tp_last_error() holds a
 * thread-local message. Strings returned through char** out-parameters are
 * heap-allocated and must be released with tp_string_free(). Configuration
 * is passed as a JSON document (NULL selects the built-in defaults); see the
 * README for the schema.
 */
#ifndef TASKPLAN_H
#define TASKPLAN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tp_status {
  TP_OK = 0,
  TP_ERROR_INVALID_ARGUMENT = 1,
  TP_ERROR_PARSE = 2,
  TP_ERROR_VALIDATION = 3,
  TP_ERROR_IO = 4,
  TP_ERROR_STATE = 5,
  TP_ERROR_INTERNAL = 6,
} tp_status;

/* Opaque handle over a validated grammar set (vocabulary + one and-or graph
 * per task + the global node index map). */
typedef struct tp_grammar_set tp_grammar_set;

const char* tp_version(void);

/* Message of the most recent failure on this thread; valid until the next
 * taskplan call on the same thread. */
const char* tp_last_error(void);

void tp_string_free(char* s);

tp_status tp_grammar_set_load_file(const char* path, tp_grammar_set** out);
tp_status tp_grammar_set_load_string(const char* json_text, tp_grammar_set** out);
void tp_grammar_set_free(tp_grammar_set* gs);

int tp_grammar_set_task_count(const tp_grammar_set* gs);

/* Per-task node/or-node/terminal counts, language sizes, vocabulary sizes and
 * the vocab fingerprint, as a JSON document. */
tp_status tp_grammar_set_summary_json(const tp_grammar_set* gs, char** out_json);

/* Every action sequence of the named task's grammar (at most max_sequences,
 * error beyond that), as JSON: {"task":..., "count":N, "sequences":[[[a,o],...],...]}. */
tp_status tp_enumerate_task(const tp_grammar_set* gs, const char* task_name, int max_sequences,
                            char** out_json);

/* Synthetic annotated dataset split into train/test JSONL files. */
tp_status tp_generate_dataset(const tp_grammar_set* gs, const char* config_json,
                              const char* train_path, const char* test_path);

/* Trains the or-node selector on an annotated JSONL file and writes a model
 * checkpoint. out_report_json (optional) receives the training log. */
tp_status tp_train_selector(const tp_grammar_set* gs, const char* train_jsonl,
                            const char* config_json, const char* model_path,
                            char** out_report_json);

/* Selector-generated samples on fresh synthetic scenes, written as JSONL. */
tp_status tp_generate_augmented(const tp_grammar_set* gs, const char* selector_model,
                                const char* config_json, const char* out_jsonl);

/* Trains the action decoder on the concatenation of the given JSONL files. */
tp_status tp_train_decoder(const tp_grammar_set* gs, const char* const* train_jsonls,
                           size_t n_train, const char* config_json, const char* model_path,
                           char** out_report_json);

/* Free-running decode for every sample in input_jsonl; writes prediction
 * lines {"task","sceneId","sequence","logprob"}. */
tp_status tp_predict(const tp_grammar_set* gs, const char* decoder_model,
                     const char* input_jsonl, const char* config_json, const char* out_jsonl);

/* Evaluates a decoder checkpoint on a test JSONL file. Writes
 * <report_prefix>.json, <report_prefix>.txt and two confusion CSVs. */
tp_status tp_evaluate(const tp_grammar_set* gs, const char* decoder_model,
                      const char* test_jsonl, const char* config_json,
                      const char* report_prefix);

/* Runs the configured experiment ("ablation" or "generalization") end to end,
 * writing datasets, per-arm reports and a summary into out_dir. */
tp_status tp_run_experiment(const tp_grammar_set* gs, const char* config_json,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* TASKPLAN_H */
