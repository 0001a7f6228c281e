/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PHRASE_TTS_H
#define PHRASE_TTS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Phrase-parallel synthesis (the default).
 */
#define PT_MODE_PARALLEL 0

/**
 * Same pipeline, one phrase at a time on the calling thread.
 */
#define PT_MODE_SEQUENTIAL 1

/**
 * Whole sentence decoded as a single unit.
 */
#define PT_MODE_AR_BASELINE 2

/**
 * Result code of every fallible call.
 */
typedef enum PtStatus {
  PT_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8, out-of-range option.
   */
  PT_STATUS_INVALID_ARGUMENT = 1,
  PT_STATUS_IO = 2,
  /**
   * Malformed model, corpus, lexicon or tensor file.
   */
  PT_STATUS_FORMAT = 3,
  /**
   * Text that the lexicon cannot cover.
   */
  PT_STATUS_UNSEGMENTABLE = 4,
  /**
   * Shape mismatch or non-finite numbers.
   */
  PT_STATUS_NUMERIC = 5,
  /**
   * Internal panic caught at the boundary.
   */
  PT_STATUS_INTERNAL = 6,
} PtStatus;

/**
 * Opaque engine: frontend, boundary model, weights and worker pool.
 */
typedef struct PtEngine PtEngine;

/**
 * Opaque mel-spectrogram, row-major `[frames, bins]` f32.
 */
typedef struct PtMel PtMel;

/**
 * Paths may be null to select the bundled or generated default.
 */
typedef struct PtEngineConfig {
  /**
   * Lexicon TSV; needs `phones_path` too.
   */
  const char *lexicon_path;
  const char *phones_path;
  /**
   * PPCF boundary model; null trains one on the bundled corpus.
   */
  const char *crf_path;
  /**
   * PPSW weights; null generates small-preset weights from `seed`.
   */
  const char *weights_path;
  /**
   * Reference mel; null uses a seeded synthetic one.
   */
  const char *ref_mel_path;
  uint64_t seed;
  /**
   * Worker threads for parallel mode, at least 1.
   */
  uint32_t workers;
} PtEngineConfig;

typedef struct PtSynthOptions {
  uint32_t mode;
  /**
   * Frame cap per decode; 0 means 30 frames per phoneme.
   */
  uint32_t max_frames;
  /**
   * Stop-token probability threshold; 1.0 or more never stops early.
   */
  float stop_threshold;
} PtSynthOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine. On success `*out` owns it; release with [`pt_engine_free`].
 *
 * # Safety
 * `config` and `out` must be valid pointers; non-null paths must be C strings.
 */
enum PtStatus pt_engine_new(const struct PtEngineConfig *config, struct PtEngine **out);

/**
 * # Safety
 * `engine` must come from [`pt_engine_new`] and not be used afterwards. Null is a no-op.
 */
void pt_engine_free(struct PtEngine *engine);

/**
 * Number of phonemes the engine's inventory defines.
 *
 * # Safety
 * `engine` must be a live engine or null (returns 0).
 */
size_t pt_engine_phoneme_count(const struct PtEngine *engine);

/**
 * Segments one sentence. `*out` receives one phrase per line, tokens
 * separated by spaces and ` |L3|` after every non-final phrase; release it
 * with [`pt_string_free`].
 *
 * # Safety
 * `engine` must be live, `text` a C string, `out` a valid pointer.
 */
enum PtStatus pt_engine_segment(const struct PtEngine *engine, const char *text, char **out);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void pt_string_free(char *s);

/**
 * Synthesizes one sentence into a mel-spectrogram handle. `options` may be
 * null for parallel mode with default limits.
 *
 * # Safety
 * `engine` must be live, `text` a C string, `options` valid or null, `out` valid.
 */
enum PtStatus pt_engine_synthesize(const struct PtEngine *engine,
                                   const char *text,
                                   const struct PtSynthOptions *options,
                                   struct PtMel **out);

/**
 * # Safety
 * `mel` must be a live handle or null (returns 0).
 */
size_t pt_mel_frames(const struct PtMel *mel);

/**
 * # Safety
 * `mel` must be a live handle or null (returns 0).
 */
size_t pt_mel_bins(const struct PtMel *mel);

/**
 * # Safety
 * `mel` must be a live handle or null (returns 0).
 */
uint32_t pt_mel_frame_period_us(const struct PtMel *mel);

/**
 * Row-major `frames × bins` values, valid until the handle is freed.
 *
 * # Safety
 * `mel` must be a live handle or null (returns null).
 */
const float *pt_mel_data(const struct PtMel *mel);

/**
 * Writes the mel in the engine's mel file format.
 *
 * # Safety
 * `mel` must be live and `path` a C string.
 */
enum PtStatus pt_mel_write(const struct PtMel *mel, const char *path);

/**
 * # Safety
 * `mel` must come from [`pt_engine_synthesize`] and not be used afterwards. Null is a no-op.
 */
void pt_mel_free(struct PtMel *mel);

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next call on this thread.
 */
const char *pt_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *pt_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHRASE_TTS_H */
