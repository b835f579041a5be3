#ifndef GLCE_H
#define GLCE_H

/* Generated by cbindgen from glce-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum GlceStatus {
  GLCE_STATUS_OK = 0,
  // A null pointer or otherwise invalid argument.
  GLCE_STATUS_INVALID_ARGUMENT = 1,
  // A position beyond the string length.
  GLCE_STATUS_OUT_OF_RANGE = 2,
  // File could not be read or written.
  GLCE_STATUS_IO = 3,
  // Grammar or index file failed to parse or verify.
  GLCE_STATUS_PARSE = 4,
  // Layer parameters rejected.
  GLCE_STATUS_BAD_PARAMS = 5,
  // Output buffer too small; the required size is reported instead.
  GLCE_STATUS_BUFFER_TOO_SMALL = 6,
} GlceStatus;

// Opaque index handle.
typedef struct GlceIndex GlceIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds an index from a grammar file in the text format.
// Pass `layer_count = 0` to use the default layer parameters.
//
// # Safety
// `grammar_path` must be a valid NUL-terminated string, `layers` must point
// to `layer_count` readable values (or be ignored when the count is 0), and
// `out_index` must be a valid output slot.
enum GlceStatus glce_build_from_grammar_file(const char *grammar_path,
                                             const size_t *layers,
                                             size_t layer_count,
                                             struct GlceIndex **out_index);

// Builds an index from a raw byte string, compressing it first.
//
// # Safety
// `text` must point to `text_len` readable bytes; other arguments as in
// [`glce_build_from_grammar_file`].
enum GlceStatus glce_build_from_text(const uint8_t *text,
                                     size_t text_len,
                                     const size_t *layers,
                                     size_t layer_count,
                                     struct GlceIndex **out_index);

// Loads an index file written by [`glce_save`] or the CLI.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out_index` a valid slot.
enum GlceStatus glce_load(const char *path, struct GlceIndex **out_index);

// Writes the index to a file.
//
// # Safety
// `index` must be a live handle and `path` a valid NUL-terminated string.
enum GlceStatus glce_save(const struct GlceIndex *index, const char *path);

// String length N of the indexed text.
//
// # Safety
// `index` must be a live handle; `out_len` must be a valid slot.
enum GlceStatus glce_text_len(const struct GlceIndex *index, uint64_t *out_len);

// Character code at position `i`.
//
// # Safety
// `index` must be a live handle; `out_char` must be a valid slot.
enum GlceStatus glce_access(const struct GlceIndex *index, uint64_t i, uint32_t *out_char);

// Copies character codes `i..=j` into `buf`. `buf_len` is the capacity in
// u32 units; the required count is stored in `out_written` either way.
//
// # Safety
// `index` must be a live handle; `buf` must hold `buf_len` writable u32
// values; `out_written` must be a valid slot.
enum GlceStatus glce_extract(const struct GlceIndex *index,
                             uint64_t i,
                             uint64_t j,
                             uint32_t *buf,
                             size_t buf_len,
                             size_t *out_written);

// Longest common extension of the suffixes at `i` and `j`.
//
// # Safety
// `index` must be a live handle; `out_len` must be a valid slot.
enum GlceStatus glce_lce(const struct GlceIndex *index, uint64_t i, uint64_t j, uint64_t *out_len);

// Frees a handle. Passing null is a no-op.
//
// # Safety
// `index` must have come from a build or load call and not been freed yet.
void glce_free(struct GlceIndex *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLCE_H */
