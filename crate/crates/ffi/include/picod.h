#ifndef PICOD_H
#define PICOD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PicodStatus {
  PICOD_STATUS_OK = 0,
  PICOD_STATUS_NULL_POINTER = 1,
  PICOD_STATUS_USAGE = 2,
  PICOD_STATUS_DOMAIN = 3,
  PICOD_STATUS_CONSTRUCTION = 4,
  PICOD_STATUS_SEARCH_TOO_LARGE = 5,
  PICOD_STATUS_PARSE = 6,
  PICOD_STATUS_PANIC = 7,
} PicodStatus;

/**
 * Opaque decentralized code.
 */
typedef struct PicodCode PicodCode;

/**
 * Opaque problem instance.
 */
typedef struct PicodInstance PicodInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *picod_last_error(void);

/**
 * Instance with `len` side-information sizes read from `sizes`.
 *
 * # Safety
 * `sizes` must point to `len` readable values and `out` must be writable.
 */
enum PicodStatus picod_instance_new(size_t m,
                                    size_t t,
                                    const size_t *sizes,
                                    size_t len,
                                    struct PicodInstance **out);

/**
 * Instance with S = [smin..smax].
 *
 * # Safety
 * `out` must be writable.
 */
enum PicodStatus picod_instance_consecutive(size_t m,
                                            size_t t,
                                            size_t smin,
                                            size_t smax,
                                            struct PicodInstance **out);

/**
 * Instance with S = [0..m-t] minus [smin..smax].
 *
 * # Safety
 * `out` must be writable.
 */
enum PicodStatus picod_instance_complement(size_t m,
                                           size_t t,
                                           size_t smin,
                                           size_t smax,
                                           struct PicodInstance **out);

/**
 * # Safety
 * `instance` must be null or a handle from this library not freed before.
 */
void picod_instance_free(struct PicodInstance *instance);

/**
 * Closed-form optimal length as num/den in lowest terms.
 *
 * # Safety
 * `instance` must be a live handle; `num` and `den` must be writable.
 */
enum PicodStatus picod_optimal_length(const struct PicodInstance *instance,
                                      uint64_t *num,
                                      uint64_t *den);

/**
 * Builds a code. `field_bits` 0 picks the default field.
 *
 * # Safety
 * `instance` must be a live handle and `out` writable.
 */
enum PicodStatus picod_synthesize(const struct PicodInstance *instance,
                                  uint32_t field_bits,
                                  uint64_t seed,
                                  struct PicodCode **out);

/**
 * # Safety
 * `code` must be null or a handle from this library not freed before.
 */
void picod_code_free(struct PicodCode *code);

/**
 * Normalized length as num/den.
 *
 * # Safety
 * `code` must be a live handle; `num` and `den` must be writable.
 */
enum PicodStatus picod_code_length(const struct PicodCode *code, uint64_t *num, uint64_t *den);

/**
 * JSON document for the code; release with [`picod_string_free`].
 *
 * # Safety
 * `code` must be a live handle and `out` writable.
 */
enum PicodStatus picod_code_to_json(const struct PicodCode *code, char **out);

/**
 * Parses a code document.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum PicodStatus picod_code_from_json(const char *json, struct PicodCode **out);

/**
 * Checks encoding constraints and decoding for every user.
 *
 * # Safety
 * `code` must be a live handle and `out_valid` writable.
 */
enum PicodStatus picod_verify(const struct PicodCode *code, bool *out_valid);

/**
 * # Safety
 * `s` must be null or a string returned by this library not freed before.
 */
void picod_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PICOD_H */
