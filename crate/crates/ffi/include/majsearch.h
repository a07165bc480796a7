#ifndef MAJSEARCH_H
#define MAJSEARCH_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_DOMAIN = 1,
  MS_STATUS_CONFIG = 2,
  MS_STATUS_CAPACITY = 3,
  MS_STATUS_CONTRADICTION = 4,
  MS_STATUS_INPUT = 5,
  MS_STATUS_USAGE = 6,
  MS_STATUS_IO = 7,
  MS_STATUS_NULL_POINTER = 8,
  MS_STATUS_PANIC = 9,
} MsStatus;

/**
 * A non-adaptive query design.
 */
typedef struct MsDesign MsDesign;

/**
 * Outcome of one strategy run against a hidden coloring.
 */
typedef struct MsRun MsRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next failing call.
 */
const char *ms_last_error(void);

/**
 * Library version as a static string.
 */
const char *ms_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ms_string_free(char *s);

/**
 * Exact minimax query count. `model` may be NULL (majority). `fraction` 0 asks for a
 * non-minority ball, A > 0 for a ball agreeing with (n-1)/A others. Sets `impossible`
 * when no strategy always succeeds.
 */
enum MsStatus ms_exact(size_t n,
                       size_t q,
                       const char *model,
                       size_t fraction,
                       uint64_t budget,
                       uint32_t *value,
                       bool *impossible);

/**
 * Builds a design: kind is "complete" (uses q), "thm3ii" or "random56" (uses seed).
 */
enum MsStatus ms_design_build(const char *kind,
                              size_t n,
                              size_t q,
                              uint64_t seed,
                              struct MsDesign **out);

/**
 * Parses the text format: a header "n q", then one ascending query per line.
 */
enum MsStatus ms_design_parse(const char *text, struct MsDesign **out);

/**
 * Text form of a design; free with `ms_string_free`.
 */
enum MsStatus ms_design_to_text(const struct MsDesign *d, char **out);

/**
 * Number of queries, minimum degree and minimum co-degree.
 */
enum MsStatus ms_design_stats(const struct MsDesign *d,
                              size_t *size,
                              size_t *delta,
                              size_t *delta2);

/**
 * Whether every consistent answer table pins down a non-minority ball.
 */
enum MsStatus ms_design_determines(const struct MsDesign *d,
                                   const char *model,
                                   uint64_t budget,
                                   bool *out);

/**
 * # Safety
 * `d` must come from this library and not be freed twice.
 */
void ms_design_free(struct MsDesign *d);

/**
 * Runs a strategy ("a3", "odd" or "even") against the hidden coloring `colors[0..n]`
 * (0 red, 1 blue) with seeded tie choices among valid majority answers.
 *
 * # Safety
 * `colors` must point to `n` readable bytes.
 */
enum MsStatus ms_run(const char *strategy,
                     const uint8_t *colors,
                     size_t n,
                     size_t q,
                     uint64_t seed,
                     struct MsRun **out);

/**
 * The returned ball, or `usize::MAX` for a NULL handle.
 */
size_t ms_run_ball(const struct MsRun *r);

/**
 * Transcript JSON, owned by the handle; NULL for a NULL handle.
 */
const char *ms_run_transcript(const struct MsRun *r);

/**
 * # Safety
 * `r` must come from `ms_run` and not be freed twice.
 */
void ms_run_free(struct MsRun *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAJSEARCH_H */
