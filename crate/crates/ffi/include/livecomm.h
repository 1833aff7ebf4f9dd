#ifndef LIVECOMM_H
#define LIVECOMM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum lc_status {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_ARGUMENT = 1,
  LC_STATUS_INVALID_UTF8 = 2,
  LC_STATUS_INVALID_ARGUMENT = 3,
  LC_STATUS_PARSE_ERROR = 4,
  LC_STATUS_SESSION_ERROR = 5,
  LC_STATUS_PANIC = 6,
} lc_status;

/*
 Opaque commentary track.
 */
typedef struct lc_track lc_track;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *lc_last_error(void);

/*
 # Safety
 `s` is null or was returned by this library and not yet freed.
 */
void lc_string_free(char *s);

/*
 # Safety
 `video_id` is a NUL-terminated string; `out` is writable.
 */
enum lc_status lc_track_new(const char *video_id, double duration, struct lc_track **out);

/*
 # Safety
 `t` is null or came from [`lc_track_new`] and was not freed before.
 */
void lc_track_free(struct lc_track *t);

/*
 Appends an utterance; starts must strictly increase.

 # Safety
 `t` is a live track; strings are NUL-terminated.
 */
enum lc_status lc_track_push(struct lc_track *t,
                             const char *text_ptr,
                             const char *lang,
                             double start,
                             double est_duration);

/*
 Number of utterances, 0 for a null track.

 # Safety
 `t` is null or a live track.
 */
size_t lc_track_len(const struct lc_track *t);

/*
 # Safety
 `t` is a live track; `out` is writable. Free the result with [`lc_string_free`].
 */
enum lc_status lc_track_to_srt(const struct lc_track *t, char **out);

/*
 Per-second speaking agreement of two tracks of equal duration.

 # Safety
 Both tracks are live; `out` is writable.
 */
enum lc_status lc_timing_alignment(const struct lc_track *gen,
                                   const struct lc_track *reference,
                                   double *out);

/*
 Speaking time at the default rates (4 words/s English, 8 characters/s Japanese).

 # Safety
 Strings are NUL-terminated; `out` is writable.
 */
enum lc_status lc_estimate_duration(const char *text_ptr, const char *lang, double *out);

/*
 ROUGE-L F1 on a 0 to 100 scale.

 # Safety
 Strings are NUL-terminated; `out` is writable.
 */
enum lc_status lc_rouge_l(const char *candidate,
                          const char *reference,
                          const char *lang,
                          double *out);

/*
 Share of adjacent subtitle pairs whose intervals overlap.

 # Safety
 `srt` is NUL-terminated; `out` is writable.
 */
enum lc_status lc_srt_overlap(const char *srt, double *out);

/*
 Classifies a model reply. `*is_wait` is set to 1 for silence, 0 for speech;
 for speech `*utterance` receives the normalized text, otherwise null.

 # Safety
 `raw` is NUL-terminated; `is_wait` and `utterance` are writable.
 */
enum lc_status lc_parse_response(const char *raw, int *is_wait, char **utterance);

/*
 Runs one session against scripted replies with simulated time.

 `manifest` and `script` hold file contents (manifest and script formats of
 the command-line tool); `templates` is a built-in preset id. On success the
 trace and SRT texts are written to `trace_out` and `srt_out`.

 # Safety
 Strings are NUL-terminated; both outputs are writable.
 */
enum lc_status lc_run_scripted(const char *manifest,
                               const char *script,
                               const char *strategy,
                               double step,
                               const char *templates,
                               char **trace_out,
                               char **srt_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIVECOMM_H */
