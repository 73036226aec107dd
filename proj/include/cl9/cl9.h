/* C interface to the cl9 engine. Every handle is opaque; strings returned
 * as `char*` belong to the caller and are released with cl9_string_free.
 * On failure a call returns a non-zero status and cl9_last_error() holds
 * a message for the calling thread. */
#ifndef CL9_H
#define CL9_H

#include <stddef.h>
#include <stdint.h>

#if defined(CL9_BUILDING_LIBRARY)
#define CL9_API __attribute__((visibility("default")))
#else
#define CL9_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cl9_status {
  CL9_OK = 0,
  CL9_UNPROVABLE = 1,
  CL9_TIMEOUT = 2,
  CL9_ERR_PARSE = 3,
  CL9_ERR_ILLEGAL_MOVE = 4,
  CL9_ERR_INVALID = 5, /* bad argument or handle state */
  CL9_ERR_IO = 6,
  CL9_ERR_MISMATCH = 7, /* verification or trace assertion failed */
  CL9_ERR_INTERNAL = 8
} cl9_status;

typedef enum cl9_rule { CL9_RULE_WAIT = 0, CL9_RULE_CHOOSE = 1, CL9_RULE_SWITCH = 2, CL9_RULE_MATCH = 3 } cl9_rule;

typedef struct cl9_proof cl9_proof;
typedef struct cl9_run cl9_run;
typedef struct cl9_play cl9_play;

CL9_API const char* cl9_last_error(void);
CL9_API void cl9_string_free(char* s);

/* Formulas */
CL9_API cl9_status cl9_normalize(const char* formula, char** out);

/* Proofs. `out` is set when the status is CL9_OK. budget 0 = default. */
CL9_API cl9_status cl9_prove(const char* formula, uint64_t budget, cl9_proof** out);
CL9_API char* cl9_proof_render(const cl9_proof* proof);
CL9_API int cl9_proof_verify(const cl9_proof* proof);
CL9_API size_t cl9_proof_size(const cl9_proof* proof);
CL9_API int cl9_proof_rule_count(const cl9_proof* proof, cl9_rule rule);
CL9_API void cl9_proof_free(cl9_proof* proof);

/* Numbered derivations in the underline-free calculus. */
CL9_API cl9_status cl9_verify_derivation(const char* text);

/* Agent file or scenario directory; `report` gets the diagnostics. */
CL9_API cl9_status cl9_check_path(const char* path, char** report);

/* Scenarios. seed < 0 keeps the configured seed. */
CL9_API cl9_status cl9_run_scenario(const char* directory, int64_t seed, int use_socket, uint64_t budget, cl9_run** out);
CL9_API char* cl9_run_trace(const cl9_run* run);
CL9_API int cl9_run_quiescent(const cl9_run* run);
CL9_API int cl9_run_ticks(const cl9_run* run);
/* CL9_ERR_MISMATCH when a pattern is not found; cl9_last_error names it. */
CL9_API cl9_status cl9_run_assert(const cl9_run* run, const char* patterns);
CL9_API void cl9_run_free(cl9_run* run);

/* Interactive sessions: the caller plays the environment against the
 * strategy a proof encodes. Paths address the current view. */
CL9_API cl9_status cl9_play_open(const cl9_proof* proof, cl9_play** out);
CL9_API char* cl9_play_view(const cl9_play* play);
/* `command`: "choose <path> <i>", "switch <path>" or "atom <path> <text>".
 * `reply` lists the machine's answers, one per line. */
CL9_API cl9_status cl9_play_move(cl9_play* play, const char* command, char** reply);
CL9_API cl9_status cl9_play_set_valuation(cl9_play* play, const char* atom, int value);
/* Ends the session; `winner` is "machine" or "environment". */
CL9_API cl9_status cl9_play_finish(cl9_play* play, char** winner);
CL9_API void cl9_play_free(cl9_play* play);

#ifdef __cplusplus
}
#endif

#endif /* CL9_H */
