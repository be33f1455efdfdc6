#ifndef FKDYN_FKDYN_H
#define FKDYN_FKDYN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FKDYN_API __declspec(dllexport)
#else
#define FKDYN_API __attribute__((visibility("default")))
#endif

typedef enum fkdyn_status {
  FKDYN_OK = 0,
  FKDYN_E_INVALID_ARGUMENT = 1,
  FKDYN_E_PRECONDITION = 2,
  FKDYN_E_SIZE_CAP = 3,
  FKDYN_E_NOT_REALIZABLE = 4,
  FKDYN_E_EPOCH_CAP = 5,
  FKDYN_E_INCONCLUSIVE = 6,
  FKDYN_E_INTERNAL = 7
} fkdyn_status;

/* Message for the last failing call on this thread ("" when none). */
FKDYN_API const char* fkdyn_last_error(void);
FKDYN_API const char* fkdyn_version(void);
FKDYN_API const char* fkdyn_status_name(fkdyn_status s);

/* ---- experiment runner ------------------------------------------------- */

typedef struct fkdyn_request fkdyn_request;
typedef struct fkdyn_result fkdyn_result;

FKDYN_API size_t fkdyn_command_count(void);
FKDYN_API const char* fkdyn_command_name(size_t i);
FKDYN_API const char* fkdyn_command_help(const char* command);
/* Parameters accepted by a command as a JSON array of {"name","default","help"}. */
FKDYN_API const char* fkdyn_command_params(const char* command);

FKDYN_API fkdyn_status fkdyn_request_new(const char* command, fkdyn_request** out);
/* Values are strings; they are parsed and validated by fkdyn_run. */
FKDYN_API fkdyn_status fkdyn_request_set(fkdyn_request* req, const char* name, const char* value);
FKDYN_API void fkdyn_request_free(fkdyn_request* req);

/* On FKDYN_OK and FKDYN_E_INCONCLUSIVE *out holds a result; otherwise *out is NULL. */
FKDYN_API fkdyn_status fkdyn_run(const fkdyn_request* req, fkdyn_result** out);
FKDYN_API const char* fkdyn_result_csv(const fkdyn_result* res);
/* Deterministic JSON: command, effective parameters and the summary record. */
FKDYN_API const char* fkdyn_result_json(const fkdyn_result* res);
FKDYN_API const char* fkdyn_result_line(const fkdyn_result* res);
FKDYN_API int fkdyn_result_inconclusive(const fkdyn_result* res);
FKDYN_API void fkdyn_result_free(fkdyn_result* res);

/* ---- boundary conditions ----------------------------------------------- */

typedef struct fkdyn_bc fkdyn_bc;

/* spec: "free", "wired", a JSON object, or a path to a JSON file. */
FKDYN_API fkdyn_status fkdyn_bc_parse(const char* spec, int n, int l, fkdyn_bc** out);
FKDYN_API int fkdyn_bc_is_realizable(const fkdyn_bc* bc);
FKDYN_API int fkdyn_bc_num_blocks(const fkdyn_bc* bc);
FKDYN_API int fkdyn_bc_localization(const fkdyn_bc* bc);
/* Caller frees with fkdyn_string_free. */
FKDYN_API fkdyn_status fkdyn_bc_to_json(const fkdyn_bc* bc, char** out);
FKDYN_API fkdyn_status fkdyn_bc_dual(const fkdyn_bc* bc, fkdyn_bc** out);
FKDYN_API void fkdyn_bc_free(fkdyn_bc* bc);
FKDYN_API void fkdyn_string_free(char* s);

/* ---- exact chains -------------------------------------------------------- */

/* Spectral gap of the heat-bath FK dynamics on the full n x l rectangle. */
FKDYN_API fkdyn_status fkdyn_exact_gap(int n, int l, const fkdyn_bc* bc, double p, double q, double* gap);

#ifdef __cplusplus
}
#endif

#endif
