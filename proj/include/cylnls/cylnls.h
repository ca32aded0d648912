/* cylnls.h
 * C interface to the cylnls library. Handles are opaque; every call that can
 * fail returns a status code and leaves a message in cylnls_last_error(),
 * which is per thread and valid until the next failing call on that thread.
 * Strings returned through handles live as long as the handle.
 */
#ifndef CYLNLS_H
#define CYLNLS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CYLNLS_API __attribute__((visibility("default")))
#else
#define CYLNLS_API
#endif

/* Values 2, 3 and 4 are also the CLI exit codes. */
typedef enum cylnls_status {
  CYLNLS_OK = 0,
  CYLNLS_ERR_CONFIG = 2,
  CYLNLS_ERR_NUMERICAL = 3,
  CYLNLS_ERR_COMPLEXITY = 4,
  CYLNLS_ERR_IO = 5,
  CYLNLS_ERR_INVALID = 6, /* bad argument to the C API itself */
  CYLNLS_ERR_INTERNAL = 7
} cylnls_status;

typedef struct cylnls_config cylnls_config;
typedef struct cylnls_field cylnls_field;
typedef struct cylnls_result cylnls_result;

typedef struct cylnls_run_options {
  const char* out_dir; /* NULL: output.dir from the config */
  int has_seed;        /* nonzero: seed replaces the config seed */
  uint64_t seed;
  uint32_t jobs;       /* 0 is treated as 1 */
  int plots;           /* -1: from the config, 0 off, 1 on */
} cylnls_run_options;

CYLNLS_API const char* cylnls_version(void);
CYLNLS_API const char* cylnls_last_error(void);
CYLNLS_API const char* cylnls_status_name(cylnls_status s);

/* Configuration. Parsing validates the whole schema. */
CYLNLS_API cylnls_status cylnls_config_load(const char* path, cylnls_config** out);
CYLNLS_API cylnls_status cylnls_config_parse(const char* json_text, cylnls_config** out);
/* Resolved configuration as JSON text, owned by the handle. */
CYLNLS_API const char* cylnls_config_resolved(const cylnls_config* c);
CYLNLS_API uint64_t cylnls_config_seed(const cylnls_config* c);
CYLNLS_API void cylnls_config_free(cylnls_config* c);

/* Commands. */
CYLNLS_API void cylnls_run_options_init(cylnls_run_options* o);
CYLNLS_API size_t cylnls_command_count(void);
CYLNLS_API const char* cylnls_command_name(size_t i);
/* On failure *out is NULL; outputs written before the failure stay on disk
   with a manifest recording the status. */
CYLNLS_API cylnls_status cylnls_run_command(const char* command, const cylnls_config* c,
                                            const cylnls_run_options* opt, cylnls_result** out);
CYLNLS_API const char* cylnls_result_out_dir(const cylnls_result* r);
CYLNLS_API size_t cylnls_result_file_count(const cylnls_result* r);
CYLNLS_API const char* cylnls_result_file(const cylnls_result* r, size_t i);
CYLNLS_API size_t cylnls_result_warning_count(const cylnls_result* r);
CYLNLS_API const char* cylnls_result_warning(const cylnls_result* r, size_t i);
CYLNLS_API const char* cylnls_result_summary(const cylnls_result* r);
CYLNLS_API void cylnls_result_free(cylnls_result* r);

/* Fields: spectral coefficients on the centered lattice, row-major with eta
   outer. */
CYLNLS_API cylnls_status cylnls_field_initial(const cylnls_config* c, cylnls_field** out);
CYLNLS_API cylnls_status cylnls_field_load(const char* path, cylnls_field** out, double* time);
CYLNLS_API cylnls_status cylnls_field_save(const cylnls_field* f, const char* path, double time);
CYLNLS_API void cylnls_field_shape(const cylnls_field* f, double* lx, int* nx, int* ny);
/* Copies nx*ny interleaved (re, im) pairs into buf, which holds 2*nx*ny doubles. */
CYLNLS_API cylnls_status cylnls_field_coefficients(const cylnls_field* f, double* buf, size_t len);
CYLNLS_API double cylnls_field_mass(const cylnls_field* f);
CYLNLS_API double cylnls_field_energy(const cylnls_field* f);
CYLNLS_API void cylnls_field_free(cylnls_field* f);

#ifdef __cplusplus
}
#endif

#endif /* CYLNLS_H */
