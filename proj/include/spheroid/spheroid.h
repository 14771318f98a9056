#ifndef SPHEROID_SPHEROID_H
#define SPHEROID_SPHEROID_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPHEROID_BUILDING_LIBRARY)
#define SPH_API __attribute__((visibility("default")))
#else
#define SPH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sph_status {
    SPH_OK = 0,
    SPH_ERR_INVALID_ARGUMENT = 1,
    SPH_ERR_CONFIG = 2,
    SPH_ERR_IO = 3,
    SPH_ERR_FORMAT = 4,
    SPH_ERR_CONVERGENCE = 5,
    SPH_ERR_NUMERIC = 6,
    SPH_ERR_DOMAIN = 7,
    SPH_ERR_INSUFFICIENT_DATA = 8,
    SPH_ERR_INTERNAL = 9
} sph_status;

typedef struct sph_config sph_config;
typedef struct sph_stationary sph_stationary;
typedef struct sph_state sph_state;
typedef struct sph_report sph_report;

/* Message of the last failed call on this thread, "" after a success. */
SPH_API const char* sph_last_error(void);
/* Offending config key of the last ConfigError ("" otherwise). */
SPH_API const char* sph_error_key(void);
SPH_API const char* sph_status_name(sph_status status);
SPH_API const char* sph_version(void);

/* Configuration. */
SPH_API sph_status sph_config_default(sph_config** out);
SPH_API sph_status sph_config_load(const char* path, sph_config** out);
SPH_API sph_status sph_config_parse(const char* text, sph_config** out);
/* key is "section.key", value as written in a config file. */
SPH_API sph_status sph_config_set(sph_config* cfg, const char* key, const char* value);
/* Writes at most `size` bytes including the terminator; `needed` receives the
   full length including the terminator. buffer may be NULL when size is 0. */
SPH_API sph_status sph_config_serialize(const sph_config* cfg, char* buffer, size_t size,
                                        size_t* needed);
SPH_API sph_status sph_config_validate(const sph_config* cfg);
SPH_API uint32_t sph_config_hash(const sph_config* cfg);
SPH_API void sph_config_free(sph_config* cfg);

/* Commands: check-assumptions, stationary, simulate, stability, convergence,
   lemma31. Human-readable output goes to stdout; `exit_status` receives 0
   when the command's own checks passed and 1 otherwise. */
SPH_API sph_status sph_run(const sph_config* cfg, const char* command, int* exit_status);
/* Same, with the output captured in a buffer owned by the caller (see
   sph_config_serialize for the size protocol). Output beyond `size` is lost. */
SPH_API sph_status sph_run_captured(const sph_config* cfg, const char* command, int* exit_status,
                                    char* buffer, size_t size, size_t* needed);

/* Reports. */
SPH_API sph_status sph_check_assumptions(const sph_config* cfg, sph_report** out);
SPH_API sph_status sph_lemma31(const sph_config* cfg, sph_report** out);
SPH_API int sph_report_passed(const sph_report* report);
SPH_API const char* sph_report_text(const sph_report* report);
SPH_API void sph_report_free(sph_report* report);

/* Stationary solution on the configured grid. */
SPH_API sph_status sph_stationary_solve(const sph_config* cfg, sph_stationary** out);
SPH_API double sph_stationary_z(const sph_stationary* st);
SPH_API size_t sph_stationary_size(const sph_stationary* st);
/* name: "r", "c", "p" or "v"; copies sph_stationary_size values. */
SPH_API sph_status sph_stationary_field(const sph_stationary* st, const char* name, double* out);
SPH_API sph_status sph_stationary_residuals(const sph_stationary* st, double* v1_residual,
                                            double* transport_residual, double* z_direct);
SPH_API sph_status sph_stationary_state(const sph_stationary* st, sph_state** out);
SPH_API void sph_stationary_free(sph_stationary* st);

/* States and snapshots. */
SPH_API sph_status sph_state_load(const char* path, sph_state** out);
SPH_API sph_status sph_state_save(const sph_state* state, const sph_config* cfg, const char* path);
SPH_API sph_status sph_state_info(const sph_state* state, double* t, double* z, size_t* n);
/* name: "r", "c" or "p". */
SPH_API sph_status sph_state_field(const sph_state* state, const char* name, double* out);
SPH_API void sph_state_free(sph_state* state);

/* Least squares fit of log y = log C - mu t over the tail of the samples. */
SPH_API sph_status sph_fit_decay(const double* t, const double* y, size_t n, double tail_fraction,
                                 double floor, int min_points, double* mu, double* C);

#ifdef __cplusplus
}
#endif

#endif
