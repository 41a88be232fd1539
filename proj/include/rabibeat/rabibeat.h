/* rabibeat C API.
 *
 * Every function returns an rb_status; on failure a message describing the
 * error (with the offending config key or file line where known) is
 * available from rb_last_error() on the calling thread until the next call.
 * Handles are opaque and must be released with their *_free function.
 * Strings returned through char** are owned by the caller: rb_string_free.
 * Frequencies are cyclic MHz, times microseconds.
 */
#ifndef RABIBEAT_H
#define RABIBEAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(RB_BUILDING_LIBRARY)
#define RB_API __attribute__((visibility("default")))
#else
#define RB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
  RB_OK = 0,
  RB_ERR_INVALID = 1,  /* bad argument (null pointer, out-of-domain value) */
  RB_ERR_CONFIG = 2,   /* config failed schema or physics validation */
  RB_ERR_PARSE = 3,    /* malformed input file */
  RB_ERR_RANGE = 4,    /* value outside a model's domain (e.g. field-map branch) */
  RB_ERR_IO = 5,       /* file could not be read or written */
  RB_ERR_INTERNAL = 6
} rb_status;

typedef struct rb_trace rb_trace;
typedef struct rb_beat_report rb_beat_report;
typedef struct rb_config rb_config;

typedef enum rb_beat_mode { RB_MODE_SINGLE = 0, RB_MODE_VTYPE = 1 } rb_beat_mode;

RB_API const char* rb_version(void);
RB_API const char* rb_last_error(void);
RB_API const char* rb_status_name(rb_status s);
RB_API void rb_string_free(char* s);

/* Closed-form relations. */
RB_API rb_status rb_rabi_frequency(double omega0, double delta, double* out);
RB_API rb_status rb_beat_shift_two_level(double omega0, double delta, double* out);
RB_API rb_status rb_beat_shift_vtype(double omega0_base, double delta, double* out);
RB_API rb_status rb_detuning_from_beat(double beat, double base, rb_beat_mode mode, double* out);
RB_API rb_status rb_vtype_population(double lambda, double delta, double t, double* out);
RB_API rb_status rb_drift_relation(double rel_power_change, double* linear, double* exact);
RB_API rb_status rb_resolution_estimate(double base, double n_oscillations, double* delta_cyclic,
                                        double* delta_angular);
RB_API rb_status rb_resolution_budget(double gap_um, double t1_rho_us, double base_rabi, double* n_osc,
                                      double* delta_x_nm);

/* Traces. */
RB_API rb_status rb_trace_load(const char* csv_path, rb_trace** out);
RB_API rb_status rb_trace_from_arrays(const double* times, const double* values, size_t n, rb_trace** out);
/* Simulates a rabi-single / rabi-vtype / drift config. */
RB_API rb_status rb_trace_simulate(const rb_config* cfg, uint64_t seed, int has_seed, rb_trace** out);
RB_API size_t rb_trace_length(const rb_trace* t);
/* Pointers stay valid until rb_trace_free. */
RB_API rb_status rb_trace_data(const rb_trace* t, const double** times, const double** values);
/* Writes <dir>/<stem>.csv and <dir>/<stem>.json. */
RB_API rb_status rb_trace_save(const rb_trace* t, const char* dir, const char* stem);
RB_API void rb_trace_free(rb_trace* t);

/* Beat analysis (Hann window, 4x zero padding). */
RB_API rb_status rb_analyze(const rb_trace* t, rb_beat_mode mode, rb_beat_report** out);
RB_API double rb_report_base_frequency(const rb_beat_report* r);
RB_API size_t rb_report_beat_count(const rb_beat_report* r);
RB_API double rb_report_beat(const rb_beat_report* r, size_t i);
RB_API size_t rb_report_detuning_count(const rb_beat_report* r);
RB_API double rb_report_detuning(const rb_beat_report* r, size_t i);
/* Full report as JSON text. */
RB_API rb_status rb_report_json(const rb_beat_report* r, char** json);
RB_API void rb_report_free(rb_beat_report* r);

/* Configuration. rb_config_load accepts a file path or a bundled preset name. */
RB_API rb_status rb_config_load(const char* path_or_preset, rb_config** out);
RB_API rb_status rb_config_parse(const char* text, rb_config** out);
RB_API rb_status rb_config_set(rb_config* cfg, const char* key, const char* value);
/* *value is NULL when the key is unset. */
RB_API rb_status rb_config_get(const rb_config* cfg, const char* key, char** value);
RB_API rb_status rb_config_clone(const rb_config* cfg, rb_config** out);
/* Experiment kind string, e.g. "rabi-single"; validates the whole config. */
RB_API rb_status rb_config_kind(const rb_config* cfg, char** kind);
/* Resolved warnings, newline separated (empty string when none). */
RB_API rb_status rb_config_warnings(const rb_config* cfg, char** text);
RB_API void rb_config_free(rb_config* cfg);

RB_API size_t rb_preset_count(void);
RB_API const char* rb_preset_name(size_t i);
RB_API rb_status rb_preset_text(const char* name, char** text);
RB_API rb_status rb_schema_text(char** text);

/* Runs "simulate" | "analyze" | "esr" | "imaging-demo" into out_dir.  The
 * optional summary is a JSON document listing the written files. */
RB_API rb_status rb_run(const rb_config* cfg, const char* command, const char* out_dir, uint64_t seed,
                        int has_seed, char** summary);

/* Per-run seed for sweep member `index` of a root seed. */
RB_API uint64_t rb_derive_seed(uint64_t root, uint64_t index);

#ifdef __cplusplus
}
#endif

#endif /* RABIBEAT_H */
