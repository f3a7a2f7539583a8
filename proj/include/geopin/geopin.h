/*
 * geopin C API.
 *
 * Every call returns a geopin_status. On failure, geopin_last_error() holds
 * a message for the calling thread until its next failing call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with geopin_free_string(). Handles are opaque; a const handle may
 * be shared between threads.
 */
#ifndef GEOPIN_GEOPIN_H
#define GEOPIN_GEOPIN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GEOPIN_API __declspec(dllexport)
#else
#define GEOPIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum geopin_status {
  GEOPIN_OK = 0,
  GEOPIN_E_INVALID_ARGUMENT,
  GEOPIN_E_COINCIDENT_POINTS,
  GEOPIN_E_POLE_DEGENERATE,
  GEOPIN_E_DISTANCE_OUT_OF_RANGE,
  GEOPIN_E_INVALID_PIXEL,
  GEOPIN_E_VERTICAL_RAY,
  GEOPIN_E_OUT_OF_PROJECTION_DOMAIN,
  GEOPIN_E_PIXEL_OUT_OF_BOUNDS,
  GEOPIN_E_FTHETA_INVERSION_FAILURE,
  GEOPIN_E_BEHIND_CAMERA,
  GEOPIN_E_OUTSIDE_FIELD_OF_VIEW,
  GEOPIN_E_ABOVE_HORIZON,
  GEOPIN_E_NEGATIVE_HEIGHT,
  GEOPIN_E_OUT_OF_TRACK,
  GEOPIN_E_MISSING_HEADING,
  GEOPIN_E_STATIONARY_AMBIGUOUS,
  GEOPIN_E_PARSE_ERROR,
  GEOPIN_E_DANGLING_REFERENCE,
  GEOPIN_E_IO_ERROR,
  GEOPIN_E_HTTP_ERROR,
  GEOPIN_E_SCHEMA_DRIFT,
  GEOPIN_E_EMPTY_SESSION,
  GEOPIN_E_INVALID_SPEC,
  /* A JSON request body was malformed or lacked a field. */
  GEOPIN_E_BAD_REQUEST,
  GEOPIN_E_INTERNAL
} geopin_status;

typedef struct geopin_session geopin_session;
typedef struct geopin_report geopin_report;

/* Stable error name, e.g. "AboveHorizon"; "Ok" for GEOPIN_OK. */
GEOPIN_API const char* geopin_status_name(geopin_status status);
GEOPIN_API const char* geopin_last_error(void);
GEOPIN_API void geopin_free_string(char* s);

/* ---- geodesy (spherical radius in metres; pass 0 for the default) ---- */

GEOPIN_API geopin_status geopin_haversine_distance(double lat1, double lon1, double lat2,
                                                   double lon2, double radius_m, double* out_m);
GEOPIN_API geopin_status geopin_initial_bearing(double lat1, double lon1, double lat2,
                                                double lon2, double* out_deg);
GEOPIN_API geopin_status geopin_inverse_haversine(double lat, double lon, double distance_m,
                                                  double bearing_deg, double radius_m,
                                                  double* out_lat, double* out_lon);
/* WGS84 ellipsoidal distance; *out_fallback is set to 1 when the spherical
 * distance was substituted for a non-converging pair. */
GEOPIN_API geopin_status geopin_geodesic_distance(double lat1, double lon1, double lat2,
                                                  double lon2, double* out_m, int* out_fallback);
GEOPIN_API geopin_status geopin_wgs84_to_utm33(double lat, double lon, double* out_easting,
                                               double* out_northing);
GEOPIN_API geopin_status geopin_utm33_to_wgs84(double easting, double northing, double* out_lat,
                                               double* out_lon);

/* ---- sessions ---- */

GEOPIN_API geopin_status geopin_session_load(const char* manifest_path, geopin_session** out);
GEOPIN_API void geopin_session_free(geopin_session* session);
/* New session with options overridden by the (partial) options JSON object,
 * e.g. {"heading_mode":"ray"}. */
GEOPIN_API geopin_status geopin_session_with_options(const geopin_session* session,
                                                     const char* options_json,
                                                     geopin_session** out);
/* New session with one more annotation {camera_id, t, px, py, target_id}.
 * The annotation is validated; nothing is written to disk. */
GEOPIN_API geopin_status geopin_session_with_annotation(const geopin_session* session,
                                                        const char* annotation_json,
                                                        geopin_session** out);
/* Appends the annotation (same JSON shape) to the session's annotation CSV.
 * Callers serialize concurrent appends. */
GEOPIN_API geopin_status geopin_session_append_annotation_file(const geopin_session* session,
                                                               const char* annotation_json);
/* {cameras, track:{start_t,end_t,fixes,long_gaps}, ground_truth, annotations,
 *  annotation_count, options, metadata} */
GEOPIN_API geopin_status geopin_session_info_json(const geopin_session* session, char** out_json);
GEOPIN_API geopin_status geopin_session_save(const geopin_session* session, const char* dir);

/* ---- pipeline ---- */

/* Request {camera_id, t, px, py, target_id?}; returns the estimate JSON. */
GEOPIN_API geopin_status geopin_geolocate_json(const geopin_session* session,
                                               const char* request_json, char** out_json);
GEOPIN_API geopin_status geopin_evaluate(const geopin_session* session, geopin_report** out);
GEOPIN_API void geopin_report_free(geopin_report* report);
GEOPIN_API size_t geopin_report_row_count(const geopin_report* report);
GEOPIN_API size_t geopin_report_failure_count(const geopin_report* report);
GEOPIN_API geopin_status geopin_report_json(const geopin_report* report, char** out_json);
/* format: "csv" or "json". */
GEOPIN_API geopin_status geopin_report_export(const geopin_report* report, const char* format,
                                              const char* path);

/* ---- synthetic scenes ---- */

/* Generates a session from a scenario JSON file into out_dir. seed (nullable)
 * overrides the scenario's seed. Returns
 * {manifest, fixes, annotations, targets, warnings, seed}. */
GEOPIN_API geopin_status geopin_synth_generate(const char* spec_path, const char* out_dir,
                                               const uint64_t* seed, char** out_json);
/* Monte-Carlo over `trials` seeded runs. max_true_distance_m <= 0 means no
 * distance cut. options_json (nullable) overrides the scenario's session
 * options. */
GEOPIN_API geopin_status geopin_monte_carlo(const char* spec_path, uint64_t trials,
                                            double max_true_distance_m,
                                            const char* options_json, char** out_json);

/* ---- road database ---- */

/* Traffic signs inside a UTM33 box as ground-truth CSV text (source=nvdb).
 * config_path may be NULL; GEOPIN_NVDB_URL overrides it. */
GEOPIN_API geopin_status geopin_nvdb_fetch_signs(double min_easting, double min_northing,
                                                 double max_easting, double max_northing,
                                                 const char* config_path, char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* GEOPIN_GEOPIN_H */
