/* shmvdr - spherical-harmonic-domain multi-output MVDR enhancement lab.
 *
 * C interface to the simulation / enhancement / evaluation pipeline. All
 * functions returning shmvdr_status leave a human-readable message in
 * shmvdr_last_error() (thread-local) on failure. Strings returned through
 * char** parameters are heap-allocated; release them with shmvdr_string_free.
 */
#ifndef SHMVDR_H
#define SHMVDR_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shmvdr_status {
  SHMVDR_OK = 0,
  SHMVDR_ERR_INVALID_ARGUMENT = 1, /* bad parameter or geometry */
  SHMVDR_ERR_CONFIG = 2,           /* configuration rejected */
  SHMVDR_ERR_IO = 3,               /* file not found / unreadable / unwritable */
  SHMVDR_ERR_NUMERIC = 4,          /* degenerate or unfactorizable problem */
  SHMVDR_ERR_INTERNAL = 5
} shmvdr_status;

/* Opaque experiment handle: configuration plus the summary of its last run. */
typedef struct shmvdr_experiment shmvdr_experiment;

const char* shmvdr_version(void);
const char* shmvdr_status_name(shmvdr_status status);
const char* shmvdr_last_error(void);

/* Construction. Presets: "paper-default". JSON configs are documented in the
 * project README; omitted fields inherit the preset defaults. */
shmvdr_status shmvdr_experiment_preset(const char* name, shmvdr_experiment** out);
shmvdr_status shmvdr_experiment_from_file(const char* path, shmvdr_experiment** out);
shmvdr_status shmvdr_experiment_from_json(const char* json_text, shmvdr_experiment** out);
void shmvdr_experiment_free(shmvdr_experiment* experiment);

/* Dotted-path configuration override, e.g. ("scene.room.t60", "0.4"),
 * ("method", "both"), ("sweep.t60", "[0,0.2,0.4]"). */
shmvdr_status shmvdr_experiment_set(shmvdr_experiment* experiment, const char* key,
                                    const char* value);

/* Resolved configuration as JSON text. */
shmvdr_status shmvdr_experiment_config(const shmvdr_experiment* experiment, char** out_json);

/* Full pipeline: simulate -> transform -> enhance -> evaluate; writes WAVs,
 * coefficient containers, CSV reports and a run manifest under out_dir. */
shmvdr_status shmvdr_experiment_run(shmvdr_experiment* experiment, const char* out_dir);

/* Aggregate metrics of the last run as JSON text. */
shmvdr_status shmvdr_experiment_summary(const shmvdr_experiment* experiment, char** out_json);

/* Staged pipeline. simulate writes WAVs + RIRs + the resolved spec; enhance
 * consumes a simulation directory and writes per-method outputs; evaluate
 * consumes both and writes metric CSVs. */
shmvdr_status shmvdr_experiment_simulate(const shmvdr_experiment* experiment, const char* out_dir);
shmvdr_status shmvdr_enhance(const char* sim_dir, const char* method, const char* out_dir);
shmvdr_status shmvdr_evaluate(const char* enh_dir, const char* sim_dir, const char* out_dir);

/* Reproduction targets on the paper-default preset: "fig2", "fig3", "table1",
 * "table2". threads = 0 picks the hardware concurrency. */
shmvdr_status shmvdr_reproduce(const char* target, const char* out_dir, int threads);

void shmvdr_string_free(char* text);

/* Math utilities (also exercised by bindings):
 * - spherical Bessel function of the first kind j_n(x), NaN on bad input;
 * - orthonormal complex spherical harmonic (Condon-Shortley phase);
 * - SH truncation order ceil(k r) for a frequency, -1 on bad input. */
double shmvdr_sph_bessel_j(int n, double x);
shmvdr_status shmvdr_sph_harmonic(int n, int m, double theta, double phi, double* out_re,
                                  double* out_im);
int shmvdr_max_order(double frequency_hz, double speed_of_sound, double array_radius);

#ifdef __cplusplus
}
#endif

#endif /* SHMVDR_H */
