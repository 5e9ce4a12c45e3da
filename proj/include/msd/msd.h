/* Copyright 2026 The MSD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the microsleep segmentation toolkit (libmsd).
 *
 * Every object is an opaque handle owned by the library and released with
 * its msd_*_free function. Functions return MSD_OK on success; on failure
 * they return an error code and msd_last_error() describes the problem for
 * the calling thread. Output handles are written only on success.
 */

#ifndef MSD_MSD_H_
#define MSD_MSD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MSD_API __declspec(dllexport)
#else
#define MSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msd_status {
  MSD_OK = 0,
  MSD_ERR_IO = 1,       /* missing/unreadable/unwritable file */
  MSD_ERR_FORMAT = 2,   /* malformed input file */
  MSD_ERR_ARGUMENT = 3, /* invalid parameter or configuration */
  MSD_ERR_STATE = 4,    /* operation out of order */
  MSD_ERR_INTERNAL = 5, /* library invariant violation */
} msd_status;

MSD_API const char* msd_status_name(msd_status status);
/* Description of the calling thread's most recent failure. */
MSD_API const char* msd_last_error(void);
MSD_API const char* msd_version(void);
/* Worker threads used by training and inference; 0 = hardware default.
 * Takes effect for pools created afterwards, so call it first. */
MSD_API void msd_set_threads(int n);

/* ------------------------------------------------------------------ *
 * Recordings                                                          *
 * ------------------------------------------------------------------ */

typedef struct msd_recording msd_recording;

/* Opens .edf or .crec (sniffed by content). */
MSD_API msd_status msd_recording_open(const char* path, msd_recording** out);
MSD_API msd_status msd_recording_save_cache(const msd_recording* rec,
                                            const char* path);
MSD_API msd_status msd_recording_save_edf(const msd_recording* rec,
                                          const char* path);
/* Fourier band-pass over every channel (bins outside [low, high] zeroed). */
MSD_API msd_status msd_recording_bandpass(const msd_recording* rec,
                                          double low_hz, double high_hz,
                                          msd_recording** out);
MSD_API msd_status msd_recording_select_channels(const msd_recording* rec,
                                                 const char* const* names,
                                                 size_t count,
                                                 msd_recording** out);
MSD_API void msd_recording_free(msd_recording* rec);

MSD_API const char* msd_recording_id(const msd_recording* rec);
MSD_API double msd_recording_rate_hz(const msd_recording* rec);
MSD_API int64_t msd_recording_duration(const msd_recording* rec);
MSD_API size_t msd_recording_channel_count(const msd_recording* rec);
MSD_API const char* msd_recording_channel_name(const msd_recording* rec,
                                               size_t index);
/* Copies one channel (microvolts) into `out`, which holds `capacity`
 * doubles; fails unless capacity >= duration. */
MSD_API msd_status msd_recording_copy_samples(const msd_recording* rec,
                                              size_t channel, double* out,
                                              int64_t capacity);

/* ------------------------------------------------------------------ *
 * Expert scorings                                                     *
 * ------------------------------------------------------------------ */

/* Class codes: 0 = W, 1 = MSE, 2 = MSEc, 3 = ED. */
typedef struct msd_labels msd_labels;

MSD_API msd_status msd_labels_load(const char* path, int64_t duration_samples,
                                   msd_labels** out);
MSD_API msd_status msd_labels_save(const msd_labels* labels, const char* path);
MSD_API int64_t msd_labels_size(const msd_labels* labels);
/* Class code at one sample, or -1 when out of range. */
MSD_API int msd_labels_at(const msd_labels* labels, int64_t index);
MSD_API void msd_labels_free(msd_labels* labels);

/* ------------------------------------------------------------------ *
 * Models                                                              *
 * ------------------------------------------------------------------ */

typedef struct msd_model msd_model;

/* Freshly initialized parameters for one architecture id
 * (2s, 4s, 8s, 16s, 32s, 16s_u, 16s_1c, cnn_lstm, 16s_e). */
MSD_API msd_status msd_model_create(const char* arch_id, uint64_t seed,
                                    msd_model** out);
MSD_API msd_status msd_model_load(const char* path, msd_model** out);
MSD_API msd_status msd_model_save(const msd_model* model, const char* path);
MSD_API const char* msd_model_arch(const msd_model* model);
MSD_API int msd_model_classes(const msd_model* model);
MSD_API int64_t msd_model_window_samples(const msd_model* model);
MSD_API void msd_model_free(msd_model* model);

/* ------------------------------------------------------------------ *
 * Training                                                            *
 * ------------------------------------------------------------------ */

typedef struct msd_train_options {
  const char* weighting;  /* "inverse", "uniform" or NULL for the
                           * architecture default */
  uint64_t seed;
  int iterations;         /* -1 = family default (3 CNN, 8 CNN-LSTM) */
  int64_t batch_size;     /* 0 = family default (200 CNN, 128 CNN-LSTM) */
  int64_t sequence_windows; /* 0 = default 200; CNN-LSTM only */
  double learning_rate;
  int clip;               /* -1 family default, 0 off, 1 on (CNN-LSTM only) */
  double clip_norm;
  double train_fraction;  /* patient-level split, defaults 0.70/0.15/0.15 */
  double val_fraction;
  double test_fraction;
  int validation_snapshots; /* per-iteration validation kappas in history */
} msd_train_options;

MSD_API void msd_train_options_init(msd_train_options* options);

/* Trains `arch_id` on the `<id>.edf|.crec` + `<id>.labels` pairs under
 * `data_dir` (raw EDF is band-pass conditioned on load). Writes
 * checkpoint_NNN.msdnet (000 = initialization), history.txt and split.txt
 * under `out_dir`. On success `final_model` (optional) receives the last
 * checkpoint. */
MSD_API msd_status msd_train(const char* data_dir, const char* arch_id,
                             const char* out_dir,
                             const msd_train_options* options,
                             msd_model** final_model);

/* ------------------------------------------------------------------ *
 * Dense prediction                                                    *
 * ------------------------------------------------------------------ */

typedef struct msd_prediction msd_prediction;

/* Labels every sample of a conditioned recording. `naive` forces the
 * per-window reference path for CNNs (the shared-computation engine is the
 * default); the CNN-LSTM always uses its sequence path. */
MSD_API msd_status msd_predict(const msd_model* model,
                               const msd_recording* conditioned, int naive,
                               msd_prediction** out);
/* Majority vote over consecutive intervals (100 samples = 0.5 s). */
MSD_API msd_status msd_prediction_coarsen(const msd_prediction* pred,
                                          int64_t interval_samples,
                                          msd_prediction** out);
MSD_API msd_status msd_prediction_save(const msd_prediction* pred,
                                       const char* path);
/* Applies the post-hoc duration criteria (MSE runs shorter than min_seconds
 * become wakefulness, longer than max_seconds are flagged) and writes the
 * episode list. */
MSD_API msd_status msd_prediction_save_episodes(const msd_prediction* pred,
                                                double min_seconds,
                                                double max_seconds,
                                                const char* path);
MSD_API int64_t msd_prediction_duration(const msd_prediction* pred);
MSD_API int msd_prediction_classes(const msd_prediction* pred);
MSD_API int64_t msd_prediction_resolution(const msd_prediction* pred);
MSD_API int msd_prediction_label(const msd_prediction* pred, int64_t index);
MSD_API double msd_prediction_prob(const msd_prediction* pred, int64_t index,
                                   int class_code);
MSD_API void msd_prediction_free(msd_prediction* pred);

/* ------------------------------------------------------------------ *
 * Evaluation                                                          *
 * ------------------------------------------------------------------ */

/* Scores every `<id>.pred` under pred_dir against `<id>.labels` under
 * label_dir on the concatenated recordings and writes the per-class
 * Cohen's-kappa report. */
MSD_API msd_status msd_evaluate_dirs(const char* pred_dir,
                                     const char* label_dir,
                                     const char* report_path);

/* Per-class kappa of two equal-length code sequences. */
MSD_API msd_status msd_cohen_kappa(const uint8_t* a, const uint8_t* b,
                                   int64_t length, double* out);

/* ------------------------------------------------------------------ *
 * Embedding                                                           *
 * ------------------------------------------------------------------ */

typedef struct msd_embed_options {
  int64_t stride;     /* feature tap every stride-th sample (default 100) */
  double perplexity;  /* default 30 */
  int iterations;     /* default 1000 */
  uint64_t seed;
} msd_embed_options;

MSD_API void msd_embed_options_init(msd_embed_options* options);

/* Extracts the 64-wide hidden representation of an embedding-enabled model
 * along the recording, projects it to 2D with exact t-SNE and writes
 * `x,y,label,sample_index` rows. `labels_path` may be NULL (all W). */
MSD_API msd_status msd_embed(const msd_model* model,
                             const msd_recording* conditioned,
                             const char* labels_path,
                             const msd_embed_options* options,
                             const char* out_path);

/* ------------------------------------------------------------------ *
 * Synthetic corpora                                                   *
 * ------------------------------------------------------------------ */

typedef struct msd_synth_options {
  int recordings;          /* default 4 */
  double duration_seconds; /* default 300 */
  double mse_fraction;     /* default 0.08 */
} msd_synth_options;

MSD_API void msd_synth_options_init(msd_synth_options* options);

/* Writes synthetic `synthNN.edf` + `synthNN.labels` pairs under out_dir. */
MSD_API msd_status msd_synth(const char* out_dir,
                             const msd_synth_options* options, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* MSD_MSD_H_ */
