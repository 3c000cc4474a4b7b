#ifndef QKD_RECONCILE_H
#define QKD_RECONCILE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QkdrStatus {
  QKDR_STATUS_OK = 0,
  QKDR_STATUS_NULL_POINTER = 1,
  // A value outside its mathematical domain.
  QKDR_STATUS_DOMAIN = 2,
  // A violated precondition: wrong lengths, bad configuration.
  QKDR_STATUS_CONTRACT = 3,
  QKDR_STATUS_CONSTRUCTION = 4,
  QKDR_STATUS_PARSE = 5,
  QKDR_STATUS_QBER_TOO_HIGH = 6,
  QKDR_STATUS_SUB_BLOCK_EXHAUSTED = 7,
  QKDR_STATUS_PROTOCOL = 8,
  QKDR_STATUS_WIRE = 9,
  QKDR_STATUS_IO = 10,
  // A string argument was not valid UTF-8.
  QKDR_STATUS_INVALID_UTF8 = 11,
  // An internal panic was caught at the boundary.
  QKDR_STATUS_INTERNAL = 12,
  // The output buffer is too small; the required size was written.
  QKDR_STATUS_BUFFER_TOO_SMALL = 13,
} QkdrStatus;

typedef enum QkdrBranch {
  QKDR_BRANCH_ACK = 0,
  QKDR_BRANCH_NACK = 1,
  QKDR_BRANCH_SKIPPED = 2,
} QkdrBranch;

typedef enum QkdrRole {
  QKDR_ROLE_ALICE = 0,
  QKDR_ROLE_BOB = 1,
} QkdrRole;

// Outcome of one reconciled block.
typedef struct QkdrBlockResult QkdrBlockResult;

// Pool of nine parity-check matrices (rates 0.90 down to 0.50).
typedef struct QkdrPool QkdrPool;

// Parameters of one block. Start from [`qkdr_block_config_default`].
typedef struct QkdrBlockConfig {
  size_t n_fr;
  size_t n_sub_blocks;
  double q_est;
  // Prime modulus of the verification hash.
  uint64_t prime;
  size_t max_iterations;
  double llr_clamp;
  double known_llr_magnitude;
  size_t max_extra_rounds;
  uint64_t session_seed;
} QkdrBlockConfig;

typedef struct QkdrLeakage {
  size_t syndrome_bits;
  size_t disclosed_bits;
  size_t verification_hash_bits;
} QkdrLeakage;

typedef struct QkdrBlockSummary {
  // Code rate in twentieths (18 = 0.90).
  uint8_t rate_twentieths;
  size_t n_shortened;
  size_t n_punctured;
  size_t verified_key_length;
  size_t sbec_failed;
  size_t verification_discarded;
  size_t effective_sub_blocks;
  enum QkdrBranch branch;
  struct QkdrLeakage leakage;
} QkdrBlockSummary;

typedef struct QkdrRateChoice {
  uint8_t rate_twentieths;
  size_t n_shortened;
  size_t n_punctured;
} QkdrRateChoice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *qkdr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qkdr_version(void);

// PEG pool for frame length `n_fr`. Matrices are built on first use.
//
// # Safety
// `out` must be valid for writing a pointer.
enum QkdrStatus qkdr_pool_generate(size_t n_fr, uint64_t seed, struct QkdrPool **out);

// Loads `r0.90.alist` … `r0.50.alist` from `dir`.
//
// # Safety
// `dir` must be a NUL-terminated string; `out` must be valid for writing.
enum QkdrStatus qkdr_pool_load(const char *dir, struct QkdrPool **out);

// Writes all nine matrices to `dir` in alist format, generating any not yet built.
//
// # Safety
// `pool` must come from this library; `dir` must be NUL-terminated.
enum QkdrStatus qkdr_pool_save(const struct QkdrPool *pool, const char *dir);

// Frame length of the pool, or 0 for a NULL pool.
//
// # Safety
// `pool` must be NULL or come from this library.
size_t qkdr_pool_n_fr(const struct QkdrPool *pool);

// # Safety
// `pool` must be NULL or come from this library, and not be used afterwards.
void qkdr_pool_free(struct QkdrPool *pool);

// Library defaults for the given geometry and QBER estimate.
struct QkdrBlockConfig qkdr_block_config_default(size_t n_fr, size_t n_sub_blocks, double q_est);

// Reconciles one block. `alice` and `bob` each hold `len = N_sb · 0.95 · n_fr` bits.
//
// # Safety
// `pool` and `config` must be valid; `alice` and `bob` must point to `len`
// readable bytes; `out` must be valid for writing.
enum QkdrStatus qkdr_run_block(const struct QkdrPool *pool,
                               const struct QkdrBlockConfig *config,
                               const uint8_t *alice,
                               const uint8_t *bob,
                               size_t len,
                               struct QkdrBlockResult **out);

// # Safety
// `result` and `out` must be valid.
enum QkdrStatus qkdr_block_summary(const struct QkdrBlockResult *result,
                                   struct QkdrBlockSummary *out);

// Copies one party's verified key into `buf`. `*len` holds the capacity on
// entry and the key length on return; a short buffer yields
// `QKDR_STATUS_BUFFER_TOO_SMALL` with nothing copied.
//
// # Safety
// `result` and `len` must be valid; `buf` must have `*len` writable bytes.
enum QkdrStatus qkdr_block_key(const struct QkdrBlockResult *result,
                               enum QkdrRole role,
                               uint8_t *buf,
                               size_t *len);

// The block report as a JSON object, owned by `result`. NULL for a NULL result.
//
// # Safety
// `result` must be NULL or valid; the string dies with `result`.
const char *qkdr_block_report_json(const struct QkdrBlockResult *result);

// # Safety
// `result` must be NULL or come from this library, and not be used afterwards.
void qkdr_block_free(struct QkdrBlockResult *result);

// Highest pool rate whose shortened count fits the frame extension.
//
// # Safety
// `out` must be valid for writing.
enum QkdrStatus qkdr_select_rate(double q_est, size_t n_fr, struct QkdrRateChoice *out);

// Polynomial hash of `len` bits under `key` modulo the prime `prime`.
//
// # Safety
// `data` must point to `len` readable bytes; `tag` must be valid.
enum QkdrStatus qkdr_poly_hash(const uint8_t *data,
                               size_t len,
                               uint64_t key,
                               uint64_t prime,
                               uint64_t *tag);

// Collision bound of the hash family for `len`-bit inputs.
//
// # Safety
// `out` must be valid for writing.
enum QkdrStatus qkdr_collision_bound(size_t len, uint64_t prime, double *out);

// Bound on accepting an erroneous sub-block in the two-phase verification.
//
// # Safety
// `out` must be valid for writing.
enum QkdrStatus qkdr_verification_fail_bound(size_t n_b,
                                             size_t n_sb,
                                             size_t n_sub_blocks,
                                             uint64_t prime,
                                             double *out);

// Expected verification leakage in bits at sub-block frame error rate `fer`.
//
// # Safety
// `out` must be valid for writing.
enum QkdrStatus qkdr_expected_leakage(double fer,
                                      size_t n_sub_blocks,
                                      size_t tag_bits,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKD_RECONCILE_H */
