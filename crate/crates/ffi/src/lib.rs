//! C ABI for `qkd_reconcile`.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`QkdrStatus`]; on anything other than
//!   `QKDR_STATUS_OK` a message is available from [`qkdr_last_error_message`]
//!   on the same thread.
//! - Bit strings cross the boundary as arrays of `uint8_t`, one bit (0 or 1)
//!   per element.
//! - Handles ([`QkdrPool`], [`QkdrBlockResult`]) are opaque, created by this
//!   library and released with their `_free` function. A pool may be shared
//!   across threads for reading.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use qkd_reconcile::decoder::DecoderConfig;
use qkd_reconcile::ldpc::CodePool;
use qkd_reconcile::rate_adapt::select_rate;
use qkd_reconcile::session::{run_block, BlockConfig, BlockRun, VerificationBranch};
use qkd_reconcile::verify::{
    collision_bound, expected_leakage, poly_hash, verification_fail_bound, FieldParams, HashKey,
};
use qkd_reconcile::ldpc::CodeRate;
use qkd_reconcile::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdrStatus {
    Ok = 0,
    NullPointer = 1,
    /// A value outside its mathematical domain.
    Domain = 2,
    /// A violated precondition: wrong lengths, bad configuration.
    Contract = 3,
    Construction = 4,
    Parse = 5,
    QberTooHigh = 6,
    SubBlockExhausted = 7,
    Protocol = 8,
    Wire = 9,
    Io = 10,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 11,
    /// An internal panic was caught at the boundary.
    Internal = 12,
    /// The output buffer is too small; the required size was written.
    BufferTooSmall = 13,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("NULs removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> QkdrStatus {
    match e {
        Error::Domain(_) => QkdrStatus::Domain,
        Error::Contract(_) => QkdrStatus::Contract,
        Error::Construction(_) => QkdrStatus::Construction,
        Error::Parse { .. } => QkdrStatus::Parse,
        Error::QberTooHigh { .. } => QkdrStatus::QberTooHigh,
        Error::SubBlockExhausted { .. } => QkdrStatus::SubBlockExhausted,
        Error::Protocol(_) => QkdrStatus::Protocol,
        Error::Wire(_) => QkdrStatus::Wire,
        Error::Io { .. } => QkdrStatus::Io,
    }
}

struct Failure(QkdrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QkdrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QkdrStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QkdrStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            QkdrStatus::Internal
        }
    }
}

unsafe fn bits<'a>(data: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|e| Failure(QkdrStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qkdr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qkdr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Pool of nine parity-check matrices (rates 0.90 down to 0.50).
pub struct QkdrPool(CodePool);

/// PEG pool for frame length `n_fr`. Matrices are built on first use.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn qkdr_pool_generate(n_fr: usize, seed: u64, out: *mut *mut QkdrPool) -> QkdrStatus {
    guard(|| {
        let pool = CodePool::generate(n_fr, seed)?;
        write_out(out, Box::into_raw(Box::new(QkdrPool(pool))))
    })
}

/// Loads `r0.90.alist` … `r0.50.alist` from `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_pool_load(dir: *const c_char, out: *mut *mut QkdrPool) -> QkdrStatus {
    guard(|| {
        let pool = CodePool::load_dir(path(dir)?)?;
        write_out(out, Box::into_raw(Box::new(QkdrPool(pool))))
    })
}

/// Writes all nine matrices to `dir` in alist format, generating any not yet built.
///
/// # Safety
/// `pool` must come from this library; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn qkdr_pool_save(pool: *const QkdrPool, dir: *const c_char) -> QkdrStatus {
    guard(|| {
        let pool = pool.as_ref().ok_or_else(|| null("pool"))?;
        pool.0.save_dir(path(dir)?)?;
        Ok(())
    })
}

/// Frame length of the pool, or 0 for a NULL pool.
///
/// # Safety
/// `pool` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn qkdr_pool_n_fr(pool: *const QkdrPool) -> usize {
    pool.as_ref().map_or(0, |p| p.0.n_fr())
}

/// # Safety
/// `pool` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkdr_pool_free(pool: *mut QkdrPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Parameters of one block. Start from [`qkdr_block_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QkdrBlockConfig {
    pub n_fr: usize,
    pub n_sub_blocks: usize,
    pub q_est: f64,
    /// Prime modulus of the verification hash.
    pub prime: u64,
    pub max_iterations: usize,
    pub llr_clamp: f64,
    pub known_llr_magnitude: f64,
    pub max_extra_rounds: usize,
    pub session_seed: u64,
}

impl QkdrBlockConfig {
    fn to_config(self) -> Result<BlockConfig, Failure> {
        Ok(BlockConfig {
            n_fr: self.n_fr,
            n_sub_blocks: self.n_sub_blocks,
            q_est: self.q_est,
            field: FieldParams::new(self.prime)?,
            decoder: DecoderConfig {
                max_iterations: self.max_iterations,
                llr_clamp: self.llr_clamp,
                known_llr_magnitude: self.known_llr_magnitude,
            },
            max_extra_rounds: self.max_extra_rounds,
            session_seed: self.session_seed,
        })
    }
}

/// Library defaults for the given geometry and QBER estimate.
#[no_mangle]
pub extern "C" fn qkdr_block_config_default(n_fr: usize, n_sub_blocks: usize, q_est: f64) -> QkdrBlockConfig {
    let c = BlockConfig::new(n_fr, n_sub_blocks, q_est);
    QkdrBlockConfig {
        n_fr,
        n_sub_blocks,
        q_est,
        prime: c.field.p(),
        max_iterations: c.decoder.max_iterations,
        llr_clamp: c.decoder.llr_clamp,
        known_llr_magnitude: c.decoder.known_llr_magnitude,
        max_extra_rounds: c.max_extra_rounds,
        session_seed: c.session_seed,
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdrRole {
    Alice = 0,
    Bob = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdrBranch {
    Ack = 0,
    Nack = 1,
    Skipped = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QkdrLeakage {
    pub syndrome_bits: usize,
    pub disclosed_bits: usize,
    pub verification_hash_bits: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QkdrBlockSummary {
    /// Code rate in twentieths (18 = 0.90).
    pub rate_twentieths: u8,
    pub n_shortened: usize,
    pub n_punctured: usize,
    pub verified_key_length: usize,
    pub sbec_failed: usize,
    pub verification_discarded: usize,
    pub effective_sub_blocks: usize,
    pub branch: QkdrBranch,
    pub leakage: QkdrLeakage,
}

/// Outcome of one reconciled block.
pub struct QkdrBlockResult {
    run: BlockRun,
    report_json: CString,
}

/// Reconciles one block. `alice` and `bob` each hold `len = N_sb · 0.95 · n_fr` bits.
///
/// # Safety
/// `pool` and `config` must be valid; `alice` and `bob` must point to `len`
/// readable bytes; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_run_block(
    pool: *const QkdrPool,
    config: *const QkdrBlockConfig,
    alice: *const u8,
    bob: *const u8,
    len: usize,
    out: *mut *mut QkdrBlockResult,
) -> QkdrStatus {
    guard(|| {
        let pool = pool.as_ref().ok_or_else(|| null("pool"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?.to_config()?;
        let alice = bits(alice, len, "alice")?;
        let bob = bits(bob, len, "bob")?;
        let run = run_block(alice, bob, &config, &pool.0)?;
        let json = serde_json::to_string(&run.report).map_err(|e| Failure(QkdrStatus::Internal, e.to_string()))?;
        let report_json = CString::new(json).map_err(|e| Failure(QkdrStatus::Internal, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(QkdrBlockResult { run, report_json })))
    })
}

/// # Safety
/// `result` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qkdr_block_summary(result: *const QkdrBlockResult, out: *mut QkdrBlockSummary) -> QkdrStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.run.report;
        let summary = QkdrBlockSummary {
            rate_twentieths: r.rate.twentieths(),
            n_shortened: r.n_shortened,
            n_punctured: r.n_punctured,
            verified_key_length: r.verified_key_length,
            sbec_failed: r.sbec_failed,
            verification_discarded: r.verification_discarded,
            effective_sub_blocks: r.effective_sub_blocks,
            branch: match r.verification_branch {
                VerificationBranch::Ack => QkdrBranch::Ack,
                VerificationBranch::Nack => QkdrBranch::Nack,
                VerificationBranch::Skipped => QkdrBranch::Skipped,
            },
            leakage: QkdrLeakage {
                syndrome_bits: r.ledger.syndrome_bits,
                disclosed_bits: r.ledger.disclosed_bits,
                verification_hash_bits: r.ledger.verification_hash_bits,
            },
        };
        write_out(out, summary)
    })
}

/// Copies one party's verified key into `buf`. `*len` holds the capacity on
/// entry and the key length on return; a short buffer yields
/// `QKDR_STATUS_BUFFER_TOO_SMALL` with nothing copied.
///
/// # Safety
/// `result` and `len` must be valid; `buf` must have `*len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qkdr_block_key(
    result: *const QkdrBlockResult,
    role: QkdrRole,
    buf: *mut u8,
    len: *mut usize,
) -> QkdrStatus {
    guard(|| {
        let run = &result.as_ref().ok_or_else(|| null("result"))?.run;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let key = match role {
            QkdrRole::Alice => &run.alice_key,
            QkdrRole::Bob => &run.bob_key,
        };
        let capacity = *len;
        *len = key.len();
        if capacity < key.len() {
            return Err(Failure(
                QkdrStatus::BufferTooSmall,
                format!("key of {} bits, buffer of {capacity}", key.len()),
            ));
        }
        if !key.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(key.as_ptr(), buf, key.len());
        }
        Ok(())
    })
}

/// The block report as a JSON object, owned by `result`. NULL for a NULL result.
///
/// # Safety
/// `result` must be NULL or valid; the string dies with `result`.
#[no_mangle]
pub unsafe extern "C" fn qkdr_block_report_json(result: *const QkdrBlockResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.report_json.as_ptr())
}

/// # Safety
/// `result` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkdr_block_free(result: *mut QkdrBlockResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QkdrRateChoice {
    pub rate_twentieths: u8,
    pub n_shortened: usize,
    pub n_punctured: usize,
}

/// Highest pool rate whose shortened count fits the frame extension.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_select_rate(q_est: f64, n_fr: usize, out: *mut QkdrRateChoice) -> QkdrStatus {
    guard(|| {
        let c = select_rate(q_est, n_fr, &CodeRate::POOL)?;
        write_out(
            out,
            QkdrRateChoice {
                rate_twentieths: c.rate.twentieths(),
                n_shortened: c.n_shortened,
                n_punctured: c.n_punctured,
            },
        )
    })
}

/// Polynomial hash of `len` bits under `key` modulo the prime `prime`.
///
/// # Safety
/// `data` must point to `len` readable bytes; `tag` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qkdr_poly_hash(
    data: *const u8,
    len: usize,
    key: u64,
    prime: u64,
    tag: *mut u64,
) -> QkdrStatus {
    guard(|| {
        let field = FieldParams::new(prime)?;
        let x = bits(data, len, "data")?;
        let t = poly_hash(x, HashKey::new(key, &field)?, &field)?;
        write_out(tag, t.value())
    })
}

/// Collision bound of the hash family for `len`-bit inputs.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_collision_bound(len: usize, prime: u64, out: *mut f64) -> QkdrStatus {
    guard(|| {
        let field = FieldParams::new(prime)?;
        write_out(out, collision_bound(len, &field))
    })
}

/// Bound on accepting an erroneous sub-block in the two-phase verification.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_verification_fail_bound(
    n_b: usize,
    n_sb: usize,
    n_sub_blocks: usize,
    prime: u64,
    out: *mut f64,
) -> QkdrStatus {
    guard(|| {
        let field = FieldParams::new(prime)?;
        write_out(out, verification_fail_bound(n_b, n_sb, n_sub_blocks, &field)?)
    })
}

/// Expected verification leakage in bits at sub-block frame error rate `fer`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn qkdr_expected_leakage(
    fer: f64,
    n_sub_blocks: usize,
    tag_bits: usize,
    out: *mut f64,
) -> QkdrStatus {
    guard(|| write_out(out, expected_leakage(fer, n_sub_blocks, tag_bits)?))
}
