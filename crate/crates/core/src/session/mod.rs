//! One reconciliation block end to end: SBEC on every sub-block in
//! parallel, joint verification of the survivors, the wire format that
//! carries both, and the leakage ledger.

mod block;
mod ledger;
mod message;

pub use block::{
    run_block, run_verification, BlockConfig, BlockReport, BlockRun, SubBlockFate, Transcript,
    VerificationBranch, VerificationRun,
};
pub use ledger::{LeakageEvent, LeakageLedger};
pub use message::{decode_message, encode_message, MessageTag, ProtocolMessage, HEADER_LEN};
