//! Executable model of a two-tier, time-delayed vault contract.
//!
//! The crate provides the vault state machine and its request ledger, a
//! block-numbered chain simulator that records replayable traces, executable
//! checks for the vault's eighteen safety properties together with a bounded
//! exhaustive explorer, and canned attack and recovery scenarios.

pub mod address;
pub mod chain;
pub mod error;
pub mod generate;
pub mod ledger;
pub mod properties;
pub mod scenarios;
pub mod uint;
pub mod vault;

pub use address::Address;
pub use chain::{Chain, Trace, TraceRecord};
pub use error::{Error, Result};
pub use ledger::{Amount, ArithmeticMode, BlockNumber, Ledger, LedgerError, Request, RequestId};
pub use uint::U256;
pub use vault::{Action, ActionOutcome, Effects, Mutation, Rejection, Tier, VaultConfig, VaultState};
