//! Block-numbered environment around a single vault.
//!
//! Each submission occupies its own block. Idle blocks are modelled with
//! [`Chain::advance`] and appear in traces only as gaps between block
//! numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ledger::BlockNumber;
use crate::uint::WideSum;
use crate::vault::{Action, ActionOutcome, VaultConfig, VaultState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(with = "decimal_block")]
    pub block: BlockNumber,
    pub sender: Address,
    pub action: Action,
    pub outcome: ActionOutcome,
}

mod decimal_block {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(block: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(block)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace(pub Vec<TraceRecord>);

impl Trace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.0 {
            let line = serde_json::to_string(rec).expect("trace records serialize");
            writeln!(out, "{line}").expect("writing to a String");
        }
        out
    }

    /// Parses a line-delimited trace, skipping blank lines. Block numbers
    /// must strictly increase.
    pub fn from_jsonl(text: &str) -> Result<Trace> {
        let mut records = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: TraceRecord =
                serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            records.push(rec);
        }
        let trace = Trace(records);
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.0.windows(2) {
            if pair[1].block <= pair[0].block {
                return Err(Error::Parse(format!(
                    "block numbers must strictly increase ({} then {})",
                    pair[0].block, pair[1].block
                )));
            }
        }
        if let Some(first) = self.0.first() {
            if first.block == 0 {
                return Err(Error::Parse("block 0 is reserved for construction".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub config: VaultConfig,
    pub current_block: BlockNumber,
    pub vault: VaultState,
    /// External accounts credited by withdrawals.
    pub balances: BTreeMap<Address, WideSum>,
    /// Total ever deposited into the vault.
    pub deposited: WideSum,
    pub trace: Trace,
}

impl Chain {
    pub fn new(config: VaultConfig) -> Result<Chain> {
        let vault = VaultState::new(&config)?;
        Ok(Chain {
            config,
            current_block: 0,
            vault,
            balances: BTreeMap::new(),
            deposited: WideSum::default(),
            trace: Trace::default(),
        })
    }

    /// Builds a chain around an existing (possibly mutated) vault.
    pub fn with_vault(config: VaultConfig, vault: VaultState) -> Chain {
        Chain {
            config,
            current_block: 0,
            vault,
            balances: BTreeMap::new(),
            deposited: WideSum::default(),
            trace: Trace::default(),
        }
    }

    /// Executes `action` in the next block and records it.
    pub fn submit(&mut self, sender: Address, action: Action) -> ActionOutcome {
        self.current_block += 1;
        let outcome = self.vault.apply_in_place(self.current_block, sender, &action);
        if let ActionOutcome::Applied(fx) = &outcome {
            self.deposited.add(fx.deposited);
            if let Some(credit) = &fx.credited {
                self.balances.entry(credit.address).or_default().add(credit.amount);
            }
        }
        self.trace.0.push(TraceRecord {
            block: self.current_block,
            sender,
            action,
            outcome: outcome.clone(),
        });
        outcome
    }

    /// Lets `blocks` empty blocks pass.
    pub fn advance(&mut self, blocks: u64) -> Result<()> {
        if blocks == 0 {
            return Err(Error::InvalidConfig("advance needs at least one block".into()));
        }
        self.current_block = self
            .current_block
            .checked_add(blocks)
            .ok_or_else(|| Error::InvalidConfig("block counter overflow".into()))?;
        Ok(())
    }

    /// Total credited to `address` by withdrawals.
    pub fn balance(&self, address: &Address) -> WideSum {
        self.balances.get(address).copied().unwrap_or_default()
    }

    /// True iff everything deposited is either still in the vault or was
    /// credited to an external account.
    pub fn is_conserved(&self) -> bool {
        let mut held = WideSum::from(self.vault.funds);
        for b in self.balances.values() {
            held.add(b.low);
            held.carries += b.carries;
        }
        held == self.deposited
    }

    /// Rebuilds a chain by resubmitting every record of `trace`, checking
    /// that each outcome matches the recorded one.
    pub fn replay(config: &VaultConfig, trace: &Trace) -> Result<Chain> {
        Chain::replay_onto(Chain::new(config.clone())?, trace)
    }

    pub fn replay_onto(mut chain: Chain, trace: &Trace) -> Result<Chain> {
        trace.validate()?;
        for (index, rec) in trace.0.iter().enumerate() {
            if rec.block <= chain.current_block {
                return Err(Error::Parse(format!(
                    "record {index} at block {} is not after block {}",
                    rec.block, chain.current_block
                )));
            }
            let gap = rec.block - chain.current_block - 1;
            if gap > 0 {
                chain.advance(gap)?;
            }
            let outcome = chain.submit(rec.sender, rec.action.clone());
            if outcome != rec.outcome {
                return Err(Error::ReplayDivergence {
                    index,
                    block: rec.block,
                    recorded: serde_json::to_string(&rec.outcome)?,
                    replayed: serde_json::to_string(&outcome)?,
                });
            }
        }
        Ok(chain)
    }

    pub fn to_snapshot(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("chain serializes");
        s.push('\n');
        s
    }

    pub fn from_snapshot(text: &str) -> Result<Chain> {
        let chain: Chain = serde_json::from_str(text)?;
        chain.trace.validate()?;
        if chain.trace.0.last().is_some_and(|r| r.block > chain.current_block) {
            return Err(Error::Parse("trace runs past the current block".into()));
        }
        Ok(chain)
    }
}
