//! Bounded exhaustive exploration of the vault's reachable states.
//!
//! Breadth-first over every move (one sender submitting one action, or an
//! empty block) up to `max_depth` moves. States are merged by a canonical
//! key in which time is relative to the current block, so two states that
//! differ only in when things happened collapse into one. Each visited
//! state keeps only its parent and the move that reached it; states are
//! rebuilt by replaying that path, which keeps memory at a few words per
//! state. Successors that violate a property are recorded and not expanded.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_state, check_transition, PropertyId, Violation};
use crate::address::Address;
use crate::chain::TraceRecord;
use crate::error::{Error, Result};
use crate::ledger::{Amount, ArithmeticMode, BlockNumber};
use crate::uint::U256;
use crate::vault::{Action, Mutation, VaultConfig, VaultState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreConfig {
    /// Universe size: tier-one, creator, `addresses - 3` outsiders, zero.
    pub addresses: usize,
    pub amount_cap: u64,
    pub max_depth: usize,
    pub delay: u64,
    pub max_ledger_size: usize,
    pub mode: ArithmeticMode,
    /// Upper bound on distinct states.
    pub budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    /// Finish the current depth and stop once any violation is seen.
    #[serde(default)]
    pub stop_at_first_violation: bool,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            addresses: 4,
            amount_cap: 3,
            max_depth: 6,
            delay: 2,
            max_ledger_size: 4,
            mode: ArithmeticMode::Fixed,
            budget: 4_000_000,
            mutation: None,
            stop_at_first_violation: false,
        }
    }
}

impl ExploreConfig {
    pub fn t1(&self) -> Address {
        Address::from_low_u64(0xa1)
    }

    pub fn creator(&self) -> Address {
        Address::from_low_u64(0xb2)
    }

    pub fn outsiders(&self) -> Vec<Address> {
        (0..self.addresses.saturating_sub(3) as u64)
            .map(|i| Address::from_low_u64(0xc3 + i))
            .collect()
    }

    /// Every universe address, zero last.
    pub fn universe(&self) -> Vec<Address> {
        let mut u = vec![self.t1(), self.creator()];
        u.extend(self.outsiders());
        u.push(Address::ZERO);
        u
    }

    pub fn vault_config(&self) -> VaultConfig {
        VaultConfig::new(self.delay, self.t1(), self.creator(), self.max_ledger_size, self.mode)
    }

    pub fn initial_state(&self) -> Result<VaultState> {
        self.validate()?;
        let state = VaultState::new(&self.vault_config())?;
        Ok(match self.mutation {
            Some(m) => state.with_mutation(m),
            None => state,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.addresses < 4 {
            return Err(Error::InvalidConfig(
                "the universe needs at least 4 addresses (tier one, creator, outsider, zero)".into(),
            ));
        }
        if self.amount_cap == 0 || self.delay == 0 || self.max_ledger_size == 0 || self.budget == 0 {
            return Err(Error::InvalidConfig(
                "amount cap, delay, ledger size and budget must be at least 1".into(),
            ));
        }
        if self.addresses > 64 || self.amount_cap > 64 {
            return Err(Error::InvalidConfig("universe and amount cap are limited to 64".into()));
        }
        Ok(())
    }

    /// Request amounts: 1..=cap plus the wrap-around values 2^256 - k.
    fn amounts(&self) -> Vec<Amount> {
        let small = (1..=self.amount_cap).map(U256::from_u64);
        let wrap = (1..=self.amount_cap).map(|k| U256::ZERO.wrapping_sub(U256::from_u64(k)));
        small.chain(wrap).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: PropertyId,
    pub description: String,
    pub holds: bool,
    /// Distinct violating transitions seen.
    pub violating_transitions: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortest_witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreReport {
    pub config: ExploreConfig,
    pub states_visited: usize,
    pub transitions: u64,
    /// Deepest level that was expanded.
    pub depth_reached: usize,
    pub verdicts: Vec<PropertyVerdict>,
    /// One shortest witness per violated property, ordered by witness
    /// length then trace encoding.
    pub violations: Vec<Violation>,
}

impl ExploreReport {
    pub fn holding(&self) -> usize {
        self.verdicts.iter().filter(|v| v.holds).count()
    }

    pub fn violated(&self) -> Vec<PropertyId> {
        self.verdicts.iter().filter(|v| !v.holds).map(|v| v.property).collect()
    }

    pub fn summary(&self) -> String {
        format!("{}/{} properties hold", self.holding(), self.verdicts.len())
    }
}

/// A visited state: reached from `parent` by one move at `block`.
struct Node {
    parent: u32,
    block: BlockNumber,
    step: Option<(Address, Action)>,
}

struct Successor {
    key: Vec<u8>,
    block: BlockNumber,
    step: Option<(Address, Action)>,
    violations: Vec<Violation>,
}

/// Canonical key: everything that can influence future moves, with time
/// expressed relative to `block`. Request ids are dropped (list order is
/// kept) and ages saturate once a request has matured.
fn canonical_key(state: &VaultState, block: BlockNumber) -> Vec<u8> {
    let mut k = Vec::with_capacity(96 + 56 * state.ledger.len());
    k.push(state.destroyed as u8);
    for limb in state.funds.limbs() {
        k.extend_from_slice(&limb.to_le_bytes());
    }
    k.extend_from_slice(&state.delay.to_le_bytes());
    k.extend_from_slice(&state.unlock.saturating_sub(block).to_le_bytes());
    for set in [&state.t1, &state.t2] {
        k.push(set.len() as u8);
        for a in set {
            k.extend_from_slice(a.as_bytes());
        }
    }
    k.push(state.ledger.len() as u8);
    for r in state.ledger.iter() {
        for limb in r.amount.limbs() {
            k.extend_from_slice(&limb.to_le_bytes());
        }
        k.extend_from_slice(r.recipient.as_bytes());
        k.extend_from_slice(r.initiator.as_bytes());
        let age = block.saturating_sub(r.creation).min(state.delay.saturating_add(1));
        k.extend_from_slice(&age.to_le_bytes());
    }
    k
}

struct Explorer<'a> {
    config: &'a ExploreConfig,
    initial: VaultState,
    senders: Vec<Address>,
    targets: Vec<Address>,
    recipients: Vec<Address>,
    amounts: Vec<Amount>,
}

impl Explorer<'_> {
    /// Every move from `state` when the next block is `block + 1`; `None`
    /// is the empty block.
    fn moves(&self, state: &VaultState, block: BlockNumber) -> Vec<Option<(Address, Action)>> {
        let next = block + 1;
        let mut actions = Vec::new();
        for amount in 1..=self.config.amount_cap {
            actions.push(Action::Deposit {
                amount: U256::from_u64(amount),
            });
        }
        for &amount in &self.amounts {
            for &recipient in &self.recipients {
                actions.push(Action::Request { amount, recipient });
            }
        }
        for r in state.ledger.iter() {
            actions.push(Action::Withdraw { id: r.id });
            actions.push(Action::CancelRequest { id: r.id });
            actions.push(Action::CancelSelfRequest { id: r.id });
        }
        actions.push(Action::CancelAllRequests);
        let horizon = self.config.max_depth as u64 + self.config.delay + 1;
        let mut locks = vec![next + 1, next + self.config.delay + 1, next + horizon];
        if state.unlock > 0 {
            locks.push(state.unlock - 1);
        }
        locks.sort_unstable();
        locks.dedup();
        actions.extend(locks.into_iter().map(|new_unlock| Action::Lock { new_unlock }));
        for &address in &self.targets {
            actions.push(Action::AddT1 { address });
            actions.push(Action::AddT2 { address });
            actions.push(Action::RemoveT2 { address });
        }
        actions.push(Action::Destroy {
            beneficiary: self.recipients[0],
        });

        let mut moves = Vec::with_capacity(1 + actions.len() * self.senders.len());
        moves.push(None);
        for &sender in &self.senders {
            for a in &actions {
                moves.push(Some((sender, a.clone())));
            }
        }
        moves
    }

    /// Rebuilds the state at `index` and the records that lead to it.
    fn replay(&self, nodes: &[Node], index: u32) -> (VaultState, BlockNumber, Vec<TraceRecord>) {
        let mut path = Vec::new();
        let mut i = index;
        while i != 0 {
            path.push(i);
            i = nodes[i as usize].parent;
        }
        let mut state = self.initial.clone();
        let mut block = 0;
        let mut records = Vec::new();
        for &i in path.iter().rev() {
            let node = &nodes[i as usize];
            block = node.block;
            if let Some((sender, action)) = &node.step {
                let outcome = state.apply_in_place(block, *sender, action);
                records.push(TraceRecord {
                    block,
                    sender: *sender,
                    action: action.clone(),
                    outcome,
                });
            }
        }
        (state, block, records)
    }

    fn expand(&self, nodes: &[Node], index: u32) -> Vec<Successor> {
        let (state, block, records) = self.replay(nodes, index);
        let next = block + 1;
        self.moves(&state, block)
            .into_iter()
            .map(|step| match step {
                None => Successor {
                    key: canonical_key(&state, next),
                    block: next,
                    step: None,
                    violations: Vec::new(),
                },
                Some((sender, action)) => {
                    let (post, outcome) = state.apply(next, sender, &action);
                    let mut violations = check_transition(&state, next, sender, &action, &post, &outcome);
                    violations.extend(check_state(&post));
                    if !violations.is_empty() {
                        let mut witness = records.clone();
                        witness.push(TraceRecord {
                            block: next,
                            sender,
                            action: action.clone(),
                            outcome,
                        });
                        for v in &mut violations {
                            v.witness = witness.clone();
                        }
                    }
                    Successor {
                        key: canonical_key(&post, next),
                        block: next,
                        step: Some((sender, action)),
                        violations,
                    }
                }
            })
            .collect()
    }
}

fn encode(witness: &[TraceRecord]) -> String {
    serde_json::to_string(witness).expect("trace records serialize")
}

/// Explores every move sequence of length up to `config.max_depth`.
pub fn explore(config: &ExploreConfig) -> Result<ExploreReport> {
    let initial = config.initial_state()?;
    let outsiders = config.outsiders();
    let explorer = Explorer {
        config,
        senders: vec![config.t1(), config.creator()]
            .into_iter()
            .chain(outsiders.iter().copied())
            .collect(),
        targets: config.universe(),
        recipients: vec![outsiders[0], Address::ZERO, initial.self_address],
        amounts: config.amounts(),
        initial,
    };

    let mut best: BTreeMap<PropertyId, (usize, String, Violation)> = BTreeMap::new();
    let mut counts: BTreeMap<PropertyId, u64> = BTreeMap::new();
    for v in check_state(&explorer.initial) {
        *counts.entry(v.property).or_default() += 1;
        best.entry(v.property).or_insert((0, String::new(), v));
    }

    let mut nodes = vec![Node {
        parent: 0,
        block: 0,
        step: None,
    }];
    let mut seen: HashSet<Vec<u8>> = HashSet::from([canonical_key(&explorer.initial, 0)]);
    let mut frontier: Vec<u32> = if best.is_empty() { vec![0] } else { Vec::new() };
    let mut transitions = 0u64;
    let mut depth_reached = 0;

    for depth in 0..config.max_depth {
        if frontier.is_empty() || (config.stop_at_first_violation && !best.is_empty()) {
            break;
        }
        depth_reached = depth + 1;
        let expanded: Vec<Vec<Successor>> = frontier.par_iter().map(|&i| explorer.expand(&nodes, i)).collect();
        let mut next_frontier = Vec::new();
        for (&parent, successors) in frontier.iter().zip(expanded) {
            for s in successors {
                transitions += 1;
                if !s.violations.is_empty() {
                    for v in s.violations {
                        *counts.entry(v.property).or_default() += 1;
                        let rank = (v.witness.len(), encode(&v.witness));
                        match best.get(&v.property) {
                            Some((len, enc, _)) if (*len, enc) <= (rank.0, &rank.1) => {}
                            _ => {
                                best.insert(v.property, (rank.0, rank.1, v));
                            }
                        }
                    }
                    continue;
                }
                if seen.contains(&s.key) {
                    continue;
                }
                if seen.len() >= config.budget {
                    return Err(Error::BudgetExceeded { budget: config.budget });
                }
                seen.insert(s.key);
                nodes.push(Node {
                    parent,
                    block: s.block,
                    step: s.step,
                });
                next_frontier.push((nodes.len() - 1) as u32);
            }
        }
        frontier = next_frontier;
    }

    let verdicts = PropertyId::ALL
        .iter()
        .map(|&p| PropertyVerdict {
            property: p,
            description: p.description().to_string(),
            holds: !best.contains_key(&p),
            violating_transitions: counts.get(&p).copied().unwrap_or(0),
            shortest_witness: best.get(&p).map(|(len, _, _)| *len),
        })
        .collect();
    let mut ranked: Vec<_> = best.into_values().collect();
    ranked.sort_by(|a, b| (a.0, &a.1, a.2.property).cmp(&(b.0, &b.1, b.2.property)));
    Ok(ExploreReport {
        config: config.clone(),
        states_visited: seen.len(),
        transitions,
        depth_reached,
        verdicts,
        violations: ranked.into_iter().map(|(_, _, v)| v).collect(),
    })
}
