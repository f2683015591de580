//! Executable safety properties of the vault.
//!
//! The eighteen properties fall into four layers. They are checked in three
//! shapes: state invariants ([`check_state`]), single-transition obligations
//! ([`check_transition`]) and trace properties ([`check_trace`]). Every
//! trace property here is closed under composition of consecutive steps
//! (delay constant, tier-one set monotone, unlock monotone, funds not
//! decreasing while locked), so each is enforced pairwise on transitions and
//! holds for the whole trace by transitivity.

mod explore;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::chain::{Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::ledger::{BlockNumber, RequestId};
use crate::vault::{Action, ActionOutcome, VaultState};

pub use explore::{explore, ExploreConfig, ExploreReport, PropertyVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Base,
    KeySeparation,
    Recovery,
    Tier1Minimization,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Base => "base",
            Layer::KeySeparation => "key separation",
            Layer::Recovery => "recovery",
            Layer::Tier1Minimization => "tier-one minimization",
        })
    }
}

/// Property number in `layer.index` form, e.g. 3.2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropertyId {
    layer: u8,
    index: u8,
}

impl PropertyId {
    const fn new(layer: u8, index: u8) -> Self {
        PropertyId { layer, index }
    }

    pub const WITHDRAW_AFTER_DELAY: PropertyId = PropertyId::new(1, 1);
    pub const T1_CAN_CANCEL: PropertyId = PropertyId::new(1, 2);
    pub const DELAY_IMMUTABLE: PropertyId = PropertyId::new(1, 3);
    pub const T1_PERMANENT: PropertyId = PropertyId::new(1, 4);
    pub const DESTROY_ONLY_EMPTY: PropertyId = PropertyId::new(1, 5);
    pub const TIERS_DISJOINT: PropertyId = PropertyId::new(2, 1);
    pub const T1_ADDED_BY_T1: PropertyId = PropertyId::new(2, 2);
    pub const ONLY_T2_REQUESTS: PropertyId = PropertyId::new(2, 3);
    pub const T2_REMOVES_OWN: PropertyId = PropertyId::new(2, 4);
    pub const LOCKED_NO_OUTFLOW: PropertyId = PropertyId::new(3, 1);
    pub const UNLOCK_POSTPONED_ONLY: PropertyId = PropertyId::new(3, 2);
    pub const ONLY_T1_LOCKS: PropertyId = PropertyId::new(3, 3);
    pub const ONLY_T1_REMOVES_T2: PropertyId = PropertyId::new(3, 4);
    pub const ONLY_T1_ADDS_T2: PropertyId = PropertyId::new(3, 5);
    pub const SOLVENT: PropertyId = PropertyId::new(4, 1);
    pub const NO_SELF_PAYMENT: PropertyId = PropertyId::new(4, 2);
    pub const NO_ZERO_PAYMENT: PropertyId = PropertyId::new(4, 3);
    pub const INITIATORS_IN_T2: PropertyId = PropertyId::new(4, 4);

    pub const ALL: [PropertyId; 18] = [
        Self::WITHDRAW_AFTER_DELAY,
        Self::T1_CAN_CANCEL,
        Self::DELAY_IMMUTABLE,
        Self::T1_PERMANENT,
        Self::DESTROY_ONLY_EMPTY,
        Self::TIERS_DISJOINT,
        Self::T1_ADDED_BY_T1,
        Self::ONLY_T2_REQUESTS,
        Self::T2_REMOVES_OWN,
        Self::LOCKED_NO_OUTFLOW,
        Self::UNLOCK_POSTPONED_ONLY,
        Self::ONLY_T1_LOCKS,
        Self::ONLY_T1_REMOVES_T2,
        Self::ONLY_T1_ADDS_T2,
        Self::SOLVENT,
        Self::NO_SELF_PAYMENT,
        Self::NO_ZERO_PAYMENT,
        Self::INITIATORS_IN_T2,
    ];

    pub fn layer(&self) -> Layer {
        match self.layer {
            1 => Layer::Base,
            2 => Layer::KeySeparation,
            3 => Layer::Recovery,
            _ => Layer::Tier1Minimization,
        }
    }

    pub fn description(&self) -> &'static str {
        match (self.layer, self.index) {
            (1, 1) => "requests cannot be withdrawn before the delay has passed",
            (1, 2) => "a tier-one address can cancel any request at any time",
            (1, 3) => "the delay never changes",
            (1, 4) => "tier-one addresses are never removed",
            (1, 5) => "the vault can only be destroyed when empty",
            (2, 1) => "no address holds both tiers",
            (2, 2) => "only tier-one addresses add tier-one addresses",
            (2, 3) => "only tier-two addresses create requests",
            (2, 4) => "a tier-two address only removes requests it initiated",
            (3, 1) => "funds do not leave while locked",
            (3, 2) => "the unlock block is only ever postponed",
            (3, 3) => "only tier-one addresses lock",
            (3, 4) => "only tier-one addresses remove tier-two addresses",
            (3, 5) => "only tier-one addresses add tier-two addresses",
            (4, 1) => "pending requests never exceed funds",
            (4, 2) => "no request pays the vault itself",
            (4, 3) => "no request pays the zero address",
            (4, 4) => "every pending request was initiated by a current tier-two address",
            _ => "unknown property",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.layer, self.index)
    }
}

impl fmt::Debug for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{self}")
    }
}

impl std::str::FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| format!("unknown property {s:?}"))
    }
}

impl Serialize for PropertyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PropertyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A property failure found by a checker. `witness` is the trace prefix
/// that ends in the offending step (empty for a bare state check).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: PropertyId,
    pub detail: String,
    pub witness: Vec<TraceRecord>,
    pub state_digest: String,
}

impl Violation {
    fn new(property: PropertyId, detail: impl Into<String>, state: &VaultState) -> Self {
        Violation {
            property,
            detail: detail.into(),
            witness: Vec::new(),
            state_digest: digest(state),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "property {} violated: {}", self.property, self.detail)
    }
}

/// One-line summary of the state for reports.
pub fn digest(state: &VaultState) -> String {
    let sum = state.ledger.exact_sum();
    format!(
        "funds={} requests={} sum={} stored_sum={} unlock={} t1={} t2={}{}",
        state.funds,
        state.ledger.len(),
        sum,
        state.ledger.amount_sum(),
        state.unlock,
        state.t1.len(),
        state.t2.len(),
        if state.destroyed { " destroyed" } else { "" }
    )
}

/// State invariants: 2.1 and 4.1 through 4.4.
pub fn check_state(state: &VaultState) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Some(both) = state.t1.intersection(&state.t2).next() {
        out.push(Violation::new(
            PropertyId::TIERS_DISJOINT,
            format!("{both} is in both tiers"),
            state,
        ));
    }
    if !state.ledger.exact_sum().le(state.funds) {
        out.push(Violation::new(
            PropertyId::SOLVENT,
            format!("pending requests exceed funds ({})", digest(state)),
            state,
        ));
    }
    for req in state.ledger.iter() {
        if req.recipient == state.self_address {
            out.push(Violation::new(
                PropertyId::NO_SELF_PAYMENT,
                format!("request #{} pays the vault itself", req.id),
                state,
            ));
        }
        if req.recipient.is_zero() {
            out.push(Violation::new(
                PropertyId::NO_ZERO_PAYMENT,
                format!("request #{} pays the zero address", req.id),
                state,
            ));
        }
        if !state.t2.contains(&req.initiator) {
            out.push(Violation::new(
                PropertyId::INITIATORS_IN_T2,
                format!("request #{} initiated by non-tier-two {}", req.id, req.initiator),
                state,
            ));
        }
    }
    out
}

fn ids(state: &VaultState) -> BTreeSet<RequestId> {
    state.ledger.iter().map(|r| r.id).collect()
}

/// Obligations on a single step `pre --(block, sender, action)--> post`,
/// judged from the state difference so that they hold whatever rule
/// produced the step.
pub fn check_transition(
    pre: &VaultState,
    block: BlockNumber,
    sender: Address,
    action: &Action,
    post: &VaultState,
    outcome: &ActionOutcome,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |p: PropertyId, detail: String| out.push(Violation::new(p, detail, post));
    let sender_t1 = pre.t1.contains(&sender);
    let sender_t2 = pre.t2.contains(&sender);
    let pre_ids = ids(pre);
    let post_ids = ids(post);

    // 1.1: a request that left through a withdrawal must have matured.
    if let (Action::Withdraw { id }, true) = (action, outcome.is_applied()) {
        if let Ok(req) = pre.ledger.get(*id) {
            if block <= req.creation.saturating_add(pre.delay) {
                flag(
                    PropertyId::WITHDRAW_AFTER_DELAY,
                    format!("request #{id} created at {} withdrawn at {block}", req.creation),
                );
            }
        }
    }

    // 1.2: a tier-one cancel of a pending request must succeed.
    if let Action::CancelRequest { id } = action {
        if sender_t1 && !pre.destroyed && pre_ids.contains(id) && post_ids.contains(id) {
            flag(
                PropertyId::T1_CAN_CANCEL,
                format!("tier-one {sender} could not cancel request #{id}"),
            );
        }
    }

    if post.delay != pre.delay {
        flag(
            PropertyId::DELAY_IMMUTABLE,
            format!("delay changed from {} to {}", pre.delay, post.delay),
        );
    }

    if let Some(lost) = pre.t1.difference(&post.t1).next() {
        flag(PropertyId::T1_PERMANENT, format!("tier-one {lost} was removed"));
    }

    if post.destroyed && !pre.destroyed && !pre.funds.is_zero() {
        flag(
            PropertyId::DESTROY_ONLY_EMPTY,
            format!("destroyed while holding {}", pre.funds),
        );
    }

    if !sender_t1 {
        if let Some(added) = post.t1.difference(&pre.t1).next() {
            flag(
                PropertyId::T1_ADDED_BY_T1,
                format!("{sender} without tier one added tier-one {added}"),
            );
        }
    }

    let created: Vec<_> = post.ledger.iter().filter(|r| !pre_ids.contains(&r.id)).collect();
    for req in &created {
        if !pre.t2.contains(&req.initiator) {
            flag(
                PropertyId::ONLY_T2_REQUESTS,
                format!("request #{} created by non-tier-two {}", req.id, req.initiator),
            );
        }
    }

    // 2.4: withdrawals are claims, not removals by a tier.
    if sender_t2 && !sender_t1 && !matches!(action, Action::Withdraw { .. }) {
        for req in pre.ledger.iter() {
            if !post_ids.contains(&req.id) && req.initiator != sender {
                flag(
                    PropertyId::T2_REMOVES_OWN,
                    format!("tier-two {sender} removed request #{} of {}", req.id, req.initiator),
                );
            }
        }
    }

    if block <= pre.unlock && post.funds < pre.funds {
        flag(
            PropertyId::LOCKED_NO_OUTFLOW,
            format!(
                "funds fell from {} to {} at block {block} while locked until {}",
                pre.funds, post.funds, pre.unlock
            ),
        );
    }

    if post.unlock < pre.unlock {
        flag(
            PropertyId::UNLOCK_POSTPONED_ONLY,
            format!("unlock lowered from {} to {}", pre.unlock, post.unlock),
        );
    }

    if !sender_t1 {
        if post.unlock != pre.unlock {
            flag(
                PropertyId::ONLY_T1_LOCKS,
                format!("{sender} without tier one moved unlock to {}", post.unlock),
            );
        }
        if let Some(gone) = pre.t2.difference(&post.t2).next() {
            flag(
                PropertyId::ONLY_T1_REMOVES_T2,
                format!("{sender} without tier one removed tier-two {gone}"),
            );
        }
        if let Some(added) = post.t2.difference(&pre.t2).next() {
            flag(
                PropertyId::ONLY_T1_ADDS_T2,
                format!("{sender} without tier one added tier-two {added}"),
            );
        }
    }

    out
}

/// Rebuilds the states a trace passes through from its recorded outcomes
/// and checks every property along the way. Each violation's witness is the
/// trace prefix ending at the step that exposed it.
///
/// The trace is taken as evidence: applied records are replayed from their
/// recorded effects and rejected records leave the state unchanged, so a
/// trace from a faulty implementation is judged on what it did.
pub fn check_trace(initial: &VaultState, trace: &Trace) -> Result<Vec<Violation>> {
    trace.validate()?;
    let mut out: Vec<Violation> = check_state(initial);
    let mut state = initial.clone();
    for (i, rec) in trace.records().iter().enumerate() {
        let mut next = state.clone();
        if let ActionOutcome::Applied(fx) = &rec.outcome {
            next.apply_recorded(rec.block, rec.sender, &rec.action, fx)
                .map_err(|e| Error::Parse(format!("record {i} (block {}): {e}", rec.block)))?;
        }
        let mut found = check_transition(&state, rec.block, rec.sender, &rec.action, &next, &rec.outcome);
        found.extend(check_state(&next));
        for mut v in found {
            v.witness = trace.records()[..=i].to_vec();
            out.push(v);
        }
        state = next;
    }
    Ok(out)
}

/// Properties named by a list of violations, deduplicated and sorted.
pub fn violated(violations: &[Violation]) -> BTreeSet<PropertyId> {
    violations.iter().map(|v| v.property).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Chain;
    use crate::ledger::{Amount, ArithmeticMode};
    use crate::uint::U256;
    use crate::vault::{Mutation, VaultConfig};

    const A: Address = Address::new([0xa; 20]);
    const B: Address = Address::new([0xb; 20]);
    const C: Address = Address::new([0xc; 20]);
    const F: Address = Address::new([0xf; 20]);

    fn amt(n: u64) -> Amount {
        U256::from_u64(n)
    }

    fn config(mode: ArithmeticMode) -> VaultConfig {
        VaultConfig::new(2, A, B, 4, mode)
    }

    #[test]
    fn catalogue_has_eighteen_distinct_properties() {
        let set: BTreeSet<_> = PropertyId::ALL.into_iter().collect();
        assert_eq!(set.len(), 18);
        let per_layer = |l| PropertyId::ALL.iter().filter(|p| p.layer() == l).count();
        assert_eq!(per_layer(Layer::Base), 5);
        assert_eq!(per_layer(Layer::KeySeparation), 4);
        assert_eq!(per_layer(Layer::Recovery), 5);
        assert_eq!(per_layer(Layer::Tier1Minimization), 4);
        assert_eq!("3.2".parse::<PropertyId>().unwrap(), PropertyId::UNLOCK_POSTPONED_ONLY);
    }

    #[test]
    fn fresh_vault_is_clean() {
        let v = VaultState::new(&config(ArithmeticMode::Fixed)).unwrap();
        assert!(check_state(&v).is_empty());
    }

    #[test]
    fn injected_dual_tier_flags_disjointness() {
        let mut v = VaultState::new(&config(ArithmeticMode::Fixed)).unwrap();
        v.t2.insert(A);
        assert_eq!(violated(&check_state(&v)), BTreeSet::from([PropertyId::TIERS_DISJOINT]));
    }

    #[test]
    fn dos_stage_three_state_is_insolvent() {
        let mut chain = Chain::new(config(ArithmeticMode::Legacy)).unwrap();
        chain.submit(F, Action::Deposit { amount: amt(3) });
        chain.submit(
            B,
            Action::Request {
                amount: amt(2),
                recipient: C,
            },
        );
        chain.submit(
            B,
            Action::Request {
                amount: U256::MAX.wrapping_sub(amt(1)),
                recipient: C,
            },
        );
        chain.advance(2).unwrap();
        assert!(chain
            .submit(F, Action::Withdraw { id: RequestId::from(1) })
            .is_applied());
        assert_eq!(chain.vault.funds, amt(1));
        assert_eq!(chain.vault.ledger.amount_sum(), U256::MAX.wrapping_sub(amt(1)));
        assert_eq!(
            violated(&check_state(&chain.vault)),
            BTreeSet::from([PropertyId::SOLVENT])
        );
    }

    #[test]
    fn boundary_withdrawal_flags_delay_property() {
        let cfg = config(ArithmeticMode::Fixed);
        let broken = VaultState::new(&cfg)
            .unwrap()
            .with_mutation(Mutation::WithdrawAtDelayBoundary);
        let mut chain = Chain::with_vault(cfg, broken.clone());
        chain.submit(F, Action::Deposit { amount: amt(3) });
        chain.submit(
            B,
            Action::Request {
                amount: amt(1),
                recipient: C,
            },
        );
        chain.advance(1).unwrap();
        // Block 4 = creation 2 + delay 2.
        assert!(chain
            .submit(F, Action::Withdraw { id: RequestId::from(1) })
            .is_applied());
        let found = check_trace(&broken, &chain.trace).unwrap();
        assert_eq!(violated(&found), BTreeSet::from([PropertyId::WITHDRAW_AFTER_DELAY]));
        assert_eq!(found[0].witness.len(), 3);
    }

    #[test]
    fn t2_adding_t1_flags_key_separation() {
        let v = VaultState::new(&config(ArithmeticMode::Fixed))
            .unwrap()
            .with_mutation(Mutation::AddT1AllowsT2Sender);
        let action = Action::AddT1 { address: C };
        let (post, outcome) = v.apply(1, B, &action);
        let found = check_transition(&v, 1, B, &action, &post, &outcome);
        assert_eq!(violated(&found), BTreeSet::from([PropertyId::T1_ADDED_BY_T1]));
    }

    #[test]
    fn rejected_t1_cancel_flags_cancel_obligation() {
        let v = VaultState::new(&config(ArithmeticMode::Fixed))
            .unwrap()
            .with_mutation(Mutation::CancelRequestRequiresInitiator);
        let (v, _) = v.apply(1, F, &Action::Deposit { amount: amt(3) });
        let (v, _) = v.apply(
            2,
            B,
            &Action::Request {
                amount: amt(1),
                recipient: C,
            },
        );
        let action = Action::CancelRequest { id: RequestId::from(1) };
        let (post, outcome) = v.apply(3, A, &action);
        assert!(!outcome.is_applied());
        let found = check_transition(&v, 3, A, &action, &post, &outcome);
        assert_eq!(violated(&found), BTreeSet::from([PropertyId::T1_CAN_CANCEL]));

        // The correct vault honours the same cancel.
        let clean = VaultState::new(&config(ArithmeticMode::Fixed)).unwrap();
        let (clean, _) = clean.apply(1, F, &Action::Deposit { amount: amt(3) });
        let (clean, _) = clean.apply(
            2,
            B,
            &Action::Request {
                amount: amt(1),
                recipient: C,
            },
        );
        let (post, outcome) = clean.apply(3, A, &action);
        assert!(check_transition(&clean, 3, A, &action, &post, &outcome).is_empty());
    }

    #[test]
    fn lowered_unlock_in_trace_flags_postpone_property() {
        let cfg = config(ArithmeticMode::Fixed);
        let mut chain = Chain::new(cfg.clone()).unwrap();
        chain.submit(A, Action::Lock { new_unlock: 80 });
        chain.submit(A, Action::Lock { new_unlock: 90 });
        assert!(check_trace(&VaultState::new(&cfg).unwrap(), &chain.trace)
            .unwrap()
            .is_empty());

        // Hand-edit the second lock to move the unlock block backwards.
        let mut forged = chain.trace.clone();
        let rec = &mut forged.0[1];
        rec.action = Action::Lock { new_unlock: 50 };
        if let ActionOutcome::Applied(fx) = &mut rec.outcome {
            fx.unlock = Some((80, 50));
        }
        let found = check_trace(&VaultState::new(&cfg).unwrap(), &forged).unwrap();
        assert_eq!(violated(&found), BTreeSet::from([PropertyId::UNLOCK_POSTPONED_ONLY]));
    }

    #[test]
    fn inconsistent_recorded_effects_are_a_parse_error() {
        let cfg = config(ArithmeticMode::Fixed);
        let mut chain = Chain::new(cfg.clone()).unwrap();
        chain.submit(F, Action::Deposit { amount: amt(1) });
        let mut forged = chain.trace.clone();
        forged.0[0].action = Action::CancelRequest { id: RequestId::from(7) };
        forged.0[0].outcome = ActionOutcome::Applied(crate::vault::Effects {
            removed: vec![RequestId::from(7)],
            ..Default::default()
        });
        let err = check_trace(&VaultState::new(&cfg).unwrap(), &forged).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }
}
