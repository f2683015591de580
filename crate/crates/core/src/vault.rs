//! The vault state machine.
//!
//! A vault holds funds, an immutable withdrawal delay, two disjoint address
//! tiers, an unlock block and the ledger of pending requests. Every action is
//! applied atomically: a rejected action leaves the state untouched.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ledger::{Amount, ArithmeticMode, BlockNumber, Ledger, LedgerError, Request, RequestId};
use crate::uint::U256;

/// Contract address used when a configuration does not name one.
pub const DEFAULT_VAULT_ADDRESS: Address =
    Address::new([0xc0, 0xff, 0xee, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x01]);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    T1,
    T2,
    Unprivileged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaultConfig {
    pub delay: u64,
    pub t1: Address,
    pub creator: Address,
    pub max_ledger_size: usize,
    pub mode: ArithmeticMode,
    #[serde(default = "default_vault_address")]
    pub self_address: Address,
}

fn default_vault_address() -> Address {
    DEFAULT_VAULT_ADDRESS
}

impl VaultConfig {
    pub fn new(delay: u64, t1: Address, creator: Address, max_ledger_size: usize, mode: ArithmeticMode) -> Self {
        VaultConfig {
            delay,
            t1,
            creator,
            max_ledger_size,
            mode,
            self_address: DEFAULT_VAULT_ADDRESS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Action {
    Deposit { amount: Amount },
    Request { amount: Amount, recipient: Address },
    Withdraw { id: RequestId },
    CancelRequest { id: RequestId },
    CancelAllRequests,
    CancelSelfRequest { id: RequestId },
    Lock { new_unlock: BlockNumber },
    AddT1 { address: Address },
    AddT2 { address: Address },
    RemoveT2 { address: Address },
    Destroy { beneficiary: Address },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Deposit { .. } => "Deposit",
            Action::Request { .. } => "Request",
            Action::Withdraw { .. } => "Withdraw",
            Action::CancelRequest { .. } => "CancelRequest",
            Action::CancelAllRequests => "CancelAllRequests",
            Action::CancelSelfRequest { .. } => "CancelSelfRequest",
            Action::Lock { .. } => "Lock",
            Action::AddT1 { .. } => "AddT1",
            Action::AddT2 { .. } => "AddT2",
            Action::RemoveT2 { .. } => "RemoveT2",
            Action::Destroy { .. } => "Destroy",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Deposit { amount } => write!(f, "Deposit({amount})"),
            Action::Request { amount, recipient } => write!(f, "Request({amount} -> {recipient})"),
            Action::Withdraw { id } => write!(f, "Withdraw(#{id})"),
            Action::CancelRequest { id } => write!(f, "CancelRequest(#{id})"),
            Action::CancelAllRequests => write!(f, "CancelAllRequests"),
            Action::CancelSelfRequest { id } => write!(f, "CancelSelfRequest(#{id})"),
            Action::Lock { new_unlock } => write!(f, "Lock({new_unlock})"),
            Action::AddT1 { address } => write!(f, "AddT1({address})"),
            Action::AddT2 { address } => write!(f, "AddT2({address})"),
            Action::RemoveT2 { address } => write!(f, "RemoveT2({address})"),
            Action::Destroy { beneficiary } => write!(f, "Destroy({beneficiary})"),
        }
    }
}

/// Why an action was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, thiserror::Error)]
pub enum Rejection {
    #[error("sender lacks the required tier")]
    Unauthorized,
    #[error("no such request or address")]
    NotFound,
    #[error("sender did not initiate the request")]
    NotInitiator,
    #[error("withdrawal delay has not elapsed")]
    TooEarly,
    #[error("vault is locked")]
    Locked,
    #[error("insufficient funds")]
    InsufficientFunds,
    #[error("amount sum overflows")]
    Overflow,
    #[error("ledger is full")]
    LedgerFull,
    #[error("address already holds a tier")]
    AlreadyPrivileged,
    #[error("new unlock block must exceed the current one")]
    UnlockNotIncreased,
    #[error("vault still holds funds")]
    NonEmptyDestroy,
    #[error("vault has been destroyed")]
    Destroyed,
    #[error("zero address not allowed")]
    ZeroAddress,
    #[error("vault cannot pay itself")]
    SelfRecipient,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("request id space exhausted")]
    InternalOverflow,
}

impl From<LedgerError> for Rejection {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::ZeroAmount => Rejection::ZeroAmount,
            LedgerError::LedgerFull => Rejection::LedgerFull,
            LedgerError::InsufficientFunds => Rejection::InsufficientFunds,
            LedgerError::Overflow => Rejection::Overflow,
            LedgerError::NotFound => Rejection::NotFound,
            LedgerError::InternalOverflow | LedgerError::InvalidConfig => Rejection::InternalOverflow,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credit {
    pub address: Address,
    pub amount: Amount,
}

/// One address entering or leaving one tier set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierChange {
    pub address: Address,
    pub tier: Tier,
    pub added: bool,
}

impl TierChange {
    fn added(address: Address, tier: Tier) -> Self {
        TierChange {
            address,
            tier,
            added: true,
        }
    }

    fn removed(address: Address, tier: Tier) -> Self {
        TierChange {
            address,
            tier,
            added: false,
        }
    }
}

/// Summary of what an applied action changed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effects {
    #[serde(default, skip_serializing_if = "U256::is_zero")]
    pub deposited: Amount,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credited: Option<Credit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<RequestId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed: Vec<RequestId>,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    pub cancelled_all: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tier_changes: Vec<TierChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unlock: Option<(BlockNumber, BlockNumber)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destroyed_to: Option<Address>,
}

fn is_zero_usize(v: &usize) -> bool {
    *v == 0
}

impl Effects {
    /// Funds that left the vault.
    pub fn withdrawn(&self) -> Amount {
        self.credited.as_ref().map_or(U256::ZERO, |c| c.amount)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum ActionOutcome {
    Applied(Effects),
    Rejected { error: Rejection },
}

impl ActionOutcome {
    pub fn is_applied(&self) -> bool {
        matches!(self, ActionOutcome::Applied(_))
    }

    pub fn effects(&self) -> Option<&Effects> {
        match self {
            ActionOutcome::Applied(e) => Some(e),
            ActionOutcome::Rejected { .. } => None,
        }
    }

    pub fn rejection(&self) -> Option<Rejection> {
        match self {
            ActionOutcome::Rejected { error } => Some(*error),
            ActionOutcome::Applied(_) => None,
        }
    }
}

impl fmt::Display for ActionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionOutcome::Applied(_) => f.write_str("applied"),
            ActionOutcome::Rejected { error } => write!(f, "rejected: {error:?}"),
        }
    }
}

/// Single-rule deviations from the correct vault. Each one breaks the safety
/// property named in its doc comment; they exist to prove the checkers catch
/// what they claim to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mutation {
    /// 1.1: delay check uses `>=` instead of `>`.
    WithdrawAtDelayBoundary,
    /// 1.2: a tier-one cancel only succeeds for requests it initiated.
    CancelRequestRequiresInitiator,
    /// 1.3: locking also bumps the delay.
    LockExtendsDelay,
    /// 1.4: RemoveT2 also strips tier-one membership.
    RemoveT2StripsT1,
    /// 1.5: Destroy pays out remaining funds instead of refusing.
    DestroyIgnoresFunds,
    /// 2.1: AddT2 only checks tier-two membership.
    AddT2IgnoresT1,
    /// 2.2: tier-two senders may add tier-one addresses.
    AddT1AllowsT2Sender,
    /// 2.3: any sender may create requests.
    RequestAllowsAnySender,
    /// 2.4: CancelSelfRequest skips the initiator check.
    CancelSelfIgnoresInitiator,
    /// 3.1: Withdraw ignores the unlock block.
    WithdrawIgnoresLock,
    /// 3.2: Lock accepts any new unlock block.
    LockAllowsDecrease,
    /// 3.3: tier-two senders may lock.
    LockAllowsT2Sender,
    /// 3.4: tier-two senders may remove tier-two addresses.
    RemoveT2AllowsT2Sender,
    /// 3.5: tier-two senders may add tier-two addresses.
    AddT2AllowsT2Sender,
    /// 4.1: the request sum is admitted with wrapping arithmetic.
    WrappingAdmission,
    /// 4.2: requests may name the vault itself as recipient.
    RequestAllowsSelfRecipient,
    /// 4.3: requests may name the zero address as recipient.
    RequestAllowsZeroRecipient,
    /// 4.4: RemoveT2 leaves the removed address's requests pending.
    RemoveT2KeepsRequests,
}

impl Mutation {
    pub const ALL: [Mutation; 18] = [
        Mutation::WithdrawAtDelayBoundary,
        Mutation::CancelRequestRequiresInitiator,
        Mutation::LockExtendsDelay,
        Mutation::RemoveT2StripsT1,
        Mutation::DestroyIgnoresFunds,
        Mutation::AddT2IgnoresT1,
        Mutation::AddT1AllowsT2Sender,
        Mutation::RequestAllowsAnySender,
        Mutation::CancelSelfIgnoresInitiator,
        Mutation::WithdrawIgnoresLock,
        Mutation::LockAllowsDecrease,
        Mutation::LockAllowsT2Sender,
        Mutation::RemoveT2AllowsT2Sender,
        Mutation::AddT2AllowsT2Sender,
        Mutation::WrappingAdmission,
        Mutation::RequestAllowsSelfRecipient,
        Mutation::RequestAllowsZeroRecipient,
        Mutation::RemoveT2KeepsRequests,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaultState {
    pub funds: Amount,
    pub delay: u64,
    pub t1: BTreeSet<Address>,
    pub t2: BTreeSet<Address>,
    pub unlock: BlockNumber,
    pub ledger: Ledger,
    pub mode: ArithmeticMode,
    pub self_address: Address,
    pub destroyed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
}

impl VaultState {
    pub fn new(config: &VaultConfig) -> Result<VaultState> {
        let VaultConfig {
            delay,
            t1,
            creator,
            max_ledger_size,
            mode,
            self_address,
        } = *config;
        if delay == 0 {
            return Err(Error::InvalidConfig("delay must be at least one block".into()));
        }
        if t1.is_zero() || creator.is_zero() || self_address.is_zero() {
            return Err(Error::InvalidConfig(
                "zero address cannot be a vault participant".into(),
            ));
        }
        if t1 == creator {
            return Err(Error::InvalidConfig(
                "tier-one address must differ from the creating address".into(),
            ));
        }
        if self_address == t1 || self_address == creator {
            return Err(Error::InvalidConfig("vault address cannot hold a tier".into()));
        }
        let ledger = Ledger::new(max_ledger_size, mode)
            .map_err(|_| Error::InvalidConfig("max ledger size must be at least one".into()))?;
        Ok(VaultState {
            funds: U256::ZERO,
            delay,
            t1: BTreeSet::from([t1]),
            t2: BTreeSet::from([creator]),
            unlock: 0,
            ledger,
            mode,
            self_address,
            destroyed: false,
            mutation: None,
        })
    }

    /// Returns a copy running the given broken rule.
    pub fn with_mutation(mut self, mutation: Mutation) -> VaultState {
        if mutation == Mutation::WrappingAdmission {
            let max = self.ledger.max_size();
            self.ledger = Ledger::new(max, ArithmeticMode::Legacy).expect("non-zero cap");
        }
        self.mutation = Some(mutation);
        self
    }

    pub fn tier_of(&self, address: &Address) -> Tier {
        if self.t1.contains(address) {
            Tier::T1
        } else if self.t2.contains(address) {
            Tier::T2
        } else {
            Tier::Unprivileged
        }
    }

    pub fn requests(&self) -> impl Iterator<Item = &Request> {
        self.ledger.iter()
    }

    fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    /// Pure transition: returns the successor state and the outcome.
    pub fn apply(&self, block: BlockNumber, sender: Address, action: &Action) -> (VaultState, ActionOutcome) {
        let mut next = self.clone();
        let outcome = next.apply_in_place(block, sender, action);
        (next, outcome)
    }

    /// In-place transition. On rejection the state is left unchanged.
    pub fn apply_in_place(&mut self, block: BlockNumber, sender: Address, action: &Action) -> ActionOutcome {
        match self.step(block, sender, action) {
            Ok(effects) => ActionOutcome::Applied(effects),
            Err(error) => ActionOutcome::Rejected { error },
        }
    }

    fn require_t1(&self, sender: &Address) -> Result<(), Rejection> {
        if self.t1.contains(sender) {
            Ok(())
        } else {
            Err(Rejection::Unauthorized)
        }
    }

    fn require_t2(&self, sender: &Address) -> Result<(), Rejection> {
        if self.t2.contains(sender) {
            Ok(())
        } else {
            Err(Rejection::Unauthorized)
        }
    }

    fn require_t1_or(&self, sender: &Address, loosened: Mutation) -> Result<(), Rejection> {
        if self.mutated(loosened) && self.t2.contains(sender) {
            return Ok(());
        }
        self.require_t1(sender)
    }

    // Every arm validates fully before its first write.
    fn step(&mut self, block: BlockNumber, sender: Address, action: &Action) -> Result<Effects, Rejection> {
        if self.destroyed {
            return Err(Rejection::Destroyed);
        }
        let mut fx = Effects::default();
        match *action {
            Action::Deposit { amount } => {
                self.funds = self.funds.checked_add(amount).ok_or(Rejection::Overflow)?;
                fx.deposited = amount;
            }
            Action::Request { amount, recipient } => {
                if !self.mutated(Mutation::RequestAllowsAnySender) {
                    self.require_t2(&sender)?;
                }
                if recipient.is_zero() && !self.mutated(Mutation::RequestAllowsZeroRecipient) {
                    return Err(Rejection::ZeroAddress);
                }
                if recipient == self.self_address && !self.mutated(Mutation::RequestAllowsSelfRecipient) {
                    return Err(Rejection::SelfRecipient);
                }
                let id = self.ledger.insert(amount, recipient, block, sender, self.funds)?;
                fx.created = Some(id);
            }
            Action::Withdraw { id } => {
                let req = self.ledger.get(id)?;
                let matured = if self.mutated(Mutation::WithdrawAtDelayBoundary) {
                    block >= req.creation.saturating_add(self.delay)
                } else {
                    block > req.creation.saturating_add(self.delay)
                };
                if !matured {
                    return Err(Rejection::TooEarly);
                }
                if block <= self.unlock && !self.mutated(Mutation::WithdrawIgnoresLock) {
                    return Err(Rejection::Locked);
                }
                let remaining = self.funds.checked_sub(req.amount).ok_or(Rejection::InsufficientFunds)?;
                let req = self.ledger.remove(id)?;
                self.funds = remaining;
                fx.removed.push(id);
                fx.credited = Some(Credit {
                    address: req.recipient,
                    amount: req.amount,
                });
            }
            Action::CancelRequest { id } => {
                self.require_t1(&sender)?;
                if self.mutated(Mutation::CancelRequestRequiresInitiator) && self.ledger.get(id)?.initiator != sender {
                    return Err(Rejection::NotInitiator);
                }
                self.ledger.remove(id)?;
                fx.removed.push(id);
            }
            Action::CancelAllRequests => {
                self.require_t1(&sender)?;
                fx.cancelled_all = self.ledger.cancel_all();
            }
            Action::CancelSelfRequest { id } => {
                self.require_t2(&sender)?;
                let req = self.ledger.get(id)?;
                if req.initiator != sender && !self.mutated(Mutation::CancelSelfIgnoresInitiator) {
                    return Err(Rejection::NotInitiator);
                }
                self.ledger.remove(id)?;
                fx.removed.push(id);
            }
            Action::Lock { new_unlock } => {
                self.require_t1_or(&sender, Mutation::LockAllowsT2Sender)?;
                if new_unlock <= self.unlock && !self.mutated(Mutation::LockAllowsDecrease) {
                    return Err(Rejection::UnlockNotIncreased);
                }
                fx.unlock = Some((self.unlock, new_unlock));
                self.unlock = new_unlock;
                if self.mutated(Mutation::LockExtendsDelay) {
                    fx.delay = Some((self.delay, self.delay + 1));
                    self.delay += 1;
                }
            }
            Action::AddT1 { address } => {
                self.require_t1_or(&sender, Mutation::AddT1AllowsT2Sender)?;
                self.check_new_member(&address, false)?;
                self.t1.insert(address);
                fx.tier_changes.push(TierChange::added(address, Tier::T1));
            }
            Action::AddT2 { address } => {
                self.require_t1_or(&sender, Mutation::AddT2AllowsT2Sender)?;
                self.check_new_member(&address, self.mutated(Mutation::AddT2IgnoresT1))?;
                self.t2.insert(address);
                fx.tier_changes.push(TierChange::added(address, Tier::T2));
            }
            Action::RemoveT2 { address } => {
                self.require_t1_or(&sender, Mutation::RemoveT2AllowsT2Sender)?;
                let strips_t1 = self.mutated(Mutation::RemoveT2StripsT1) && self.t1.contains(&address);
                if !self.t2.contains(&address) && !strips_t1 {
                    return Err(Rejection::NotFound);
                }
                if strips_t1 {
                    self.t1.remove(&address);
                    fx.tier_changes.push(TierChange::removed(address, Tier::T1));
                }
                if self.t2.remove(&address) {
                    fx.tier_changes.push(TierChange::removed(address, Tier::T2));
                }
                if !self.mutated(Mutation::RemoveT2KeepsRequests) {
                    fx.removed = self
                        .ledger
                        .remove_where(|r| r.initiator == address)
                        .into_iter()
                        .map(|r| r.id)
                        .collect();
                }
            }
            Action::Destroy { beneficiary } => {
                self.require_t1(&sender)?;
                if !self.funds.is_zero() {
                    if !self.mutated(Mutation::DestroyIgnoresFunds) {
                        return Err(Rejection::NonEmptyDestroy);
                    }
                    fx.credited = Some(Credit {
                        address: beneficiary,
                        amount: self.funds,
                    });
                    self.funds = U256::ZERO;
                }
                self.destroyed = true;
                fx.destroyed_to = Some(beneficiary);
            }
        }
        Ok(fx)
    }

    /// Reconstructs the successor from a recorded applied outcome without
    /// re-running any guard. Used to check observed traces, where the
    /// recorded effects are the evidence and the rules are under test.
    pub fn apply_recorded(
        &mut self,
        block: BlockNumber,
        sender: Address,
        action: &Action,
        fx: &Effects,
    ) -> std::result::Result<(), String> {
        if let Some(id) = fx.created {
            let Action::Request { amount, recipient } = *action else {
                return Err(format!("{} cannot create a request", action.name()));
            };
            self.ledger
                .force_append(Request {
                    id,
                    amount,
                    recipient,
                    creation: block,
                    initiator: sender,
                })
                .map_err(|e| format!("request #{id}: {e}"))?;
        }
        for id in &fx.removed {
            self.ledger.remove(*id).map_err(|e| format!("removing #{id}: {e}"))?;
        }
        if fx.cancelled_all > 0 || matches!(action, Action::CancelAllRequests) {
            self.ledger.cancel_all();
        }
        self.funds = self
            .funds
            .checked_add(fx.deposited)
            .and_then(|f| f.checked_sub(fx.withdrawn()))
            .ok_or("recorded funds movement is impossible")?;
        for change in &fx.tier_changes {
            let set = match change.tier {
                Tier::T1 => &mut self.t1,
                Tier::T2 => &mut self.t2,
                Tier::Unprivileged => continue,
            };
            if change.added {
                set.insert(change.address);
            } else {
                set.remove(&change.address);
            }
        }
        if let Some((_, to)) = fx.unlock {
            self.unlock = to;
        }
        if let Some((_, to)) = fx.delay {
            self.delay = to;
        }
        if fx.destroyed_to.is_some() {
            self.destroyed = true;
        }
        Ok(())
    }

    /// Membership rules shared by AddT1 and AddT2.
    fn check_new_member(&self, address: &Address, only_t2: bool) -> Result<(), Rejection> {
        if address.is_zero() {
            return Err(Rejection::ZeroAddress);
        }
        let taken = if only_t2 {
            self.t2.contains(address)
        } else {
            self.t1.contains(address) || self.t2.contains(address)
        };
        if taken {
            Err(Rejection::AlreadyPrivileged)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Address = Address::new([0xa; 20]);
    const B: Address = Address::new([0xb; 20]);
    const C: Address = Address::new([0xc; 20]);
    const D: Address = Address::new([0xd; 20]);

    fn amt(n: u64) -> Amount {
        U256::from_u64(n)
    }

    fn vault(delay: u64) -> VaultState {
        VaultState::new(&VaultConfig::new(delay, A, B, 8, ArithmeticMode::Fixed)).unwrap()
    }

    /// Applies and asserts the outcome was Applied.
    fn ok(state: &mut VaultState, block: u64, sender: Address, action: Action) -> Effects {
        match state.apply_in_place(block, sender, &action) {
            ActionOutcome::Applied(fx) => fx,
            other => panic!("{action} at {block} by {sender}: {other}"),
        }
    }

    fn rejected(state: &VaultState, block: u64, sender: Address, action: Action) -> Rejection {
        let (next, outcome) = state.apply(block, sender, &action);
        assert_eq!(&next, state, "rejected action mutated the state");
        outcome
            .rejection()
            .unwrap_or_else(|| panic!("{action} unexpectedly applied"))
    }

    fn funded(delay: u64, funds: u64) -> VaultState {
        let mut v = vault(delay);
        ok(&mut v, 1, D, Action::Deposit { amount: amt(funds) });
        v
    }

    #[test]
    fn construction_assigns_tiers() {
        let v = vault(10);
        assert_eq!(v.t1, BTreeSet::from([A]));
        assert_eq!(v.t2, BTreeSet::from([B]));
        assert_eq!(v.funds, U256::ZERO);
        assert_eq!(v.tier_of(&A), Tier::T1);
        assert_eq!(v.tier_of(&B), Tier::T2);
        assert_eq!(v.tier_of(&C), Tier::Unprivileged);
    }

    #[test]
    fn construction_rejects_bad_config() {
        let same = VaultConfig::new(10, A, A, 8, ArithmeticMode::Fixed);
        assert!(matches!(VaultState::new(&same), Err(Error::InvalidConfig(_))));
        let no_delay = VaultConfig::new(0, A, B, 8, ArithmeticMode::Fixed);
        assert!(matches!(VaultState::new(&no_delay), Err(Error::InvalidConfig(_))));
        let zero = VaultConfig::new(1, Address::ZERO, B, 8, ArithmeticMode::Fixed);
        assert!(VaultState::new(&zero).is_err());
        let no_cap = VaultConfig::new(1, A, B, 0, ArithmeticMode::Fixed);
        assert!(VaultState::new(&no_cap).is_err());
    }

    #[test]
    fn withdraw_delay_is_strict() {
        let mut v = funded(10, 5);
        ok(
            &mut v,
            5,
            B,
            Action::Request {
                amount: amt(2),
                recipient: C,
            },
        );
        let id = RequestId::from(1);
        assert_eq!(rejected(&v, 15, D, Action::Withdraw { id }), Rejection::TooEarly);
        let fx = ok(&mut v, 16, D, Action::Withdraw { id });
        assert_eq!(
            fx.credited,
            Some(Credit {
                address: C,
                amount: amt(2)
            })
        );
        assert_eq!(v.funds, amt(3));
    }

    #[test]
    fn lock_blocks_withdrawal_until_unlock_passes() {
        let mut v = funded(10, 5);
        ok(
            &mut v,
            5,
            B,
            Action::Request {
                amount: amt(2),
                recipient: C,
            },
        );
        ok(&mut v, 6, A, Action::Lock { new_unlock: 100 });
        let id = RequestId::from(1);
        assert_eq!(rejected(&v, 90, D, Action::Withdraw { id }), Rejection::Locked);
        assert_eq!(rejected(&v, 100, D, Action::Withdraw { id }), Rejection::Locked);
        ok(&mut v, 101, D, Action::Withdraw { id });
    }

    #[test]
    fn lock_only_postpones() {
        let mut v = vault(3);
        ok(&mut v, 1, A, Action::Lock { new_unlock: 80 });
        assert_eq!(
            rejected(&v, 2, A, Action::Lock { new_unlock: 50 }),
            Rejection::UnlockNotIncreased
        );
        assert_eq!(
            rejected(&v, 2, A, Action::Lock { new_unlock: 80 }),
            Rejection::UnlockNotIncreased
        );
        assert_eq!(
            rejected(&v, 2, B, Action::Lock { new_unlock: 90 }),
            Rejection::Unauthorized
        );
    }

    #[test]
    fn tier_two_cannot_add_tier_one() {
        let v = vault(3);
        assert_eq!(
            rejected(&v, 1, B, Action::AddT1 { address: C }),
            Rejection::Unauthorized
        );
        assert_eq!(
            rejected(&v, 1, B, Action::AddT2 { address: C }),
            Rejection::Unauthorized
        );
        assert_eq!(
            rejected(&v, 1, B, Action::RemoveT2 { address: B }),
            Rejection::Unauthorized
        );
    }

    #[test]
    fn remove_t2_purges_its_requests() {
        let mut v = funded(3, 10);
        ok(&mut v, 2, A, Action::AddT2 { address: C });
        ok(
            &mut v,
            3,
            B,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        ok(
            &mut v,
            4,
            C,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        ok(
            &mut v,
            5,
            B,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        let fx = ok(&mut v, 6, A, Action::RemoveT2 { address: B });
        assert_eq!(fx.removed, vec![RequestId::from(1), RequestId::from(3)]);
        assert_eq!(v.ledger.len(), 1);
        assert_eq!(v.tier_of(&B), Tier::Unprivileged);
        assert_eq!(
            rejected(
                &v,
                7,
                B,
                Action::Request {
                    amount: amt(1),
                    recipient: D
                }
            ),
            Rejection::Unauthorized
        );
        // Re-adding a removed tier-two address is allowed.
        ok(&mut v, 8, A, Action::AddT2 { address: B });
    }

    #[test]
    fn destroy_requires_empty_vault() {
        let v = funded(3, 3);
        assert_eq!(
            rejected(&v, 2, A, Action::Destroy { beneficiary: A }),
            Rejection::NonEmptyDestroy
        );
        assert_eq!(
            rejected(&v, 2, B, Action::Destroy { beneficiary: A }),
            Rejection::Unauthorized
        );
        let mut empty = vault(3);
        ok(&mut empty, 1, A, Action::Destroy { beneficiary: A });
        assert!(empty.destroyed);
        assert_eq!(
            rejected(&empty, 2, D, Action::Deposit { amount: amt(1) }),
            Rejection::Destroyed
        );
    }

    #[test]
    fn cancel_rules() {
        let mut v = funded(3, 10);
        ok(&mut v, 2, A, Action::AddT2 { address: C });
        ok(
            &mut v,
            3,
            B,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        ok(
            &mut v,
            4,
            C,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        let (one, two) = (RequestId::from(1), RequestId::from(2));
        assert_eq!(
            rejected(&v, 5, C, Action::CancelSelfRequest { id: one }),
            Rejection::NotInitiator
        );
        assert_eq!(
            rejected(&v, 5, B, Action::CancelRequest { id: one }),
            Rejection::Unauthorized
        );
        ok(&mut v, 5, C, Action::CancelSelfRequest { id: two });
        ok(&mut v, 6, A, Action::CancelRequest { id: one });
        assert_eq!(
            rejected(&v, 7, A, Action::CancelRequest { id: one }),
            Rejection::NotFound
        );
        ok(
            &mut v,
            8,
            B,
            Action::Request {
                amount: amt(1),
                recipient: D,
            },
        );
        let fx = ok(&mut v, 9, A, Action::CancelAllRequests);
        assert_eq!(fx.cancelled_all, 1);
        assert!(v.ledger.is_empty());
    }

    #[test]
    fn request_recipient_and_amount_rules() {
        let v = funded(3, 10);
        let me = v.self_address;
        assert_eq!(
            rejected(
                &v,
                2,
                B,
                Action::Request {
                    amount: amt(1),
                    recipient: me
                }
            ),
            Rejection::SelfRecipient
        );
        assert_eq!(
            rejected(
                &v,
                2,
                B,
                Action::Request {
                    amount: amt(1),
                    recipient: Address::ZERO
                }
            ),
            Rejection::ZeroAddress
        );
        assert_eq!(
            rejected(
                &v,
                2,
                B,
                Action::Request {
                    amount: amt(0),
                    recipient: C
                }
            ),
            Rejection::ZeroAmount
        );
        assert_eq!(
            rejected(
                &v,
                2,
                A,
                Action::Request {
                    amount: amt(1),
                    recipient: C
                }
            ),
            Rejection::Unauthorized
        );
        assert_eq!(
            rejected(
                &v,
                2,
                B,
                Action::Request {
                    amount: amt(11),
                    recipient: C
                }
            ),
            Rejection::InsufficientFunds
        );
    }

    #[test]
    fn tier_additions_keep_tiers_disjoint() {
        let mut v = vault(3);
        assert_eq!(
            rejected(&v, 1, A, Action::AddT2 { address: A }),
            Rejection::AlreadyPrivileged
        );
        assert_eq!(
            rejected(&v, 1, A, Action::AddT1 { address: B }),
            Rejection::AlreadyPrivileged
        );
        assert_eq!(
            rejected(&v, 1, A, Action::AddT1 { address: Address::ZERO }),
            Rejection::ZeroAddress
        );
        ok(&mut v, 1, A, Action::AddT1 { address: C });
        assert_eq!(v.tier_of(&C), Tier::T1);
        assert_eq!(rejected(&v, 2, A, Action::RemoveT2 { address: C }), Rejection::NotFound);
    }

    #[test]
    fn zero_deposit_is_a_noop() {
        let mut v = vault(3);
        ok(&mut v, 1, D, Action::Deposit { amount: U256::ZERO });
        assert_eq!(v, vault(3));
    }

    #[test]
    fn action_json_shape() {
        let a = Action::Request {
            amount: U256::MAX,
            recipient: C,
        };
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.starts_with(r#"{"type":"Request","amount":"115792089"#), "{json}");
        assert_eq!(serde_json::from_str::<Action>(&json).unwrap(), a);
        let outcome = ActionOutcome::Rejected {
            error: Rejection::TooEarly,
        };
        assert_eq!(
            serde_json::to_string(&outcome).unwrap(),
            r#"{"status":"rejected","error":"TooEarly"}"#
        );
    }
}
