//! Scripted replays of the two overflow attacks and the two key-theft
//! recovery flows. Each run drives a [`Chain`], records a per-stage
//! narrative, property-checks the resulting trace and asserts the expected
//! outcome for the arithmetic mode.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::chain::{Chain, Trace};
use crate::error::{Error, Result};
use crate::ledger::{Amount, ArithmeticMode, BlockNumber, RequestId};
use crate::properties::{check_trace, violated, PropertyId, Violation};
use crate::uint::U256;
use crate::vault::{Action, ActionOutcome, Effects, Rejection, VaultConfig, VaultState};

pub const OWNER_T1: Address = Address::new([0x71; 20]);
pub const OWNER_T2: Address = Address::new([0x72; 20]);
pub const REPLACEMENT_T2: Address = Address::new([0x73; 20]);
pub const ATTACKER_T2: Address = Address::new([0xa7; 20]);
pub const ATTACKER_WALLET: Address = Address::new([0xaa; 20]);
pub const OWNER_WALLET: Address = Address::new([0x77; 20]);
pub const DEPOSITOR: Address = Address::new([0xd0; 20]);

const LEDGER_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Dos,
    DelayEvasion,
    Type2Recovery,
    Type1Lockdown,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Dos,
        ScenarioKind::DelayEvasion,
        ScenarioKind::Type2Recovery,
        ScenarioKind::Type1Lockdown,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Dos => "dos",
            ScenarioKind::DelayEvasion => "delay-evasion",
            ScenarioKind::Type2Recovery => "type2-recovery",
            ScenarioKind::Type1Lockdown => "type1-lockdown",
        }
    }

    /// The overflow attacks run in either mode; the recovery flows assume
    /// overflow-checked arithmetic.
    pub fn is_attack(&self) -> bool {
        matches!(self, ScenarioKind::Dos | ScenarioKind::DelayEvasion)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scenario {s:?}")))
    }
}

/// Parameters of one run. `k` is the pre-existing request sum, `l` the
/// amount the attack pivots on, `n` the repetition count and `funds` the
/// initial deposit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub mode: ArithmeticMode,
    pub funds: u64,
    pub k: u64,
    pub l: u64,
    pub n: u64,
    pub delay: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, mode: ArithmeticMode) -> ScenarioSpec {
        let (funds, k, l, n) = match kind {
            ScenarioKind::Dos => (3, 2, 2, 1),
            ScenarioKind::DelayEvasion => (2, 2, 2, 1),
            ScenarioKind::Type2Recovery => (10, 1, 2, 3),
            ScenarioKind::Type1Lockdown => (10, 1, 2, 2),
        };
        ScenarioSpec {
            kind,
            mode,
            funds,
            k,
            l,
            n,
            delay: 3,
        }
    }

    /// Applies `K=..,L=..,n=..` style overrides; `funds` and `delay` are
    /// accepted too. Keys are case-sensitive except `k` and `l`.
    pub fn with_params(mut self, params: &str) -> Result<ScenarioSpec> {
        for pair in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected KEY=VALUE, got {pair:?}")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{key} needs a non-negative integer, got {value:?}")))?;
            match key.trim() {
                "K" | "k" => self.k = value,
                "L" | "l" => self.l = value,
                "n" => self.n = value,
                "funds" => self.funds = value,
                "delay" => self.delay = value,
                other => return Err(Error::Parse(format!("unknown scenario parameter {other:?}"))),
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.delay == 0 {
            return bad("delay must be at least 1".into());
        }
        if self.k == 0 || self.l == 0 || self.n == 0 {
            return bad("K, L and n must be at least 1".into());
        }
        if self.n > 256 {
            return bad("n is limited to 256".into());
        }
        if !self.kind.is_attack() && self.mode == ArithmeticMode::Legacy {
            return bad(format!("{} runs in fixed mode only", self.kind));
        }
        match self.kind {
            ScenarioKind::Dos => {
                if self.k > self.funds {
                    return bad(format!("K={} exceeds funds={}", self.k, self.funds));
                }
                if self.l > self.k {
                    return bad(format!("L={} exceeds K={}", self.l, self.k));
                }
            }
            ScenarioKind::DelayEvasion => {
                if self.k > self.funds || self.l > self.funds {
                    return bad(format!(
                        "K={} and L={} must not exceed funds={}",
                        self.k, self.l, self.funds
                    ));
                }
            }
            ScenarioKind::Type2Recovery | ScenarioKind::Type1Lockdown => {
                let total = u128::from(self.l) * u128::from(self.n) + u128::from(self.k);
                if total > u128::from(self.funds) {
                    return bad(format!("n*L + K = {total} exceeds funds={}", self.funds));
                }
            }
        }
        Ok(())
    }

    pub fn vault_config(&self) -> VaultConfig {
        VaultConfig::new(self.delay, OWNER_T1, OWNER_T2, LEDGER_CAP, self.mode)
    }
}

/// Vault totals at a named point of the run. `sum` is the stored request
/// sum, which wraps in legacy mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    #[serde(with = "decimal_block")]
    pub block: BlockNumber,
    pub funds: Amount,
    pub sum: Amount,
    pub requests: usize,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sum = if self.sum > U256::MAX.wrapping_sub(U256::from_u64(1 << 20)) {
            format!("MAX_INT-{}", U256::MAX.wrapping_sub(self.sum))
        } else {
            self.sum.to_string()
        };
        write!(
            f,
            "{} (block {}): funds = {}, sum of amounts = {}, {} pending",
            self.label, self.block, self.funds, sum, self.requests
        )
    }
}

mod decimal_block {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(block: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(block)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub stages: Vec<Stage>,
    pub events: Vec<String>,
    pub violated: Vec<PropertyId>,
    #[serde(skip)]
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub chain: Chain,
}

impl ScenarioResult {
    pub fn trace(&self) -> &Trace {
        &self.chain.trace
    }

    pub fn stage(&self, label: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.label == label)
    }

    /// Converts a failed run into [`Error::ScenarioAssertionFailed`].
    pub fn ensure_passed(&self) -> Result<()> {
        match &self.failure {
            None => Ok(()),
            Some(detail) => {
                let (stage, detail) = detail.split_once(": ").unwrap_or(("run", detail));
                Err(Error::ScenarioAssertionFailed {
                    scenario: self.spec.kind.to_string(),
                    stage: stage.to_string(),
                    detail: detail.to_string(),
                })
            }
        }
    }
}

/// Assertion failure: `(stage, detail)`.
type Check = std::result::Result<(), (String, String)>;

fn expect(cond: bool, stage: &str, detail: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err((stage.to_string(), detail()))
    }
}

struct Run {
    chain: Chain,
    stages: Vec<Stage>,
    events: Vec<String>,
}

impl Run {
    fn new(config: VaultConfig) -> Result<Run> {
        Ok(Run {
            chain: Chain::new(config)?,
            stages: Vec::new(),
            events: Vec::new(),
        })
    }

    fn vault(&self) -> &VaultState {
        &self.chain.vault
    }

    fn block(&self) -> BlockNumber {
        self.chain.current_block
    }

    fn submit(&mut self, who: &str, sender: Address, action: Action) -> ActionOutcome {
        let outcome = self.chain.submit(sender, action.clone());
        self.events
            .push(format!("block {}: {who} {action} -> {outcome}", self.block()));
        outcome
    }

    fn applied(
        &mut self,
        stage: &str,
        who: &str,
        sender: Address,
        action: Action,
    ) -> std::result::Result<Effects, (String, String)> {
        match self.submit(who, sender, action.clone()) {
            ActionOutcome::Applied(fx) => Ok(fx),
            ActionOutcome::Rejected { error } => {
                Err((stage.to_string(), format!("{action} by {who} rejected with {error}")))
            }
        }
    }

    fn rejected(&mut self, stage: &str, who: &str, sender: Address, action: Action, want: Rejection) -> Check {
        let outcome = self.submit(who, sender, action.clone());
        expect(outcome.rejection() == Some(want), stage, || {
            format!("{action} by {who}: expected rejection {want}, got {outcome}")
        })
    }

    fn request(
        &mut self,
        stage: &str,
        who: &str,
        sender: Address,
        amount: Amount,
        to: Address,
    ) -> std::result::Result<RequestId, (String, String)> {
        let fx = self.applied(stage, who, sender, Action::Request { amount, recipient: to })?;
        Ok(fx.created.expect("applied request creates an id"))
    }

    fn advance(&mut self, blocks: u64) {
        self.chain.advance(blocks).expect("non-zero advance");
        self.events
            .push(format!("{blocks} empty blocks pass (now block {})", self.block()));
    }

    /// Lets enough blocks pass that a request created at `creation` has matured.
    fn mature(&mut self, creation: BlockNumber) {
        let ready = creation + self.vault().delay + 1;
        if ready > self.block() + 1 {
            self.advance(ready - self.block() - 1);
        }
    }

    fn stage(&mut self, label: &str) {
        let v = &self.chain.vault;
        let stage = Stage {
            label: label.to_string(),
            block: self.chain.current_block,
            funds: v.funds,
            sum: v.ledger.amount_sum(),
            requests: v.ledger.len(),
        };
        self.events.push(stage.to_string());
        self.stages.push(stage);
    }

    fn stage_is(&mut self, label: &str, funds: Amount, sum: Amount) -> Check {
        self.stage(label);
        let s = self.stages.last().expect("just pushed");
        expect(s.funds == funds && s.sum == sum, label, || {
            format!(
                "expected funds {funds} and sum {sum}, got funds {} and sum {}",
                s.funds, s.sum
            )
        })
    }
}

fn amt(n: u64) -> Amount {
    U256::from_u64(n)
}

/// 2^256 - k, the amount that brings a request sum of k back to zero.
fn complement(k: u64) -> Amount {
    U256::ZERO.wrapping_sub(amt(k))
}

fn dos_script(spec: &ScenarioSpec, run: &mut Run) -> Check {
    let legacy = spec.mode == ArithmeticMode::Legacy;
    let (f, k, l) = (spec.funds, spec.k, spec.l);
    run.applied("setup", "owner", OWNER_T1, Action::AddT2 { address: ATTACKER_T2 })?;
    run.applied("setup", "depositor", DEPOSITOR, Action::Deposit { amount: amt(f) })?;
    if k > l {
        run.request("setup", "owner", OWNER_T2, amt(k - l), OWNER_WALLET)?;
    }
    let claimed = run.request("setup", "owner", OWNER_T2, amt(l), OWNER_WALLET)?;
    let created = run.block();
    run.stage_is("stage 1", amt(f), amt(k))?;

    let pivot = Action::Request {
        amount: complement(k),
        recipient: ATTACKER_WALLET,
    };
    if legacy {
        run.applied("stage 1 -> 2", "attacker", ATTACKER_T2, pivot)?;
        run.stage_is("stage 2", amt(f), U256::ZERO)?;
    } else {
        run.rejected("stage 1 -> 2", "attacker", ATTACKER_T2, pivot, Rejection::Overflow)?;
        run.stage_is("stage 2", amt(f), amt(k))?;
    }

    run.mature(created);
    run.applied("stage 2 -> 3", "owner", OWNER_T2, Action::Withdraw { id: claimed })?;
    let sum3 = if legacy { complement(l) } else { amt(k - l) };
    run.stage_is("stage 3", amt(f - l), sum3)?;

    let follow_up = Action::Request {
        amount: amt(1),
        recipient: OWNER_WALLET,
    };
    // In legacy mode a 1-coin request only slips through when it wraps the
    // sum again, which happens exactly when L = 1.
    if legacy && l >= 2 {
        run.rejected("follow-up", "owner", OWNER_T2, follow_up, Rejection::InsufficientFunds)?;
        run.events.push(format!(
            "the 1-coin request fails although the vault holds {}",
            run.vault().funds
        ));
    } else {
        run.applied("follow-up", "owner", OWNER_T2, follow_up)?;
    }
    Ok(())
}

fn delay_evasion_script(spec: &ScenarioSpec, run: &mut Run) -> Check {
    let legacy = spec.mode == ArithmeticMode::Legacy;
    let (f, k, l) = (spec.funds, spec.k, spec.l);
    run.applied("setup", "owner", OWNER_T1, Action::AddT2 { address: ATTACKER_T2 })?;
    run.applied("setup", "depositor", DEPOSITOR, Action::Deposit { amount: amt(f) })?;
    run.request("setup", "owner", OWNER_T2, amt(k), OWNER_WALLET)?;
    run.stage_is("stage 1", amt(f), amt(k))?;

    if !legacy {
        let pivot = Action::Request {
            amount: complement(k),
            recipient: ATTACKER_WALLET,
        };
        run.rejected("stage 1 -> 2", "attacker", ATTACKER_T2, pivot, Rejection::Overflow)?;
        run.stage_is("stage 2", amt(f), amt(k))?;
        // Without the ladder, a fresh request has to sit out the delay.
        run.applied("after fix", "depositor", DEPOSITOR, Action::Deposit { amount: amt(l) })?;
        let id = run.request("after fix", "attacker", ATTACKER_T2, amt(l), ATTACKER_WALLET)?;
        return run.rejected(
            "after fix",
            "attacker",
            ATTACKER_T2,
            Action::Withdraw { id },
            Rejection::TooEarly,
        );
    }

    let mut evading = Vec::new();
    let mut last_creation = 0;
    for rung in 1..=spec.n {
        let suffix = if spec.n > 1 {
            format!(" (rung {rung})")
        } else {
            String::new()
        };
        let back = if rung == 1 { k } else { l };
        run.request(
            &format!("stage 1 -> 2{suffix}"),
            "attacker",
            ATTACKER_T2,
            complement(back),
            ATTACKER_WALLET,
        )?;
        run.stage_is(&format!("stage 2{suffix}"), amt(f), U256::ZERO)?;
        evading.push(run.request(
            &format!("stage 2 -> 3{suffix}"),
            "attacker",
            ATTACKER_T2,
            amt(l),
            ATTACKER_WALLET,
        )?);
        last_creation = run.block();
        run.stage_is(&format!("stage 3{suffix}"), amt(f), amt(l))?;
    }

    run.mature(last_creation);
    for (i, id) in evading.into_iter().enumerate() {
        let stage = format!("drain {}", i + 1);
        run.applied(&stage, "depositor", DEPOSITOR, Action::Deposit { amount: amt(l) })?;
        let deposited_at = run.block();
        run.applied(&stage, "attacker", ATTACKER_T2, Action::Withdraw { id })?;
        let wait = run.block() - deposited_at - 1;
        run.events
            .push(format!("{l} withdrawn {wait} blocks after it was deposited"));
        expect(wait == 0, &stage, || format!("withdrawal waited {wait} blocks"))?;
    }
    let drained = u128::from(l) * u128::from(spec.n);
    let stolen = run.chain.balance(&ATTACKER_WALLET);
    run.stage("final");
    expect(stolen == U256::from_u128(drained).into(), "final", || {
        format!("attacker received {stolen}, expected {drained}")
    })?;
    expect(run.vault().funds == amt(f), "final", || {
        format!("vault should be back at {f}, holds {}", run.vault().funds)
    })
}

fn type2_recovery_script(spec: &ScenarioSpec, run: &mut Run) -> Check {
    let (f, legit, l, n) = (spec.funds, spec.k, spec.l, spec.n);
    run.applied("setup", "depositor", DEPOSITOR, Action::Deposit { amount: amt(f) })?;
    let victim = run.request("setup", "owner", OWNER_T2, amt(legit), OWNER_WALLET)?;
    run.stage("before theft");

    // The tier-two key is now in the thief's hands as well.
    run.applied("theft", "thief", OWNER_T2, Action::CancelSelfRequest { id: victim })?;
    let mut stolen_ids = BTreeSet::new();
    for _ in 0..n {
        stolen_ids.insert(run.request("theft", "thief", OWNER_T2, amt(l), ATTACKER_WALLET)?);
    }
    let last_theft = run.block();
    run.stage("after theft");

    let fx = run.applied("recovery", "owner", OWNER_T1, Action::RemoveT2 { address: OWNER_T2 })?;
    let purged: BTreeSet<_> = fx.removed.iter().copied().collect();
    expect(purged == stolen_ids, "recovery", || {
        format!("one RemoveT2 should purge {stolen_ids:?}, purged {purged:?}")
    })?;
    expect(run.vault().ledger.is_empty(), "recovery", || {
        "requests survived the purge".into()
    })?;
    run.applied(
        "recovery",
        "owner",
        OWNER_T1,
        Action::AddT2 {
            address: REPLACEMENT_T2,
        },
    )?;
    run.stage("after recovery");

    run.mature(last_theft);
    for id in stolen_ids {
        run.rejected(
            "aftermath",
            "thief",
            OWNER_T2,
            Action::Withdraw { id },
            Rejection::NotFound,
        )?;
    }
    run.rejected(
        "aftermath",
        "thief",
        OWNER_T2,
        Action::Request {
            amount: amt(l),
            recipient: ATTACKER_WALLET,
        },
        Rejection::Unauthorized,
    )?;

    let id = run.request("aftermath", "owner", REPLACEMENT_T2, amt(legit), OWNER_WALLET)?;
    let created = run.block();
    run.mature(created);
    run.applied("aftermath", "owner", REPLACEMENT_T2, Action::Withdraw { id })?;
    run.stage("final");

    let stolen = run.chain.balance(&ATTACKER_WALLET);
    expect(stolen.is_zero(), "final", || format!("attacker received {stolen}"))?;
    expect(run.vault().funds == amt(f - legit), "final", || {
        format!(
            "vault should hold {} after the legitimate withdrawal, holds {}",
            f - legit,
            run.vault().funds
        )
    })?;
    expect(run.chain.is_conserved(), "final", || "funds not conserved".into())
}

fn type1_lockdown_script(spec: &ScenarioSpec, run: &mut Run) -> Check {
    let (f, legit, l, n) = (spec.funds, spec.k, spec.l, spec.n);
    run.applied("setup", "depositor", DEPOSITOR, Action::Deposit { amount: amt(f) })?;
    run.stage("before theft");

    // Both the owner and the thief now hold the tier-one key.
    run.applied("theft", "thief", OWNER_T1, Action::AddT2 { address: ATTACKER_T2 })?;
    for _ in 0..n {
        run.request("theft", "thief", ATTACKER_T2, amt(l), ATTACKER_WALLET)?;
    }
    run.stage("after theft");

    let fx = run.applied("lockdown", "owner", OWNER_T1, Action::CancelAllRequests)?;
    expect(fx.cancelled_all == n as usize, "lockdown", || {
        format!("one cancel should drop {n} requests, dropped {}", fx.cancelled_all)
    })?;
    let far = run.block() + 1 + 1_000_000;
    run.applied("lockdown", "owner", OWNER_T1, Action::Lock { new_unlock: far })?;
    run.stage("locked");

    // The thief cannot undo the lock.
    run.rejected(
        "locked",
        "thief",
        OWNER_T1,
        Action::Lock {
            new_unlock: run.block(),
        },
        Rejection::UnlockNotIncreased,
    )?;
    let rogue = run.request("locked", "thief", ATTACKER_T2, amt(l), ATTACKER_WALLET)?;
    let own = run.request("locked", "owner", OWNER_T2, amt(legit), OWNER_WALLET)?;
    let created = run.block();
    run.mature(created);
    run.rejected(
        "locked",
        "thief",
        ATTACKER_T2,
        Action::Withdraw { id: rogue },
        Rejection::Locked,
    )?;
    run.rejected(
        "locked",
        "owner",
        OWNER_T2,
        Action::Withdraw { id: own },
        Rejection::Locked,
    )?;
    run.rejected(
        "locked",
        "thief",
        OWNER_T1,
        Action::Destroy {
            beneficiary: ATTACKER_WALLET,
        },
        Rejection::NonEmptyDestroy,
    )?;
    run.stage("final");

    expect(run.block() < far, "final", || "ran past the unlock block".into())?;
    expect(run.vault().funds == amt(f), "final", || {
        format!("vault should still hold {f}, holds {}", run.vault().funds)
    })?;
    let stolen = run.chain.balance(&ATTACKER_WALLET);
    expect(stolen.is_zero(), "final", || format!("attacker received {stolen}"))
}

/// Runs a scenario. Errors only for an invalid `ScenarioSpec`; assertion failures are
/// reported through [`ScenarioResult::passed`] and `failure`.
pub fn run(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    spec.validate()?;
    let config = spec.vault_config();
    let mut run = Run::new(config.clone())?;
    let script = match spec.kind {
        ScenarioKind::Dos => dos_script,
        ScenarioKind::DelayEvasion => delay_evasion_script,
        ScenarioKind::Type2Recovery => type2_recovery_script,
        ScenarioKind::Type1Lockdown => type1_lockdown_script,
    };
    let mut outcome = script(spec, &mut run);

    let violations = check_trace(&VaultState::new(&config)?, &run.chain.trace)?;
    let found: Vec<PropertyId> = violated(&violations).into_iter().collect();
    if outcome.is_ok() {
        let expected: Vec<PropertyId> = if spec.kind.is_attack() && spec.mode == ArithmeticMode::Legacy {
            vec![PropertyId::SOLVENT]
        } else {
            Vec::new()
        };
        outcome = expect(found == expected, "properties", || {
            format!("expected violations {expected:?}, found {found:?}")
        });
    }
    let failure = outcome.err().map(|(stage, detail)| format!("{stage}: {detail}"));
    Ok(ScenarioResult {
        spec: spec.clone(),
        passed: failure.is_none(),
        failure,
        stages: run.stages,
        events: run.events,
        violated: found,
        violations,
        chain: run.chain,
    })
}

pub fn run_dos(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    run(&ScenarioSpec {
        kind: ScenarioKind::Dos,
        ..spec.clone()
    })
}

pub fn run_delay_evasion(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    run(&ScenarioSpec {
        kind: ScenarioKind::DelayEvasion,
        ..spec.clone()
    })
}

pub fn run_type2_recovery(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    run(&ScenarioSpec {
        kind: ScenarioKind::Type2Recovery,
        ..spec.clone()
    })
}

pub fn run_type1_lockdown(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    run(&ScenarioSpec {
        kind: ScenarioKind::Type1Lockdown,
        ..spec.clone()
    })
}
