//! Naive reference ledger: a plain vector scanned linearly, with sums kept
//! as arbitrary-precision integers. Used to differentially test `Ledger`.

#![allow(dead_code)]

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vault_model::{Address, Amount, ArithmeticMode, Ledger, LedgerError, Request, RequestId, U256};

pub fn big(x: U256) -> BigUint {
    x.limbs()
        .iter()
        .rev()
        .fold(BigUint::default(), |acc, &limb| (acc << 64u32) + BigUint::from(limb))
}

fn modulus() -> BigUint {
    BigUint::from(1u8) << 256u32
}

pub struct RefLedger {
    pub requests: Vec<Request>,
    next_id: u64,
    cap: usize,
    mode: ArithmeticMode,
}

impl RefLedger {
    pub fn new(cap: usize, mode: ArithmeticMode) -> RefLedger {
        RefLedger {
            requests: Vec::new(),
            next_id: 1,
            cap,
            mode,
        }
    }

    pub fn exact_sum(&self) -> BigUint {
        self.requests.iter().map(|r| big(r.amount)).sum()
    }

    /// The stored 256-bit sum: exact in fixed mode, reduced mod 2^256 in
    /// legacy mode.
    pub fn stored_sum(&self) -> BigUint {
        self.exact_sum() % modulus()
    }

    pub fn insert(
        &mut self,
        amount: Amount,
        recipient: Address,
        creation: u64,
        initiator: Address,
        funds: Amount,
    ) -> Result<RequestId, LedgerError> {
        if amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        if self.requests.len() >= self.cap {
            return Err(LedgerError::LedgerFull);
        }
        let exact = self.exact_sum() + big(amount);
        if self.mode == ArithmeticMode::Fixed && exact >= modulus() {
            return Err(LedgerError::Overflow);
        }
        if exact % modulus() > big(funds) {
            return Err(LedgerError::InsufficientFunds);
        }
        let id = RequestId::from(self.next_id);
        self.next_id += 1;
        self.requests.push(Request {
            id,
            amount,
            recipient,
            creation,
            initiator,
        });
        Ok(id)
    }

    pub fn get(&self, id: RequestId) -> Result<&Request, LedgerError> {
        self.requests.iter().find(|r| r.id == id).ok_or(LedgerError::NotFound)
    }

    pub fn remove(&mut self, id: RequestId) -> Result<Request, LedgerError> {
        let pos = self
            .requests
            .iter()
            .position(|r| r.id == id)
            .ok_or(LedgerError::NotFound)?;
        Ok(self.requests.remove(pos))
    }

    pub fn cancel_all(&mut self) -> usize {
        std::mem::take(&mut self.requests).len()
    }

    pub fn remove_by_initiator(&mut self, initiator: Address) -> usize {
        let before = self.requests.len();
        self.requests.retain(|r| r.initiator != initiator);
        before - self.requests.len()
    }
}

const ACTORS: [Address; 3] = [Address::new([1; 20]), Address::new([2; 20]), Address::new([3; 20])];

fn random_amount(rng: &mut ChaCha8Rng) -> Amount {
    match rng.gen_range(0..10) {
        0 => U256::ZERO,
        1 => U256::ZERO.wrapping_sub(U256::from_u64(rng.gen_range(1..=100))),
        2 => U256::from_limbs([rng.gen(), rng.gen(), rng.gen(), rng.gen()]),
        _ => U256::from_u64(rng.gen_range(1..=100)),
    }
}

fn random_funds(rng: &mut ChaCha8Rng) -> Amount {
    match rng.gen_range(0..6) {
        0 => U256::MAX,
        1 => U256::from_u64(rng.gen_range(0..50)),
        _ => U256::from_u64(rng.gen_range(0..5000)),
    }
}

fn compare(step: usize, real: &Ledger, model: &RefLedger) -> Result<(), String> {
    let order: Vec<&Request> = real.iter().collect();
    let expected: Vec<&Request> = model.requests.iter().collect();
    if order != expected {
        return Err(format!("step {step}: order {order:?} != {expected:?}"));
    }
    if real.len() != model.requests.len() || real.is_empty() != model.requests.is_empty() {
        return Err(format!("step {step}: size {} != {}", real.len(), model.requests.len()));
    }
    if big(real.amount_sum()) != model.stored_sum() {
        return Err(format!(
            "step {step}: stored sum {} != {}",
            real.amount_sum(),
            model.stored_sum()
        ));
    }
    let exact = real.exact_sum();
    let exact = big(exact.low) + (BigUint::from(exact.carries) << 256u32);
    if exact != model.exact_sum() {
        return Err(format!("step {step}: exact sum {exact} != {}", model.exact_sum()));
    }
    real.check_structure().map_err(|e| format!("step {step}: {e}"))
}

/// Drives a `Ledger` and a `RefLedger` through the same random operation
/// sequence of length `len`, comparing results and observable state after
/// every step.
pub fn differential_run(seed: u64, len: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = if rng.gen_bool(0.5) {
        ArithmeticMode::Legacy
    } else {
        ArithmeticMode::Fixed
    };
    let cap = rng.gen_range(1..=40);
    let mut real = Ledger::new(cap, mode).map_err(|e| e.to_string())?;
    let mut model = RefLedger::new(cap, mode);

    for step in 0..len {
        let live: Vec<RequestId> = model.requests.iter().map(|r| r.id).collect();
        let pick_id = |rng: &mut ChaCha8Rng| -> RequestId {
            if !live.is_empty() && rng.gen_bool(0.8) {
                live[rng.gen_range(0..live.len())]
            } else {
                RequestId::from(rng.gen_range(0..step as u64 + 3))
            }
        };
        match rng.gen_range(0..100) {
            0..=54 => {
                let amount = random_amount(&mut rng);
                let recipient = ACTORS[rng.gen_range(0..3)];
                let initiator = ACTORS[rng.gen_range(0..3)];
                let funds = random_funds(&mut rng);
                let a = real.insert(amount, recipient, step as u64, initiator, funds);
                let b = model.insert(amount, recipient, step as u64, initiator, funds);
                if a != b {
                    return Err(format!("step {step}: insert {a:?} != {b:?}"));
                }
            }
            55..=79 => {
                let id = pick_id(&mut rng);
                let a = real.remove(id);
                let b = model.remove(id);
                if a != b {
                    return Err(format!("step {step}: remove #{id} {a:?} != {b:?}"));
                }
            }
            80..=89 => {
                let id = pick_id(&mut rng);
                let a = real.get(id).cloned();
                let b = model.get(id).cloned();
                if a != b {
                    return Err(format!("step {step}: get #{id} {a:?} != {b:?}"));
                }
            }
            90..=93 => {
                let (a, b) = (real.cancel_all(), model.cancel_all());
                if a != b {
                    return Err(format!("step {step}: cancel_all {a} != {b}"));
                }
            }
            _ => {
                let who = ACTORS[rng.gen_range(0..3)];
                let (a, b) = (real.remove_by_initiator(who), model.remove_by_initiator(who));
                if a != b {
                    return Err(format!("step {step}: remove_by_initiator {a} != {b}"));
                }
            }
        }
        compare(step, &real, &model)?;
    }
    Ok(())
}
