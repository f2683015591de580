//! Seeded random traces for replay and differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::address::Address;
use crate::chain::Chain;
use crate::error::Result;
use crate::ledger::Amount;
use crate::uint::U256;
use crate::vault::{Action, VaultConfig};

/// Extra actors beyond the configured tier-one and creator addresses.
pub const OUTSIDERS: [Address; 2] = [Address::new([0x51; 20]), Address::new([0x52; 20])];

fn amount(rng: &mut ChaCha8Rng) -> Amount {
    match rng.gen_range(0..20) {
        0 => U256::ZERO,
        1 => U256::ZERO.wrapping_sub(U256::from_u64(rng.gen_range(1..=40))),
        2 => U256::from_limbs([rng.gen(), rng.gen(), rng.gen(), rng.gen()]),
        _ => U256::from_u64(rng.gen_range(1..=20)),
    }
}

/// Picks a sender, preferring one whose tier makes `action` plausible.
fn sender(rng: &mut ChaCha8Rng, chain: &Chain, action: &Action, everyone: &[Address]) -> Address {
    let v = &chain.vault;
    let pool: Vec<Address> = match action {
        Action::Request { .. } | Action::CancelSelfRequest { .. } => v.t2.iter().copied().collect(),
        Action::Deposit { .. } | Action::Withdraw { .. } => Vec::new(),
        _ => v.t1.iter().copied().collect(),
    };
    if pool.is_empty() || rng.gen_bool(0.15) {
        *everyone.choose(rng).expect("non-empty actor list")
    } else {
        *pool.choose(rng).expect("non-empty pool")
    }
}

/// Submits `steps` random actions, with random idle gaps, to a fresh chain.
/// Equal seeds give equal chains.
pub fn random_chain(config: &VaultConfig, seed: u64, steps: usize) -> Result<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = Chain::new(config.clone())?;
    let mut everyone = vec![config.t1, config.creator, Address::ZERO, config.self_address];
    everyone.extend(OUTSIDERS);

    for _ in 0..steps {
        if rng.gen_bool(0.3) {
            chain.advance(rng.gen_range(1..=config.delay.saturating_add(2).min(64)))?;
        }
        let live: Vec<_> = chain.vault.ledger.iter().map(|r| r.id).collect();
        let id = |rng: &mut ChaCha8Rng| match live.choose(rng) {
            Some(&id) if rng.gen_bool(0.9) => id,
            _ => rng
                .gen_range(0..chain.vault.ledger.next_id().0.to_u64().unwrap_or(1) + 2)
                .into(),
        };
        let who = |rng: &mut ChaCha8Rng| *everyone.choose(rng).expect("non-empty actor list");
        let action = match rng.gen_range(0..100) {
            0..=19 => Action::Deposit {
                amount: amount(&mut rng),
            },
            20..=44 => Action::Request {
                amount: amount(&mut rng),
                recipient: who(&mut rng),
            },
            45..=59 => Action::Withdraw { id: id(&mut rng) },
            60..=64 => Action::CancelRequest { id: id(&mut rng) },
            65..=69 => Action::CancelSelfRequest { id: id(&mut rng) },
            70..=71 => Action::CancelAllRequests,
            72..=77 => {
                let unlock = chain.vault.unlock;
                let new_unlock = match rng.gen_range(0..4) {
                    0 => unlock.saturating_sub(1),
                    _ => chain.current_block + rng.gen_range(1..=3 * config.delay.min(1 << 20)),
                };
                Action::Lock { new_unlock }
            }
            78..=81 => Action::AddT1 { address: who(&mut rng) },
            82..=90 => Action::AddT2 { address: who(&mut rng) },
            91..=98 => Action::RemoveT2 { address: who(&mut rng) },
            _ => Action::Destroy {
                beneficiary: who(&mut rng),
            },
        };
        let from = sender(&mut rng, &chain, &action, &everyone);
        chain.submit(from, action);
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::ArithmeticMode;

    fn config(mode: ArithmeticMode) -> VaultConfig {
        VaultConfig::new(3, Address::from_low_u64(1), Address::from_low_u64(2), 16, mode)
    }

    #[test]
    fn same_seed_same_chain() {
        let a = random_chain(&config(ArithmeticMode::Fixed), 7, 150).unwrap();
        let b = random_chain(&config(ArithmeticMode::Fixed), 7, 150).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_chain(&config(ArithmeticMode::Fixed), 8, 150).unwrap());
    }

    #[test]
    fn generated_traces_mix_outcomes() {
        let chain = random_chain(&config(ArithmeticMode::Legacy), 1, 400).unwrap();
        let applied = chain.trace.records().iter().filter(|r| r.outcome.is_applied()).count();
        assert!(applied > 100, "only {applied} applied");
        assert!(applied < 400);
    }
}
