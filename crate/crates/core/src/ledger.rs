//! Pending withdrawal requests.
//!
//! Requests live in a doubly-linked list whose nodes are addressed through an
//! id map, so insertion at the tail and removal by id are O(1). Bulk
//! cancellation is O(1) as well: it drops the list head and raises `lastid`,
//! a watermark below which every id is treated as cancelled. Nodes left
//! behind in the map by a bulk cancel are unreachable and are reclaimed a
//! couple at a time by later insertions.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::uint::{WideSum, U256};

pub type Amount = U256;
pub type BlockNumber = u64;

/// Stale map entries reclaimed per insertion.
const RECLAIM_PER_INSERT: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub U256);

impl RequestId {
    /// Null link; never assigned to a request.
    pub const NULL: RequestId = RequestId(U256::ZERO);

    pub fn is_null(&self) -> bool {
        self.0.is_zero()
    }
}

impl From<u64> for RequestId {
    fn from(v: u64) -> Self {
        RequestId(U256::from_u64(v))
    }
}

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// How the running sum of request amounts is maintained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    /// Sums wrap modulo 2^256 and admission compares the wrapped value.
    Legacy,
    /// Admission rejects a request whose addition would overflow.
    #[default]
    Fixed,
}

impl std::str::FromStr for ArithmeticMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "legacy" => Ok(ArithmeticMode::Legacy),
            "fixed" => Ok(ArithmeticMode::Fixed),
            other => Err(format!("unknown arithmetic mode {other:?}")),
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithmeticMode::Legacy => "legacy",
            ArithmeticMode::Fixed => "fixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub amount: Amount,
    pub recipient: Address,
    pub creation: BlockNumber,
    pub initiator: Address,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("ledger capacity must be at least one")]
    InvalidConfig,
    #[error("request amount must be positive")]
    ZeroAmount,
    #[error("ledger is full")]
    LedgerFull,
    #[error("pending requests would exceed available funds")]
    InsufficientFunds,
    #[error("request amount sum overflows")]
    Overflow,
    #[error("no such request")]
    NotFound,
    #[error("request id space exhausted")]
    InternalOverflow,
}

#[derive(Clone, Debug)]
struct Node {
    request: Request,
    prev: RequestId,
    next: RequestId,
}

#[derive(Clone)]
pub struct Ledger {
    nodes: HashMap<RequestId, Node>,
    head: RequestId,
    tail: RequestId,
    next_id: RequestId,
    lastid: RequestId,
    max_size: usize,
    size: usize,
    amount_sum: Amount,
    mode: ArithmeticMode,
    /// Highest id below `lastid` already swept from `nodes`.
    reclaimed: RequestId,
}

impl Ledger {
    pub fn new(max_size: usize, mode: ArithmeticMode) -> Result<Ledger, LedgerError> {
        if max_size == 0 {
            return Err(LedgerError::InvalidConfig);
        }
        Ok(Ledger {
            nodes: HashMap::new(),
            head: RequestId::NULL,
            tail: RequestId::NULL,
            next_id: RequestId::from(1),
            lastid: RequestId::NULL,
            max_size,
            size: 0,
            amount_sum: U256::ZERO,
            mode,
            reclaimed: RequestId::NULL,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn mode(&self) -> ArithmeticMode {
        self.mode
    }

    pub fn head(&self) -> RequestId {
        self.head
    }

    pub fn next_id(&self) -> RequestId {
        self.next_id
    }

    pub fn lastid(&self) -> RequestId {
        self.lastid
    }

    /// Running sum of live amounts as the contract stores it (wraps in
    /// legacy mode).
    pub fn amount_sum(&self) -> Amount {
        self.amount_sum
    }

    /// Exact mathematical sum of live amounts, independent of mode.
    pub fn exact_sum(&self) -> WideSum {
        self.iter().map(|r| r.amount).collect()
    }

    /// Admits a new request at the tail of the list.
    ///
    /// In legacy mode the sum check compares the wrapped 256-bit total with
    /// `funds`, so a request that wraps the sum back below `funds` is
    /// accepted.
    pub fn insert(
        &mut self,
        amount: Amount,
        recipient: Address,
        creation: BlockNumber,
        initiator: Address,
        funds: Amount,
    ) -> Result<RequestId, LedgerError> {
        if amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        if self.size >= self.max_size {
            return Err(LedgerError::LedgerFull);
        }
        let new_sum = match self.mode {
            ArithmeticMode::Fixed => self.amount_sum.checked_add(amount).ok_or(LedgerError::Overflow)?,
            ArithmeticMode::Legacy => self.amount_sum.wrapping_add(amount),
        };
        if new_sum > funds {
            return Err(LedgerError::InsufficientFunds);
        }
        if self.next_id.0 == U256::MAX {
            return Err(LedgerError::InternalOverflow);
        }

        self.reclaim_stale(RECLAIM_PER_INSERT);

        let id = self.next_id;
        self.link_tail(Request {
            id,
            amount,
            recipient,
            creation,
            initiator,
        });
        debug_assert_eq!(self.amount_sum, new_sum);
        Ok(id)
    }

    fn is_live(&self, id: RequestId) -> bool {
        id > self.lastid && self.nodes.contains_key(&id)
    }

    /// Appends an already-numbered request without admission checks. The id
    /// must not precede `next_id`.
    pub fn force_append(&mut self, request: Request) -> Result<(), LedgerError> {
        if request.id < self.next_id || request.id.0 == U256::MAX {
            return Err(LedgerError::InternalOverflow);
        }
        if self.size >= self.max_size {
            return Err(LedgerError::LedgerFull);
        }
        self.link_tail(request);
        Ok(())
    }

    fn link_tail(&mut self, request: Request) {
        let id = request.id;
        self.next_id = RequestId(id.0.wrapping_add(U256::ONE));
        self.amount_sum = self.amount_sum.wrapping_add(request.amount);
        let prev = self.tail;
        match self.nodes.get_mut(&prev) {
            Some(tail) => tail.next = id,
            None => self.head = id,
        }
        self.tail = id;
        self.nodes.insert(
            id,
            Node {
                request,
                prev,
                next: RequestId::NULL,
            },
        );
        self.size += 1;
    }

    pub fn get(&self, id: RequestId) -> Result<&Request, LedgerError> {
        if id <= self.lastid {
            return Err(LedgerError::NotFound);
        }
        self.nodes.get(&id).map(|n| &n.request).ok_or(LedgerError::NotFound)
    }

    pub fn remove(&mut self, id: RequestId) -> Result<Request, LedgerError> {
        if !self.is_live(id) {
            return Err(LedgerError::NotFound);
        }
        Ok(self.unlink(id))
    }

    /// Unlinks a node known to be live.
    fn unlink(&mut self, id: RequestId) -> Request {
        let node = self.nodes.remove(&id).expect("live node present in id map");
        match self.nodes.get_mut(&node.prev) {
            Some(prev) => prev.next = node.next,
            None => self.head = node.next,
        }
        match self.nodes.get_mut(&node.next) {
            Some(next) => next.prev = node.prev,
            None => self.tail = node.prev,
        }
        self.size -= 1;
        self.amount_sum = self.amount_sum.wrapping_sub(node.request.amount);
        node.request
    }

    /// Cancels every pending request in constant time. Returns how many
    /// requests were pending.
    pub fn cancel_all(&mut self) -> usize {
        let count = self.size;
        self.head = RequestId::NULL;
        self.tail = RequestId::NULL;
        self.size = 0;
        self.amount_sum = U256::ZERO;
        self.lastid = RequestId(self.next_id.0.wrapping_sub(U256::ONE));
        count
    }

    /// Removes every request issued by `initiator` in one pass over the
    /// list, keeping the survivors in order.
    pub fn remove_by_initiator(&mut self, initiator: Address) -> usize {
        self.remove_where(|r| r.initiator == initiator).len()
    }

    pub fn remove_where<F>(&mut self, mut pred: F) -> Vec<Request>
    where
        F: FnMut(&Request) -> bool,
    {
        let mut removed = Vec::new();
        let mut cursor = self.head;
        while let Some(node) = self.nodes.get(&cursor) {
            let next = node.next;
            if pred(&node.request) {
                removed.push(self.unlink(cursor));
            }
            cursor = next;
        }
        removed
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            ledger: self,
            cursor: self.head,
            remaining: self.size,
        }
    }

    fn reclaim_stale(&mut self, budget: usize) {
        for _ in 0..budget {
            if self.reclaimed >= self.lastid {
                return;
            }
            self.reclaimed = RequestId(self.reclaimed.0.wrapping_add(U256::ONE));
            self.nodes.remove(&self.reclaimed);
        }
    }

    /// Number of entries in the id map, including unreachable ones awaiting
    /// reclamation.
    pub fn map_len(&self) -> usize {
        self.nodes.len()
    }

    /// Checks link consistency, id bounds, size and the cached sum.
    pub fn check_structure(&self) -> Result<(), String> {
        let mut seen = 0usize;
        let mut prev = RequestId::NULL;
        let mut cursor = self.head;
        let mut sum = U256::ZERO;
        while !cursor.is_null() {
            if seen > self.size {
                return Err(format!("forward walk exceeds size {} (cycle?)", self.size));
            }
            let node = self
                .nodes
                .get(&cursor)
                .ok_or_else(|| format!("dangling link to {cursor}"))?;
            if node.prev != prev {
                return Err(format!("node {cursor} has prev {} expected {prev}", node.prev));
            }
            if cursor <= self.lastid || cursor >= self.next_id {
                return Err(format!("node {cursor} outside ({}, {})", self.lastid, self.next_id));
            }
            if !prev.is_null() && cursor <= prev {
                return Err(format!("ids not ascending at {cursor}"));
            }
            if node.request.id != cursor {
                return Err(format!("node {cursor} stores id {}", node.request.id));
            }
            sum = sum.wrapping_add(node.request.amount);
            seen += 1;
            prev = cursor;
            cursor = node.next;
        }
        if prev != self.tail {
            return Err(format!("tail is {} but walk ended at {prev}", self.tail));
        }
        if seen != self.size {
            return Err(format!("walked {seen} nodes, size is {}", self.size));
        }
        if self.size > self.max_size {
            return Err(format!("size {} exceeds cap {}", self.size, self.max_size));
        }
        if sum != self.amount_sum {
            return Err(format!("cached sum {} != walked sum {sum}", self.amount_sum));
        }
        if self.mode == ArithmeticMode::Fixed && self.exact_sum().carries != 0 {
            return Err("fixed-mode sum wrapped".into());
        }
        // Backward walk visits the same nodes in reverse.
        let mut back = 0usize;
        let mut cursor = self.tail;
        while let Some(node) = self.nodes.get(&cursor).filter(|_| !cursor.is_null()) {
            back += 1;
            if back > self.size {
                return Err("backward walk exceeds size".into());
            }
            cursor = node.prev;
        }
        if back != self.size {
            return Err(format!("backward walk saw {back} nodes, size is {}", self.size));
        }
        Ok(())
    }
}

pub struct Iter<'a> {
    ledger: &'a Ledger,
    cursor: RequestId,
    remaining: usize,
}

impl<'a> Iterator for Iter<'a> {
    type Item = &'a Request;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor.is_null() {
            return None;
        }
        let node = self.ledger.nodes.get(&self.cursor)?;
        self.cursor = node.next;
        self.remaining = self.remaining.saturating_sub(1);
        Some(&node.request)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl<'a> IntoIterator for &'a Ledger {
    type Item = &'a Request;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl PartialEq for Ledger {
    fn eq(&self, other: &Self) -> bool {
        self.next_id == other.next_id
            && self.lastid == other.lastid
            && self.max_size == other.max_size
            && self.size == other.size
            && self.amount_sum == other.amount_sum
            && self.mode == other.mode
            && self.iter().eq(other.iter())
    }
}

impl Eq for Ledger {}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("mode", &self.mode)
            .field("max_size", &self.max_size)
            .field("next_id", &self.next_id)
            .field("lastid", &self.lastid)
            .field("amount_sum", &self.amount_sum)
            .field("requests", &self.iter().collect::<Vec<_>>())
            .finish()
    }
}

/// Persisted form: the live requests in list order plus the counters.
#[derive(Serialize, Deserialize)]
struct LedgerRepr {
    max_size: usize,
    mode: ArithmeticMode,
    next_id: RequestId,
    lastid: RequestId,
    requests: Vec<Request>,
}

impl Serialize for Ledger {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LedgerRepr {
            max_size: self.max_size,
            mode: self.mode,
            next_id: self.next_id,
            lastid: self.lastid,
            requests: self.iter().cloned().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ledger {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = LedgerRepr::deserialize(deserializer)?;
        let mut ledger = Ledger::new(repr.max_size, repr.mode).map_err(D::Error::custom)?;
        if repr.next_id.is_null() || repr.lastid >= repr.next_id {
            return Err(D::Error::custom("ledger counters out of order"));
        }
        if repr.requests.len() > repr.max_size {
            return Err(D::Error::custom("ledger holds more requests than its cap"));
        }
        let mut prev = repr.lastid;
        for request in repr.requests {
            let id = request.id;
            if id <= prev || id >= repr.next_id {
                return Err(D::Error::custom(format!("request id {id} out of order")));
            }
            if request.amount.is_zero() {
                return Err(D::Error::custom(format!("request {id} has zero amount")));
            }
            if ledger.mode == ArithmeticMode::Fixed && ledger.amount_sum.checked_add(request.amount).is_none() {
                return Err(D::Error::custom("fixed-mode ledger sum overflows"));
            }
            ledger.link_tail(request);
            prev = id;
        }
        ledger.next_id = repr.next_id;
        ledger.lastid = repr.lastid;
        ledger.reclaimed = repr.lastid;
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(n: u64) -> Address {
        Address::from_low_u64(n)
    }

    fn amt(n: u64) -> Amount {
        U256::from_u64(n)
    }

    fn ids(ledger: &Ledger) -> Vec<u64> {
        ledger.iter().map(|r| r.id.0.to_u64().unwrap()).collect()
    }

    fn filled(n: u64, mode: ArithmeticMode) -> Ledger {
        let mut l = Ledger::new(16, mode).unwrap();
        for i in 0..n {
            l.insert(amt(1), addr(9), i, addr(2), amt(1000)).unwrap();
        }
        l
    }

    #[test]
    fn new_ledger_is_empty() {
        let l = Ledger::new(8, ArithmeticMode::Fixed).unwrap();
        assert_eq!(l.len(), 0);
        assert!(l.head().is_null());
        assert_eq!(l.next_id(), RequestId::from(1));
        assert_eq!(l.amount_sum(), U256::ZERO);
        assert_eq!(
            Ledger::new(0, ArithmeticMode::Fixed).unwrap_err(),
            LedgerError::InvalidConfig
        );
    }

    #[test]
    fn one_slot_ledger_fills() {
        let mut l = Ledger::new(1, ArithmeticMode::Legacy).unwrap();
        l.insert(amt(1), addr(9), 0, addr(2), amt(5)).unwrap();
        assert_eq!(
            l.insert(amt(1), addr(9), 0, addr(2), amt(5)),
            Err(LedgerError::LedgerFull)
        );
    }

    #[test]
    fn first_insert_gets_id_one() {
        let mut l = Ledger::new(8, ArithmeticMode::Fixed).unwrap();
        let id = l.insert(amt(2), addr(9), 0, addr(2), amt(5)).unwrap();
        assert_eq!(id, RequestId::from(1));
        assert_eq!(l.amount_sum(), amt(2));
        assert_eq!(l.get(id).unwrap().amount, amt(2));
        assert_eq!(l.get(RequestId::NULL), Err(LedgerError::NotFound));
    }

    #[test]
    fn zero_amount_and_insufficient_funds_rejected() {
        let mut l = Ledger::new(8, ArithmeticMode::Fixed).unwrap();
        assert_eq!(
            l.insert(amt(0), addr(9), 0, addr(2), amt(5)),
            Err(LedgerError::ZeroAmount)
        );
        l.insert(amt(4), addr(9), 0, addr(2), amt(5)).unwrap();
        assert_eq!(
            l.insert(amt(2), addr(9), 0, addr(2), amt(5)),
            Err(LedgerError::InsufficientFunds)
        );
    }

    #[test]
    fn legacy_overflow_request_wraps_sum() {
        let mut l = Ledger::new(8, ArithmeticMode::Legacy).unwrap();
        l.insert(amt(2), addr(9), 0, addr(2), amt(3)).unwrap();
        let big = U256::MAX.wrapping_sub(amt(1));
        l.insert(big, addr(9), 1, addr(2), amt(3)).unwrap();
        assert_eq!(l.amount_sum(), U256::ZERO);
        assert_eq!(l.exact_sum().carries, 1);
        l.check_structure().unwrap();
    }

    #[test]
    fn fixed_overflow_request_rejected() {
        let mut l = Ledger::new(8, ArithmeticMode::Fixed).unwrap();
        l.insert(amt(2), addr(9), 0, addr(2), amt(3)).unwrap();
        let big = U256::MAX.wrapping_sub(amt(1));
        assert_eq!(l.insert(big, addr(9), 1, addr(2), amt(3)), Err(LedgerError::Overflow));
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn remove_middle_rewires_links() {
        let mut l = filled(3, ArithmeticMode::Fixed);
        l.remove(RequestId::from(2)).unwrap();
        assert_eq!(ids(&l), vec![1, 3]);
        l.check_structure().unwrap();
        assert_eq!(l.remove(RequestId::from(2)), Err(LedgerError::NotFound));
    }

    #[test]
    fn remove_singleton_empties() {
        let mut l = filled(1, ArithmeticMode::Fixed);
        l.remove(RequestId::from(1)).unwrap();
        assert!(l.is_empty());
        assert!(l.head().is_null());
        l.check_structure().unwrap();
    }

    #[test]
    fn cancel_all_raises_watermark() {
        let mut l = filled(3, ArithmeticMode::Fixed);
        assert_eq!(l.cancel_all(), 3);
        assert_eq!(l.lastid(), RequestId::from(3));
        for k in 1..=3 {
            assert_eq!(l.get(RequestId::from(k)), Err(LedgerError::NotFound));
            assert_eq!(l.remove(RequestId::from(k)), Err(LedgerError::NotFound));
        }
        let id = l.insert(amt(1), addr(9), 5, addr(2), amt(10)).unwrap();
        assert_eq!(id, RequestId::from(4));
        assert_eq!(ids(&l), vec![4]);
        l.check_structure().unwrap();

        let mut empty = Ledger::new(2, ArithmeticMode::Fixed).unwrap();
        assert_eq!(empty.cancel_all(), 0);
    }

    #[test]
    fn stale_nodes_are_reclaimed() {
        let mut l = filled(6, ArithmeticMode::Fixed);
        l.cancel_all();
        assert_eq!(l.map_len(), 6);
        for i in 0..3 {
            l.insert(amt(1), addr(9), i, addr(2), amt(100)).unwrap();
        }
        assert_eq!(l.map_len(), 3);
        l.check_structure().unwrap();
    }

    #[test]
    fn remove_by_initiator_preserves_order() {
        let mut l = Ledger::new(8, ArithmeticMode::Fixed).unwrap();
        for who in [1, 2, 1, 3] {
            l.insert(amt(1), addr(9), 0, addr(who), amt(100)).unwrap();
        }
        assert_eq!(l.remove_by_initiator(addr(1)), 2);
        assert_eq!(ids(&l), vec![2, 4]);
        assert_eq!(l.remove_by_initiator(addr(7)), 0);
        assert_eq!(l.remove_by_initiator(addr(2)), 1);
        assert_eq!(l.remove_by_initiator(addr(3)), 1);
        assert!(l.is_empty());
        l.check_structure().unwrap();
    }

    #[test]
    fn serde_round_trip_keeps_counters() {
        let mut l = filled(4, ArithmeticMode::Legacy);
        l.remove(RequestId::from(2)).unwrap();
        let json = serde_json::to_string(&l).unwrap();
        let back: Ledger = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
        back.check_structure().unwrap();
    }

    #[test]
    fn deserialize_rejects_ids_at_or_below_lastid() {
        let json = r#"{"max_size":4,"mode":"fixed","next_id":"5","lastid":"3",
            "requests":[{"id":"2","amount":"1","recipient":"0x0000000000000000000000000000000000000009",
            "creation":0,"initiator":"0x0000000000000000000000000000000000000002"}]}"#;
        assert!(serde_json::from_str::<Ledger>(json).is_err());
    }
}
