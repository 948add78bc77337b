//! Limit-order-book reconstruction and order-aggressiveness classification.
//!
//! Events are replayed through a price-time-priority matching engine; each
//! submission is classified into one of ten aggressiveness categories
//! (+1..+5 for buys, -1..-5 for sells) against the book state as it stood
//! *before* the order matched. Magnitude 5 marks a marketable order that
//! outruns the opposite depth at its limit (partial fill), 4 a fully filled
//! marketable order, 3 a placement inside the spread, 2 a join of the best
//! same-side quote, 1 a placement deeper in the same-side book.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    /// +1 for buys, -1 for sells.
    pub fn sign(self) -> i8 {
        match self {
            Side::Buy => 1,
            Side::Sell => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Submit,
    Cancel,
}

/// One limit-order event. Prices are integer tick counts so that "equal to
/// the best price" is exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderEvent {
    pub seq: u64,
    pub side: Side,
    pub price: u64,
    pub quantity: u64,
    pub kind: EventKind,
    /// Required for cancels; submissions only need one if they are to be
    /// cancelled later.
    pub order_id: Option<u64>,
}

impl OrderEvent {
    pub fn validate(&self) -> Result<()> {
        if self.price == 0 {
            return Err(Error::InvalidEvent(format!(
                "event {}: price must be >= 1 tick",
                self.seq
            )));
        }
        if self.quantity == 0 {
            return Err(Error::InvalidEvent(format!(
                "event {}: quantity must be >= 1 share",
                self.seq
            )));
        }
        if self.kind == EventKind::Cancel && self.order_id.is_none() {
            return Err(Error::InvalidEvent(format!(
                "event {}: cancel without order_id",
                self.seq
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct RestingOrder {
    side: Side,
    price: u64,
    remaining: u64,
    external_id: Option<u64>,
}

/// Reconstructed book: aggregate depth per price level plus FIFO queues for
/// price-time matching. Levels with zero quantity are removed, and the
/// resting book is never crossed after matching completes.
#[derive(Debug, Clone, Default)]
pub struct BookState {
    bids: BTreeMap<u64, u64>,
    asks: BTreeMap<u64, u64>,
    /// FIFO of resting-order handles per (side-specific) price level.
    bid_queues: BTreeMap<u64, VecDeque<u64>>,
    ask_queues: BTreeMap<u64, VecDeque<u64>>,
    orders: HashMap<u64, RestingOrder>,
    by_external: HashMap<u64, u64>,
    next_handle: u64,
}

/// Outcome of applying a submission: how much matched and how much rested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub executed: u64,
    pub rested: u64,
}

impl BookState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<u64> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<u64> {
        self.asks.keys().next().copied()
    }

    pub fn bid_depth(&self, price: u64) -> u64 {
        self.bids.get(&price).copied().unwrap_or(0)
    }

    pub fn ask_depth(&self, price: u64) -> u64 {
        self.asks.get(&price).copied().unwrap_or(0)
    }

    /// Total opposite-side quantity matchable by a `side` order at `price`:
    /// ask depth at prices <= price for buys, bid depth at prices >= price
    /// for sells.
    pub fn matchable(&self, side: Side, price: u64) -> u64 {
        match side {
            Side::Buy => self.asks.range(..=price).map(|(_, &q)| q).sum(),
            Side::Sell => self.bids.range(price..).map(|(_, &q)| q).sum(),
        }
    }

    fn levels_mut(
        &mut self,
        side: Side,
    ) -> (&mut BTreeMap<u64, u64>, &mut BTreeMap<u64, VecDeque<u64>>) {
        match side {
            Side::Buy => (&mut self.bids, &mut self.bid_queues),
            Side::Sell => (&mut self.asks, &mut self.ask_queues),
        }
    }

    fn rest(&mut self, side: Side, price: u64, quantity: u64, external_id: Option<u64>) {
        let handle = self.next_handle;
        self.next_handle += 1;
        self.orders.insert(
            handle,
            RestingOrder {
                side,
                price,
                remaining: quantity,
                external_id,
            },
        );
        if let Some(ext) = external_id {
            self.by_external.insert(ext, handle);
        }
        let (levels, queues) = self.levels_mut(side);
        *levels.entry(price).or_insert(0) += quantity;
        queues.entry(price).or_default().push_back(handle);
    }

    /// Matches a submission against the opposite side up to its limit price,
    /// best levels first, FIFO within a level; the remainder rests.
    fn match_and_rest(&mut self, event: &OrderEvent) -> Execution {
        let mut remaining = event.quantity;
        loop {
            let best = match event.side {
                Side::Buy => self.best_ask().filter(|&p| p <= event.price),
                Side::Sell => self.best_bid().filter(|&p| p >= event.price),
            };
            let Some(level_price) = best else { break };
            if remaining == 0 {
                break;
            }

            let BookState {
                bids,
                asks,
                bid_queues,
                ask_queues,
                orders,
                by_external,
                ..
            } = &mut *self;
            let (levels, queues) = match event.side.opposite() {
                Side::Buy => (bids, bid_queues),
                Side::Sell => (asks, ask_queues),
            };
            let queue = queues.get_mut(&level_price).expect("queue for live level");
            while remaining > 0 {
                let Some(&handle) = queue.front() else { break };
                let resting = orders.get_mut(&handle).expect("queued order exists");
                let fill = remaining.min(resting.remaining);
                resting.remaining -= fill;
                remaining -= fill;
                *levels.get_mut(&level_price).expect("level exists") -= fill;
                if resting.remaining == 0 {
                    if let Some(ext) = resting.external_id {
                        by_external.remove(&ext);
                    }
                    orders.remove(&handle);
                    queue.pop_front();
                }
            }
            if levels.get(&level_price) == Some(&0) {
                levels.remove(&level_price);
                queues.remove(&level_price);
            }
        }

        let executed = event.quantity - remaining;
        if remaining > 0 {
            self.rest(event.side, event.price, remaining, event.order_id);
        }
        Execution {
            executed,
            rested: remaining,
        }
    }

    fn cancel(&mut self, event: &OrderEvent) -> Result<()> {
        let ext = event.order_id.expect("validated cancel has an id");
        let &handle = self
            .by_external
            .get(&ext)
            .ok_or_else(|| Error::UnknownOrder {
                id: ext.to_string(),
            })?;
        let resting = self.orders.get_mut(&handle).expect("indexed order exists");
        if event.quantity > resting.remaining {
            return Err(Error::CancelExceedsQuantity {
                id: ext.to_string(),
                resting: resting.remaining,
                requested: event.quantity,
            });
        }
        resting.remaining -= event.quantity;
        let (side, price, gone) = (resting.side, resting.price, resting.remaining == 0);
        if gone {
            self.orders.remove(&handle);
            self.by_external.remove(&ext);
        }
        let (levels, queues) = self.levels_mut(side);
        let level = levels.get_mut(&price).expect("level backs resting order");
        *level -= event.quantity;
        if *level == 0 {
            levels.remove(&price);
            queues.remove(&price);
        } else if gone {
            queues
                .get_mut(&price)
                .expect("queue backs resting order")
                .retain(|&h| h != handle);
        }
        Ok(())
    }
}

/// Applies one event to the book, returning the execution summary for
/// submissions (cancels return zero).
pub fn apply_event(book: &mut BookState, event: &OrderEvent) -> Result<Execution> {
    event.validate()?;
    match event.kind {
        EventKind::Submit => Ok(book.match_and_rest(event)),
        EventKind::Cancel => {
            book.cancel(event)?;
            Ok(Execution {
                executed: 0,
                rested: 0,
            })
        }
    }
}

fn classify_with_fallback(book: &BookState, order: &OrderEvent) -> (i8, bool) {
    let (best_same, best_opp) = match order.side {
        Side::Buy => (book.best_bid(), book.best_ask()),
        Side::Sell => (book.best_ask(), book.best_bid()),
    };
    let marketable = match (order.side, best_opp) {
        (Side::Buy, Some(ask)) => order.price >= ask,
        (Side::Sell, Some(bid)) => order.price <= bid,
        (_, None) => false,
    };
    let magnitude = if marketable {
        let matched = book.matchable(order.side, order.price);
        if order.quantity > matched {
            5
        } else {
            4
        }
    } else {
        match best_same {
            Some(same) if order.price == same => 2,
            Some(same) => {
                let inside = match order.side {
                    Side::Buy => order.price > same,
                    Side::Sell => order.price < same,
                };
                if inside {
                    3
                } else {
                    1
                }
            }
            // No same-side book to compare against: inside-the-void policy.
            None => return (3 * order.side.sign(), true),
        }
    };
    (magnitude * order.side.sign(), false)
}

/// Aggressiveness of a submission against the current book. Positive for
/// buys, negative for sells, magnitude per the five-category rule table.
pub fn classify(book: &BookState, order: &OrderEvent) -> Result<i8> {
    order.validate()?;
    if order.kind != EventKind::Submit {
        return Err(Error::InvalidEvent(format!(
            "event {}: only submissions are classified",
            order.seq
        )));
    }
    Ok(classify_with_fallback(book, order).0)
}

/// The central analysis object: one classified value per submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggressivenessSeries {
    pub stock_id: String,
    pub values: Vec<i8>,
}

impl AggressivenessSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Bookkeeping from a build_series replay, recorded in output metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub submissions: usize,
    pub cancels: usize,
    /// Submissions classified +-3 because no same-side best price existed.
    pub void_fallbacks: usize,
    pub executed_shares: u64,
}

/// Replays an event stream, classifying every submission against the book
/// state before it matches. Cancels update the book but emit nothing.
pub fn build_series(
    events: &[OrderEvent],
    stock_id: &str,
) -> Result<(AggressivenessSeries, BuildStats)> {
    let mut book = BookState::new();
    let mut values = Vec::new();
    let mut stats = BuildStats::default();
    for event in events {
        let step = (|| -> Result<()> {
            event.validate()?;
            if event.kind == EventKind::Submit {
                let (a, fallback) = classify_with_fallback(&book, event);
                values.push(a);
                stats.submissions += 1;
                if fallback {
                    stats.void_fallbacks += 1;
                }
            } else {
                stats.cancels += 1;
            }
            let exec = apply_event(&mut book, event)?;
            stats.executed_shares += exec.executed;
            Ok(())
        })();
        step.map_err(|e| Error::AtEvent {
            seq: event.seq,
            source: Box::new(e),
        })?;
    }
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok((
        AggressivenessSeries {
            stock_id: stock_id.to_string(),
            values,
        },
        stats,
    ))
}
