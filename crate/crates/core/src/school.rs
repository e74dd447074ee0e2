//! School-method multiplier: all `n^2` partial products reduced column by
//! column with a greedy carry-save schedule.
//!
//! Per column, while more than one bit remains:
//! * five or more bits: MDFA on two pairs and a plain bit, forming missing
//!   pairs from the two oldest plain bits;
//! * three or four bits: FA3, or SFA3 when one pair is pending;
//! * two bits: HA.
//!
//! Sums stay in the column, carries move up. The last bit is the product bit.

use crate::blocks::{self, BlockCensus, BlockKind, SignedBit};
use crate::error::{invariant, SynthError};
use crate::ledger::ColumnLedger;
use crate::netlist::{GateKind, NetlistBuilder, WireRef};

/// Product bits (LSB first) plus the column heights seen when each column
/// started its reduction.
#[derive(Clone, Debug)]
pub struct SchoolOut {
    pub bits: Vec<WireRef>,
    pub profile: Vec<usize>,
}

/// Exact gate count of the `n`-bit school multiplier.
pub fn predict_school_count(n: usize) -> usize {
    match n {
        0 => 0,
        1 => 1,
        _ => (11 * n * n - 13 * n) / 2 - 1 + n % 2,
    }
}

/// Block inventory the schedule produces for `n >= 4`.
pub fn expected_census(n: usize) -> Option<BlockCensus> {
    if n < 4 {
        return None;
    }
    let odd = n % 2;
    let q = (n * n - 3 * n) / 2 + 1 - odd;
    let mut c = BlockCensus::default();
    c.blocks.insert(BlockKind::Ha, n);
    c.blocks.insert(BlockKind::Fa3, n - 3 + 2 * odd);
    c.blocks.insert(BlockKind::Sfa3, 1);
    c.blocks.insert(BlockKind::Mdfa, q);
    c.conversion_xors = q + 1;
    c.and_gates = n * n;
    Some(c)
}

/// Starting column heights for `n >= 4`, indexed by weight.
pub fn expected_profile(n: usize) -> Option<Vec<usize>> {
    if n < 4 {
        return None;
    }
    // Heights below are indexed from 1 to 2n.
    let h = |k: usize| -> usize {
        if k == 1 {
            1
        } else if k <= n {
            2 * k - 2
        } else if k == n + 1 {
            2 * n - 2
        } else {
            2 * (2 * n - k) + 1
        }
    };
    Some((1..=2 * n).map(h).collect())
}

/// Emits an `n x n` school multiplier over existing operand wires.
pub fn emit_school(
    b: &mut NetlistBuilder,
    x: &[WireRef],
    y: &[WireRef],
    census: &mut BlockCensus,
) -> Result<SchoolOut, SynthError> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(SynthError::UnsupportedWidth {
            method: "school",
            bits: n,
            reason: format!("operands of widths {} and {} must match and be non-empty", x.len(), y.len()),
        });
    }
    let mut local = BlockCensus::default();
    if n == 1 {
        let p = b.add_gate(GateKind::And, x[0], y[0])?;
        local.and_gates = 1;
        census.merge(&local);
        return Ok(SchoolOut { bits: vec![p], profile: vec![1] });
    }

    let width = 2 * n;
    let mut ledger = ColumnLedger::new(width);
    for w in 0..2 * n - 1 {
        for i in w.saturating_sub(n - 1)..=w.min(n - 1) {
            let g = b.add_gate(GateKind::And, x[i], y[w - i])?;
            ledger.push_bit(SignedBit::plus(g, w as u32))?;
        }
    }
    local.and_gates = n * n;

    let mut bits = Vec::with_capacity(width);
    let mut profile = Vec::with_capacity(width);
    for w in 0..width as u32 {
        profile.push(ledger.h(w));
        while ledger.h(w) > 1 {
            reduce_step(b, &mut ledger, w, &mut local)?;
        }
        let bit = ledger.pop_plain(w, None)?;
        bits.push(bit.wire);
        ledger.ensure_empty(w)?;
    }
    census.merge(&local);
    Ok(SchoolOut { bits, profile })
}

fn reduce_step(
    b: &mut NetlistBuilder,
    ledger: &mut ColumnLedger,
    w: u32,
    census: &mut BlockCensus,
) -> Result<(), SynthError> {
    let h = ledger.h(w);
    let pairs = ledger.pair_len(w);
    let plain = ledger.plain_len(w);
    let stuck = || invariant(format!("no block fits column {w} with {plain} plain bits and {pairs} pairs"));
    if h >= 5 {
        let mut operands = Vec::with_capacity(2);
        while operands.len() < 2 {
            if ledger.pair_len(w) > 0 {
                operands.push(ledger.pop_pair(w)?);
            } else {
                let p = ledger.pop_plain(w, None)?;
                let q = ledger.pop_plain(w, None)?;
                operands.push(blocks::encode_pair(b, p, q)?);
                census.conversion_xors += 1;
            }
        }
        if ledger.plain_len(w) == 0 {
            return Err(stuck());
        }
        let z = ledger.pop_plain(w, None)?;
        let out = blocks::mdfa(b, operands[0], operands[1], z)?;
        census.record(BlockKind::Mdfa);
        ledger.push_bit(out.sum)?;
        ledger.push_pair(out.carry)?;
    } else if h >= 3 {
        let out = match (pairs, plain) {
            (0, _) => {
                let x1 = ledger.pop_plain(w, None)?;
                let x2 = ledger.pop_plain(w, None)?;
                let x3 = ledger.pop_plain(w, None)?;
                census.record(BlockKind::Fa3);
                blocks::fa3(b, x1, x2, x3)?
            }
            (1, 1..) => {
                let p = ledger.pop_pair(w)?;
                let x3 = ledger.pop_plain(w, None)?;
                census.record(BlockKind::Sfa3);
                blocks::sfa3(b, p, x3)?
            }
            _ => return Err(stuck()),
        };
        ledger.push_bit(out.sum)?;
        ledger.push_bit(out.carry)?;
    } else if plain == 2 {
        let x1 = ledger.pop_plain(w, None)?;
        let x2 = ledger.pop_plain(w, None)?;
        let out = blocks::ha(b, x1, x2)?;
        census.record(BlockKind::Ha);
        ledger.push_bit(out.sum)?;
        ledger.push_bit(out.carry)?;
    } else {
        return Err(stuck());
    }
    Ok(())
}

/// Checks a finished school emission against its closed forms.
pub(crate) fn check_school(n: usize, out: &SchoolOut, census: &BlockCensus) -> Result<(), SynthError> {
    if census.gate_total() != predict_school_count(n) {
        return Err(invariant(format!(
            "school({n}) emitted {} gates, closed form says {}",
            census.gate_total(),
            predict_school_count(n)
        )));
    }
    if let Some(expected) = expected_census(n) {
        if *census != expected {
            return Err(invariant(format!("school({n}) census {census:?} differs from {expected:?}")));
        }
    }
    if let Some(expected) = expected_profile(n) {
        if out.profile != expected {
            return Err(invariant(format!(
                "school({n}) column heights {:?} differ from {expected:?}",
                out.profile
            )));
        }
    }
    Ok(())
}
