//! Per-weight bookkeeping of pending bits during carry-save reduction.

use std::collections::VecDeque;

use crate::blocks::{EncodedPair, Sign, SignedBit};
use crate::error::{invariant, SynthError};
use crate::netlist::WireRef;

#[derive(Clone, Debug, Default)]
struct Column {
    plain: VecDeque<SignedBit>,
    pairs: VecDeque<EncodedPair>,
}

/// FIFO queues of plain bits and encoded pairs for every weight.
#[derive(Clone, Debug)]
pub struct ColumnLedger {
    columns: Vec<Column>,
}

impl ColumnLedger {
    pub fn new(width: usize) -> Self {
        ColumnLedger {
            columns: vec![Column::default(); width],
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    fn column(&mut self, weight: u32) -> Result<&mut Column, SynthError> {
        let width = self.columns.len();
        self.columns
            .get_mut(weight as usize)
            .ok_or_else(|| invariant(format!("weight {weight} outside ledger of width {width}")))
    }

    pub fn push_bit(&mut self, bit: SignedBit) -> Result<(), SynthError> {
        self.column(bit.weight)?.plain.push_back(bit);
        Ok(())
    }

    pub fn push_pair(&mut self, pair: EncodedPair) -> Result<(), SynthError> {
        self.column(pair.weight)?.pairs.push_back(pair);
        Ok(())
    }

    /// Number of bits at `weight`, a pair counting as two.
    pub fn h(&self, weight: u32) -> usize {
        let c = &self.columns[weight as usize];
        c.plain.len() + 2 * c.pairs.len()
    }

    /// Bits at `weight` with sign `sign`, including pair members.
    pub fn h_signed(&self, weight: u32, sign: Sign) -> usize {
        let c = &self.columns[weight as usize];
        let plain = c.plain.iter().filter(|b| b.sign == sign).count();
        let pair_x = if sign == Sign::Plus { c.pairs.len() } else { 0 };
        let pair_y = c.pairs.iter().filter(|p| p.sign_y == sign).count();
        plain + pair_x + pair_y
    }

    pub fn h_plus(&self, weight: u32) -> usize {
        self.h_signed(weight, Sign::Plus)
    }

    pub fn h_minus(&self, weight: u32) -> usize {
        self.h_signed(weight, Sign::Minus)
    }

    pub fn plain_len(&self, weight: u32) -> usize {
        self.columns[weight as usize].plain.len()
    }

    pub fn pair_len(&self, weight: u32) -> usize {
        self.columns[weight as usize].pairs.len()
    }

    pub fn is_empty(&self, weight: u32) -> bool {
        self.h(weight) == 0
    }

    /// Removes the oldest plain bit, restricted to `sign` if given.
    pub fn pop_plain(&mut self, weight: u32, sign: Option<Sign>) -> Result<SignedBit, SynthError> {
        let col = self.column(weight)?;
        let pos = col.plain.iter().position(|b| sign.is_none_or(|s| b.sign == s));
        pos.and_then(|p| col.plain.remove(p))
            .ok_or_else(|| invariant(format!("no plain {sign:?} bit left at weight {weight}")))
    }

    /// Removes the plain bit carried by `wire`.
    pub fn take_wire(&mut self, weight: u32, wire: WireRef) -> Result<SignedBit, SynthError> {
        let col = self.column(weight)?;
        let pos = col.plain.iter().position(|b| b.wire == wire);
        pos.and_then(|p| col.plain.remove(p))
            .ok_or_else(|| invariant(format!("wire {wire} not pending at weight {weight}")))
    }

    pub fn pop_pair(&mut self, weight: u32) -> Result<EncodedPair, SynthError> {
        self.column(weight)?
            .pairs
            .pop_front()
            .ok_or_else(|| invariant(format!("no pair left at weight {weight}")))
    }

    pub fn ensure_empty(&self, weight: u32) -> Result<(), SynthError> {
        if self.is_empty(weight) {
            Ok(())
        } else {
            Err(invariant(format!(
                "column {weight} still holds {} bits after reduction",
                self.h(weight)
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(i: usize) -> WireRef {
        WireRef::from_index(i)
    }

    #[test]
    fn fifo_and_counts() {
        let mut l = ColumnLedger::new(3);
        l.push_bit(SignedBit::plus(w(0), 1)).unwrap();
        l.push_bit(SignedBit::minus(w(1), 1)).unwrap();
        l.push_bit(SignedBit::plus(w(2), 1)).unwrap();
        l.push_pair(EncodedPair { x: w(3), x_xor_y: w(4), sign_y: Sign::Minus, weight: 1 })
            .unwrap();
        assert_eq!(l.h(1), 5);
        assert_eq!((l.h_plus(1), l.h_minus(1)), (3, 2));
        assert_eq!(l.pop_plain(1, Some(Sign::Minus)).unwrap().wire, w(1));
        assert_eq!(l.pop_plain(1, None).unwrap().wire, w(0));
        assert_eq!(l.take_wire(1, w(2)).unwrap().wire, w(2));
        assert!(l.pop_plain(1, None).is_err());
        assert_eq!(l.pop_pair(1).unwrap().x, w(3));
        l.ensure_empty(1).unwrap();
    }

    #[test]
    fn out_of_range_weight_is_an_invariant() {
        let mut l = ColumnLedger::new(2);
        let err = l.push_bit(SignedBit::plus(w(0), 2)).unwrap_err();
        assert!(err.is_invariant());
    }
}
