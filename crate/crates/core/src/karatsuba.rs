//! One level of Karatsuba: two pre-additions, three sub-products and a
//! signed carry-save adder-subtractor that combines them.
//!
//! With `n = ceil(m/2)`, `a = A1*2^n + B1` and `b = A2*2^n + B2`:
//!
//! ```text
//! a*b = P_high*2^(2n) + (P_mid - P_high - P_low)*2^n + P_low
//! P_high = A1*A2, P_low = B1*B2, P_mid = (A1+B1)*(A2+B2)
//! ```
//!
//! The adder-subtractor places five rows and reduces each column with a
//! fixed block plan. `P_low[n+i]` and `P_high[i]` meet with opposite signs
//! at weight `n+i` and again at `2n+i`, so the XOR and ANDNOT of that pair
//! can be computed once and used by both columns.

use crate::blocks::{
    self, Andn, BlockCensus, BlockKind, EncodedPair, PairTerms, Sign, SignedBit,
};
use crate::error::{invariant, SynthError};
use crate::ledger::ColumnLedger;
use crate::netlist::{GateKind, NetlistBuilder, WireRef};

/// Smallest width the adder-subtractor plan covers.
pub const MIN_KARATSUBA_BITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KaratsubaOptions {
    /// Use Karatsuba at the top level even where the school method is
    /// cheaper.
    pub force: bool,
    /// Reuse the terms of each `(P_low[n+i], P_high[i])` pair.
    pub sharing: bool,
}

impl Default for KaratsubaOptions {
    fn default() -> Self {
        KaratsubaOptions { force: false, sharing: true }
    }
}

/// True where one Karatsuba level beats the school method.
pub fn karatsuba_preferred(m: usize) -> bool {
    m == 16 || m >= 18
}

/// How much of pair `i`'s work is shared between its two columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Share {
    /// XOR and ANDNOT both reused: two gates saved.
    Double,
    /// Only the XOR reused: one gate saved.
    Single,
}

fn share_mode(i: usize, n: usize, odd: bool) -> Share {
    let cut = n - 2 * odd as usize;
    if i == 0 || (2..cut).contains(&i) {
        Share::Double
    } else {
        Share::Single
    }
}

/// Gates saved by sharing for an `m`-bit level.
pub fn shared_savings(m: usize) -> usize {
    let n = m.div_ceil(2);
    if m.is_multiple_of(2) {
        2 * n - 1
    } else {
        2 * n - 3
    }
}

/// Gates of the pre-adders plus the adder-subtractor for an `m`-bit level.
pub fn predict_overhead(m: usize, sharing: bool) -> usize {
    let n = m.div_ceil(2);
    let base = if m.is_multiple_of(2) { 38 * n - 2 } else { 38 * n - 16 };
    if sharing {
        base
    } else {
        base + shared_savings(m)
    }
}

/// Adder-subtractor result: product bits and per-weight starting heights.
#[derive(Clone, Debug)]
pub struct AddSubOut {
    pub bits: Vec<WireRef>,
    pub h_plus: Vec<usize>,
    pub h_minus: Vec<usize>,
}

/// Starting heights `(h+, h-)` the plan expects for an `m`-bit level.
pub fn expected_addsub_profile(m: usize) -> (Vec<usize>, Vec<usize>) {
    let n = m.div_ceil(2);
    let odd = m % 2 == 1;
    let (mut hp, mut hm) = (vec![0; 2 * m], vec![0; 2 * m]);
    for w in 0..2 * m {
        let (p, q) = if w < n {
            (1, 0)
        } else if w == n {
            (2, 2)
        } else if w == n + 1 {
            (3, 3)
        } else if w < 2 * m - n {
            (3, 4)
        } else if odd && (w == 3 * n - 2 || w == 3 * n - 1) {
            (3, 3)
        } else if w == 3 * n {
            (3, 2)
        } else if w == 3 * n + 1 {
            (3, 1)
        } else if w == 3 * n + 2 {
            (2, 1)
        } else {
            (2, 0)
        };
        hp[w] = p;
        hm[w] = q;
    }
    (hp, hm)
}

/// Block inventory of the adder-subtractor for an `m`-bit level.
pub fn expected_addsub_census(m: usize, sharing: bool) -> BlockCensus {
    let n = m.div_ceil(2);
    let odd = m % 2 == 1;
    let mut c = BlockCensus::default();
    c.blocks.insert(BlockKind::Nha, 1);
    c.blocks.insert(BlockKind::HaPm, if odd { 4 } else { 2 });
    let ha = if odd { n - 6 } else { n - 4 };
    if ha > 0 {
        c.blocks.insert(BlockKind::Ha, ha);
    }
    c.blocks.insert(BlockKind::Fa3Minus, 2 * m - 2 * n - 1);
    c.blocks.insert(BlockKind::Sfa3Minus, 1);
    c.blocks.insert(BlockKind::Fa3Zero, 1);
    c.blocks.insert(BlockKind::MdfaMinus, 2 * n);
    c.conversion_xors = 2 * n + 2;
    if sharing {
        c.shared_savings = shared_savings(m);
    }
    c
}

/// Shared terms of pair `i`, filled by its lower column.
#[derive(Clone, Copy, Debug, Default)]
struct SharedPair {
    xor: Option<WireRef>,
    /// `P_low[n+i] & !P_high[i]`
    andn: Option<WireRef>,
}

struct AddSub<'a> {
    b: &'a mut NetlistBuilder,
    ledger: ColumnLedger,
    census: BlockCensus,
    n: usize,
    m: usize,
    low: &'a [WireRef],
    high: &'a [WireRef],
    mid: &'a [WireRef],
    shared: Vec<SharedPair>,
    sharing: bool,
}

impl AddSub<'_> {
    fn share(&self, i: usize) -> Option<Share> {
        self.sharing.then(|| share_mode(i, self.n, self.m % 2 == 1))
    }

    fn missing(&self, i: usize) -> SynthError {
        invariant(format!("shared terms of pair {i} used before they were computed"))
    }

    fn plus(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        self.ledger.pop_plain(w, Some(Sign::Plus))
    }

    fn minus(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        self.ledger.pop_plain(w, Some(Sign::Minus))
    }

    /// Encodes the oldest pending `+` and `-` bits as a pair.
    fn fresh_pair(&mut self, w: u32) -> Result<EncodedPair, SynthError> {
        let x = self.plus(w)?;
        let y = self.minus(w)?;
        self.census.conversion_xors += 1;
        blocks::encode_pair(self.b, x, y)
    }

    fn mdfa_minus(&mut self, p1: EncodedPair, p2: EncodedPair, z: SignedBit) -> Result<SignedBit, SynthError> {
        let out = blocks::mdfa_minus(self.b, p1, p2, z)?;
        self.census.record(BlockKind::MdfaMinus);
        self.ledger.push_pair(out.carry)?;
        Ok(out.sum)
    }

    /// HA± on a `+` bit and the remaining `-` bit; returns the result bit.
    fn ha_pm(&mut self, w: u32, v: SignedBit) -> Result<SignedBit, SynthError> {
        let r = self.minus(w)?;
        let out = blocks::ha_pm(self.b, v, r)?;
        self.census.record(BlockKind::HaPm);
        self.ledger.push_bit(out.carry)?;
        Ok(out.sum)
    }

    /// Column `n`: FA3- on `P_mid[0]` and pair 0, then NHA with `P_low[0]`.
    fn column_n(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let n = self.n;
        let a = self.ledger.take_wire(w, self.low[n])?;
        let bb = self.ledger.take_wire(w, self.high[0])?;
        let x1 = self.ledger.take_wire(w, self.mid[0])?;
        let out = blocks::fa3_minus(self.b, x1, a, bb, PairTerms::default())?;
        self.census.record(BlockKind::Fa3Minus);
        if self.share(0).is_some() {
            let Some(Andn::Direct(g)) = out.terms.andn else {
                return Err(invariant("column n FA3- did not produce a direct ANDNOT"));
            };
            self.shared[0] = SharedPair { xor: out.terms.xor, andn: Some(g) };
        }
        self.ledger.push_bit(out.out.carry)?;
        let c = self.minus(w)?;
        let nha = blocks::nha(self.b, out.out.sum, c)?;
        self.census.record(BlockKind::Nha);
        self.ledger.push_bit(nha.carry)?;
        Ok(nha.sum)
    }

    /// Column `n+1`: MDFA- on pair 1 and a fresh pair, then HA±.
    fn column_n1(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let n = self.n;
        let a = self.ledger.take_wire(w, self.low[n + 1])?;
        let bb = self.ledger.take_wire(w, self.high[1])?;
        let p1 = blocks::encode_pair(self.b, a, bb)?;
        self.census.conversion_xors += 1;
        if self.share(1).is_some() {
            self.shared[1].xor = Some(p1.x_xor_y);
        }
        let p2 = self.fresh_pair(w)?;
        let z = self.plus(w)?;
        let v = self.mdfa_minus(p1, p2, z)?;
        self.ha_pm(w, v)
    }

    /// Generic middle column: FA3- on the pair and the oldest `-` bit,
    /// then MDFA- on the incoming carry pair and a fresh pair.
    fn column_mid(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let (n, wi) = (self.n, w as usize);
        let lower = wi < 2 * n;
        let i = if lower { wi - n } else { wi - 2 * n };
        let (pa, pb) = (self.low[n + i], self.high[i]);
        let a = self.ledger.take_wire(w, pa)?;
        let bb = self.ledger.take_wire(w, pb)?;
        let (plus_bit, minus_bit) = if lower { (a, bb) } else { (bb, a) };
        let c = self.minus(w)?;
        let share = self.share(i);
        let mut term_gates = 0;
        let terms = match (lower, share) {
            (true, Some(Share::Double)) => {
                let e = self.b.add_gate(GateKind::Xor, pa, pb)?;
                let g = self.b.add_gate(GateKind::AndN2, pa, pb)?;
                term_gates = 2;
                self.shared[i] = SharedPair { xor: Some(e), andn: Some(g) };
                PairTerms { xor: Some(e), andn: Some(Andn::Reverse(g)) }
            }
            (true, _) => PairTerms::default(),
            (false, Some(Share::Double)) => {
                let s = self.shared[i];
                let (Some(e), Some(g)) = (s.xor, s.andn) else {
                    return Err(self.missing(i));
                };
                PairTerms { xor: Some(e), andn: Some(Andn::Direct(g)) }
            }
            (false, Some(Share::Single)) => {
                let e = self.shared[i].xor.ok_or_else(|| self.missing(i))?;
                PairTerms { xor: Some(e), andn: None }
            }
            (false, None) => PairTerms::default(),
        };
        let out = blocks::fa3_minus(self.b, c, minus_bit, plus_bit, terms)?;
        self.census.record(BlockKind::Fa3Minus);
        self.census.shared_savings += BlockKind::Fa3Minus.cost() - out.emitted - term_gates;
        if lower && share == Some(Share::Single) {
            self.shared[i].xor = out.terms.xor;
        }
        self.ledger.push_bit(out.out.carry)?;
        self.ledger.push_bit(out.out.sum)?;

        let carry = self.ledger.pop_pair(w)?;
        let fresh = self.fresh_pair(w)?;
        let z = self.plus(w)?;
        self.mdfa_minus(carry, fresh, z)
    }

    /// Odd widths, weights `3n-2` and `3n-1`: the pair meets its partner
    /// only here, so it enters the MDFA- directly.
    fn column_odd_tail(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let (n, wi) = (self.n, w as usize);
        let i = wi - 2 * n;
        let bb = self.ledger.take_wire(w, self.high[i])?;
        let a = self.ledger.take_wire(w, self.low[n + i])?;
        let carry = self.ledger.pop_pair(w)?;
        self.census.conversion_xors += 1;
        let pair = match self.share(i) {
            Some(_) => {
                let e = self.shared[i].xor.ok_or_else(|| self.missing(i))?;
                self.census.shared_savings += 1;
                blocks::pair_from_parts(bb, a, e)?
            }
            None => blocks::encode_pair(self.b, bb, a)?,
        };
        let z = self.ledger.take_wire(w, self.mid[wi - n])?;
        let v = self.mdfa_minus(carry, pair, z)?;
        self.ha_pm(w, v)
    }

    fn column_3n(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let carry = self.ledger.pop_pair(w)?;
        let fresh = self.fresh_pair(w)?;
        let z = self.plus(w)?;
        self.mdfa_minus(carry, fresh, z)
    }

    fn column_3n1(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let pair = self.ledger.pop_pair(w)?;
        let x3 = self.plus(w)?;
        let out = blocks::sfa3_minus(self.b, pair, x3)?;
        self.census.record(BlockKind::Sfa3Minus);
        self.ledger.push_bit(out.carry)?;
        let r = self.plus(w)?;
        let res = blocks::ha_pm(self.b, r, out.sum)?;
        self.census.record(BlockKind::HaPm);
        self.ledger.push_bit(res.carry)?;
        Ok(res.sum)
    }

    /// Weight `3n+2`. The carry into this column is 0 or 1, so the
    /// FA3⁰ precondition `x1 + x2 - x3 >= 0` holds.
    fn column_3n2(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let x1 = self.plus(w)?;
        let x2 = self.plus(w)?;
        let x3 = self.minus(w)?;
        let out = blocks::fa3_zero(self.b, x1, x2, x3)?;
        self.census.record(BlockKind::Fa3Zero);
        self.ledger.push_bit(out.carry)?;
        Ok(out.sum)
    }

    fn column_ha(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let x1 = self.plus(w)?;
        let x2 = self.plus(w)?;
        let out = blocks::ha(self.b, x1, x2)?;
        self.census.record(BlockKind::Ha);
        self.ledger.push_bit(out.carry)?;
        Ok(out.sum)
    }

    /// Top weight: the carry out of the product is always zero.
    fn column_top(&mut self, w: u32) -> Result<SignedBit, SynthError> {
        let x1 = self.plus(w)?;
        let x2 = self.plus(w)?;
        let s = self.b.add_gate(GateKind::Xor, x1.wire, x2.wire)?;
        self.census.conversion_xors += 1;
        Ok(SignedBit::plus(s, w))
    }
}

/// Emits the adder-subtractor for an `m`-bit level, given the three
/// sub-products (LSB first).
pub fn emit_final_addsub(
    b: &mut NetlistBuilder,
    m: usize,
    low: &[WireRef],
    mid: &[WireRef],
    high: &[WireRef],
    sharing: bool,
    census: &mut BlockCensus,
) -> Result<AddSubOut, SynthError> {
    if m < MIN_KARATSUBA_BITS {
        return Err(SynthError::UnsupportedWidth {
            method: "karatsuba",
            bits: m,
            reason: format!("the adder-subtractor plan needs at least {MIN_KARATSUBA_BITS} bits"),
        });
    }
    let n = m.div_ceil(2);
    let hi = m - n;
    if low.len() != 2 * n || mid.len() != 2 * n + 2 || high.len() != 2 * hi {
        return Err(SynthError::Domain(format!(
            "sub-product widths {}, {}, {} do not fit m = {m}",
            low.len(),
            mid.len(),
            high.len()
        )));
    }
    let mut ledger = ColumnLedger::new(2 * m);
    let rows: [(&[WireRef], usize, Sign); 5] = [
        (high, 2 * n, Sign::Plus),
        (mid, n, Sign::Plus),
        (high, n, Sign::Minus),
        (low, n, Sign::Minus),
        (low, 0, Sign::Plus),
    ];
    for (row, offset, sign) in rows {
        for (j, &wire) in row.iter().enumerate() {
            ledger.push_bit(SignedBit { wire, sign, weight: (offset + j) as u32 })?;
        }
    }

    let mut st = AddSub {
        b,
        ledger,
        census: BlockCensus::default(),
        n,
        m,
        low,
        high,
        mid,
        shared: vec![SharedPair::default(); n],
        sharing,
    };
    let odd = m % 2 == 1;
    let mut out = AddSubOut {
        bits: Vec::with_capacity(2 * m),
        h_plus: Vec::with_capacity(2 * m),
        h_minus: Vec::with_capacity(2 * m),
    };
    for wi in 0..2 * m {
        let w = wi as u32;
        out.h_plus.push(st.ledger.h_plus(w));
        out.h_minus.push(st.ledger.h_minus(w));
        let bit = if wi < n {
            st.ledger.pop_plain(w, Some(Sign::Plus))?
        } else if wi == n {
            st.column_n(w)?
        } else if wi == n + 1 {
            st.column_n1(w)?
        } else if wi < 2 * m - n {
            st.column_mid(w)?
        } else if odd && (wi == 3 * n - 2 || wi == 3 * n - 1) {
            st.column_odd_tail(w)?
        } else if wi == 3 * n {
            st.column_3n(w)?
        } else if wi == 3 * n + 1 {
            st.column_3n1(w)?
        } else if wi == 3 * n + 2 {
            st.column_3n2(w)?
        } else if wi < 2 * m - 1 {
            st.column_ha(w)?
        } else {
            st.column_top(w)?
        };
        if bit.sign != Sign::Plus || bit.weight != w {
            return Err(invariant(format!("column {w} resolved to {bit:?}")));
        }
        st.ledger.ensure_empty(w)?;
        out.bits.push(bit.wire);
    }

    let (hp, hm) = expected_addsub_profile(m);
    if out.h_plus != hp || out.h_minus != hm {
        return Err(invariant(format!(
            "adder-subtractor({m}) heights +{:?} -{:?} differ from +{hp:?} -{hm:?}",
            out.h_plus, out.h_minus
        )));
    }
    let expected = expected_addsub_census(m, sharing);
    if st.census != expected {
        return Err(invariant(format!(
            "adder-subtractor({m}) census {:?} differs from {expected:?}",
            st.census
        )));
    }
    census.merge(&st.census);
    Ok(out)
}

/// Operand wires `(x, y)` of one sub-product.
pub(crate) type OperandPair = (Vec<WireRef>, Vec<WireRef>);

/// Splits operands, emits the pre-adders and returns the operand wires of
/// the `(mid, high, low)` sub-products.
pub(crate) fn emit_preadders(
    b: &mut NetlistBuilder,
    x: &[WireRef],
    y: &[WireRef],
    census: &mut BlockCensus,
) -> Result<[OperandPair; 3], SynthError> {
    let m = x.len();
    let n = m.div_ceil(2);
    let (xl, xh) = x.split_at(n);
    let (yl, yh) = y.split_at(n);
    let before = b.gate_count();
    let (s1, s2) = if m.is_multiple_of(2) {
        (blocks::ripple_adder_equal(b, xl, xh)?, blocks::ripple_adder_equal(b, yl, yh)?)
    } else {
        (blocks::ripple_adder_unequal(b, xl, xh)?, blocks::ripple_adder_unequal(b, yl, yh)?)
    };
    census.adder_gates += b.gate_count() - before;
    Ok([(s1, s2), (xh.to_vec(), yh.to_vec()), (xl.to_vec(), yl.to_vec())])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn savings_pattern() {
        for m in 10usize..200 {
            let n = m.div_ceil(2);
            let odd = m % 2 == 1;
            let mut total = 0;
            for i in 0..n {
                total += match share_mode(i, n, odd) {
                    Share::Double => 2,
                    Share::Single => 1,
                };
            }
            assert_eq!(total, shared_savings(m), "m={m}");
        }
    }

    #[test]
    fn census_matches_overhead() {
        for m in 10usize..200 {
            let n = m.div_ceil(2);
            let adders = if m % 2 == 0 { 2 * (5 * n - 3) } else { 2 * (5 * n - 6) };
            for sharing in [true, false] {
                let c = expected_addsub_census(m, sharing);
                assert_eq!(c.gate_total() + adders, predict_overhead(m, sharing), "m={m}");
            }
        }
    }

    #[test]
    fn profile_at_sixteen() {
        let (hp, hm) = expected_addsub_profile(16);
        assert_eq!(&hp[8..12], &[2, 3, 3, 3]);
        assert_eq!(&hm[8..12], &[2, 3, 4, 4]);
        assert_eq!(&hp[24..32], &[3, 3, 2, 2, 2, 2, 2, 2]);
        assert_eq!(&hm[24..32], &[2, 1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn addsub_on_free_inputs() {
        // Sub-products as free inputs: checks the plan and its census in
        // isolation from the multipliers.
        for m in 10usize..=40 {
            for sharing in [true, false] {
                let n = m.div_ceil(2);
                let mut b = NetlistBuilder::new();
                let low = b.add_inputs("l", 2 * n).unwrap();
                let mid = b.add_inputs("c", 2 * n + 2).unwrap();
                let high = b.add_inputs("h", 2 * (m - n)).unwrap();
                let mut census = BlockCensus::default();
                let out = emit_final_addsub(&mut b, m, &low, &mid, &high, sharing, &mut census)
                    .unwrap_or_else(|e| panic!("m={m}: {e}"));
                assert_eq!(out.bits.len(), 2 * m);
                assert_eq!(b.gate_count(), census.gate_total());
            }
        }
    }

    #[test]
    fn too_narrow_is_rejected() {
        let mut b = NetlistBuilder::new();
        let mut census = BlockCensus::default();
        let err = emit_final_addsub(&mut b, 9, &[], &[], &[], true, &mut census).unwrap_err();
        assert!(matches!(err, SynthError::UnsupportedWidth { bits: 9, .. }));
    }
}
