//! Carry-save building blocks with fixed gate costs.
//!
//! Every block reads bits of a single weight `w` and produces a "sum" bit at
//! `w` and a carry (a plain bit or an encoded pair) at `w + 1`. Signed bits
//! carry an arithmetic sign, so the same block also serves columns whose
//! bits are subtracted.
//!
//! An [`EncodedPair`] stores two bits `x, y` as the wires `(x, x ^ y)`. Only
//! the MDFA family and the SFA3 family read pairs; nothing ever decodes one.

pub mod adders;
pub mod suite;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::SynthError;
use crate::netlist::{GateKind, NetlistBuilder, WireRef};

pub use adders::{check_adders, ripple_adder_equal, ripple_adder_unequal};
pub use suite::{check_block_identities, SuiteResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign product.
    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A wire contributing `sign * 2^weight` when set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedBit {
    pub wire: WireRef,
    pub sign: Sign,
    pub weight: u32,
}

impl SignedBit {
    pub fn plus(wire: WireRef, weight: u32) -> SignedBit {
        SignedBit { wire, sign: Sign::Plus, weight }
    }

    pub fn minus(wire: WireRef, weight: u32) -> SignedBit {
        SignedBit { wire, sign: Sign::Minus, weight }
    }
}

/// Bits `x` (always positive) and `y` (sign `sign_y`) held as `(x, x ^ y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodedPair {
    pub x: WireRef,
    pub x_xor_y: WireRef,
    pub sign_y: Sign,
    pub weight: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Ha,
    HaPm,
    Nha,
    Fa3,
    Fa3Minus,
    Fa3Zero,
    Sfa3,
    Sfa3Minus,
    Mdfa,
    MdfaMinus,
    /// FA3- reusing a precomputed `x3 & !x2` and `x2 ^ x3`.
    Shared3a,
    /// FA3- reusing a precomputed `x2 & !x3` and `x2 ^ x3`.
    Shared3b,
}

impl BlockKind {
    pub const ALL: [BlockKind; 12] = [
        BlockKind::Ha,
        BlockKind::HaPm,
        BlockKind::Nha,
        BlockKind::Fa3,
        BlockKind::Fa3Minus,
        BlockKind::Fa3Zero,
        BlockKind::Sfa3,
        BlockKind::Sfa3Minus,
        BlockKind::Mdfa,
        BlockKind::MdfaMinus,
        BlockKind::Shared3a,
        BlockKind::Shared3b,
    ];

    /// Gate cost of one instance. The shared forms are counted without the
    /// two gates they borrow.
    pub fn cost(self) -> usize {
        match self {
            BlockKind::Ha | BlockKind::HaPm | BlockKind::Nha => 2,
            BlockKind::Fa3 | BlockKind::Fa3Minus => 5,
            BlockKind::Fa3Zero | BlockKind::Sfa3 | BlockKind::Sfa3Minus => 4,
            BlockKind::Mdfa | BlockKind::MdfaMinus => 8,
            BlockKind::Shared3a | BlockKind::Shared3b => 3,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            BlockKind::Ha => "HA",
            BlockKind::HaPm => "HA_PM",
            BlockKind::Nha => "NHA",
            BlockKind::Fa3 => "FA3",
            BlockKind::Fa3Minus => "FA3_MINUS",
            BlockKind::Fa3Zero => "FA3_ZERO",
            BlockKind::Sfa3 => "SFA3",
            BlockKind::Sfa3Minus => "SFA3_MINUS",
            BlockKind::Mdfa => "MDFA",
            BlockKind::MdfaMinus => "MDFA_MINUS",
            BlockKind::Shared3a => "SHARED3A",
            BlockKind::Shared3b => "SHARED3B",
        }
    }

    pub fn from_token(token: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.token().eq_ignore_ascii_case(token))
    }

    /// HA, HA± and NHA are one family in the published inventories.
    pub fn is_half_adder_family(self) -> bool {
        matches!(self, BlockKind::Ha | BlockKind::HaPm | BlockKind::Nha)
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl Serialize for BlockKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

/// Exact inventory of what a construction emitted.
///
/// `gate_total` reproduces the netlist's gate count: block costs, plus
/// standalone XORs (pair conversions and top-column XORs), plus partial
/// product ANDs, plus ripple-adder gates, minus gates saved by sharing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BlockCensus {
    pub blocks: BTreeMap<BlockKind, usize>,
    pub conversion_xors: usize,
    pub and_gates: usize,
    pub adder_gates: usize,
    pub shared_savings: usize,
}

impl BlockCensus {
    pub fn record(&mut self, kind: BlockKind) {
        *self.blocks.entry(kind).or_insert(0) += 1;
    }

    pub fn count(&self, kind: BlockKind) -> usize {
        self.blocks.get(&kind).copied().unwrap_or(0)
    }

    pub fn half_adder_family(&self) -> usize {
        self.blocks
            .iter()
            .filter(|(k, _)| k.is_half_adder_family())
            .map(|(_, c)| c)
            .sum()
    }

    pub fn gate_total(&self) -> usize {
        let blocks: usize = self.blocks.iter().map(|(k, c)| k.cost() * c).sum();
        blocks + self.conversion_xors + self.and_gates + self.adder_gates - self.shared_savings
    }

    pub fn merge(&mut self, other: &BlockCensus) {
        for (k, c) in &other.blocks {
            *self.blocks.entry(*k).or_insert(0) += c;
        }
        self.conversion_xors += other.conversion_xors;
        self.and_gates += other.and_gates;
        self.adder_gates += other.adder_gates;
        self.shared_savings += other.shared_savings;
    }

    /// `KIND=count` list in kind order, zero entries omitted.
    pub fn summary(&self) -> String {
        self.blocks
            .iter()
            .filter(|(_, c)| **c > 0)
            .map(|(k, c)| format!("{k}={c}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Plain-bit CSA result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsaOut {
    pub carry: SignedBit,
    pub sum: SignedBit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdfaOut {
    pub carry: EncodedPair,
    pub sum: SignedBit,
}

/// `x2 & !x3` or `x3 & !x2`, precomputed for an FA3- whose `x2, x3` inputs
/// also meet elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Andn {
    Direct(WireRef),
    Reverse(WireRef),
}

/// Gates an FA3- may borrow instead of emitting: `x2 ^ x3` and an ANDNOT.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairTerms {
    pub xor: Option<WireRef>,
    pub andn: Option<Andn>,
}

fn block_err(kind: BlockKind, message: impl Into<String>) -> SynthError {
    SynthError::Block {
        kind,
        message: message.into(),
    }
}

fn common_weight(kind: BlockKind, weights: &[u32]) -> Result<u32, SynthError> {
    let w = weights[0];
    if weights.iter().any(|&x| x != w) {
        return Err(block_err(kind, format!("mixed weights {weights:?}")));
    }
    Ok(w)
}

/// Matches input signs against a block's canonical pattern. Returns the
/// polarity (`Minus` when every sign is flipped) if `negatable` allows it.
fn polarity(kind: BlockKind, signs: &[Sign], canonical: &[Sign], negatable: bool) -> Result<Sign, SynthError> {
    if signs == canonical {
        return Ok(Sign::Plus);
    }
    if negatable && signs.iter().zip(canonical).all(|(s, c)| *s == c.flip()) {
        return Ok(Sign::Minus);
    }
    Err(block_err(kind, format!("input signs {signs:?} do not match {canonical:?}")))
}

use Sign::{Minus as M, Plus as P};

fn gate(b: &mut NetlistBuilder, kind: GateKind, x: WireRef, y: WireRef) -> Result<WireRef, SynthError> {
    Ok(b.add_gate(kind, x, y)?)
}

fn csa(carry: WireRef, carry_sign: Sign, sum: WireRef, sum_sign: Sign, weight: u32) -> CsaOut {
    CsaOut {
        carry: SignedBit { wire: carry, sign: carry_sign, weight: weight + 1 },
        sum: SignedBit { wire: sum, sign: sum_sign, weight },
    }
}

/// `x1 + x2 = 2u + v`.
pub fn ha(b: &mut NetlistBuilder, x1: SignedBit, x2: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Ha;
    let w = common_weight(k, &[x1.weight, x2.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign], &[P, P], true)?;
    let v = gate(b, GateKind::Xor, x1.wire, x2.wire)?;
    let u = gate(b, GateKind::And, x1.wire, x2.wire)?;
    Ok(csa(u, pol, v, pol, w))
}

/// `x1 - x2 = -2u + v`.
pub fn ha_pm(b: &mut NetlistBuilder, x1: SignedBit, x2: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::HaPm;
    let w = common_weight(k, &[x1.weight, x2.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign], &[P, M], true)?;
    let v = gate(b, GateKind::Xor, x1.wire, x2.wire)?;
    let u = gate(b, GateKind::AndN1, x1.wire, x2.wire)?;
    Ok(csa(u, pol.times(M), v, pol, w))
}

/// `-x1 - x2 = -2(x1 | x2) + (x1 ^ x2)`: turns two subtrahends into a
/// non-negative result bit and a borrow.
pub fn nha(b: &mut NetlistBuilder, x1: SignedBit, x2: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Nha;
    let w = common_weight(k, &[x1.weight, x2.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign], &[M, M], true)?;
    let v = gate(b, GateKind::Xor, x1.wire, x2.wire)?;
    let u = gate(b, GateKind::Or, x1.wire, x2.wire)?;
    Ok(csa(u, pol.times(M), v, pol, w))
}

/// `x1 + x2 + x3 = 2u + v`.
pub fn fa3(b: &mut NetlistBuilder, x1: SignedBit, x2: SignedBit, x3: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Fa3;
    let w = common_weight(k, &[x1.weight, x2.weight, x3.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign, x3.sign], &[P, P, P], true)?;
    let (u, v) = raw_fa3(b, x1.wire, x2.wire, x3.wire)?;
    Ok(csa(u, pol, v, pol, w))
}

/// Five-gate full adder on raw wires, returns `(carry, sum)`.
pub(crate) fn raw_fa3(
    b: &mut NetlistBuilder,
    x1: WireRef,
    x2: WireRef,
    x3: WireRef,
) -> Result<(WireRef, WireRef), SynthError> {
    let e = gate(b, GateKind::Xor, x1, x2)?;
    let v = gate(b, GateKind::Xor, e, x3)?;
    let t = gate(b, GateKind::Xor, x1, x3)?;
    let s = gate(b, GateKind::And, e, t)?;
    let u = gate(b, GateKind::Xor, s, x1)?;
    Ok((u, v))
}

/// Result of an FA3- emission: outputs, the terms it used (so a later
/// column can borrow them) and the number of gates actually emitted.
#[derive(Clone, Copy, Debug)]
pub struct Fa3MinusOut {
    pub out: CsaOut,
    pub terms: PairTerms,
    pub emitted: usize,
}

/// `x1 + x2 - x3 = 2u - v`, optionally reusing `x2 ^ x3` and an ANDNOT of
/// `x2, x3` computed elsewhere. Costs 5 gates minus the borrowed ones.
pub fn fa3_minus(
    b: &mut NetlistBuilder,
    x1: SignedBit,
    x2: SignedBit,
    x3: SignedBit,
    borrowed: PairTerms,
) -> Result<Fa3MinusOut, SynthError> {
    let k = BlockKind::Fa3Minus;
    let w = common_weight(k, &[x1.weight, x2.weight, x3.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign, x3.sign], &[P, P, M], true)?;
    let before = b.gate_count();
    let e = match borrowed.xor {
        Some(e) => e,
        None => gate(b, GateKind::Xor, x2.wire, x3.wire)?,
    };
    let andn = match borrowed.andn {
        Some(a) => a,
        None => Andn::Direct(gate(b, GateKind::AndN2, x2.wire, x3.wire)?),
    };
    // u = maj(x1, x2, !x3): x2 & !x3 when x2 != x3, x1 otherwise.
    let u = match andn {
        Andn::Direct(g) => {
            let f = gate(b, GateKind::AndN1, e, x1.wire)?;
            gate(b, GateKind::Or, g, f)?
        }
        Andn::Reverse(g) => {
            let h = gate(b, GateKind::Or, e, x1.wire)?;
            gate(b, GateKind::AndN1, g, h)?
        }
    };
    let v = gate(b, GateKind::Xor, e, x1.wire)?;
    Ok(Fa3MinusOut {
        out: csa(u, pol, v, pol.times(M), w),
        terms: PairTerms {
            xor: Some(e),
            andn: Some(andn),
        },
        emitted: b.gate_count() - before,
    })
}

/// `x1 + x2 - x3 = 2u + v`, defined only where the left side is `>= 0`.
pub fn fa3_zero(b: &mut NetlistBuilder, x1: SignedBit, x2: SignedBit, x3: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Fa3Zero;
    let w = common_weight(k, &[x1.weight, x2.weight, x3.weight])?;
    let pol = polarity(k, &[x1.sign, x2.sign, x3.sign], &[P, P, M], true)?;
    let s = gate(b, GateKind::Xor, x1.wire, x2.wire)?;
    let v = gate(b, GateKind::Xor, s, x3.wire)?;
    let a = gate(b, GateKind::And, x1.wire, x2.wire)?;
    let u = gate(b, GateKind::AndN2, a, x3.wire)?;
    Ok(csa(u, pol, v, pol, w))
}

fn check_pair(kind: BlockKind, pair: &EncodedPair, sign_y: Sign) -> Result<(), SynthError> {
    if pair.sign_y != sign_y {
        return Err(block_err(kind, format!("pair has sign_y {:?}, expected {sign_y:?}", pair.sign_y)));
    }
    Ok(())
}

/// `(x1, x1 ^ x2, x3)`: `x1 + x2 + x3 = 2u + v`.
pub fn sfa3(b: &mut NetlistBuilder, pair: EncodedPair, x3: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Sfa3;
    check_pair(k, &pair, P)?;
    let w = common_weight(k, &[pair.weight, x3.weight])?;
    polarity(k, &[x3.sign], &[P], false)?;
    let v = gate(b, GateKind::Xor, pair.x_xor_y, x3.wire)?;
    let d = gate(b, GateKind::Xor, pair.x, x3.wire)?;
    let e = gate(b, GateKind::And, pair.x_xor_y, d)?;
    let u = gate(b, GateKind::Xor, e, pair.x)?;
    Ok(csa(u, P, v, P, w))
}

/// `(x1, x1 ^ x2, x3)`: `x1 - x2 + x3 = 2u - v`.
pub fn sfa3_minus(b: &mut NetlistBuilder, pair: EncodedPair, x3: SignedBit) -> Result<CsaOut, SynthError> {
    let k = BlockKind::Sfa3Minus;
    check_pair(k, &pair, M)?;
    let w = common_weight(k, &[pair.weight, x3.weight])?;
    polarity(k, &[x3.sign], &[P], false)?;
    let v = gate(b, GateKind::Xor, pair.x_xor_y, x3.wire)?;
    let d = gate(b, GateKind::Xor, pair.x, x3.wire)?;
    let e = gate(b, GateKind::And, pair.x_xor_y, d)?;
    let u = gate(b, GateKind::Xor, e, x3.wire)?;
    Ok(csa(u, P, v, M, w))
}

/// Two encoded pairs and a plain bit: `x1 + y1 + x2 + y2 + z = 2(u1 + u2) + v`,
/// or with `y1, y2, u2` negated for the `minus` variant. The carry leaves
/// as the pair `(u1, u1 ^ u2)`.
fn mdfa_impl(
    b: &mut NetlistBuilder,
    p1: EncodedPair,
    p2: EncodedPair,
    z: SignedBit,
    minus: bool,
) -> Result<MdfaOut, SynthError> {
    let (k, sy) = if minus { (BlockKind::MdfaMinus, M) } else { (BlockKind::Mdfa, P) };
    check_pair(k, &p1, sy)?;
    check_pair(k, &p2, sy)?;
    let w = common_weight(k, &[p1.weight, p2.weight, z.weight])?;
    polarity(k, &[z.sign], &[P], false)?;
    let (or_kind, and_kind, u1_kind) = if minus {
        (GateKind::OrN2, GateKind::OrN2, GateKind::Xnor)
    } else {
        (GateKind::Or, GateKind::AndN2, GateKind::Xor)
    };
    // First stage folds (x1, y1, z) into carry u1 and partial sum s1; the
    // second stage folds (s1, x2, y2) and only its carry parity is needed.
    let t1 = gate(b, GateKind::Xor, z.wire, p1.x)?;
    let t2 = gate(b, or_kind, t1, p1.x_xor_y)?;
    let s1 = gate(b, GateKind::Xor, p1.x_xor_y, z.wire)?;
    let u1 = gate(b, u1_kind, t2, s1)?;
    let t3 = gate(b, GateKind::Xor, p2.x, s1)?;
    let t4 = gate(b, and_kind, t3, p2.x_xor_y)?;
    let u12 = gate(b, GateKind::Xor, t2, t4)?;
    let v = gate(b, GateKind::Xor, s1, p2.x_xor_y)?;
    Ok(MdfaOut {
        carry: EncodedPair {
            x: u1,
            x_xor_y: u12,
            sign_y: sy,
            weight: w + 1,
        },
        sum: SignedBit::plus(v, w),
    })
}

pub fn mdfa(b: &mut NetlistBuilder, p1: EncodedPair, p2: EncodedPair, z: SignedBit) -> Result<MdfaOut, SynthError> {
    mdfa_impl(b, p1, p2, z, false)
}

pub fn mdfa_minus(
    b: &mut NetlistBuilder,
    p1: EncodedPair,
    p2: EncodedPair,
    z: SignedBit,
) -> Result<MdfaOut, SynthError> {
    mdfa_impl(b, p1, p2, z, true)
}

/// Forms `(x, x ^ y)` with one XOR. `x` must be a summand.
pub fn encode_pair(b: &mut NetlistBuilder, x: SignedBit, y: SignedBit) -> Result<EncodedPair, SynthError> {
    let xor = gate(b, GateKind::Xor, x.wire, y.wire)?;
    pair_from_parts(x, y, xor)
}

/// Builds a pair around an existing `x ^ y` wire.
pub fn pair_from_parts(x: SignedBit, y: SignedBit, x_xor_y: WireRef) -> Result<EncodedPair, SynthError> {
    if x.sign != Sign::Plus || x.weight != y.weight {
        return Err(SynthError::Invariant(format!(
            "cannot encode pair from {x:?} and {y:?}"
        )));
    }
    Ok(EncodedPair {
        x: x.wire,
        x_xor_y,
        sign_y: y.sign,
        weight: x.weight,
    })
}

/// Block input for [`emit_block`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockInput {
    Bit(SignedBit),
    Pair(EncodedPair),
}

/// Block output for [`emit_block`]: the sum first, then the carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockOutput {
    Bit(SignedBit),
    Pair(EncodedPair),
}

/// Uniform entry point over the catalog. Inputs are bits for the plain
/// blocks, `[pair, bit]` for SFA3/SFA3- and `[pair, pair, bit]` for the
/// MDFA family. The shared FA3- forms take no borrowed terms here, so they
/// emit the full five gates.
pub fn emit_block(
    b: &mut NetlistBuilder,
    kind: BlockKind,
    inputs: &[BlockInput],
) -> Result<Vec<BlockOutput>, SynthError> {
    use BlockInput::{Bit, Pair};
    let arity = |n: usize| {
        if inputs.len() == n {
            Ok(())
        } else {
            Err(block_err(kind, format!("expected {n} inputs, got {}", inputs.len())))
        }
    };
    let plain = |o: CsaOut| vec![BlockOutput::Bit(o.sum), BlockOutput::Bit(o.carry)];
    match kind {
        BlockKind::Ha | BlockKind::HaPm | BlockKind::Nha => {
            arity(2)?;
            let (Bit(x1), Bit(x2)) = (inputs[0], inputs[1]) else {
                return Err(block_err(kind, "expected plain bits"));
            };
            let out = match kind {
                BlockKind::Ha => ha(b, x1, x2)?,
                BlockKind::HaPm => ha_pm(b, x1, x2)?,
                _ => nha(b, x1, x2)?,
            };
            Ok(plain(out))
        }
        BlockKind::Fa3 | BlockKind::Fa3Minus | BlockKind::Fa3Zero | BlockKind::Shared3a | BlockKind::Shared3b => {
            arity(3)?;
            let (Bit(x1), Bit(x2), Bit(x3)) = (inputs[0], inputs[1], inputs[2]) else {
                return Err(block_err(kind, "expected plain bits"));
            };
            let out = match kind {
                BlockKind::Fa3 => fa3(b, x1, x2, x3)?,
                BlockKind::Fa3Zero => fa3_zero(b, x1, x2, x3)?,
                _ => fa3_minus(b, x1, x2, x3, PairTerms::default())?.out,
            };
            Ok(plain(out))
        }
        BlockKind::Sfa3 | BlockKind::Sfa3Minus => {
            arity(2)?;
            let (Pair(p), Bit(x3)) = (inputs[0], inputs[1]) else {
                return Err(block_err(kind, "expected [pair, bit]"));
            };
            let out = if kind == BlockKind::Sfa3 { sfa3(b, p, x3)? } else { sfa3_minus(b, p, x3)? };
            Ok(plain(out))
        }
        BlockKind::Mdfa | BlockKind::MdfaMinus => {
            arity(3)?;
            let (Pair(p1), Pair(p2), Bit(z)) = (inputs[0], inputs[1], inputs[2]) else {
                return Err(block_err(kind, "expected [pair, pair, bit]"));
            };
            let out = if kind == BlockKind::Mdfa { mdfa(b, p1, p2, z)? } else { mdfa_minus(b, p1, p2, z)? };
            Ok(vec![BlockOutput::Bit(out.sum), BlockOutput::Pair(out.carry)])
        }
    }
}
