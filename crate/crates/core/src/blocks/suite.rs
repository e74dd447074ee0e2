//! Exhaustive identity and cost checks for every catalog block.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::*;

/// Outcome of one self-check suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SuiteResult {
    pub(crate) fn from_run(name: String, run: Result<usize, String>) -> SuiteResult {
        match run {
            Ok(cases) => SuiteResult { name, passed: true, cases, detail: None },
            Err(detail) => SuiteResult { name, passed: false, cases: 0, detail: Some(detail) },
        }
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.detail {
            None => write!(f, "PASS {} ({} cases)", self.name, self.cases),
            Some(d) => write!(f, "FAIL {}: {d}", self.name),
        }
    }
}

/// A value in an identity: a wire, or the XOR of two wires (the hidden
/// second member of an encoded pair).
#[derive(Clone, Copy)]
enum Term {
    W(WireRef),
    X(WireRef, WireRef),
}

#[derive(Default)]
struct Identity {
    lhs: Vec<(i64, Term)>,
    rhs: Vec<(i64, Term)>,
    cost: usize,
    nonneg_only: bool,
}

impl Identity {
    fn input_bit(&mut self, x: SignedBit) {
        self.lhs.push((x.sign.value() << x.weight, Term::W(x.wire)));
    }

    fn input_pair(&mut self, p: EncodedPair) {
        self.lhs.push((1 << p.weight, Term::W(p.x)));
        self.lhs.push((p.sign_y.value() << p.weight, Term::X(p.x, p.x_xor_y)));
    }

    fn output_bit(&mut self, x: SignedBit) {
        self.rhs.push((x.sign.value() << x.weight, Term::W(x.wire)));
    }

    fn output_pair(&mut self, p: EncodedPair) {
        self.rhs.push((1 << p.weight, Term::W(p.x)));
        self.rhs.push((p.sign_y.value() << p.weight, Term::X(p.x, p.x_xor_y)));
    }

    fn output_csa(&mut self, o: CsaOut) {
        self.output_bit(o.sum);
        self.output_bit(o.carry);
    }
}

type Builder = fn(&mut NetlistBuilder, &[WireRef], &[Sign]) -> Result<Identity, SynthError>;

fn sb(w: WireRef, s: Sign) -> SignedBit {
    SignedBit { wire: w, sign: s, weight: 0 }
}

fn bits3(x: &[WireRef], s: &[Sign]) -> (SignedBit, SignedBit, SignedBit) {
    (sb(x[0], s[0]), sb(x[1], s[1]), sb(x[2], s[2]))
}

fn build_plain2(kind: BlockKind) -> Builder {
    match kind {
        BlockKind::Ha => |b, x, s| {
            let mut id = Identity::default();
            let before = b.gate_count();
            id.output_csa(ha(b, sb(x[0], s[0]), sb(x[1], s[1]))?);
            id.cost = b.gate_count() - before;
            id.input_bit(sb(x[0], s[0]));
            id.input_bit(sb(x[1], s[1]));
            Ok(id)
        },
        BlockKind::HaPm => |b, x, s| {
            let mut id = Identity::default();
            let before = b.gate_count();
            id.output_csa(ha_pm(b, sb(x[0], s[0]), sb(x[1], s[1]))?);
            id.cost = b.gate_count() - before;
            id.input_bit(sb(x[0], s[0]));
            id.input_bit(sb(x[1], s[1]));
            Ok(id)
        },
        _ => |b, x, s| {
            let mut id = Identity::default();
            let before = b.gate_count();
            id.output_csa(nha(b, sb(x[0], s[0]), sb(x[1], s[1]))?);
            id.cost = b.gate_count() - before;
            id.input_bit(sb(x[0], s[0]));
            id.input_bit(sb(x[1], s[1]));
            Ok(id)
        },
    }
}

fn build_fa3(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign]) -> Result<Identity, SynthError> {
    let (x1, x2, x3) = bits3(x, s);
    let mut id = Identity::default();
    let before = b.gate_count();
    id.output_csa(fa3(b, x1, x2, x3)?);
    id.cost = b.gate_count() - before;
    [x1, x2, x3].into_iter().for_each(|v| id.input_bit(v));
    Ok(id)
}

fn build_fa3_minus(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign]) -> Result<Identity, SynthError> {
    let (x1, x2, x3) = bits3(x, s);
    let mut id = Identity::default();
    let out = fa3_minus(b, x1, x2, x3, PairTerms::default())?;
    id.output_csa(out.out);
    id.cost = out.emitted;
    [x1, x2, x3].into_iter().for_each(|v| id.input_bit(v));
    Ok(id)
}

fn build_fa3_zero(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign]) -> Result<Identity, SynthError> {
    let (x1, x2, x3) = bits3(x, s);
    let mut id = Identity { nonneg_only: true, ..Identity::default() };
    let before = b.gate_count();
    id.output_csa(fa3_zero(b, x1, x2, x3)?);
    id.cost = b.gate_count() - before;
    [x1, x2, x3].into_iter().for_each(|v| id.input_bit(v));
    Ok(id)
}

fn build_shared(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign], reverse: bool) -> Result<Identity, SynthError> {
    let (x1, x2, x3) = bits3(x, s);
    let e = b.add_gate(GateKind::Xor, x2.wire, x3.wire)?;
    let andn = if reverse {
        Andn::Reverse(b.add_gate(GateKind::AndN1, x2.wire, x3.wire)?)
    } else {
        Andn::Direct(b.add_gate(GateKind::AndN2, x2.wire, x3.wire)?)
    };
    let mut id = Identity::default();
    let terms = PairTerms { xor: Some(e), andn: Some(andn) };
    let out = fa3_minus(b, x1, x2, x3, terms)?;
    id.output_csa(out.out);
    id.cost = out.emitted;
    [x1, x2, x3].into_iter().for_each(|v| id.input_bit(v));
    Ok(id)
}

fn build_sfa3(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign]) -> Result<Identity, SynthError> {
    let pair = encode_pair(b, sb(x[0], Sign::Plus), sb(x[1], s[1]))?;
    let x3 = sb(x[2], s[2]);
    let mut id = Identity::default();
    let before = b.gate_count();
    let out = if s[1] == Sign::Plus { sfa3(b, pair, x3)? } else { sfa3_minus(b, pair, x3)? };
    id.output_csa(out);
    id.cost = b.gate_count() - before;
    id.input_pair(pair);
    id.input_bit(x3);
    Ok(id)
}

fn build_mdfa(b: &mut NetlistBuilder, x: &[WireRef], s: &[Sign]) -> Result<Identity, SynthError> {
    let p1 = encode_pair(b, sb(x[0], Sign::Plus), sb(x[1], s[1]))?;
    let p2 = encode_pair(b, sb(x[2], Sign::Plus), sb(x[3], s[3]))?;
    let z = sb(x[4], Sign::Plus);
    let mut id = Identity::default();
    let before = b.gate_count();
    let out = if s[1] == Sign::Plus { mdfa(b, p1, p2, z)? } else { mdfa_minus(b, p1, p2, z)? };
    id.output_bit(out.sum);
    id.output_pair(out.carry);
    id.cost = b.gate_count() - before;
    id.input_pair(p1);
    id.input_pair(p2);
    id.input_bit(z);
    Ok(id)
}

struct Shape {
    inputs: usize,
    /// Sign patterns to try; negatable blocks are also run flipped.
    signs: Vec<Vec<Sign>>,
    build: Builder,
}

fn shape(kind: BlockKind) -> Shape {
    use Sign::{Minus as M, Plus as P};
    let flip = |v: Vec<Sign>| {
        let f = v.iter().map(|s| s.flip()).collect();
        vec![v, f]
    };
    match kind {
        BlockKind::Ha => Shape { inputs: 2, signs: flip(vec![P, P]), build: build_plain2(kind) },
        BlockKind::HaPm => Shape { inputs: 2, signs: flip(vec![P, M]), build: build_plain2(kind) },
        BlockKind::Nha => Shape { inputs: 2, signs: flip(vec![M, M]), build: build_plain2(kind) },
        BlockKind::Fa3 => Shape { inputs: 3, signs: flip(vec![P, P, P]), build: build_fa3 },
        BlockKind::Fa3Minus => Shape { inputs: 3, signs: flip(vec![P, P, M]), build: build_fa3_minus },
        BlockKind::Fa3Zero => Shape { inputs: 3, signs: vec![vec![P, P, M]], build: build_fa3_zero },
        BlockKind::Sfa3 => Shape { inputs: 3, signs: vec![vec![P, P, P]], build: build_sfa3 },
        BlockKind::Sfa3Minus => Shape { inputs: 3, signs: vec![vec![P, M, P]], build: build_sfa3 },
        BlockKind::Mdfa => Shape { inputs: 5, signs: vec![vec![P, P, P, P, P]], build: build_mdfa },
        BlockKind::MdfaMinus => Shape { inputs: 5, signs: vec![vec![P, M, P, M, P]], build: build_mdfa },
        BlockKind::Shared3a => Shape {
            inputs: 3,
            signs: flip(vec![P, P, M]),
            build: |b, x, s| build_shared(b, x, s, true),
        },
        BlockKind::Shared3b => Shape {
            inputs: 3,
            signs: flip(vec![P, P, M]),
            build: |b, x, s| build_shared(b, x, s, false),
        },
    }
}

/// Input words enumerating every assignment of `k <= 6` inputs, one per lane.
fn lane_words(k: usize) -> Vec<u64> {
    (0..k)
        .map(|i| (0..1u64 << k).filter(|j| j >> i & 1 == 1).fold(0, |acc, j| acc | 1 << j))
        .collect()
}

/// Evaluates both sides of each identity on every lane and returns the
/// number of assignments checked.
fn check_identities(
    label: &str,
    b: NetlistBuilder,
    k: usize,
    identities: &[&Identity],
) -> Result<usize, String> {
    let mut wires = BTreeSet::new();
    for (_, t) in identities.iter().flat_map(|id| id.lhs.iter().chain(&id.rhs)) {
        match *t {
            Term::W(w) => {
                wires.insert(w);
            }
            Term::X(a, c) => {
                wires.insert(a);
                wires.insert(c);
            }
        }
    }
    let wires: Vec<WireRef> = wires.into_iter().collect();
    let outputs: Vec<(String, WireRef)> = wires
        .iter()
        .map(|w| {
            let name = if w.index() < k { format!("x{}", w.index()) } else { format!("o{}", w.index()) };
            (name, *w)
        })
        .collect();
    let net = b.finish(&outputs).map_err(|e| e.to_string())?;
    let values = net.eval_words(&lane_words(k)).map_err(|e| e.to_string())?;
    let lookup = |w: WireRef, lane: usize| -> i64 {
        let pos = wires.binary_search(&w).expect("wire recorded");
        (values[pos] >> lane & 1) as i64
    };
    let side = |terms: &[(i64, Term)], lane: usize| -> i64 {
        terms
            .iter()
            .map(|(c, t)| {
                c * match *t {
                    Term::W(w) => lookup(w, lane),
                    Term::X(a, d) => lookup(a, lane) ^ lookup(d, lane),
                }
            })
            .sum()
    };
    let mut cases = 0;
    for lane in 0..1usize << k {
        for identity in identities {
            let lhs = side(&identity.lhs, lane);
            if identity.nonneg_only && lhs < 0 {
                continue;
            }
            let rhs = side(&identity.rhs, lane);
            if lhs != rhs {
                return Err(format!("{label}: inputs {lane:0k$b} give {rhs}, expected {lhs}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

fn check_kind(kind: BlockKind, faulty: bool) -> SuiteResult {
    let shape = shape(kind);
    let run = || -> Result<usize, String> {
        let mut cases = 0;
        for signs in &shape.signs {
            let mut b = NetlistBuilder::new();
            let x = b.add_inputs("x", shape.inputs).map_err(|e| e.to_string())?;
            let mut id = (shape.build)(&mut b, &x, signs).map_err(|e| e.to_string())?;
            if faulty {
                b.add_gate(GateKind::Xor, x[0], x[1]).map_err(|e| e.to_string())?;
                id.cost += 1;
            }
            if id.cost != kind.cost() {
                return Err(format!("{kind} cost: expected {}, got {}", kind.cost(), id.cost));
            }
            cases += check_identities(kind.token(), b, shape.inputs, &[&id])?;
        }
        Ok(cases)
    };
    SuiteResult::from_run(kind.token().to_string(), run())
}

/// Two FA3- blocks in the arrangement of a shared Karatsuba pair: one
/// reads `(c1-, b-, a+)` and the other `(c2-, a-, b+)`. With `a ^ b` and
/// `a & !b` shared they cost 8 gates together, with only the XOR shared 9.
fn check_shared_pair(xor_only: bool) -> SuiteResult {
    use Sign::{Minus as M, Plus as P};
    let label = if xor_only { "SHARED_PAIR_XOR" } else { "SHARED_PAIR" };
    let expected = if xor_only { 9 } else { 8 };
    let run = || -> Result<usize, String> {
        let s = |e: SynthError| e.to_string();
        let mut b = NetlistBuilder::new();
        let x = b.add_inputs("x", 4).map_err(|e| e.to_string())?;
        let (a, bb, c1, c2) = (x[0], x[1], x[2], x[3]);
        let e = b.add_gate(GateKind::Xor, a, bb).map_err(|e| e.to_string())?;
        let g = b.add_gate(GateKind::AndN2, a, bb).map_err(|e| e.to_string())?;
        let (low_terms, high_terms) = if xor_only {
            let t = PairTerms { xor: Some(e), andn: None };
            (t, t)
        } else {
            (
                PairTerms { xor: Some(e), andn: Some(Andn::Reverse(g)) },
                PairTerms { xor: Some(e), andn: Some(Andn::Direct(g)) },
            )
        };
        let low_in = [sb(c1, M), sb(bb, M), sb(a, P)];
        let low = fa3_minus(&mut b, low_in[0], low_in[1], low_in[2], low_terms).map_err(s)?;
        let high_in = [sb(c2, M), sb(a, M), sb(bb, P)];
        let high = fa3_minus(&mut b, high_in[0], high_in[1], high_in[2], high_terms).map_err(s)?;
        let shared = if xor_only { 1 } else { 2 };
        let cost = shared + low.emitted + high.emitted;
        if cost != expected {
            return Err(format!("{label} cost: expected {expected}, got {cost}"));
        }
        let mut low_id = Identity::default();
        low_in.into_iter().for_each(|v| low_id.input_bit(v));
        low_id.output_csa(low.out);
        let mut high_id = Identity::default();
        high_in.into_iter().for_each(|v| high_id.input_bit(v));
        high_id.output_csa(high.out);
        check_identities(label, b, 4, &[&low_id, &high_id])
    };
    SuiteResult::from_run(label.to_string(), run())
}

/// Runs every block suite. `fault` adds one stray gate to the named
/// block, which its cost check must catch.
pub fn check_block_identities(fault: Option<BlockKind>) -> Vec<SuiteResult> {
    let mut out: Vec<SuiteResult> = BlockKind::ALL
        .into_iter()
        .map(|k| check_kind(k, fault == Some(k)))
        .collect();
    out.push(check_shared_pair(false));
    out.push(check_shared_pair(true));
    out
}
