//! Ripple-carry adders used for the Karatsuba pre-additions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{raw_fa3, suite::SuiteResult, SynthError};
use crate::netlist::{GateKind, NetlistBuilder, WireRef};

fn half(b: &mut NetlistBuilder, x: WireRef, y: WireRef) -> Result<(WireRef, WireRef), SynthError> {
    let s = b.add_gate(GateKind::Xor, x, y)?;
    let c = b.add_gate(GateKind::And, x, y)?;
    Ok((c, s))
}

/// Adds two `n`-bit numbers (LSB first) into `n + 1` bits using `5n - 3`
/// gates.
pub fn ripple_adder_equal(b: &mut NetlistBuilder, x: &[WireRef], y: &[WireRef]) -> Result<Vec<WireRef>, SynthError> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(SynthError::Domain(format!(
            "equal ripple adder needs two non-empty operands of one width, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    let (mut carry, s) = half(b, x[0], y[0])?;
    out.push(s);
    for i in 1..n {
        let (c, s) = raw_fa3(b, x[i], y[i], carry)?;
        out.push(s);
        carry = c;
    }
    out.push(carry);
    Ok(out)
}

/// Adds an `n`-bit `x` and an `(n - 1)`-bit `y` into `n + 1` bits using
/// `5n - 6` gates. Requires `n >= 2`.
pub fn ripple_adder_unequal(b: &mut NetlistBuilder, x: &[WireRef], y: &[WireRef]) -> Result<Vec<WireRef>, SynthError> {
    let n = x.len();
    if n < 2 || y.len() + 1 != n {
        return Err(SynthError::Domain(format!(
            "unequal ripple adder needs widths n and n-1 with n >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    let (mut carry, s) = half(b, x[0], y[0])?;
    out.push(s);
    for i in 1..n - 1 {
        let (c, s) = raw_fa3(b, x[i], y[i], carry)?;
        out.push(s);
        carry = c;
    }
    let (c, s) = half(b, x[n - 1], carry)?;
    out.push(s);
    out.push(c);
    Ok(out)
}

const EXHAUSTIVE_INPUTS: usize = 16;
const SAMPLED_CASES: usize = 4096;

/// Checks both adders and their gate counts for every width up to
/// `max_width`: exhaustively up to 16 input bits, on seeded samples above.
pub fn check_adders(max_width: usize) -> Vec<SuiteResult> {
    let mut results = Vec::new();
    for n in 1..=max_width {
        results.push(check_one(n, false));
        if n >= 2 {
            results.push(check_one(n, true));
        }
    }
    results
}

fn check_one(n: usize, unequal: bool) -> SuiteResult {
    let (label, ywidth, expected_cost) = if unequal {
        (format!("ADDER_UNEQUAL({n})"), n - 1, 5 * n - 6)
    } else {
        (format!("ADDER_EQUAL({n})"), n, 5 * n - 3)
    };
    let run = || -> Result<usize, String> {
        let mut b = NetlistBuilder::new();
        let x = b.add_inputs("x", n).map_err(|e| e.to_string())?;
        let y = b.add_inputs("y", ywidth).map_err(|e| e.to_string())?;
        let sum = if unequal {
            ripple_adder_unequal(&mut b, &x, &y)
        } else {
            ripple_adder_equal(&mut b, &x, &y)
        }
        .map_err(|e| e.to_string())?;
        let outs: Vec<(String, WireRef)> = sum.iter().enumerate().map(|(k, w)| (format!("s{k}"), *w)).collect();
        let net = b.finish(&outs).map_err(|e| e.to_string())?;
        if net.count_gates() != expected_cost {
            return Err(format!("{label} cost: expected {expected_cost}, got {}", net.count_gates()));
        }
        let total = n + ywidth;
        let assignments: Vec<u64> = if total <= EXHAUSTIVE_INPUTS {
            (0..1u64 << total).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            (0..SAMPLED_CASES).map(|_| rng.gen::<u64>() & ((1 << total) - 1)).collect()
        };
        let mut cases = 0;
        for v in assignments {
            let bits: Vec<bool> = (0..total).map(|i| v >> i & 1 == 1).collect();
            let out = net.evaluate(&bits).map_err(|e| e.to_string())?;
            let got: u64 = out.iter().enumerate().map(|(k, &o)| (o as u64) << k).sum();
            let want = (v & ((1 << n) - 1)) + (v >> n);
            if got != want {
                return Err(format!("{label}: x={} y={} gave {got}, expected {want}", v & ((1 << n) - 1), v >> n));
            }
            cases += 1;
        }
        Ok(cases)
    };
    SuiteResult::from_run(label.clone(), run())
}
