//! Functional verification against an arbitrary-precision oracle.
//!
//! Netlists are simulated 64 operand pairs at a time, one pair per bit
//! lane. Inputs are `a0..a{m-1}` followed by `b0..b{m-1}`; output `k` has
//! weight `2^k` and missing high outputs read as zero.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{check_adders, check_block_identities, BlockKind, SuiteResult};
use crate::error::SynthError;
use crate::karatsuba::KaratsubaOptions;
use crate::netlist::{Netlist, Simulator};
use crate::synth::{synthesize, Method};

/// Largest width [`exhaustive_equivalence`] accepts.
pub const EXHAUSTIVE_MAX_BITS: usize = 12;

/// Name of the generator behind [`random_equivalence`].
pub const PRNG_NAME: &str = "ChaCha8Rng";

/// Reference product. Never touches a netlist.
pub fn oracle_multiply(a: &BigUint, b: &BigUint) -> BigUint {
    a * b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random,
}

/// Decimal operands and products of a failing case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub a: String,
    pub b: String,
    pub expected: String,
    pub observed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub mode: Mode,
    pub bits: usize,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prng: Option<&'static str>,
    pub counterexample: Option<Counterexample>,
    /// Wall time; left out of JSON so reports stay byte-identical.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Exhaustive => "exhaustive".to_string(),
            Mode::Random => format!(
                "random, {} trials, seed {}, {}",
                self.trials.unwrap_or(0),
                self.seed.unwrap_or(0),
                self.prng.unwrap_or(PRNG_NAME)
            ),
        };
        match &self.counterexample {
            None => write!(f, "PASS {}-bit ({mode}): {}/{} cases", self.bits, self.cases, self.cases),
            Some(c) => write!(
                f,
                "FAIL {}-bit ({mode}): {} * {} = {}, circuit gives {}",
                self.bits, c.a, c.b, c.expected, c.observed
            ),
        }
    }
}

fn check_shape(netlist: &Netlist, m: usize) -> Result<(), SynthError> {
    if m == 0 {
        return Err(SynthError::Domain("operand width must be at least 1".into()));
    }
    if netlist.num_inputs() != 2 * m || netlist.num_outputs() > 2 * m {
        return Err(SynthError::Domain(format!(
            "a {m}-bit multiplier needs {} inputs and at most {} outputs, netlist has {} and {}",
            2 * m,
            2 * m,
            netlist.num_inputs(),
            netlist.num_outputs()
        )));
    }
    Ok(())
}

/// Checks all `2^(2m)` operand pairs. The reported counterexample is the
/// smallest failing `(a, b)` regardless of thread scheduling.
pub fn exhaustive_equivalence(netlist: &Netlist, m: usize) -> Result<Verdict, SynthError> {
    check_shape(netlist, m)?;
    if m > EXHAUSTIVE_MAX_BITS {
        return Err(SynthError::Domain(format!(
            "exhaustive check is limited to {EXHAUSTIVE_MAX_BITS} bits, use random equivalence for {m}"
        )));
    }
    let start = Instant::now();
    let side = 1u64 << m;
    let lanes = side.min(64);
    let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
    let outs = netlist.num_outputs();

    let failure = (0..side).into_par_iter().find_map_first(|a| {
        let mut sim = Simulator::new(netlist);
        let mut inputs = vec![0u64; 2 * m];
        for (i, word) in inputs[..m].iter_mut().enumerate() {
            *word = if a >> i & 1 == 1 { mask } else { 0 };
        }
        for base in (0..side).step_by(lanes as usize) {
            for i in 0..m {
                inputs[m + i] = (0..lanes).filter(|l| (base + l) >> i & 1 == 1).fold(0, |w, l| w | 1 << l);
            }
            sim.run_in_place(&inputs).expect("input count checked");
            let mut bad = 0u64;
            for k in 0..2 * m {
                let got = if k < outs { sim.output(k) } else { 0 };
                let want = (0..lanes)
                    .filter(|l| (a * (base + l)) >> k & 1 == 1)
                    .fold(0u64, |w, l| w | 1 << l);
                bad |= (got ^ want) & mask;
            }
            if bad != 0 {
                let lane = bad.trailing_zeros() as u64;
                let observed = (0..outs).fold(0u64, |v, k| v | (sim.output(k) >> lane & 1) << k);
                return Some((a, base + lane, observed));
            }
        }
        None
    });

    let counterexample = failure.map(|(a, b, observed)| Counterexample {
        a: a.to_string(),
        b: b.to_string(),
        expected: oracle_multiply(&BigUint::from(a), &BigUint::from(b)).to_string(),
        observed: observed.to_string(),
    });
    Ok(Verdict {
        status: if counterexample.is_some() { Status::Fail } else { Status::Pass },
        mode: Mode::Exhaustive,
        bits: m,
        cases: if counterexample.is_some() { 0 } else { side * side },
        trials: None,
        seed: None,
        prng: None,
        counterexample,
        elapsed: start.elapsed(),
    })
}

fn random_operand(rng: &mut ChaCha8Rng, m: usize) -> BigUint {
    let digits: Vec<u32> = (0..m.div_ceil(32)).map(|_| rng.gen::<u32>()).collect();
    let v = BigUint::new(digits);
    let excess = 32 * m.div_ceil(32) - m;
    if excess == 0 {
        v
    } else {
        v & ((BigUint::from(1u8) << m) - 1u8)
    }
}

/// Corner vectors followed by `trials` seeded random operand pairs.
pub fn random_cases(m: usize, trials: u64, seed: u64) -> Vec<(BigUint, BigUint)> {
    let one = BigUint::from(1u8);
    let top = (&one << m) - 1u8;
    let half = &one << (m - 1);
    let mut cases = vec![
        (BigUint::zero(), BigUint::zero()),
        (top.clone(), top.clone()),
        (one, top),
        (half.clone(), half),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = random_operand(&mut rng, m);
        let b = random_operand(&mut rng, m);
        cases.push((a, b));
    }
    cases
}

/// Seeded randomized check; the verdict is a function of the netlist,
/// `m`, `trials` and `seed` only.
pub fn random_equivalence(netlist: &Netlist, m: usize, trials: u64, seed: u64) -> Result<Verdict, SynthError> {
    check_shape(netlist, m)?;
    if trials == 0 {
        return Err(SynthError::Domain("at least one random trial is required".into()));
    }
    let start = Instant::now();
    let cases = random_cases(m, trials, seed);
    let outs = netlist.num_outputs();

    let failure = cases.par_chunks(64).enumerate().find_map_first(|(chunk_index, chunk)| {
        let mut sim = Simulator::new(netlist);
        let mut inputs = vec![0u64; 2 * m];
        for (lane, (a, b)) in chunk.iter().enumerate() {
            for i in 0..m {
                inputs[i] |= (a.bit(i as u64) as u64) << lane;
                inputs[m + i] |= (b.bit(i as u64) as u64) << lane;
            }
        }
        sim.run_in_place(&inputs).expect("input count checked");
        for (lane, (a, b)) in chunk.iter().enumerate() {
            let mut observed = BigUint::zero();
            for k in 0..outs {
                if sim.output(k) >> lane & 1 == 1 {
                    observed.set_bit(k as u64, true);
                }
            }
            let expected = oracle_multiply(a, b);
            if observed != expected {
                return Some((chunk_index * 64 + lane, expected, observed));
            }
        }
        None
    });

    let counterexample = failure.map(|(index, expected, observed)| Counterexample {
        a: cases[index].0.to_string(),
        b: cases[index].1.to_string(),
        expected: expected.to_string(),
        observed: observed.to_string(),
    });
    Ok(Verdict {
        status: if counterexample.is_some() { Status::Fail } else { Status::Pass },
        mode: Mode::Random,
        bits: m,
        cases: if counterexample.is_some() { 0 } else { cases.len() as u64 },
        trials: Some(trials),
        seed: Some(seed),
        prng: Some(PRNG_NAME),
        counterexample,
        elapsed: start.elapsed(),
    })
}

/// Aggregate of every self-check suite.
#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn build_suite(name: String, run: impl FnOnce() -> Result<Verdict, SynthError>) -> SuiteResult {
    let result = match run() {
        Ok(v) if v.passed() => Ok(v.cases as usize),
        Ok(v) => Err(v.to_string()),
        Err(e) => Err(e.to_string()),
    };
    SuiteResult {
        passed: result.is_ok(),
        cases: *result.as_ref().unwrap_or(&0),
        detail: result.err(),
        name,
    }
}

/// Block identities, adders, and small school and Karatsuba builds with
/// their built-in profile and census assertions. `fault` plants one
/// stray gate in the named block.
pub fn selftest(fault: Option<BlockKind>) -> SelftestReport {
    let mut suites = check_block_identities(fault);
    suites.extend(check_adders(16));
    for n in 1..=6 {
        suites.push(build_suite(format!("SCHOOL({n})"), || {
            let s = synthesize(n, Some(Method::School), KaratsubaOptions::default())?;
            exhaustive_equivalence(&s.netlist, n)
        }));
    }
    let forced = KaratsubaOptions { force: true, sharing: true };
    for m in [10, 11, 12, 13] {
        suites.push(build_suite(format!("KARATSUBA({m})"), || {
            let s = synthesize(m, Some(Method::Karatsuba), forced)?;
            random_equivalence(&s.netlist, m, 2000, 1)
        }));
    }
    suites.push(build_suite("AUTO(16)".into(), || {
        let s = synthesize(16, None, KaratsubaOptions::default())?;
        random_equivalence(&s.netlist, 16, 2000, 1)
    }));
    SelftestReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{GateKind, NetlistBuilder};

    #[test]
    fn oracle_values() {
        let m = |a: u64, b: u64| oracle_multiply(&BigUint::from(a), &BigUint::from(b));
        assert_eq!(m(3, 5), BigUint::from(15u8));
        assert_eq!(m(255, 255), BigUint::from(65025u32));
        let big = m(u32::MAX as u64, u32::MAX as u64);
        assert_eq!(big.to_string(), "18446744065119617025");
        // Repeated addition on a small factor agrees.
        let x = BigUint::from(u32::MAX);
        let sum = (0..7).fold(BigUint::zero(), |acc, _| acc + &x);
        assert_eq!(oracle_multiply(&x, &BigUint::from(7u8)), sum);
    }

    #[test]
    fn one_bit_multiplier_has_a_single_output() {
        let s = synthesize(1, None, KaratsubaOptions::default()).unwrap();
        let v = exhaustive_equivalence(&s.netlist, 1).unwrap();
        assert!(v.passed(), "{v}");
        assert_eq!(v.cases, 4);
    }

    #[test]
    fn reports_smallest_counterexample() {
        // p0 = a0 | b0 is wrong exactly when a0 != b0; smallest is (0, 1).
        let mut b = NetlistBuilder::new();
        let a0 = b.add_input("a0").unwrap();
        let b0 = b.add_input("b0").unwrap();
        let g = b.add_gate(GateKind::Or, a0, b0).unwrap();
        let net = b.finish(&[("p0", g)]).unwrap();
        let v = exhaustive_equivalence(&net, 1).unwrap();
        let c = v.counterexample.unwrap();
        assert_eq!((c.a.as_str(), c.b.as_str(), c.expected.as_str(), c.observed.as_str()), ("0", "1", "0", "1"));
    }

    #[test]
    fn guard_and_shape_errors() {
        let s = synthesize(13, None, KaratsubaOptions::default()).unwrap();
        assert!(exhaustive_equivalence(&s.netlist, 13).is_err());
        assert!(exhaustive_equivalence(&s.netlist, 12).is_err());
        assert!(random_equivalence(&s.netlist, 13, 0, 1).is_err());
    }

    #[test]
    fn random_cases_are_reproducible() {
        assert_eq!(random_cases(20, 100, 42), random_cases(20, 100, 42));
        assert_ne!(random_cases(20, 100, 42), random_cases(20, 100, 43));
        let c = random_cases(16, 0, 1);
        assert_eq!(c[1].0.to_string(), "65535");
        assert_eq!(c[3].0.to_string(), "32768");
        assert!(random_cases(37, 50, 9).iter().all(|(a, b)| a.bits() <= 37 && b.bits() <= 37));
    }

    #[test]
    fn selftest_passes_and_catches_faults() {
        let clean = selftest(None);
        assert!(clean.passed, "{:?}", clean.suites.iter().filter(|s| !s.passed).collect::<Vec<_>>());
        assert!(clean.suites.len() >= 12);
        let faulty = selftest(Some(BlockKind::Mdfa));
        assert!(!faulty.passed);
    }
}
