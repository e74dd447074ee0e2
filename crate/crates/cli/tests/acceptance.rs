//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if
//! any criterion fails. Reference values and limits are pinned here and
//! recomputed independently of the library where practical.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mulsynth_core::blocks::adders::{check_adders, ripple_adder_equal, ripple_adder_unequal};
use mulsynth_core::blocks::suite::check_block_identities;
use mulsynth_core::bounds::{closed_form_k, matrix_step};
use mulsynth_core::synth::{check_profile, LevelProfile};
use mulsynth_core::*;
use num_bigint::BigInt;

/// Reference complexity table for m = 1..=18.
const TABLE: [u64; 18] = [1, 8, 30, 61, 105, 158, 224, 299, 387, 484, 594, 713, 845, 986, 1140, 1287, 1479, 1598];
const TABLE_KARATSUBA: [usize; 2] = [16, 18];
const X4: [u64; 3] = [1598, 1479, 1287];
const RANDOM_TRIALS: u64 = 100_000;
const RANDOM_SEED: u64 = 20_240_101;
const CORNER_CASES: u64 = 4;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: Result<T, SynthError>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn mulsynth(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_mulsynth")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("mulsynth {args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

// Independent closed forms used as oracles.

fn school_formula(n: u64) -> u64 {
    if n == 1 {
        1
    } else {
        (11 * n * n - 13 * n) / 2 - 1 + n % 2
    }
}

fn overhead_formula(m: u64) -> u64 {
    let n = m.div_ceil(2);
    if m.is_multiple_of(2) {
        38 * n - 2
    } else {
        38 * n - 16
    }
}

fn prefers_karatsuba(m: u64) -> bool {
    m == 16 || m >= 18
}

/// Policy-driven gate counts for widths 0..=max (index 0 unused).
fn recurrence(max: u64) -> Vec<u64> {
    let mut k = vec![0u64; max as usize + 1];
    for m in 1..=max {
        let n = m.div_ceil(2);
        k[m as usize] = if prefers_karatsuba(m) {
            k[n as usize + 1] + k[(m - n) as usize] + k[n as usize] + overhead_formula(m)
        } else {
            school_formula(m)
        };
    }
    k
}

fn school_profile(n: usize) -> Vec<usize> {
    // Column k counted from 1; the recorded profile is indexed by k - 1.
    (1..=2 * n)
        .map(|k| match k {
            1 => 1,
            k if k <= n => 2 * k - 2,
            k if k == n + 1 => 2 * n - 2,
            k => 2 * (2 * n - k) + 1,
        })
        .collect()
}

/// `(h+, h-)` at weight `k`, or `None` where only low product bits sit.
fn addsub_heights(m: usize, k: usize) -> Option<(usize, usize)> {
    let n = m.div_ceil(2);
    let odd = m % 2 == 1;
    Some(match k {
        k if k < n => return None,
        k if k == n => (2, 2),
        k if k == n + 1 => (3, 3),
        k if k < 2 * m - n => (3, 4),
        k if odd && (k == 3 * n - 1 || k == 3 * n - 2) => (3, 3),
        k if k == 3 * n => (3, 2),
        k if k == 3 * n + 1 => (3, 1),
        k if k == 3 * n + 2 => (2, 1),
        _ => (2, 0),
    })
}

// Criteria.

fn table_reproduction() -> Outcome {
    let out = mulsynth(&["table", "--max", "18"])?;
    let mut expected = String::from("m,L,method\n");
    for (i, l) in TABLE.iter().enumerate() {
        let m = i + 1;
        let method = if TABLE_KARATSUBA.contains(&m) { "karatsuba" } else { "school" };
        expected.push_str(&format!("{m},{l},{method}\n"));
    }
    ensure(out == expected, || format!("table output differs:\n{out}"))?;
    ensure(out == include_str!("data/table1.csv"), || "golden file differs".into())?;
    for (i, &l) in TABLE.iter().enumerate() {
        let s = ok(build_auto(i + 1))?;
        ensure(s.gate_count() as u64 == l, || format!("built m={} has {} gates, table {l}", i + 1, s.gate_count()))?;
    }
    Ok("18 rows exact, karatsuba at m = 16, 18, built netlists agree".into())
}

fn school_formula_and_census() -> Outcome {
    for n in 2..=64usize {
        let s = ok(build_school(n))?;
        let want = school_formula(n as u64) as usize;
        ensure(s.gate_count() == want, || format!("n={n}: {} gates, formula {want}", s.gate_count()))?;
        if n < 4 {
            continue;
        }
        let odd = n % 2;
        let q = (n * n - 3 * n) / 2 + 1 - odd;
        let expected = [
            (BlockKind::Ha, n),
            (BlockKind::Fa3, n - 3 + 2 * odd),
            (BlockKind::Sfa3, 1),
            (BlockKind::Mdfa, q),
        ];
        let c = &s.census;
        let kinds_ok = expected.iter().all(|&(k, v)| c.count(k) == v)
            && c.blocks.iter().filter(|(_, v)| **v > 0).count() == expected.len();
        ensure(kinds_ok && c.conversion_xors == q + 1, || format!("n={n}: census {}", c.summary()))?;
    }
    Ok("63 gate counts and 61 censuses exact".into())
}

fn karatsuba_recurrences() -> Outcome {
    let k = recurrence(64);
    for m in 10..=64usize {
        let s = ok(build_karatsuba(m, true))?;
        let n = m.div_ceil(2);
        let mut subs = 0;
        for w in [n + 1, m - n, n] {
            let sub = ok(build_auto(w))?.gate_count();
            ensure(sub as u64 == k[w], || format!("auto m={w}: {sub} gates, recurrence {}", k[w]))?;
            subs += sub;
        }
        let overhead = (s.gate_count() - subs) as u64;
        ensure(overhead == overhead_formula(m as u64), || {
            format!("m={m}: overhead {overhead}, expected {}", overhead_formula(m as u64))
        })?;
    }
    for m in 1..=64usize {
        let got = ok(build_auto(m))?.gate_count() as u64;
        ensure(got == k[m], || format!("auto m={m}: {got}, recurrence {}", k[m]))?;
        if m >= 10 {
            let n = m.div_ceil(2);
            let kara = k[n + 1] + k[m - n] + k[n] + overhead_formula(m as u64);
            let cheaper = kara < school_formula(m as u64);
            ensure(cheaper == prefers_karatsuba(m as u64), || format!("m={m}: policy disagrees with costs"))?;
        }
    }
    Ok("55 forced overheads exact, 64 auto totals on the recurrence".into())
}

fn closed_form_and_matrix() -> Outcome {
    let mut x: [BigInt; 3] = X4.map(BigInt::from);
    for k in 4..=20u32 {
        if k > 4 {
            x = matrix_step(&x, k - 1);
        }
        let closed = ok(closed_form_k(k))?;
        ensure(closed == x[2], || format!("k={k}: closed {closed}, matrix {}", x[2]))?;
    }
    let k16 = ok(closed_form_k(4))?;
    let k32 = ok(closed_form_k(5))?;
    ensure(k16 == BigInt::from(1287) && k32 == BigInt::from(4659), || format!("K(16)={k16} K(32)={k32}"))?;
    let top = recurrence(34);
    ensure(top[32] == 4659, || format!("recurrence gives K(32)={}", top[32]))?;
    Ok(format!("k = 4..20 integral and equal, K(16)={k16}, K(32)={k32}"))
}

fn functional_correctness() -> Outcome {
    let mut cases = 0;
    let mut check = |v: Verdict| -> Result<(), String> {
        cases += v.cases;
        ensure(v.passed(), || v.to_string())
    };
    for n in 1..=8 {
        let v = ok(exhaustive_equivalence(&ok(build_school(n))?.netlist, n))?;
        ensure(v.cases == 1 << (2 * n), || format!("school n={n}: {} cases", v.cases))?;
        check(v)?;
    }
    let v = ok(exhaustive_equivalence(&ok(build_karatsuba(10, true))?.netlist, 10))?;
    ensure(v.cases == 1 << 20, || format!("karatsuba m=10: {} cases", v.cases))?;
    check(v)?;
    for m in [12, 16, 18, 32, 64] {
        let mut builds = vec![ok(build_auto(m))?];
        if !prefers_karatsuba(m as u64) {
            builds.push(ok(build_karatsuba(m, true))?);
        }
        for s in builds {
            let v = ok(random_equivalence(&s.netlist, m, RANDOM_TRIALS, RANDOM_SEED))?;
            ensure(v.cases == RANDOM_TRIALS + CORNER_CASES, || format!("m={m}: {} cases", v.cases))?;
            check(v)?;
        }
    }
    Ok(format!("{cases} cases, zero mismatches"))
}

fn block_suites() -> Outcome {
    let catalog = [
        (BlockKind::Ha, 2),
        (BlockKind::HaPm, 2),
        (BlockKind::Nha, 2),
        (BlockKind::Fa3, 5),
        (BlockKind::Fa3Minus, 5),
        (BlockKind::Fa3Zero, 4),
        (BlockKind::Sfa3, 4),
        (BlockKind::Sfa3Minus, 4),
        (BlockKind::Mdfa, 8),
        (BlockKind::MdfaMinus, 8),
    ];
    for (kind, cost) in catalog {
        ensure(kind.cost() == cost, || format!("{kind} costs {}, catalog {cost}", kind.cost()))?;
    }
    let suites = check_block_identities(None);
    for (kind, _) in catalog {
        ensure(suites.iter().any(|s| s.name == kind.token() && s.passed), || format!("{kind} suite missing or failing"))?;
    }
    for s in suites.iter().chain(check_adders(16).iter()) {
        ensure(s.passed, || s.to_string())?;
    }
    for n in 1..=16 {
        let mut b = NetlistBuilder::new();
        let x = b.add_inputs("x", n).map_err(|e| e.to_string())?;
        let y = b.add_inputs("y", n).map_err(|e| e.to_string())?;
        let before = b.gate_count();
        ok(ripple_adder_equal(&mut b, &x, &y))?;
        let equal = b.gate_count() - before;
        ensure(equal == 5 * n - 3, || format!("equal adder n={n}: {equal}"))?;
        if n >= 2 {
            let before = b.gate_count();
            ok(ripple_adder_unequal(&mut b, &x, &y[..n - 1]))?;
            let unequal = b.gate_count() - before;
            ensure(unequal == 5 * n - 6, || format!("unequal adder n={n}: {unequal}"))?;
        }
    }
    Ok(format!("{} block suites, adders 5n-3 / 5n-6 for n <= 16", suites.len()))
}

fn check_levels(levels: &[LevelProfile]) -> Result<(), String> {
    for p in levels {
        let m = p.bits;
        ok(check_profile(p))?;
        match p.method {
            Method::School if m >= 2 => {
                ensure(p.plus == school_profile(m), || format!("school({m}) heights {:?}", p.plus))?;
                ensure(p.minus.iter().all(|&h| h == 0), || format!("school({m}) has subtrahends"))?;
            }
            Method::School => {}
            Method::Karatsuba => {
                for k in 0..2 * m {
                    if let Some(h) = addsub_heights(m, k) {
                        ensure((p.plus[k], p.minus[k]) == h, || {
                            format!("karatsuba({m}) weight {k}: ({}, {}), expected {h:?}", p.plus[k], p.minus[k])
                        })?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn ledger_profiles() -> Outcome {
    let mut levels = 0;
    for n in 1..=64 {
        let s = ok(build_school(n))?;
        check_levels(&s.profiles)?;
        levels += s.profiles.len();
    }
    for m in 10..=64 {
        for sharing in [true, false] {
            let s = ok(synthesize(m, Some(Method::Karatsuba), KaratsubaOptions { force: true, sharing }))?;
            check_levels(&s.profiles)?;
            levels += s.profiles.len();
        }
    }
    let o = Command::new(env!("CARGO_BIN_EXE_mulsynth"))
        .args(["count", "--bits", "16"])
        .env("MULSYNTH_FAULT", "PROFILE")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.code() == Some(3), || format!("perturbed profile exited {:?}", o.status.code()))?;
    Ok(format!("{levels} levels match, perturbed profile exits 3"))
}

fn format_round_trip() -> Outcome {
    let dir = std::env::temp_dir().join(format!("mulsynth-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for m in [4usize, 8, 16, 18] {
        let path = dir.join(format!("m{m}.net"));
        let path = path.to_str().ok_or("temp path is not UTF-8")?;
        mulsynth(&["gen", "--bits", &m.to_string(), "--out", path])?;
        let first = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let net = import_text(&first).map_err(|e| e.to_string())?;
        let second = export_text(&net);
        ensure(first == second, || format!("m={m}: re-export differs"))?;
        let again = export_text(&import_text(&second).map_err(|e| e.to_string())?);
        ensure(again == second, || format!("m={m}: second round trip differs"))?;
        if m == 16 {
            ensure(net.validate().is_valid(), || "m=16 netlist fails validation".into())?;
            let out = mulsynth(&["verify", path, "--bits", "16", "--trials", "100000", "--seed", "16"])?;
            ensure(out.starts_with("PASS"), || out.clone())?;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok("m = 4, 8, 16, 18 byte-identical, m=16 validates and re-verifies".into())
}

fn sharing_soundness() -> Outcome {
    let shared = ok(synthesize(16, None, KaratsubaOptions { force: false, sharing: true }))?;
    let plain = ok(synthesize(16, None, KaratsubaOptions { force: false, sharing: false }))?;
    let n = 8;
    let extra = plain.gate_count() - shared.gate_count();
    ensure(extra == 2 * (n - 1) + 1, || format!("sharing saves {extra} gates"))?;
    let v = ok(random_equivalence(&plain.netlist, 16, RANDOM_TRIALS, RANDOM_SEED))?;
    ensure(v.passed(), || v.to_string())?;
    // Differential check between the two circuits on common words.
    let words: Vec<u64> = (0..32u64).map(|i| (i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)).collect();
    let (a, b) = (
        shared.netlist.eval_words(&words).map_err(|e| e.to_string())?,
        plain.netlist.eval_words(&words).map_err(|e| e.to_string())?,
    );
    ensure(a == b, || "shared and unshared circuits disagree".into())?;
    Ok(format!("{} vs {} gates (+{extra}), equivalent", plain.gate_count(), shared.gate_count()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "table reproduction", limit: Duration::from_secs(10), run: table_reproduction },
        Criterion { id: 2, name: "school formula and census", limit: Duration::from_secs(30), run: school_formula_and_census },
        Criterion { id: 3, name: "karatsuba recurrences", limit: Duration::from_secs(120), run: karatsuba_recurrences },
        Criterion { id: 4, name: "closed form vs matrix", limit: Duration::from_secs(1), run: closed_form_and_matrix },
        Criterion { id: 5, name: "functional correctness", limit: Duration::from_secs(300), run: functional_correctness },
        Criterion { id: 6, name: "block suites and adders", limit: Duration::from_secs(1), run: block_suites },
        Criterion { id: 7, name: "ledger profiles", limit: Duration::from_secs(120), run: ledger_profiles },
        Criterion { id: 8, name: "format round trip", limit: Duration::from_secs(60), run: format_round_trip },
        Criterion { id: 9, name: "sharing soundness", limit: Duration::from_secs(60), run: sharing_soundness },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS [{}] {}: {detail} ({elapsed:.2?}, limit {:?})", c.id, c.name, c.limit),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {}: {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
