use mulsynth_core::bounds::{self, recurrence_l_table};
use mulsynth_core::karatsuba::{self, expected_addsub_profile};
use mulsynth_core::school;
use mulsynth_core::*;
use num_bigint::BigInt;

#[test]
fn school_is_exhaustively_correct_to_eight() {
    for n in 1..=8 {
        let s = build_school(n).unwrap();
        let v = exhaustive_equivalence(&s.netlist, n).unwrap();
        assert!(v.passed(), "{v}");
        assert_eq!(v.cases, 1 << (2 * n));
    }
}

#[test]
fn school_table_values() {
    for (n, gates) in [(4, 61), (5, 105), (6, 158), (10, 484), (17, 1479)] {
        assert_eq!(build_school(n).unwrap().gate_count(), gates, "n={n}");
    }
    let c = school::expected_census(6).unwrap();
    assert_eq!(c.count(BlockKind::Mdfa), 10);
    assert_eq!(c.conversion_xors, 11);
    assert_eq!(c.count(BlockKind::Fa3), 3);
}

#[test]
fn forced_karatsuba_ten_is_exhaustively_correct() {
    let s = build_karatsuba(10, true).unwrap();
    assert_eq!(s.gate_count(), 158 + 105 + 105 + 188);
    let v = exhaustive_equivalence(&s.netlist, 10).unwrap();
    assert!(v.passed(), "{v}");
    assert_eq!(v.cases, 1 << 20);
}

#[test]
fn karatsuba_table_values() {
    assert_eq!(build_karatsuba(12, true).unwrap().gate_count(), 766);
    assert_eq!(build_auto(16).unwrap().gate_count(), 1287);
    assert_eq!(build_auto(18).unwrap().gate_count(), 1598);
    assert_eq!(build_auto(32).unwrap().gate_count(), 4659);
    assert_eq!(karatsuba::predict_overhead(16, true), 302);
    assert_eq!(karatsuba::predict_overhead(11, true), 212);
    assert_eq!(karatsuba::predict_overhead(10, true), 188);
}

#[test]
fn randomized_equivalence_at_large_widths() {
    for m in [12, 16, 18, 32] {
        let s = build_auto(m).unwrap();
        let v = random_equivalence(&s.netlist, m, 20_000, 7).unwrap();
        assert!(v.passed(), "{v}");
    }
}

#[test]
fn odd_and_even_profiles_cover_every_column() {
    for m in 10..=64 {
        let (hp, hm) = expected_addsub_profile(m);
        let n = m.div_ceil(2);
        // Each column's starting height accounts for its block plan.
        assert_eq!((hp[n], hm[n]), (2, 2));
        assert_eq!((hp[2 * m - 1], hm[2 * m - 1]), (2, 0));
        if m % 2 == 1 {
            assert_eq!((hp[3 * n - 2], hm[3 * n - 2]), (3, 3));
        }
    }
}

#[test]
fn table_matches_builds_to_sixty_four() {
    let t = recurrence_l_table(64);
    for m in 1..=64 {
        let s = build_auto(m).unwrap();
        assert_eq!(s.gate_count() as u64, t.l(m), "m={m}");
        assert_eq!(s.method, t.method(m), "m={m}");
    }
}

#[test]
fn table_is_strictly_increasing() {
    let t = recurrence_l_table(5000);
    for m in 1..5000 {
        assert!(t.l(m + 1) > t.l(m), "m={m}");
    }
}

#[test]
fn matrix_recursion_matches_closed_form_and_table() {
    let t = recurrence_l_table((1 << 20) + 2);
    let mut x = bounds::x4();
    for k in 4..=20u32 {
        if k > 4 {
            x = bounds::matrix_step(&x, k - 1);
        }
        assert_eq!(bounds::closed_form_k(k).unwrap(), x[2], "k={k}");
        let p = 1usize << k;
        let from_table = [t.l(p + 2), t.l(p + 1), t.l(p)].map(BigInt::from);
        assert_eq!(from_table, x, "k={k}");
    }
}

#[test]
fn legacy_bounds_are_weaker() {
    for n in 4..=64u64 {
        let ours = school::predict_school_count(n as usize) as u64;
        let improvement = bounds::legacy_school(n) - ours;
        assert_eq!(improvement, (n * n - 3 * n + 2) / 2 - n % 2, "n={n}");
        assert!(improvement > 0);
    }
    for k in 4..=20 {
        assert!(bounds::legacy_karatsuba(k).unwrap() > bounds::closed_form_k(k).unwrap());
    }
}
