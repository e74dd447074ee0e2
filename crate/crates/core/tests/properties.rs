use mulsynth_core::blocks::{BlockCensus, BlockKind};
use mulsynth_core::netlist::Simulator;
use mulsynth_core::verify::random_cases;
use mulsynth_core::*;
use proptest::prelude::*;

/// Random DAG over the full basis: `(kind, src, src)` with sources drawn
/// from earlier wires.
fn arb_netlist() -> impl Strategy<Value = Netlist> {
    (1usize..6, prop::collection::vec((0usize..10, any::<u32>(), any::<u32>()), 0..40), any::<u64>()).prop_map(
        |(inputs, gates, out_seed)| {
            let mut b = NetlistBuilder::new();
            let mut wires = b.add_inputs("i", inputs).unwrap();
            for (k, s1, s2) in gates {
                let a = wires[s1 as usize % wires.len()];
                let c = wires[s2 as usize % wires.len()];
                wires.push(b.add_gate(GateKind::ALL[k], a, c).unwrap());
            }
            let gate_wires = &wires[inputs..];
            let mut outs: Vec<(String, WireRef)> = Vec::new();
            if !gate_wires.is_empty() {
                let count = 1 + (out_seed as usize % gate_wires.len().min(4));
                for j in 0..count {
                    let w = gate_wires[(out_seed as usize / 7 + 3 * j) % gate_wires.len()];
                    if outs.iter().all(|(_, o)| *o != w) {
                        outs.push((format!("o{j}"), w));
                    }
                }
            }
            b.finish(&outs).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(net in arb_netlist()) {
        let text = export_text(&net);
        let back = import_text(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(export_text(&back), text);
    }

    #[test]
    fn gate_count_is_histogram_total(net in arb_netlist()) {
        let hist: usize = net.histogram().values().sum();
        prop_assert_eq!(net.count_gates(), hist);
        prop_assert_eq!(net.count_gates(), net.gates().len());
        prop_assert!(net.validate().is_valid());
    }

    #[test]
    fn word_and_scalar_evaluation_agree(net in arb_netlist(), words in prop::collection::vec(any::<u64>(), 6)) {
        let inputs = &words[..net.num_inputs()];
        let out = net.eval_words(inputs).unwrap();
        for lane in [0u32, 17, 63] {
            let bits: Vec<bool> = inputs.iter().map(|w| w >> lane & 1 == 1).collect();
            let scalar = net.evaluate(&bits).unwrap();
            let from_words: Vec<bool> = out.iter().map(|w| w >> lane & 1 == 1).collect();
            prop_assert_eq!(scalar, from_words);
        }
    }

    #[test]
    fn census_total_is_additive(a in prop::collection::vec(0usize..12, 0..20), b in prop::collection::vec(0usize..12, 0..20), x in 0usize..50, y in 0usize..50) {
        let census = |kinds: &[usize], xors: usize| {
            let mut c = BlockCensus::default();
            for &k in kinds {
                c.record(BlockKind::ALL[k]);
            }
            c.conversion_xors = xors;
            c
        };
        let (ca, cb) = (census(&a, x), census(&b, y));
        let mut merged = ca.clone();
        merged.merge(&cb);
        prop_assert_eq!(merged.gate_total(), ca.gate_total() + cb.gate_total());
    }

    #[test]
    fn school_count_and_census(n in 2usize..=64) {
        let s = build_school(n).unwrap();
        prop_assert_eq!(s.gate_count(), school::predict_school_count(n));
        if n >= 4 {
            prop_assert_eq!(Some(s.census.clone()), school::expected_census(n));
        }
    }

    #[test]
    fn karatsuba_overhead(m in 10usize..=64, sharing in any::<bool>()) {
        let s = synthesize(m, Some(Method::Karatsuba), KaratsubaOptions { force: true, sharing }).unwrap();
        let n = m.div_ceil(2);
        let subs: usize = [n + 1, m - n, n]
            .iter()
            .map(|&w| synthesize(w, None, KaratsubaOptions { force: false, sharing }).unwrap().gate_count())
            .sum();
        prop_assert_eq!(s.gate_count() - subs, karatsuba::predict_overhead(m, sharing));
    }

    #[test]
    fn random_verdict_is_reproducible(seed in any::<u64>()) {
        let s = build_auto(12).unwrap();
        let v1 = random_equivalence(&s.netlist, 12, 300, seed).unwrap();
        let v2 = random_equivalence(&s.netlist, 12, 300, seed).unwrap();
        prop_assert!(v1.passed());
        prop_assert_eq!(&v1.cases, &304);
        prop_assert_eq!(verdict_key(&v1), verdict_key(&v2));
        prop_assert_eq!(random_cases(12, 50, seed), random_cases(12, 50, seed));
    }
}

/// Verdict fields that must match between runs (everything but timing).
fn verdict_key(v: &Verdict) -> (bool, u64, Option<u64>, Option<u64>) {
    (v.passed(), v.cases, v.trials, v.seed)
}

/// Input patterns `(a, b)` gate `index` sees over all `2^(2n)` operand
/// pairs, as a 4-bit mask indexed by `2a + b`.
fn seen_patterns(net: &Netlist, n: usize, index: usize) -> u8 {
    let gate = net.gates()[index];
    let mut probe = NetlistBuilder::new();
    let mut wires = probe.add_inputs("x", net.num_inputs()).unwrap();
    for g in net.gates() {
        let w = probe.add_gate(g.kind, wires[g.a.index()], wires[g.b.index()]).unwrap();
        wires.push(w);
    }
    // AND(x, x) buffers the sources so inputs can be observed as outputs.
    let (sa, sb) = (wires[gate.a.index()], wires[gate.b.index()]);
    let pa = probe.add_gate(GateKind::And, sa, sa).unwrap();
    let pb = probe.add_gate(GateKind::And, sb, sb).unwrap();
    let probe = probe.finish(&[("pa", pa), ("pb", pb)]).unwrap();
    let total = 2 * n;
    let mut sim = Simulator::new(&probe);
    let mut seen = 0u8;
    for base in (0..1u64 << total).step_by(64) {
        let words: Vec<u64> = (0..total)
            .map(|i| (0..64).filter(|l| (base + l) >> i & 1 == 1).fold(0, |w, l| w | 1 << l))
            .collect();
        sim.run_in_place(&words).unwrap();
        let (wa, wb) = (sim.output(0), sim.output(1));
        for lane in 0..64.min(1u64 << total) {
            seen |= 1 << (2 * (wa >> lane & 1) + (wb >> lane & 1));
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// A kind mutation at n = 4 is caught unless the old and new kinds
    /// agree on every input pattern the gate actually sees.
    #[test]
    fn mutations_are_detected(gate_pick in any::<u32>(), kind_pick in 0usize..9) {
        let n = 4;
        let s = build_school(n).unwrap();
        let index = gate_pick as usize % s.netlist.gates().len();
        let old = s.netlist.gates()[index].kind;
        let others: Vec<GateKind> = GateKind::ALL.into_iter().filter(|k| *k != old).collect();
        let new = others[kind_pick];
        let mutant = s.netlist.with_gate_kind(index, new);
        let verdict = exhaustive_equivalence(&mutant, n).unwrap();
        let seen = seen_patterns(&s.netlist, n, index);
        let differs = (0..4u8)
            .filter(|p| seen >> p & 1 == 1)
            .any(|p| old.eval(p >> 1 == 1, p & 1 == 1) != new.eval(p >> 1 == 1, p & 1 == 1));
        prop_assert_eq!(verdict.passed(), !differs, "gate {} {:?} -> {:?}", index, old, new);
        if differs {
            let c = verdict.counterexample.unwrap();
            prop_assert_ne!(c.expected, c.observed);
        }
    }
}

#[test]
fn twenty_seeded_mutations_at_four() {
    // Fixed sample: every one of these mutants changes the function.
    let s = build_school(4).unwrap();
    let gates = s.netlist.gates().len();
    let mut caught = 0;
    for j in 0..20 {
        let index = (j * 37 + 5) % gates;
        let old = s.netlist.gates()[index].kind;
        let new = if old == GateKind::And { GateKind::Nand } else { GateKind::And };
        let v = exhaustive_equivalence(&s.netlist.with_gate_kind(index, new), 4).unwrap();
        if !v.passed() {
            caught += 1;
        }
    }
    assert_eq!(caught, 20);
}
