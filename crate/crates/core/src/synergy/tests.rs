use proptest::prelude::*;

use super::*;
use crate::corpus::{
    parse_code_list, test_record, valid_set, CategorySet, Indicator, MessageRecord,
};
use crate::error::Error;

fn rec(codes: &str, likes: u64) -> MessageRecord {
    let mut r = test_record(codes);
    r.likes = likes;
    r.comments = likes / 2;
    r.shares = likes % 3;
    r
}

fn aa() -> BaselinePredicate {
    default_baselines()
        .into_iter()
        .find(|b| b.name == "AA")
        .unwrap()
}

fn set(codes: &str) -> CategorySet {
    parse_code_list(codes).unwrap()
}

fn quick(min_n: usize) -> SweepParams {
    SweepParams {
        k_max: 2,
        min_n,
        resamples: 200,
        seed: 11,
        ..SweepParams::default()
    }
}

#[test]
fn four_record_delta() {
    let records = vec![
        rec("NoSrc+Hum+Gain+NoEv", 1),
        rec("NoSrc+Hum+Gain+NoEv", 3),
        rec("NoSrc+Fear+Loss+NoEv", 0),
        rec("NoSrc+Fear+Loss+NoEv", 0),
        rec("Exp+Hum+Gain+ExpEv", 100),
    ];
    let base = aa();
    let data = BaselineData::new(&base, &records);
    assert_eq!(data.len(), 4);
    let e = evaluate_combination(&data, set("Hum"), Indicator::Likes, &quick(0), "t").unwrap();
    assert_eq!((e.n_with, e.n_without), (2, 2));
    assert!((e.delta_e.unwrap() - 1.039_721).abs() < 1e-6);
    let pair =
        evaluate_combination(&data, set("Hum+Gain"), Indicator::Likes, &quick(0), "t").unwrap();
    assert_eq!(pair.delta_e, e.delta_e);
}

#[test]
fn identical_groups_give_zero() {
    let records: Vec<_> = (0..40)
        .map(|i| {
            rec(
                if i % 2 == 0 {
                    "NoSrc+Hum+Gain+NoEv"
                } else {
                    "NoSrc+Fear+Gain+NoEv"
                },
                7,
            )
        })
        .collect();
    let base = aa();
    let data = BaselineData::new(&base, &records);
    let e = evaluate_combination(&data, set("Hum"), Indicator::Likes, &quick(0), "t").unwrap();
    assert_eq!(e.delta_e, Some(0.0));
    assert!(!e.significant);
}

#[test]
fn degenerate_groups_are_flagged() {
    let records = vec![rec("NoSrc+Hum+Gain+NoEv", 5), rec("NoSrc+Hum+Loss+NoEv", 2)];
    let base = aa();
    let data = BaselineData::new(&base, &records);
    let e = evaluate_combination(&data, set("Hum"), Indicator::Likes, &quick(0), "t").unwrap();
    assert!(e.is_degenerate());
    assert_eq!((e.n_with, e.n_without), (2, 0));
    assert!(!e.significant);
    assert!(e.ci.is_none());
    assert_eq!(e.cell(), "Hum (n/a)");
}

#[test]
fn rejects_combinations_outside_the_universe() {
    let base = aa();
    let data = BaselineData::new(&base, &[]);
    let p = quick(0);
    for bad in ["Exp", "Gain+Loss", "NoApp+Hum"] {
        assert!(
            evaluate_combination(&data, set(bad), Indicator::Likes, &p, "t").is_err(),
            "{bad}"
        );
    }
    assert!(evaluate_combination(&data, CategorySet::EMPTY, Indicator::Likes, &p, "t").is_err());
}

#[test]
fn cell_format_shape() {
    let records: Vec<_> = (0..20)
        .map(|i| {
            rec(
                if i < 10 {
                    "Exp+Valu+Util+Met+Gain+Narr+ExpEv"
                } else {
                    "Exp+Fear+Loss+ExpEv"
                },
                3 + i,
            )
        })
        .collect();
    let base = default_baselines()
        .into_iter()
        .find(|b| b.name == "IAP")
        .unwrap();
    let data = BaselineData::new(&base, &records);
    let e = evaluate_combination(
        &data,
        set("Met+Util+Narr+Valu"),
        Indicator::Likes,
        &quick(0),
        "t",
    )
    .unwrap();
    let cell = e.cell();
    let (codes, value) = cell.split_once(" (").unwrap();
    assert_eq!(codes, "Valu+Util+Met+Narr");
    let value = value.strip_suffix(')').unwrap();
    assert_eq!(value.split_once('.').unwrap().1.len(), 3);
    assert_eq!(
        value.parse::<f64>().unwrap(),
        format!("{:.3}", e.delta_e.unwrap()).parse::<f64>().unwrap()
    );
}

#[test]
fn enumeration_counts() {
    assert_eq!(
        enumerate_combinations(set("Sex+Fear+Hum+Valu+Util"), 2).len(),
        15
    );
    assert_eq!(
        enumerate_combinations(set("Sex+Fear+Hum+Valu+Util"), 5).len(),
        31
    );
    // 9 appeals + 3 frames; frame pairs and NoApp pairs drop out
    let aa_universe = aa().peripheral_universe();
    assert_eq!(aa_universe.len(), 12);
    assert_eq!(
        enumerate_combinations(aa_universe, 2).len(),
        12 + 66 - 3 - 8
    );
    let combos = enumerate_combinations(aa_universe, 4);
    assert!(combos
        .iter()
        .all(|s| is_consistent(*s) && !s.is_empty() && s.len() <= 4));
    assert!(combos.windows(2).all(|w| w[0].len() <= w[1].len()));
    let mut sorted = combos.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), combos.len());
}

#[test]
fn enumeration_matches_brute_force() {
    for base in default_baselines() {
        let u = base.peripheral_universe();
        let mut expected: Vec<u32> = (1u32..1 << 20)
            .filter(|&b| b & !u.bits() == 0 && b.count_ones() <= 3)
            .filter(|&b| is_consistent(CategorySet::from_bits(b)))
            .collect();
        let mut got: Vec<u32> = enumerate_combinations(u, 3)
            .iter()
            .map(|s| s.bits())
            .collect();
        expected.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expected, "{}", base.name);
    }
}

#[test]
fn budget_guard() {
    let params = SweepParams {
        k_max: 6,
        budget: 100,
        ..SweepParams::default()
    };
    match sweep(&[], &aa(), &[Indicator::Likes], &params) {
        Err(Error::Budget { candidates, cap }) => {
            assert_eq!(candidates, 924);
            assert_eq!(cap, 100);
        }
        other => panic!("expected budget error, got {other:?}"),
    }
}

fn mixed_corpus(n: usize) -> Vec<MessageRecord> {
    let shapes = [
        "NoSrc+Hum+Gain+NoEv",
        "NoSrc+Hum+Valu+NoFrm+NoEv",
        "NoSrc+Fear+Loss+NoEv",
        "NoSrc+NoApp+NoFrm+NoEv",
        "NoSrc+Dual+Valu+Gain+NoEv",
        "Exp+Valu+Gain+ExpEv",
    ];
    (0..n)
        .map(|i| {
            let shape = shapes[(i * 7 + i / 3) % shapes.len()];
            let mut likes = ((i * 2_654_435_761) % 40) as u64;
            if shape.contains("Hum") {
                likes *= 3;
            }
            rec(shape, likes)
        })
        .collect()
}

#[test]
fn sweep_partitions_and_sorts() {
    let records = mixed_corpus(600);
    let params = SweepParams {
        min_n: 50,
        ..quick(50)
    };
    let effects = sweep(&records, &aa(), &Indicator::ALL, &params).unwrap();
    let base_n = records
        .iter()
        .filter(|r| aa().matches(r.features()))
        .count();
    assert_eq!(effects.len(), 3 * 67);
    assert!(effects.iter().all(|e| e.n_with + e.n_without == base_n));
    assert!(effects.iter().all(|e| !e.significant || e.n_with > 50));
    for w in effects.windows(2) {
        assert!(w[0].indicator <= w[1].indicator);
        if w[0].indicator == w[1].indicator {
            match (w[0].delta_e, w[1].delta_e) {
                (Some(a), Some(b)) => assert!(a >= b),
                (None, Some(_)) => panic!("degenerate effect before a defined one"),
                _ => {}
            }
        }
    }
    let first = effects
        .iter()
        .find(|e| e.indicator == Indicator::Likes)
        .unwrap();
    assert!(
        first.combination.contains(crate::corpus::Category::Humor),
        "{}",
        first.cell()
    );
}

#[test]
fn min_n_blocks_significance() {
    let records = mixed_corpus(600);
    let effects = sweep(&records, &aa(), &[Indicator::Likes], &quick(10_000)).unwrap();
    assert!(effects.iter().all(|e| !e.significant));
    assert!(complexity_curve(&effects).is_empty());
}

#[test]
fn sweep_is_deterministic_across_pool_sizes() {
    let records = mixed_corpus(300);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep(&records, &aa(), &Indicator::ALL, &quick(20)).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let mut shuffled = records.clone();
    shuffled.reverse();
    for r in shuffled.iter_mut() {
        r.id = format!("x{}", r.id);
    }
    let c = sweep(&shuffled, &aa(), &Indicator::ALL, &quick(20)).unwrap();
    assert_eq!(a.len(), c.len());
    for x in &a {
        let y = c
            .iter()
            .find(|y| y.indicator == x.indicator && y.combination == x.combination)
            .unwrap();
        assert_eq!((x.n_with, x.n_without), (y.n_with, y.n_without));
        match (x.delta_e, y.delta_e) {
            (Some(p), Some(q)) => assert!((p - q).abs() < 1e-12),
            (p, q) => assert_eq!(p, q),
        }
    }
}

#[test]
fn none_of_variant_excludes_partial_overlap() {
    let records = vec![
        rec("NoSrc+Hum+Gain+NoEv", 9),
        rec("NoSrc+Hum+Loss+NoEv", 1),
        rec("NoSrc+Fear+Loss+NoEv", 3),
    ];
    let base = aa();
    let data = BaselineData::new(&base, &records);
    let complement =
        evaluate_combination(&data, set("Hum+Gain"), Indicator::Likes, &quick(0), "t").unwrap();
    assert_eq!((complement.n_with, complement.n_without), (1, 2));
    let p = SweepParams {
        without: WithoutRule::NoneOf,
        ..quick(0)
    };
    let none = evaluate_combination(&data, set("Hum+Gain"), Indicator::Likes, &p, "t").unwrap();
    assert_eq!((none.n_with, none.n_without), (1, 1));
}

fn effect(pattern: &str, codes: &str, d: f64, significant: bool) -> CombinationEffect {
    CombinationEffect {
        pattern: pattern.into(),
        combination: set(codes),
        indicator: Indicator::Likes,
        n_with: 400,
        n_without: 400,
        delta_e: Some(d),
        ci: None,
        significant,
    }
}

#[test]
fn curve_examples() {
    let c = complexity_curve(&[effect("AA", "Hum+Gain", 0.5, true)]);
    assert_eq!(c.points.len(), 1);
    assert_eq!((c.points[0].k, c.points[0].count), (2, 1));
    assert_eq!(c.points[0].mean_delta_e, 0.5);
    assert_eq!(c.points[0].stderr, None);
    let c = complexity_curve(&[
        effect("AA", "Hum", 0.2, true),
        effect("AA", "Fear", 0.4, true),
        effect("AA", "Dual", 9.0, false),
    ]);
    assert_eq!(c.points.len(), 1);
    assert!((c.points[0].mean_delta_e - 0.3).abs() < 1e-15);
    assert!((c.points[0].stderr.unwrap() - 0.1).abs() < 1e-12);
    let mut out = Vec::new();
    c.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("pattern,indicator,k,mean_delta_e,count,stderr\nAA,likes,1,"));
}

#[test]
fn extremes_cells() {
    let effects = vec![
        effect("AA", "Hum", 0.691, true),
        effect("AA", "Hum+Gain", 0.682, true),
        effect("AA", "Dual", 0.9, false),
        effect("AA", "Fear", 0.1, true),
        effect("AA", "NoApp", -0.2, true),
    ];
    let rows = extremes_table(
        &effects,
        &["AA".into(), "CE".into()],
        "",
        &[Indicator::Likes],
        DEFAULT_TOP,
        CellStyle::Compact,
    );
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].cell_text(0), "Hum (0.691); Hum+Gain (0.682)");
    assert_eq!(rows[1].cell_text(0), "NoApp (-0.200)");
    assert_eq!(rows[2].cell_text(0), EMPTY_CELL);
    assert_eq!(
        format_cell(&rows[0].cells[0][..1], CellStyle::Spaced),
        "Hum (0.69)"
    );
    let spaced = effect("IAP", "Met+Util+Narr+Gain", 1.3449, true);
    assert_eq!(
        spaced.cell_styled(CellStyle::Spaced),
        "Util + Met + Gain + Narr (1.34)"
    );
    let mut out = Vec::new();
    write_extremes_csv(&rows, &[Indicator::Likes], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "AA,Positive,Hum (0.691); Hum+Gain (0.682)"
    );
}

#[test]
fn effects_csv_columns() {
    let mut out = Vec::new();
    write_effects_csv(&[effect("AA", "Hum+Gain", 0.5, true)], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "pattern,combination,indicator,k,n_with,n_without,delta_e,ci_lo,ci_hi,significant"
    );
    assert_eq!(
        lines.next().unwrap(),
        "AA,Hum+Gain,likes,2,400,400,0.5,,,true"
    );
}

fn corpus_strategy() -> impl Strategy<Value = Vec<MessageRecord>> {
    prop::collection::vec((valid_set(), 0u64..500), 1..80).prop_map(|rows| {
        rows.into_iter()
            .map(|(s, likes)| rec(&s.join_codes("+"), likes))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_matches_brute_force(records in corpus_strategy(), pick in any::<prop::sample::Index>()) {
        let base = aa();
        let combos = enumerate_combinations(base.peripheral_universe(), 3);
        let s = combos[pick.index(combos.len())];
        let data = BaselineData::new(&base, &records);
        let e = evaluate_combination(&data, s, Indicator::Likes, &quick(0), "p").unwrap();
        let mut with = Vec::new();
        let mut without = Vec::new();
        for r in &records {
            let labels = r.labels();
            let core = labels.contains(crate::corpus::Category::NoSource)
                && labels.contains(crate::corpus::Category::NoEvidence);
            if !core {
                continue;
            }
            let x = (r.likes as f64 + 1.0).ln();
            if s.iter().all(|c| labels.contains(c)) { with.push(x) } else { without.push(x) }
        }
        prop_assert_eq!(e.n_with, with.len());
        prop_assert_eq!(e.n_without, without.len());
        if with.is_empty() || without.is_empty() {
            prop_assert!(e.delta_e.is_none());
        } else {
            let naive = with.iter().sum::<f64>() / with.len() as f64
                - without.iter().sum::<f64>() / without.len() as f64;
            prop_assert!((e.delta_e.unwrap() - naive).abs() <= 1e-12);
        }
    }
}
