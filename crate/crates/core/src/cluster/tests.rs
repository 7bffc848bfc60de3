use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::corpus::{test_record, Category, CategorySet, FeatureVector};
use crate::rng::stream;
use crate::stats::adjusted_rand_index;

pub(crate) fn proto(codes: &str) -> FeatureVector {
    test_record(codes).features()
}

/// Copies of each prototype, each copy with probability `flip` getting one
/// random slot flipped, then uniform random vectors. Returns vectors and
/// planted labels (-1 for uniform).
pub(crate) fn planted(
    protos: &[&str],
    copies: usize,
    flip: f64,
    uniform: usize,
    seed: u64,
) -> (Vec<FeatureVector>, Vec<i32>) {
    let mut rng = stream(seed, "test/planted");
    let mut vs = Vec::new();
    let mut truth = Vec::new();
    for (k, codes) in protos.iter().enumerate() {
        let p = proto(codes);
        let frame = p
            .set()
            .restrict(crate::corpus::Dimension::Frame)
            .iter()
            .next();
        for _ in 0..copies {
            let mut bits = p.bits();
            if rng.random_bool(flip) {
                bits ^= 1 << rng.random_range(0..20);
            }
            vs.push(FeatureVector::repair(bits, frame));
            truth.push(k as i32);
        }
    }
    for _ in 0..uniform {
        let bits = rng.random::<u32>() & CategorySet::FULL.bits();
        vs.push(FeatureVector::repair(bits, None));
        truth.push(NOISE);
    }
    (vs, truth)
}

fn small_params(mcs: usize, ms: usize) -> ClusterParams {
    ClusterParams {
        min_cluster_size: mcs,
        min_samples: ms,
        ..Default::default()
    }
}

const C16: &str = "Exp+Valu+Gain+ExpEv";
const C19: &str = "NoSrc+Valu+Gain+NoEv";

#[test]
fn two_planted_prototypes_are_recovered() {
    let (vs, truth) = planted(&[C16, C19], 200, 0.05, 20, 11);
    let model = fit(&vs, &small_params(20, 5)).unwrap();
    let labels = model.labels();
    assert_eq!(model.clusters.len(), 2, "{:#?}", model.clusters);
    let planted_idx: Vec<usize> = (0..400).collect();
    let a: Vec<i32> = planted_idx.iter().map(|&i| labels[i]).collect();
    let b: Vec<i32> = planted_idx.iter().map(|&i| truth[i]).collect();
    let ari = adjusted_rand_index(&a, &b).unwrap();
    assert!(ari >= 0.9, "ARI {ari}");
    let uniform_noise = labels[400..].iter().filter(|&&l| l == NOISE).count();
    assert!(
        uniform_noise >= 15,
        "{uniform_noise} of 20 uniform vectors are noise"
    );
}

#[test]
fn model_invariants_hold() {
    let (vs, _) = planted(&[C16, C19, "NoSrc+NoApp+NoFrm+NoEv"], 150, 0.05, 40, 5);
    let params = small_params(20, 5);
    let model = fit(&vs, &params).unwrap();
    let labels = model.labels();
    for c in &model.clusters {
        let members = labels.iter().filter(|&&l| l == c.id).count() as u64;
        assert_eq!(members, c.size);
        assert!(c.size >= params.min_cluster_size as u64);
        assert!(!c.exemplars.is_empty());
    }
    let n = model.points.len();
    let mut birth: HashMap<usize, f64> = HashMap::new();
    birth.insert(n, 0.0);
    for row in &model.tree {
        assert!(row.lambda >= 0.0);
        assert!(
            row.lambda >= birth[&row.parent],
            "child lambda below parent birth"
        );
        if row.child >= n {
            birth.insert(row.child, row.lambda);
        }
    }
    // every point appears exactly once as a leaf row
    let mut seen = vec![0; n];
    for row in model.tree.iter().filter(|r| r.child < n) {
        seen[row.child] += 1;
    }
    assert!(seen.iter().all(|&s| s == 1));
}

#[test]
fn prediction_reproduces_fit_and_exemplars() {
    let (vs, _) = planted(&[C16, C19], 200, 0.05, 20, 11);
    let model = fit(&vs, &small_params(20, 5)).unwrap();
    let pred = approximate_predict(&model, &vs).unwrap();
    let pl: Vec<i32> = pred.iter().map(|m| m.label).collect();
    assert_eq!(pl, model.labels());
    for c in &model.clusters {
        let m = approximate_predict(&model, &c.exemplars).unwrap();
        for x in m {
            assert_eq!(x.label, c.id);
            assert_eq!(x.strength, 1.0);
        }
    }
}

#[test]
fn far_uniform_vector_is_noise() {
    let (vs, _) = planted(&[C16, C19], 200, 0.05, 20, 11);
    let model = fit(&vs, &small_params(20, 5)).unwrap();
    // 8 slots away from both prototypes and absent from the fit
    let far = proto("OffM+Fear+Comp+Loss+Stat+Caus");
    assert!(!model.points.iter().any(|p| p.vector == far));
    let m = approximate_predict(&model, &[far]).unwrap();
    assert_eq!(m[0].label, NOISE);
}

#[test]
fn novel_vector_near_a_prototype_joins_it() {
    let (vs, truth) = planted(&[C16, C19], 200, 0.0, 0, 1);
    let model = fit(&vs, &small_params(20, 5)).unwrap();
    let near = proto("Exp+Valu+Util+Gain+ExpEv");
    let m = approximate_predict(&model, &[near]).unwrap();
    let expected = model.labels()[truth.iter().position(|&t| t == 0).unwrap()];
    assert_eq!(m[0].label, expected);
    assert!(m[0].strength > 0.0 && m[0].strength < 1.0);
}

#[test]
fn permutation_equivariance() {
    let (vs, _) = planted(&[C16, C19, "NoSrc+Valu+Gain+Narr"], 120, 0.06, 30, 8);
    let params = small_params(15, 4);
    let base = fit(&vs, &params).unwrap().labels();
    let n = vs.len();
    let perm: Vec<usize> = (0..n).map(|i| (i * 7919 + 13) % n).collect();
    assert!(!n.is_multiple_of(7919));
    let shuffled: Vec<FeatureVector> = perm.iter().map(|&i| vs[i]).collect();
    let moved = fit(&shuffled, &params).unwrap().labels();
    let expected: Vec<i32> = perm.iter().map(|&i| base[i]).collect();
    assert_eq!(adjusted_rand_index(&expected, &moved).unwrap(), 1.0);
    let noise_a: Vec<bool> = expected.iter().map(|&l| l == NOISE).collect();
    let noise_b: Vec<bool> = moved.iter().map(|&l| l == NOISE).collect();
    assert_eq!(noise_a, noise_b);
}

#[test]
fn deterministic_across_pool_sizes() {
    let (vs, _) = planted(&[C16, C19], 150, 0.05, 20, 4);
    let params = small_params(20, 5);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| fit(&vs, &params)).unwrap();
    let b = four.install(|| fit(&vs, &params)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn stability_reports() {
    let (vs, _) = planted(&[C16, C19], 200, 0.05, 20, 11);
    let params = ClusterParams {
        subsample_size: 300,
        seed: 9,
        ..small_params(20, 5)
    };
    let same = stability_with_seeds(&vs, &params, &[5, 5]).unwrap();
    assert_eq!(same.mean_ari, 1.0);
    let varied = subsample_stability(&vs, &params, 5).unwrap();
    assert_eq!(varied.ari.len(), 5);
    assert!(varied.mean_ari >= 0.9, "mean ARI {}", varied.mean_ari);
    assert!(subsample_stability(&vs, &params, 1).is_err());

    let (noise, _) = planted(&[], 0, 0.0, 400, 2);
    let report = subsample_stability(&noise, &params, 3).unwrap();
    assert!(report.mean_ari.is_finite());
}

// Independent reference: HDBSCAN on the expanded corpus, one point per record,
// components recomputed from scratch at every distance level.
fn naive_labels(vs: &[FeatureVector], mcs: usize, ms: usize) -> Vec<i32> {
    let n = vs.len();
    let d = |a: usize, b: usize| (vs[a].bits() ^ vs[b].bits()).count_ones();
    let core: Vec<u32> = (0..n)
        .map(|i| {
            let mut ds: Vec<u32> = (0..n).map(|j| d(i, j)).collect();
            ds.sort_unstable();
            ds[ms - 1]
        })
        .collect();
    let mrd = |a: usize, b: usize| d(a, b).max(core[a]).max(core[b]);
    let lam = |t: i32| if t == 0 { 2.0 } else { 1.0 / (t as f64).sqrt() };
    let components = |set: &[usize], t: i32| -> Vec<Vec<usize>> {
        let mut left: Vec<usize> = set.to_vec();
        let mut out = Vec::new();
        while let Some(s) = left.first().copied() {
            let mut comp = vec![s];
            left.retain(|&x| x != s);
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                let (joined, rest): (Vec<usize>, Vec<usize>) =
                    left.iter().partition(|&&y| t >= 0 && mrd(x, y) as i32 <= t);
                comp.extend(joined);
                left = rest;
                i += 1;
            }
            out.push(comp);
        }
        out
    };
    // clusters: (parent, birth, points-with-fall-lambda, child clusters)
    struct C {
        parent: Option<usize>,
        birth: f64,
        falls: Vec<(usize, f64)>,
        kids: Vec<usize>,
        split_lambda: f64,
        split_size: usize,
    }
    let mut cs: Vec<C> = vec![C {
        parent: None,
        birth: 0.0,
        falls: vec![],
        kids: vec![],
        split_lambda: 0.0,
        split_size: 0,
    }];
    let mut work = vec![(0usize, (0..n).collect::<Vec<_>>(), 20i32)];
    while let Some((c, mut set, mut t)) = work.pop() {
        loop {
            let comps = components(&set, t - 1);
            if comps.len() == 1 && comps[0].len() == set.len() {
                t -= 1;
                continue;
            }
            let (big, small): (Vec<Vec<usize>>, Vec<Vec<usize>>) =
                comps.into_iter().partition(|c| c.len() >= mcs);
            for p in small.into_iter().flatten() {
                cs[c].falls.push((p, lam(t)));
            }
            if big.len() == 1 {
                set = big.into_iter().next().unwrap();
                t -= 1;
                continue;
            }
            for b in big {
                let id = cs.len();
                cs.push(C {
                    parent: Some(c),
                    birth: lam(t),
                    falls: vec![],
                    kids: vec![],
                    split_lambda: 0.0,
                    split_size: 0,
                });
                cs[c].kids.push(id);
                cs[c].split_lambda = lam(t);
                cs[c].split_size += b.len();
                work.push((id, b, t - 1));
            }
            break;
        }
    }
    let k = cs.len();
    let stab: Vec<f64> = cs
        .iter()
        .map(|c| {
            c.falls.iter().map(|&(_, l)| l - c.birth).sum::<f64>()
                + c.split_size as f64 * (c.split_lambda - c.birth)
        })
        .collect();
    let mut sel = vec![false; k];
    let mut best = vec![0.0; k];
    for c in (0..k).rev() {
        let kids_sum: f64 = cs[c].kids.iter().map(|&x| best[x]).sum();
        if c == 0 && !cs[0].kids.is_empty() {
            continue;
        }
        if cs[c].kids.is_empty() || stab[c] >= kids_sum {
            best[c] = stab[c];
            sel[c] = true;
            let mut st = cs[c].kids.clone();
            while let Some(x) = st.pop() {
                sel[x] = false;
                st.extend(cs[x].kids.iter().copied());
            }
        } else {
            best[c] = kids_sum;
        }
    }
    let mut labels = vec![NOISE; n];
    for (ci, c) in cs.iter().enumerate() {
        let mut anc = Some(ci);
        let mut owner = None;
        while let Some(a) = anc {
            if sel[a] {
                owner = Some(a);
            }
            anc = cs[a].parent;
        }
        for &(p, _) in &c.falls {
            labels[p] = owner.map_or(NOISE, |o| o as i32);
        }
    }
    labels
}

fn duplicate_heavy() -> impl Strategy<Value = (Vec<FeatureVector>, usize, usize)> {
    (
        prop::collection::vec((crate::corpus::valid_set(), 1usize..25), 2..7),
        prop::collection::vec(crate::corpus::valid_set(), 0..6),
        4usize..14,
        any::<u8>(),
    )
        .prop_map(|(groups, singles, mcs, ms_raw)| {
            let mut vs = Vec::new();
            for (set, count) in groups {
                vs.extend(std::iter::repeat_n(
                    FeatureVector::from_set(set).unwrap(),
                    count,
                ));
            }
            vs.extend(
                singles
                    .into_iter()
                    .map(|s| FeatureVector::from_set(s).unwrap()),
            );
            let ms = 1 + ms_raw as usize % mcs;
            (vs, mcs, ms)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_fit_matches_expanded_reference((vs, mcs, ms) in duplicate_heavy()) {
        prop_assume!(vs.len() >= mcs);
        let model = fit(&vs, &small_params(mcs, ms)).unwrap();
        let ours = model.labels();
        let reference = naive_labels(&vs, mcs, ms);
        let noise_ours: Vec<bool> = ours.iter().map(|&l| l == NOISE).collect();
        let noise_ref: Vec<bool> = reference.iter().map(|&l| l == NOISE).collect();
        prop_assert_eq!(noise_ours, noise_ref);
        prop_assert_eq!(adjusted_rand_index(&ours, &reference).unwrap(), 1.0);
        // identical vectors always share a label
        let mut by_vec: BTreeMap<u32, i32> = BTreeMap::new();
        for (v, l) in vs.iter().zip(&ours) {
            prop_assert_eq!(*by_vec.entry(v.bits()).or_insert(*l), *l);
        }
    }
}

#[test]
fn frame_flip_fixture_is_valid() {
    let (vs, _) = planted(&["NoSrc+Fear+Loss+NoEv"], 200, 0.5, 0, 3);
    assert!(vs
        .iter()
        .all(|v| v.contains(Category::Loss) || v.contains(Category::NoFrame)));
    assert!(vs.iter().any(|v| *v != vs[0]));
}
