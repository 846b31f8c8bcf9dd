mod common;

use common::*;
use entrocoup::codec::{channel_likelihoods, MessageCoder, MessageSpace, Variant};
use entrocoup::imec::{singleton_partition_set, Coupler, CouplerOptions};
use entrocoup::merging::merge_columns;
use entrocoup::prob::{greedy_mec, Dist, SparseCoupling};
use entrocoup::rng::rng_from_seed;
use entrocoup::seqmodel::UniformSource;
use rand::Rng;

#[test]
fn worked_example_groups_and_follow_up_coupling() {
    let nu = Dist::new(vec![0.25, 0.25, 0.5]).unwrap();
    let c = greedy_mec(&Dist::uniform(2), &nu);
    let m = merge_columns(&c).unwrap();
    assert_eq!(m.groups, vec![vec![0, 1], vec![2]]);
    assert_eq!(m.grouped.iter().collect::<Vec<_>>(), vec![(0, 0, 0.5), (1, 1, 0.5)]);

    let mut s = Coupler::new(
        singleton_partition_set(Dist::uniform(2)).unwrap(),
        CouplerOptions { seed: 0, merging: true, record_details: true },
    );
    s.encode_step(&0, &nu).unwrap();
    let r = &s.records()[0];
    assert_eq!(r.levels, 2);
    let d = r.detail.as_ref().unwrap();
    assert_eq!(d.nus[1].probs(), &[0.5, 0.5, 0.0]);
}

#[test]
fn grouped_marginals_match_on_random_couplings() {
    let mut rng = rng_from_seed(42);
    for _ in 0..1000 {
        let (r, c) = (rng.gen_range(1..5), rng.gen_range(1..7));
        let mu = random_dist(&mut rng, r, true);
        let nu = random_dist(&mut rng, c, true);
        let coupling = greedy_mec(&mu, &nu);
        let m = merge_columns(&coupling).unwrap();
        let rows = m.grouped.row_marginal();
        for (a, b) in rows.iter().zip(coupling.row_marginal()) {
            assert!((a - b).abs() < 1e-9);
        }
        let cols = m.grouped.col_marginal();
        for (g, members) in m.groups.iter().enumerate() {
            let want: f64 = members.iter().map(|&s| coupling.col_marginal()[s]).sum();
            assert!((cols[g] - want).abs() < 1e-9);
        }
        let back = m.expand();
        for (i, j, p) in coupling.iter() {
            assert!((back.get(i, j) - p).abs() < 1e-9);
        }
        assert_eq!(back.nnz(), coupling.nnz());
    }
}

#[test]
fn distinct_columns_are_left_alone() {
    let c = SparseCoupling::from_entries(2, 3, [(0, 0, 0.3), (1, 1, 0.3), (0, 2, 0.2), (1, 2, 0.2)]).unwrap();
    let m = merge_columns(&c).unwrap();
    assert_eq!(m.groups, vec![vec![0], vec![1], vec![2]]);
    assert_eq!(m.expand(), c);
}

fn joint_entropy(table: &std::collections::BTreeMap<Vec<usize>, Vec<f64>>, prior: &[f64]) -> f64 {
    let mut h = 0.0;
    for likes in table.values() {
        for (l, p) in likes.iter().zip(prior) {
            let q = l * p;
            if q > 0.0 {
                h -= q * q.log2();
            }
        }
    }
    h
}

/// Binary components coupled against a uniform channel over four symbols:
/// every plain coupling wastes at least one bit.
fn binary_components_family(k: usize, m: usize, merging: bool, seed: u64) -> (f64, f64) {
    let components = vec![Dist::uniform(2); k];
    let space = MessageSpace { prior: UniformSource::new(2, k), len: k, components };
    let channel = UniformSource::new(4, m);
    let coder = MessageCoder::new(Variant::Fimec, &space, CouplerOptions { seed, merging, record_details: false }).unwrap();
    let messages = all_sequences(2, k);
    let prior = vec![1.0 / messages.len() as f64; messages.len()];
    let table = channel_likelihoods(&coder, &messages, &channel, m).unwrap();
    assert!(marginal_gap(&table, &prior, &channel, m) < 1e-9);
    let hxy = joint_entropy(&table, &prior);
    (hxy, hxy - 2.0 * m as f64)
}

#[test]
fn merging_lowers_joint_entropy_and_residual_uncertainty() {
    for (k, m) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        let (plain, plain_res) = binary_components_family(k, m, false, 0);
        let (merged, merged_res) = binary_components_family(k, m, true, 0);
        assert!(merged <= plain + 1e-9, "k={k} m={m}: {merged} > {plain}");
        assert!(merged_res < plain_res - 1e-6, "k={k} m={m}");
    }
}

#[test]
fn merging_never_hurts_on_small_random_instances() {
    for seed in 0..30 {
        let inst = small_instance(seed, Variant::Timec);
        let mut h = [0.0; 2];
        for (i, merging) in [false, true].into_iter().enumerate() {
            let coder = MessageCoder::new(Variant::Timec, &inst.space, CouplerOptions { seed, merging, record_details: false }).unwrap();
            let table = channel_likelihoods(&coder, &inst.messages, &inst.channel, inst.m).unwrap();
            h[i] = joint_entropy(&table, &inst.prior);
        }
        assert!(h[1] <= h[0] + 1e-9, "seed {seed}: {h:?}");
    }
}

#[test]
fn recursion_depth_is_bounded_by_alphabet() {
    let channel = UniformSource::new(8, 6);
    let space = MessageSpace::with_uniform_components(UniformSource::new(2, 12), 12);
    for seed in 0..10 {
        let mut coder = MessageCoder::new(Variant::Fimec, &space, CouplerOptions { seed, merging: true, record_details: false }).unwrap();
        let x: Vec<usize> = (0..12).map(|i| (i * 7 + seed as usize) % 2).collect();
        for j in 0..6 {
            let nu = entrocoup::seqmodel::Autoregressive::next_dist(&channel, coder.emitted());
            coder.encode_step(&x, &nu).unwrap();
            let r = &coder.records()[j];
            assert!(r.levels <= 8);
        }
        assert!(coder.records().iter().any(|r| r.levels > 1));
    }
}
