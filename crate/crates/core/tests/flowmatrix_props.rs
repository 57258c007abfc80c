mod common;

use common::*;
use flowbalance::bistochastic::{sinkhorn_knopp, DEFAULT_SK_TOL};
use flowbalance::dense::Dense;
use flowbalance::error::Error;
use flowbalance::flowmatrix::{
    correlation, load_flows, matrix_power, matrix_stats, FlowMatrix, FlowRecord, RegionId,
    DEFAULT_NONZERO_THRESHOLD, DEFAULT_UNIT_TOLERANCE,
};
use flowbalance::io;
use proptest::prelude::*;
use rand::Rng as _;

fn affine_map(d: &Dense, alpha: f64, beta: f64) -> Dense {
    let data: Vec<f64> = d.as_slice().iter().map(|&v| alpha * v + beta).collect();
    Dense::from_vec(d.n(), data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn correlation_is_symmetric(seed in any::<u64>(), n in 2usize..12) {
        let mut r = rng(seed);
        let a = fm(random_positive_dense(n, &mut r));
        let b = fm(random_positive_dense(n, &mut r));
        let ab = correlation(&a, &b).unwrap();
        let ba = correlation(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12, "corr(a,b)={ab} corr(b,a)={ba}");
        prop_assert!(ab.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn correlation_survives_joint_affine_rescaling(
        seed in any::<u64>(),
        n in 2usize..10,
        alpha in 0.1f64..10.0,
        beta in 0.0f64..5.0,
    ) {
        let mut r = rng(seed);
        let da = random_positive_dense(n, &mut r);
        let db = random_positive_dense(n, &mut r);
        let base = correlation(&fm(da.clone()), &fm(db.clone())).unwrap();
        let mapped = correlation(
            &fm(affine_map(&da, alpha, beta)),
            &fm(affine_map(&db, alpha, beta)),
        )
        .unwrap();
        prop_assert!(
            (base - mapped).abs() <= 1e-9,
            "corr changed under x -> {alpha}x + {beta}: {base} vs {mapped}"
        );
    }

    #[test]
    fn csv_roundtrip_is_bit_exact(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let a = fm(random_hollow_sparse(n.max(2), 0.4, &mut r));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        io::write_matrix_csv(&a, &path).unwrap();
        let back = io::read_matrix_csv(&path).unwrap();
        prop_assert_eq!(back.labels(), a.labels());
        for (x, y) in a.dense().as_slice().iter().zip(back.dense().as_slice()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn binary_roundtrip_is_bit_exact(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let a = fm(random_positive_dense(n.max(2), &mut r));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bstm");
        io::write_matrix_bin(&a, &path).unwrap();
        let back = io::read_matrix_bin(&path).unwrap();
        prop_assert_eq!(back.labels(), a.labels());
        for (x, y) in a.dense().as_slice().iter().zip(back.dense().as_slice()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn power_of_balanced_matrix_stays_balanced(seed in any::<u64>(), n in 2usize..12, k in 1u32..=5) {
        let mut r = rng(seed);
        let raw = fm(random_positive_dense(n, &mut r));
        let (b, report) = sinkhorn_knopp(&raw, DEFAULT_SK_TOL, 10_000).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.max_sum_deviation <= 1e-10, "premise: tau <= 1e-10");
        let p = matrix_power(&b, k).unwrap();
        let dev = p.dense().doubly_stochastic_deviation();
        prop_assert!(dev <= 1e-6, "power {k} deviation {dev}");
    }

    #[test]
    fn permutation_matrix_has_n_unit_entries(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let perm = random_permutation(n, &mut r);
        let m = fm(permutation_dense(&perm));
        let stats = matrix_stats(&m, DEFAULT_NONZERO_THRESHOLD, DEFAULT_UNIT_TOLERANCE).unwrap();
        prop_assert_eq!(stats.unit_entry_count, n);
        prop_assert_eq!(stats.nonzero_count, n);
        let expected_sparsity = 1.0 - (n as f64) / ((n * n) as f64);
        prop_assert!((stats.sparsity_fraction - expected_sparsity).abs() <= 1e-15);
    }

    #[test]
    fn load_flows_sums_duplicates_and_sorts_labels(seed in any::<u64>()) {
        let mut r = rng(seed);
        let codes = ["10001", "10002", "11001", "12007"];
        let mut records = Vec::new();
        let mut expect = std::collections::BTreeMap::new();
        for _ in 0..40 {
            let o = codes[r.gen_range(0..codes.len())];
            let d = codes[r.gen_range(0..codes.len())];
            if o == d {
                continue;
            }
            let f = r.gen_range(1.0..100.0f64).round();
            *expect.entry((o, d)).or_insert(0.0) += f;
            records.push(FlowRecord {
                origin: o.to_string(),
                dest: d.to_string(),
                flow: f,
            });
        }
        prop_assume!(!records.is_empty());
        let m = load_flows(&records, None).unwrap();
        let got: Vec<&str> = m.labels().iter().map(|l| l.code()).collect();
        let mut sorted: Vec<&str> = expect
            .keys()
            .flat_map(|&(o, d)| [o, d])
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        sorted.sort();
        prop_assert_eq!(got, sorted);
        for (&(o, d), &f) in &expect {
            let i = m.index_of(o).unwrap();
            let j = m.index_of(d).unwrap();
            prop_assert_eq!(m.get(i, j), f);
        }
    }
}

#[test]
fn constant_matrix_correlation_is_rejected() {
    let a = fm(Dense::from_vec(2, vec![3.0; 4]).unwrap());
    let b = fm(random_positive_dense(2, &mut rng(7)));
    match correlation(&a, &b) {
        Err(Error::UndefinedCorrelation { side }) => assert_eq!(side, "left"),
        other => panic!("expected undefined correlation, got {other:?}"),
    }
    match correlation(&b, &a) {
        Err(Error::UndefinedCorrelation { side }) => assert_eq!(side, "right"),
        other => panic!("expected undefined correlation, got {other:?}"),
    }
}

#[test]
fn correlation_of_matrix_with_itself_is_one() {
    let a = fm(random_positive_dense(6, &mut rng(3)));
    let c = correlation(&a, &a).unwrap();
    assert!((c - 1.0).abs() <= 1e-12, "self-correlation {c}");
}

#[test]
fn hollow_flag_tracks_diagonal() {
    let mut r = rng(11);
    let h = fm(random_hollow_sparse(5, 0.5, &mut r));
    assert!(h.hollow());
    let mut d = random_hollow_sparse(5, 0.5, &mut r);
    d.set(2, 2, 0.25);
    assert!(!fm(d).hollow());
}

#[test]
fn interstate_prefixes_come_from_leading_characters() {
    let a = RegionId::new("10850").unwrap();
    let b = RegionId::new("10007").unwrap();
    let c = RegionId::new("56001").unwrap();
    assert_eq!(a.state_prefix(), b.state_prefix());
    assert_ne!(a.state_prefix(), c.state_prefix());
}

#[test]
fn labels_file_roundtrip_preserves_order() {
    let ls: Vec<RegionId> = ["56001", "10850", "02013"]
        .iter()
        .map(|c| RegionId::new(*c).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.txt");
    io::write_labels(&ls, &path).unwrap();
    let back = io::read_labels(&path).unwrap();
    assert_eq!(back, ls);
}

#[test]
fn flow_csv_roundtrip_recovers_positive_cells() {
    let mut r = rng(23);
    let a = fm(random_hollow_sparse(6, 0.4, &mut r));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flows.csv");
    io::write_flow_csv(&a, &path).unwrap();
    let records = io::read_flow_csv(&path).unwrap();
    let m = load_flows(&records, Some(a.labels().to_vec())).unwrap();
    // Zero cells are not written, so the reload matches exactly on the
    // positive support and is zero elsewhere.
    for (x, y) in a.dense().as_slice().iter().zip(m.dense().as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn matrix_power_rejects_zero_exponent() {
    let a = fm(random_positive_dense(3, &mut rng(9)));
    assert!(matches!(matrix_power(&a, 0), Err(Error::ZeroPower)));
}

#[test]
fn stats_top_diagonal_lists_all_entries_above_threshold() {
    let mut d = Dense::zeros(4);
    d.set(0, 0, 0.5);
    d.set(1, 1, 0.9);
    d.set(3, 3, 0.9);
    d.set(0, 1, 0.3);
    let m = FlowMatrix::from_dense(
        d,
        vec![
            RegionId::new("A").unwrap(),
            RegionId::new("B").unwrap(),
            RegionId::new("C").unwrap(),
            RegionId::new("D").unwrap(),
        ],
    )
    .unwrap();
    let stats = matrix_stats(&m, DEFAULT_NONZERO_THRESHOLD, DEFAULT_UNIT_TOLERANCE).unwrap();
    let top: Vec<(&str, f64)> = stats
        .top_diag
        .iter()
        .map(|(l, v)| (l.code(), *v))
        .collect();
    // Descending value, ties broken by label.
    assert_eq!(top, vec![("B", 0.9), ("D", 0.9), ("A", 0.5)]);
    assert_eq!(stats.diag_nonzero_count, 3);
}
