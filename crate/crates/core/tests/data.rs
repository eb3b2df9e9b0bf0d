//! Dataset-level properties: LIBSVM round-trips, partition conservation, and
//! the smoothness control of the synthetic generator checked against both
//! the requested targets and a dense eigendecomposition oracle.

use chb_core::data::{
    parse_libsvm, partition, synth_controlled, write_libsvm, PartitionPolicy, SeededRng,
    SmoothnessTargets, SynthTask,
};
use chb_core::models::{global_smoothness, smoothness_constant, LossModel, Sample};
use chb_testkit::{jacobi_eigenvalues, pooled_gram};
use proptest::prelude::*;

#[test]
fn controlled_smoothness_geometric_targets() {
    // Increasing targets L_m = (1.3^(m-1))² across nine workers.
    let targets: Vec<f64> = (0..9).map(|m| 1.3f64.powi(m).powi(2)).collect();
    let fed = synth_controlled(
        9,
        50,
        50,
        &SmoothnessTargets::PerWorker(targets.clone()),
        SynthTask::Linear,
        0.0,
        &SeededRng::new(31),
    )
    .unwrap();
    let model = LossModel::linear_regression();
    for (m, target) in targets.iter().enumerate() {
        let est = smoothness_constant(&model, &fed.shards[m]).unwrap();
        assert!(
            (est - target).abs() <= 1e-6 * target,
            "worker {m}: estimate {est} vs target {target}"
        );
    }
}

#[test]
fn controlled_smoothness_common_logistic_target() {
    let lambda = 0.001;
    let fed = synth_controlled(
        9,
        50,
        50,
        &SmoothnessTargets::Common(4.0),
        SynthTask::Logistic,
        lambda,
        &SeededRng::new(32),
    )
    .unwrap();
    let model = LossModel::ridge_logistic(lambda);
    for m in 0..9 {
        let est = smoothness_constant(&model, &fed.shards[m]).unwrap();
        assert!((est - 4.0).abs() <= 1e-6 * 4.0, "worker {m}: estimate {est}");
    }
}

#[test]
fn global_smoothness_matches_dense_eigendecomposition() {
    let targets: Vec<f64> = (0..9).map(|m| 1.3f64.powi(m).powi(2)).collect();
    let fed = synth_controlled(
        9,
        20,
        20,
        &SmoothnessTargets::PerWorker(targets),
        SynthTask::Linear,
        0.0,
        &SeededRng::new(33),
    )
    .unwrap();
    let model = LossModel::linear_regression();
    let via_power = global_smoothness(&model, &fed).unwrap();
    let via_jacobi = *jacobi_eigenvalues(&pooled_gram(&fed)).last().unwrap();
    assert!(
        (via_power - via_jacobi).abs() <= 1e-7 * via_jacobi,
        "{via_power} vs {via_jacobi}"
    );
}

#[test]
fn global_smoothness_single_worker_is_pooling_identity() {
    let fed = synth_controlled(
        1,
        10,
        10,
        &SmoothnessTargets::Common(2.5),
        SynthTask::Linear,
        0.0,
        &SeededRng::new(34),
    )
    .unwrap();
    let model = LossModel::linear_regression();
    let global = global_smoothness(&model, &fed).unwrap();
    let local = smoothness_constant(&model, &fed.shards[0]).unwrap();
    assert_eq!(global, local);
}

#[test]
fn global_smoothness_two_identical_singletons_doubles() {
    let shard = vec![Sample::new(vec![1.0], 1.0)];
    let fed = chb_core::data::FederatedDataset::from_shards(
        1,
        vec![shard.clone(), shard],
        chb_core::data::Provenance::Custom("pair".into()),
    );
    let model = LossModel::linear_regression();
    let global = global_smoothness(&model, &fed).unwrap();
    assert!((global - 2.0).abs() < 1e-9);
}

fn arb_sample(d: usize) -> impl Strategy<Value = Sample> {
    (
        proptest::collection::vec(
            prop_oneof![3 => (-1e3f64..1e3), 1 => Just(0.0)],
            d..=d,
        ),
        -10f64..10.0,
    )
        .prop_map(|(features, label)| Sample::new(features, label))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn libsvm_roundtrip(samples in proptest::collection::vec(arb_sample(6), 1..20)) {
        let mut buf = Vec::new();
        write_libsvm(&samples, &mut buf).unwrap();
        let (reparsed, d) = parse_libsvm(buf.as_slice(), Some(6)).unwrap();
        prop_assert_eq!(d, 6);
        prop_assert_eq!(reparsed, samples);
    }

    #[test]
    fn partition_conserves_samples(n in 1usize..60, m in 1usize..12) {
        prop_assume!(m <= n);
        let samples: Vec<Sample> =
            (0..n).map(|i| Sample::new(vec![i as f64], -(i as f64))).collect();
        let fed = partition(
            samples.clone(),
            m,
            PartitionPolicy::ContiguousEven,
            "prop",
            &SeededRng::new(1),
        )
        .unwrap();
        let rejoined: Vec<Sample> = fed.shards.into_iter().flatten().collect();
        prop_assert_eq!(rejoined, samples);
        }
}

#[test]
#[ignore = "needs a local copy of the ijcnn1 LIBSVM file; set CHB_IJCNN1_PATH"]
fn ijcnn1_has_expected_shape() {
    let path = std::env::var("CHB_IJCNN1_PATH").expect("CHB_IJCNN1_PATH not set");
    let file = std::fs::File::open(path).expect("open ijcnn1");
    let (samples, d) = parse_libsvm(std::io::BufReader::new(file), None).unwrap();
    assert_eq!(samples.len(), 49990);
    assert_eq!(d, 22);
}
