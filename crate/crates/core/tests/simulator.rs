use dstar_core::aggregation::{FilterThresholds, Gar};
use dstar_core::models::idx::{decode_images, decode_labels, encode_images, encode_labels, IdxImages, IdxLabels};
use dstar_core::models::{
    generate_blobs, gradient, load_idx, loss_and_accuracy, Dataset, ModelShape, ModelState, OptimizerKind,
    OptimizerState, Shard, ShardOwner,
};
use dstar_core::numerics::{sample_exponential, streams, GradVector, RngStream};
use dstar_core::simulator::{
    filter_phase, run_experiment, Arrival, AttackName, DatasetSpec, ExperimentConfig, IterationRecord, Partition,
    Simulation,
};
use dstar_core::Error;

fn small(gar: Gar, attack: AttackName, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::blobs_default(11, 3, 3, 60, gar);
    cfg.attack = attack;
    cfg.seed = seed;
    cfg.n_b = 4;
    cfg.dataset = DatasetSpec::Blobs {
        n: 1200,
        p: 5,
        classes: 2,
        separation: 4.0,
    };
    cfg
}

fn accept_all(dim: usize) -> FilterThresholds {
    FilterThresholds {
        s: f64::INFINITY,
        d: f64::NEG_INFINITY,
        median: GradVector::zeros(dim),
        validation: GradVector::zeros(dim),
    }
}

fn arrivals(times: &[f64]) -> Vec<Arrival> {
    times
        .iter()
        .enumerate()
        .map(|(worker_id, &arrival_time)| Arrival {
            worker_id,
            arrival_time,
        })
        .collect()
}

#[test]
fn warmup_with_identical_gradients_steps_along_them() {
    // every shard is the same single row, so each worker's batch mean is that row's gradient
    let data = generate_blobs(40, 3, 2, 4.0, &mut RngStream::new(5, 1)).unwrap();
    let mut cfg = ExperimentConfig::blobs_default(5, 2, 2, 3, Gar::Dstar);
    cfg.n_b = 4;
    let partition = Partition {
        shards: (0..5).map(|i| Shard::new(ShardOwner::Worker(i), vec![0])).collect(),
        validation: Shard::new(ShardOwner::Validation, (1..20).collect()),
        test: Shard::new(ShardOwner::Test, (20..40).collect()),
    };
    let mut sim = Simulation::from_parts(cfg, data.clone(), partition).unwrap();
    let theta = sim.model().params().clone();
    let g = gradient(sim.model(), &data, &[0]).unwrap();
    let rec = sim.step().unwrap();
    assert!(rec.updated);
    assert_eq!(rec.n_received, 5);
    let want = theta.sub(&g.scaled(0.1));
    for (a, b) in sim.model().params().iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-15, "{a} vs {b}");
    }
    let th = sim.thresholds().unwrap();
    assert_eq!(th.median, g);
}

#[test]
fn filter_phase_stops_at_kth_acceptance() {
    let grads: Vec<GradVector> = (0..5).map(|i| GradVector::new(vec![1.0, i as f64])).collect();
    let g_v = GradVector::new(vec![1.0, 0.0]);
    let out = filter_phase(&arrivals(&[0.1, 0.2, 0.3, 0.4, 0.5]), &grads, &g_v, &accept_all(2), 2).unwrap();
    assert_eq!(out.wait_time, 0.2);
    assert_eq!((out.n_received, out.accepted_ids.clone()), (2, vec![0, 1]));
    assert_eq!(out.aggregate, Some(GradVector::new(vec![1.0, 0.5])));
}

#[test]
fn filter_phase_with_single_pass_waits_for_everyone() {
    // only worker 3 points along g_v; the rest are orthogonal
    let grads: Vec<GradVector> = (0..5)
        .map(|i| GradVector::new(if i == 3 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }))
        .collect();
    let g_v = GradVector::new(vec![1.0, 0.0]);
    let th = FilterThresholds {
        s: 0.5,
        d: 0.5,
        ..accept_all(2)
    };
    let out = filter_phase(&arrivals(&[0.1, 0.2, 0.3, 0.4, 0.5]), &grads, &g_v, &th, 2).unwrap();
    assert_eq!(out.wait_time, 0.5);
    assert_eq!(out.accepted_ids, vec![3]);
    assert_eq!(out.rejected_ids, vec![0, 1, 2, 4]);
    assert_eq!(out.aggregate, Some(grads[3].clone()));
}

#[test]
fn filter_phase_with_no_pass_skips_the_update() {
    let grads = vec![GradVector::new(vec![-1.0]); 3];
    let th = FilterThresholds {
        s: 1.0,
        d: 0.0,
        ..accept_all(1)
    };
    let out = filter_phase(&arrivals(&[0.3, 0.1, 0.2]), &grads, &GradVector::new(vec![1.0]), &th, 2).unwrap();
    assert_eq!((out.aggregate, out.n_received, out.wait_time), (None, 3, 0.2));
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    for gar in [Gar::Dstar, Gar::Krum] {
        let cfg = small(gar, AttackName::Little, 3);
        let a = run_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let c = pool.install(|| run_experiment(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
        let mut other = cfg.clone();
        other.seed = 4;
        assert_ne!(a, run_experiment(&other).unwrap());
    }
}

fn check_conservation(records: &[IterationRecord], n: usize, warmup: usize, synchronous: bool) {
    for r in records {
        assert!(r.n_accepted <= r.n_received && r.n_received <= n);
        assert_eq!(r.n_accepted, r.accepted_ids.len());
        assert_eq!(r.n_received, r.accepted_ids.len() + r.rejected_ids.len());
        let mut ids: Vec<usize> = r.accepted_ids.iter().chain(&r.rejected_ids).copied().collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), r.n_received, "accepted and rejected overlap");
        assert!(ids.iter().all(|&i| i < n));
        if synchronous || r.t <= warmup {
            assert_eq!(r.n_received, n);
        }
        assert!(r.wait_time >= 0.0);
        assert_eq!(r.updated, r.n_accepted > 0);
    }
}

#[test]
fn workers_are_conserved() {
    for attack in AttackName::ALL {
        let recs = run_experiment(&small(Gar::Dstar, attack, 1)).unwrap();
        check_conservation(&recs, 11, 1, false);
        let recs = run_experiment(&small(Gar::Median, attack, 1)).unwrap();
        check_conservation(&recs, 11, 1, true);
    }
}

#[test]
fn dstar_never_waits_longer_than_the_slowest_worker() {
    let dstar = run_experiment(&small(Gar::Dstar, AttackName::Empire, 2)).unwrap();
    let sync = run_experiment(&small(Gar::Average, AttackName::Empire, 2)).unwrap();
    for (a, b) in dstar.iter().zip(&sync) {
        assert!(a.wait_time <= b.wait_time);
    }
    assert_eq!(dstar[0].wait_time, sync[0].wait_time);
}

#[test]
fn accept_all_waits_for_the_kth_order_statistic() {
    let cfg = small(Gar::Dstar, AttackName::None, 8);
    let mut sim = Simulation::new(cfg.clone()).unwrap();
    sim.step().unwrap();
    sim.set_thresholds(Some(accept_all(sim.model().params().dim())));
    // recompute every worker's delays straight from its stream
    let mut delay_streams: Vec<RngStream> = (0..cfg.n_workers)
        .map(|i| RngStream::new(cfg.seed, streams::worker_delay(i)))
        .collect();
    let scales: Vec<f64> = (0..cfg.n_workers)
        .map(|i| if i < cfg.n_workers - cfg.f { cfg.delay_scale_honest } else { cfg.delay_scale_byz })
        .collect();
    let draw = |streams: &mut Vec<RngStream>| -> Vec<f64> {
        let mut t: Vec<f64> = streams
            .iter_mut()
            .zip(&scales)
            .map(|(s, &scale)| sample_exponential(scale, s.uniform()).unwrap())
            .collect();
        t.sort_by(f64::total_cmp);
        t
    };
    draw(&mut delay_streams);
    for _ in 0..50 {
        let times = draw(&mut delay_streams);
        let rec = sim.step().unwrap();
        assert_eq!(rec.wait_time, times[cfg.k - 1]);
        assert_eq!(rec.n_accepted, cfg.k);
    }
}

#[test]
fn honest_filter_rejects_fewer_than_half() {
    let cfg = ExperimentConfig::blobs_default(25, 8, 8, 200, Gar::Dstar);
    let recs = run_experiment(&cfg).unwrap();
    let (accepted, rejected) = recs[1..]
        .iter()
        .fold((0, 0), |(a, r), rec| (a + rec.accepted_ids.len(), r + rec.rejected_ids.len()));
    let frac = rejected as f64 / (accepted + rejected) as f64;
    assert!(frac < 0.5, "honest rejection fraction {frac:.3} over 199 filtered iterations");
}

#[test]
fn fault_free_average_learns_blobs() {
    let mut cfg = ExperimentConfig::blobs_default(25, 8, 8, 300, Gar::Average);
    cfg.seed = 11;
    let recs = run_experiment(&cfg).unwrap();
    let acc = recs.last().unwrap().accuracy.unwrap();
    assert!(acc >= 0.95, "accuracy {acc}");
    assert!(recs.iter().enumerate().all(|(i, r)| r.accuracy.is_some() == ((i + 1) % 10 == 0)));
}

#[test]
fn full_batch_sgd_loss_never_increases() {
    let data = generate_blobs(1000, 20, 2, 4.0, &mut RngStream::new(17, 1)).unwrap();
    let rows: Vec<usize> = (0..data.len()).collect();
    let shape = ModelShape::logistic(20, 2);
    let mut model = ModelState::init(shape, &mut RngStream::new(17, 3)).unwrap();
    let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.1, shape.param_count()).unwrap();
    let mut prev = loss_and_accuracy(&model, &data, &rows).unwrap().0;
    for t in 0..200 {
        let g = gradient(&model, &data, &rows).unwrap();
        let mut theta = model.params().clone();
        opt.step(&mut theta, &g).unwrap();
        model.set_params(theta).unwrap();
        let loss = loss_and_accuracy(&model, &data, &rows).unwrap().0;
        assert!(loss <= prev, "iteration {t}: {loss} > {prev}");
        prev = loss;
    }
}

#[test]
fn breakdown_point_is_enforced() {
    let cfg = ExperimentConfig::blobs_default(10, 5, 3, 10, Gar::Dstar);
    assert_eq!(run_experiment(&cfg).unwrap_err(), Error::BreakdownPoint { n: 10, f: 5 });
}

#[test]
fn zero_validation_gradient_is_retried_then_fatal() {
    // two all-zero validation rows with opposite labels: at zero logits their
    // mean gradient vanishes exactly whenever the batch holds one of each
    let blobs = generate_blobs(200, 2, 2, 4.0, &mut RngStream::new(1, 1)).unwrap();
    let mut features = blobs.features().to_vec();
    features.extend([0.0; 4]);
    let mut labels = blobs.labels().to_vec();
    labels.extend([0, 1]);
    let data = Dataset::new(features, labels, 2, 2).unwrap();
    let (mut recovered, mut aborted) = (0, 0);
    for seed in 0..64 {
        let mut cfg = ExperimentConfig::blobs_default(5, 2, 2, 1, Gar::Dstar);
        cfg.n_b = 2;
        cfg.seed = seed;
        let partition = Partition {
            shards: (0..5).map(|i| Shard::new(ShardOwner::Worker(i), (i * 30..i * 30 + 30).collect())).collect(),
            validation: Shard::new(ShardOwner::Validation, vec![200, 201]),
            test: Shard::new(ShardOwner::Test, (150..200).collect()),
        };
        let mut sim = Simulation::from_parts(cfg, data.clone(), partition).unwrap();
        // zero biases at init put every logit at zero for the zero rows
        match sim.step() {
            Ok(_) => recovered += 1,
            Err(Error::AtIteration { t: 1, source }) => {
                assert_eq!(*source, Error::DegenerateValidation);
                aborted += 1;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    // a batch of two is degenerate with probability 1/2, so four straight failures are rare
    assert!(aborted > 0 && recovered > aborted * 4, "recovered {recovered}, aborted {aborted}");
}

#[test]
fn idx_files_round_trip() {
    let mut rng = RngStream::new(6, 0);
    let images = IdxImages {
        rows: 3,
        cols: 4,
        pixels: (0..5 * 12).map(|_| rng.index(256) as u8).collect(),
    };
    let labels = IdxLabels {
        labels: (0..5).map(|_| rng.index(10) as u8).collect(),
    };
    let (img_bytes, lbl_bytes) = (encode_images(&images), encode_labels(&labels));
    assert_eq!(encode_images(&decode_images(&img_bytes).unwrap()), img_bytes);
    assert_eq!(encode_labels(&decode_labels(&lbl_bytes).unwrap()), lbl_bytes);

    let dir = tempfile::tempdir().unwrap();
    let (img_path, lbl_path) = (dir.path().join("images.idx"), dir.path().join("labels.idx"));
    std::fs::write(&img_path, &img_bytes).unwrap();
    std::fs::write(&lbl_path, &lbl_bytes).unwrap();
    let data = load_idx(&img_path, &lbl_path).unwrap();
    let rebuilt = IdxImages {
        rows: 3,
        cols: 4,
        pixels: data.features().iter().map(|&x| (x * 255.0).round() as u8).collect(),
    };
    let relabeled = IdxLabels {
        labels: data.labels().iter().map(|&y| y as u8).collect(),
    };
    assert_eq!(encode_images(&rebuilt), img_bytes);
    assert_eq!(encode_labels(&relabeled), lbl_bytes);
}
