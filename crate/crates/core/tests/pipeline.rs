//! End-to-end flows through the public API only: law, realization,
//! pairing, both cascade engines, the analytic solution, and the trial
//! batch layer working together.

use cascade_core::cascade::{run_continuous, run_discrete, SnapshotSpec};
use cascade_core::cgm::build_multigraph;
use cascade_core::dist::{preset_kcore, Atom, DegreeThresholdDistribution};
use cascade_core::mc;
use cascade_core::seed::{mix_seed, STREAM_BUILD, STREAM_REALIZE, STREAM_RUN};
use cascade_core::theory::{self, QuadratureConfig};

fn reference_law() -> DegreeThresholdDistribution {
    DegreeThresholdDistribution::new(vec![
        Atom {
            d: 3,
            theta: 0,
            p: 0.1,
        },
        Atom {
            d: 3,
            theta: 2,
            p: 0.9,
        },
    ])
    .unwrap()
}

#[test]
fn both_engines_agree_and_land_near_the_analytic_fraction() {
    let law = reference_law();
    let n = 20_000;
    let seed = 99u64;
    let seq = law.realize_sampled(n, mix_seed(seed, STREAM_REALIZE));
    let graph = build_multigraph(&seq, mix_seed(seed, STREAM_BUILD)).unwrap();

    let (traj, continuous) = run_continuous(
        &graph,
        seq.thresholds(),
        mix_seed(seed, STREAM_RUN),
        SnapshotSpec::Uniform(5),
    )
    .unwrap();
    let discrete = run_discrete(&graph, seq.thresholds()).unwrap();
    assert_eq!(continuous.final_active, discrete.final_active);
    assert_eq!(continuous.final_size, discrete.final_size);

    let solved = theory::solve(&law, &QuadratureConfig::default()).unwrap();
    let fraction = continuous.final_size as f64 / n as f64;
    assert!(
        (fraction - solved.a_hat_star).abs() < 0.02,
        "single-run fraction {fraction} vs limit {}",
        solved.a_hat_star
    );
    assert!(
        (traj.tau - solved.t_star).abs() < 0.05,
        "tau {} vs t* {}",
        traj.tau,
        solved.t_star
    );
}

#[test]
fn identical_seeds_replay_the_identical_trajectory() {
    let law = reference_law();
    let seed = 4242u64;
    let build = || {
        let seq = law.realize_sampled(3_000, mix_seed(seed, STREAM_REALIZE));
        let graph = build_multigraph(&seq, mix_seed(seed, STREAM_BUILD)).unwrap();
        run_continuous(
            &graph,
            seq.thresholds(),
            mix_seed(seed, STREAM_RUN),
            SnapshotSpec::Uniform(7),
        )
        .unwrap()
    };
    let (a, res_a) = build();
    let (b, res_b) = build();
    assert_eq!(a, b, "trajectories replay bit for bit");
    assert_eq!(res_a, res_b);
}

#[test]
fn kcore_preset_drives_the_whole_pipeline() {
    // Degree-d nodes need d - 1 already-consumed edges to stay out of the
    // 2-core style pruning analogue; degree-1 atoms with theta 0 seed it.
    let law = preset_kcore(&[(1, 0.25), (3, 0.5), (4, 0.25)], 2).unwrap();
    for atom in law.atoms() {
        assert_eq!(atom.theta, atom.d.saturating_sub(2));
    }
    let seq = law.realize_sampled(5_000, mix_seed(5, STREAM_REALIZE));
    let graph = build_multigraph(&seq, mix_seed(5, STREAM_BUILD)).unwrap();
    let (_, result) = run_continuous(
        &graph,
        seq.thresholds(),
        mix_seed(5, STREAM_RUN),
        SnapshotSpec::Off,
    )
    .unwrap();
    let oracle = run_discrete(&graph, seq.thresholds()).unwrap();
    assert_eq!(result.final_active, oracle.final_active);
    assert!(result.final_size > 0, "degree-1 nodes seed the cascade");
}

#[test]
fn trial_batches_are_worker_count_independent_via_the_public_api() {
    let law = reference_law();
    let one = mc::run_trials(&law, 2_000, 12, 777, 0.5, 1).unwrap();
    let four = mc::run_trials(&law, 2_000, 12, 777, 0.5, 4).unwrap();
    assert_eq!(one, four);
    assert!(one.iter().all(|r| r.n == 2_000));
}

#[test]
fn occupancy_snapshots_account_for_every_inactive_bin() {
    let law = reference_law();
    let seq = law.realize_sampled(4_000, mix_seed(11, STREAM_REALIZE));
    let graph = build_multigraph(&seq, mix_seed(11, STREAM_BUILD)).unwrap();
    let (traj, _) = run_continuous(
        &graph,
        seq.thresholds(),
        mix_seed(11, STREAM_RUN),
        SnapshotSpec::Uniform(4),
    )
    .unwrap();
    assert_eq!(traj.occupancy.len(), 4);
    for snap in &traj.occupancy {
        let binned: u64 = snap.counts.values().sum();
        let expected = traj.evaluate_at(snap.time).b_n;
        assert_eq!(binned, expected, "snapshot at t = {}", snap.time);
        assert!(snap
            .counts
            .keys()
            .all(|&(d, _theta, white)| white <= d && d <= 3));
    }
}
