mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use common::*;
use nonholo_core::cell_model::CellParams;
use nonholo_core::control::{
    default_identity_seed, synthesize, ControlSchedule, IdentitySeed, SynthesisOptions,
    SynthesisTarget,
};
use nonholo_core::device::{
    apply_program, qft_program, Backend, DeviceTopology, RegisterState, ScheduleBook, REGISTER_DIM,
};
use nonholo_core::gates::GateSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn seed() -> &'static (CellParams, IdentitySeed) {
    static SEED: OnceLock<(CellParams, IdentitySeed)> = OnceLock::new();
    SEED.get_or_init(|| {
        let p = CellParams::default();
        let s = default_identity_seed(&p).unwrap();
        (p, s)
    })
}

#[test]
fn identity_seed_is_identity_up_to_phase() {
    let (p, s) = seed();
    let u = oracle_sequence(&default_cell_oracle(), s.controls.values(), p.tau);
    let want = M::identity(8, 8) * Complex64::from_polar(1.0, s.phase_theta);
    assert!(max_abs(&(u - want)) < 1e-6);
}

#[test]
fn cell_permutations_and_small_phase_synthesize() {
    let (p, s) = seed();
    let t = p.hamiltonians();
    for name in ["p12", "p23", "phase(pi/32)"] {
        let spec: GateSpec = name.parse().unwrap();
        let schedule = synthesize(
            &t,
            p.tau,
            s,
            &spec.cell_target(),
            "h",
            &SynthesisOptions::default(),
        )
        .unwrap();
        let step = oracle_sequence(&default_cell_oracle(), schedule.base.values(), p.tau);
        let mut realized = M::identity(8, 8);
        for _ in 0..schedule.n_star {
            realized = &step * realized;
        }
        let inf = infidelity(&spec.cell_unitary(), &realized);
        assert!(inf <= 1e-6, "{name}: {inf}");
        if name.starts_with("phase") {
            assert_eq!(schedule.n_star, 1);
        }
    }
}

#[test]
fn fixed_repetition_count_is_respected() {
    let (p, s) = seed();
    let spec: GateSpec = "toffoli".parse().unwrap();
    let options = SynthesisOptions {
        n_star: Some(12),
        ..SynthesisOptions::default()
    };
    let schedule = synthesize(
        &p.hamiltonians(),
        p.tau,
        s,
        &spec.cell_target(),
        "h",
        &options,
    )
    .unwrap();
    assert_eq!(schedule.n_star, 12);
    assert!(schedule.residual <= 1e-6);
}

/// Schedules stopped early, so that their residuals are well above rounding.
fn loose_book() -> (ScheduleBook, f64) {
    let (p, s) = seed();
    let t = p.hamiltonians();
    let topology = DeviceTopology::default();
    let program = qft_program(&topology);
    let options = SynthesisOptions {
        tol: 1e-4,
        residual_tol: 1e-4,
        ..SynthesisOptions::default()
    };
    let mut targets: Vec<SynthesisTarget> = program
        .gate_names()
        .iter()
        .map(|n| n.parse::<GateSpec>().unwrap().cell_target())
        .collect();
    targets.push(SynthesisTarget::identity());
    let schedules: Vec<ControlSchedule> = targets
        .par_iter()
        .map(|target| synthesize(&t, p.tau, s, target, "h", &options).unwrap())
        .collect();
    let residuals: BTreeMap<String, f64> = schedules
        .iter()
        .map(|s| (s.target_name.clone(), s.residual))
        .collect();
    let identity = schedules
        .iter()
        .find(|s| s.target_name == "identity")
        .unwrap()
        .clone();
    let mut budget = 0.0;
    for op in &program.ops {
        budget += residuals[op.gate_name.as_ref().unwrap()];
        let idle = nonholo_core::device::CellId::ALL
            .into_iter()
            .filter(|&c| !topology.overlaps(c, op.cell))
            .count();
        budget += idle as f64 * residuals["identity"];
    }
    let book = ScheduleBook::new(&t, p.tau, "h", &identity, schedules).unwrap();
    (book, budget)
}

#[test]
fn physical_error_is_bounded_by_schedule_residuals() {
    let (book, budget) = loose_book();
    let topology = DeviceTopology::default();
    let program = qft_program(&topology);
    let f = dft(REGISTER_DIM);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..4 {
        let input = if trial == 0 {
            RegisterState::basis(0)
        } else {
            let raw: Vec<Complex64> = (0..REGISTER_DIM)
                .map(|_| cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            RegisterState::new(raw.into_iter().map(|z| z / n).collect()).unwrap()
        };
        let (out, phase) =
            apply_program(&topology, &input, &program, Backend::Physical(&book)).unwrap();
        let oracle = input.transformed(&f);
        let overlap = oracle.inner(&out);
        let loss = 1.0 - overlap.norm();
        eprintln!("trial {trial}: loss {loss:.3e}, residual budget {budget:.3e}");
        assert!(loss <= 10.0 * budget, "loss {loss} budget {budget}");
        let drift = (overlap.arg() - phase + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert!(drift.abs() < 1e-2, "tracked phase off by {drift}");
    }
}

#[test]
fn schedules_tied_to_other_cells_are_rejected() {
    let (p, s) = seed();
    let t = p.hamiltonians();
    let identity = synthesize(
        &t,
        p.tau,
        s,
        &SynthesisTarget::identity(),
        "a",
        &SynthesisOptions::default(),
    )
    .unwrap();
    let err = ScheduleBook::new(&t, p.tau, "b", &identity, Vec::new()).unwrap_err();
    assert!(matches!(err, nonholo_core::Error::HashMismatch { .. }));
}
