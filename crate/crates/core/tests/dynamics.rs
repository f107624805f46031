use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tribody::coords::{angle_diff, ParticleState};
use tribody::dynamics::{
    extract_asymptotics, integrate, prepare_scattering_state, random_initial_condition,
    scatter_experiment, IntegratorControls,
};
use tribody::exact::{analytic_state, angle_out, orbit_constants, predict_for};
use tribody::PotentialSpec;

fn trial(spec: &PotentialSpec, seed: u64) -> (f64, f64, [f64; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_initial_condition(spec, &mut rng, (0.5, 1.5), 0.1, 0.5)
}

fn max_abs(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

#[test]
fn energy_and_b2_are_conserved_and_motion_stays_in_its_sector() {
    let controls = IntegratorControls::default();
    for (k, spec) in [
        PotentialSpec::family_a(1.0, 0.0),
        PotentialSpec::family_a(2.5, 0.3),
        PotentialSpec::family_b(1.0, 1.0, PI / 24.0),
        PotentialSpec::family_b(0.5, 3.0, 0.0),
    ]
    .iter()
    .enumerate()
    {
        for seed in 0..4 {
            let (phi, e, a) = trial(spec, 100 * k as u64 + seed);
            let state = prepare_scattering_state(spec, phi, e, &a, None).unwrap();
            let traj = integrate(spec, &state, &controls).unwrap();
            assert!(traj.e_drift <= 1e-8, "{spec:?}: E drift {}", traj.e_drift);
            assert!(
                traj.b2_drift <= 1e-8,
                "{spec:?}: B2 drift {}",
                traj.b2_drift
            );
            for s in &traj.samples {
                assert!(
                    traj.sector.contains(s.polar.phi, 0.0),
                    "left sector at phi = {}",
                    s.polar.phi
                );
                let sum: f64 = s.state.momenta.iter().sum();
                assert!(sum.abs() < 1e-9, "total momentum {sum}");
            }
        }
    }
}

#[test]
fn reversed_outgoing_state_retraces_the_orbit() {
    let controls = IntegratorControls::default();
    for spec in [
        PotentialSpec::family_a(1.0, PI / 12.0),
        PotentialSpec::family_b(1.0, 1.0, PI / 24.0),
    ] {
        let (phi, e, a_in) = trial(&spec, 7);
        let start = prepare_scattering_state(&spec, phi, e, &a_in, None).unwrap();
        let forward = integrate(&spec, &start, &controls).unwrap();
        let last = forward.samples.last().unwrap().state;
        // with t -> -t the reversed run should approach x = -p_in t + a_in
        let back = ParticleState {
            momenta: last.momenta.map(|p| -p),
            time: -last.time,
            ..last
        };
        let traj = integrate(&spec, &back, &controls).unwrap();
        let asym = extract_asymptotics(&traj, &spec).unwrap();
        let p_in = start.momenta;
        let p_scale = p_in.iter().map(|p| p * p).sum::<f64>().sqrt();
        let reversed_p = p_in.map(|p| -p);
        assert!(
            max_abs(&asym.momenta, &reversed_p) <= 1e-5 * p_scale,
            "{:?}",
            asym.momenta
        );
        assert!(
            max_abs(&asym.offsets, &a_in) <= 1e-5 * 10.0,
            "{:?} vs {a_in:?}",
            asym.offsets
        );
    }
}

#[test]
fn outgoing_angle_follows_the_reflection_law() {
    let controls = IntegratorControls::default();
    for delta in [0.0, PI / 24.0, PI / 12.0, PI / 8.0, FRAC_PI_6] {
        let spec = PotentialSpec::family_a(1.0, delta);
        for seed in 0..5 {
            let (phi, e, a) = trial(&spec, 1000 + seed);
            let r = scatter_experiment(&spec, phi, e, &a, &controls).unwrap();
            let want = FRAC_PI_3 - 2.0 * delta - phi;
            assert!(
                angle_diff(r.phi_out_numeric, want).abs() <= 1e-5,
                "delta {delta}: {} vs {want}",
                r.phi_out_numeric
            );
            assert!(angle_diff(angle_out(phi, delta).unwrap(), want).abs() < 1e-14);
        }
    }
}

#[test]
fn scattering_is_continuous_at_the_limits() {
    let controls = IntegratorControls::default();
    for delta in [1e-4, FRAC_PI_6 - 1e-4] {
        let spec = PotentialSpec::family_a(1.0, delta);
        let (phi, e, a) = trial(&spec, 55);
        let r = scatter_experiment(&spec, phi, e, &a, &controls).unwrap();
        assert!(r.max_p_error <= 1e-6, "delta {delta}: {}", r.max_p_error);
        let limit = if delta < 0.1 {
            PotentialSpec::calogero(1.0)
        } else {
            PotentialSpec::wolfes(1.0)
        };
        let limit_p = predict_for(&limit, &r.p_in).unwrap();
        // the map itself moves by O(delta offset)
        assert!(max_abs(&r.p_out_numeric, &limit_p) < 1e-3);
    }
}

#[test]
fn integrated_orbit_matches_the_closed_form() {
    let controls = IntegratorControls::default();
    for (k, delta) in [0.0, 0.2, PI / 12.0].into_iter().enumerate() {
        let spec = PotentialSpec::family_a(1.5, delta);
        let (phi, e, a) = trial(&spec, 300 + k as u64);
        let state = prepare_scattering_state(&spec, phi, e, &a, None).unwrap();
        let traj = integrate(&spec, &state, &controls).unwrap();
        let mid = traj.samples[traj.samples.len() / 2];
        let c = orbit_constants(&spec, &mid.polar, mid.state.time).unwrap();
        let found = traj.closest_approach.unwrap().r_min;
        assert!(((found - c.r_min()) / c.r_min()).abs() <= 1e-6);
        for s in &traj.samples {
            let (r, phi) = analytic_state(&c, &spec, s.state.time);
            assert!(
                ((r - s.polar.r) / r).abs() <= 1e-6,
                "t = {}: r {r} vs {}",
                s.state.time,
                s.polar.r
            );
            assert!(
                angle_diff(phi, s.polar.phi).abs() <= 1e-6,
                "t = {}: phi {phi} vs {}",
                s.state.time,
                s.polar.phi
            );
        }
    }
}
