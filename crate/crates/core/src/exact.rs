//! Closed-form scattering results.
//!
//! For the interpolating family the asymptotic momenta (and offsets) are
//! related by the linear map
//!
//! ```text
//!        | 0  -a   b |
//! M(d) = |-a   b   0 |,   a = (2/sqrt 3) sin 2d,   b = (2/sqrt 3) sin(pi/3 - 2d),
//!        | b   0  -a |
//! ```
//!
//! which acts on the zero-sum subspace as the reflection `phi -> pi/3 - 2d - phi`
//! of the relative plane. The two-coupling family simply reverses every
//! momentum and offset.
//!
//! The classical orbit of the interpolating family is known in closed form:
//!
//! ```text
//! r(t)^2          = (2E/m) (t - t0)^2 + B^2 / E
//! cos 3(phi + d)  = k sin(gamma - 3 atan((t - t0) / tau)),   k = sqrt(1 - 9g / 2B^2)
//! tau             = sqrt(m/2) B / E
//! ```

use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use crate::coords::{
    family_a_geometry, wrap_angle, PolarState, SectorLocation, SQRT_3, WALL_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::potentials::{conserved_quantities, Family, PotentialSpec};

/// `delta` reduced to `[0, pi/6]` using the period `pi/3` and the mirror
/// `delta -> pi/3 - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalDelta {
    pub delta_star: f64,
    pub mirrored: bool,
    /// Number of whole periods `pi/3` removed.
    pub shift: i64,
}

pub fn canonicalize_delta(delta: f64) -> CanonicalDelta {
    let shift = (delta / FRAC_PI_3).floor();
    let mut reduced = delta - shift * FRAC_PI_3;
    // floor can land one ulp short of a full period
    let mut shift = shift as i64;
    if reduced >= FRAC_PI_3 {
        reduced -= FRAC_PI_3;
        shift += 1;
    }
    if reduced > FRAC_PI_6 {
        CanonicalDelta {
            delta_star: FRAC_PI_3 - reduced,
            mirrored: true,
            shift,
        }
    } else {
        CanonicalDelta {
            delta_star: reduced,
            mirrored: false,
            shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub entries: [[f64; 3]; 3],
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl TransferMatrix {
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }

    pub fn row_sums(&self) -> [f64; 3] {
        self.entries.map(|r| r[0] + r[1] + r[2])
    }
}

/// Exact scattering map for the sector `(-delta, pi/3 - delta)`.
///
/// The formula is used with `delta` as given: it is analytic in `delta` and
/// stays the correct reflection outside `[0, pi/6]`. For `delta` in
/// `(pi/6, pi/3)` it coincides on zero-sum vectors with
/// `P12 M(pi/3 - delta) P12`, where `P12` swaps particles 1 and 2.
pub fn transfer_matrix(delta: f64) -> TransferMatrix {
    // b = (2/sqrt 3) sin(pi/3 - 2 delta), expanded so that delta = 0 is exact
    let (s, c) = (2.0 * delta).sin_cos();
    let a = 2.0 * s / SQRT_3;
    let b = c - s / SQRT_3;
    TransferMatrix {
        entries: [[0.0, -a, b], [-a, b, 0.0], [b, 0.0, -a]],
        a,
        b,
        delta,
    }
}

fn check_zero_sum(v: &[f64; 3]) -> Result<()> {
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let sum = v[0] + v[1] + v[2];
    if sum.abs() > 1e-10 * scale {
        return Err(Error::NotCmFrame(sum));
    }
    Ok(())
}

/// Outgoing momenta (or offsets) for incoming ones in the CM frame.
///
/// `delta` is ignored for the Calogero and Wolfes limits, which carry their
/// own angle.
pub fn predict_outgoing(input: &[f64; 3], delta: f64, family: Family) -> Result<[f64; 3]> {
    check_zero_sum(input)?;
    Ok(match family {
        Family::Calogero => [input[2], input[1], input[0]],
        Family::Wolfes => [-input[1], -input[0], -input[2]],
        Family::FamilyA => transfer_matrix(delta).apply(input),
        Family::FamilyB => input.map(|v| -v),
    })
}

/// Prediction for a full potential specification.
pub fn predict_for(spec: &PotentialSpec, input: &[f64; 3]) -> Result<[f64; 3]> {
    predict_outgoing(input, spec.effective_delta(), spec.family)
}

/// Outgoing angle `pi/3 - 2 delta - phi_in` for an incoming angle in the
/// canonical sector; the result lies in the same sector.
pub fn angle_out(phi_in: f64, delta: f64) -> Result<f64> {
    match family_a_geometry(delta).locate(phi_in, WALL_TOLERANCE) {
        SectorLocation::Boundary => Err(Error::OnBoundary { phi: phi_in }),
        SectorLocation::Interior(s) if s.index != 0 => Err(Error::OutsideSector {
            phi: phi_in,
            lo: -delta,
            hi: FRAC_PI_3 - delta,
        }),
        SectorLocation::Interior(s) => {
            // express phi on the branch where the sector is (-delta, pi/3 - delta)
            let phi = phi_in - (s.lo + delta);
            Ok(wrap_angle(FRAC_PI_3 - 2.0 * delta - phi))
        }
    }
}

/// Constants of the closed-form orbit through one phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitConstants {
    pub energy: f64,
    pub b: f64,
    pub t0: f64,
    pub tau: f64,
    pub gamma: f64,
    pub k: f64,
    /// `3(phi + delta)` lies in `(branch * pi, (branch + 1) * pi)`.
    pub branch: i64,
}

impl OrbitConstants {
    pub fn b2(&self) -> f64 {
        self.b * self.b
    }

    /// Closest approach `B / sqrt(E)`.
    pub fn r_min(&self) -> f64 {
        self.b / self.energy.sqrt()
    }
}

fn require_orbit_family(spec: &PotentialSpec) -> Result<()> {
    if !spec.family.is_interpolating() {
        return Err(Error::NoPrediction(
            "closed-form orbit is available for the interpolating family only".into(),
        ));
    }
    spec.validate_classical()?;
    if spec.g <= 0.0 {
        return Err(Error::InvalidParameter("orbit requires g > 0".into()));
    }
    Ok(())
}

pub fn orbit_constants(spec: &PotentialSpec, polar: &PolarState, t: f64) -> Result<OrbitConstants> {
    require_orbit_family(spec)?;
    let c = conserved_quantities(spec, polar)?;
    let (e, b2) = (c.energy, c.b2);
    let b = b2.sqrt();
    let t0 = t - polar.r * polar.p_r / (2.0 * e);
    let tau = (spec.mass / 2.0).sqrt() * b / e;
    let k = (1.0 - 9.0 * spec.g / (2.0 * b2)).max(0.0).sqrt();

    let psi = 3.0 * (polar.phi + spec.effective_delta());
    let (sin_psi, cos_psi) = psi.sin_cos();
    if cos_psi.abs() > k + 1e-9 {
        return Err(Error::OffOrbit {
            cos: cos_psi.abs(),
            k,
        });
    }
    // sin(gamma - 3 theta) = cos(psi) / k and
    // cos(gamma - 3 theta) = sin(psi) p_phi / (2 k tau E); k cancels in atan2
    let theta = ((t - t0) / tau).atan();
    let gamma = 3.0 * theta + cos_psi.atan2(sin_psi * polar.p_phi / (2.0 * tau * e));
    Ok(OrbitConstants {
        energy: e,
        b,
        t0,
        tau,
        gamma,
        k,
        branch: (psi / PI).floor() as i64,
    })
}

/// `(r, phi)` on the closed-form orbit at time `t`; `phi` stays on the
/// branch of the anchor point.
pub fn analytic_state(c: &OrbitConstants, spec: &PotentialSpec, t: f64) -> (f64, f64) {
    let s = t - c.t0;
    let r = (2.0 * c.energy / spec.mass * s * s + c.b2() / c.energy).sqrt();
    let cos_psi = c.k * (c.gamma - 3.0 * (s / c.tau).atan()).sin();
    let sign = if c.branch.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let psi = c.branch as f64 * PI + (sign * cos_psi).clamp(-1.0, 1.0).acos();
    (r, psi / 3.0 - spec.effective_delta())
}

/// `p_r = m dr/dt = 2 E (t - t0) / r` on the closed-form orbit.
pub fn analytic_radial_momentum(c: &OrbitConstants, spec: &PotentialSpec, t: f64) -> f64 {
    let (r, _) = analytic_state(c, spec, t);
    2.0 * c.energy * (t - c.t0) / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn canonical_delta_examples() {
        assert_eq!(
            canonicalize_delta(0.0),
            CanonicalDelta {
                delta_star: 0.0,
                mirrored: false,
                shift: 0
            }
        );
        let c = canonicalize_delta(FRAC_PI_4);
        assert!(near(c.delta_star, PI / 12.0, 1e-15) && c.mirrored && c.shift == 0);
        let c = canonicalize_delta(FRAC_PI_3 + PI / 12.0);
        assert!(near(c.delta_star, PI / 12.0, 1e-15) && !c.mirrored && c.shift == 1);
        let c = canonicalize_delta(-PI / 12.0);
        assert!(near(c.delta_star, PI / 12.0, 1e-15) && c.mirrored && c.shift == -1);
    }

    #[test]
    fn matrix_limits() {
        let m = transfer_matrix(0.0);
        assert_eq!(m.a, 0.0);
        assert!(near(m.b, 1.0, 1e-15));
        assert_eq!(
            m.apply(&[1.0, 2.0, 3.0]).map(|v| v.round()),
            [3.0, 2.0, 1.0]
        );

        let m = transfer_matrix(FRAC_PI_6);
        assert!(near(m.a, 1.0, 1e-15) && m.b.abs() < 1e-15);

        let m = transfer_matrix(PI / 12.0);
        assert!(near(m.a, 1.0 / SQRT_3, 1e-15) && near(m.b, 1.0 / SQRT_3, 1e-15));
    }

    #[test]
    fn predictions() {
        let p = predict_outgoing(&[-1.0, 0.0, 1.0], 0.0, Family::FamilyA).unwrap();
        assert!(near(p[0], 1.0, 1e-15) && p[1].abs() < 1e-15 && near(p[2], -1.0, 1e-15));

        let p = predict_outgoing(&[-3.0, 1.0, 2.0], PI / 12.0, Family::FamilyA).unwrap();
        let want = [1.0, 4.0, -5.0].map(|v| v / SQRT_3);
        for (a, b) in p.iter().zip(want) {
            assert!(near(*a, b, 1e-14));
        }
        let energy: f64 = p.iter().map(|v| v * v / 2.0).sum();
        assert!(near(energy, 7.0, 1e-13));

        let p = predict_outgoing(&[-1.0, -1.0, 2.0], 0.3, Family::FamilyB).unwrap();
        assert_eq!(p, [1.0, 1.0, -2.0]);

        assert!(matches!(
            predict_outgoing(&[1.0, 0.0, 0.0], 0.0, Family::FamilyA),
            Err(Error::NotCmFrame(_))
        ));
    }

    #[test]
    fn angle_out_examples() {
        assert!(near(angle_out(FRAC_PI_6, 0.0).unwrap(), FRAC_PI_6, 1e-15));
        assert!(angle_out(0.0, FRAC_PI_6).unwrap().abs() < 1e-15);
        assert!(angle_out(FRAC_PI_6, PI / 12.0).unwrap().abs() < 1e-15);
        assert!(matches!(angle_out(0.0, 0.0), Err(Error::OnBoundary { .. })));
        assert!(matches!(
            angle_out(2.0, 0.0),
            Err(Error::OutsideSector { .. })
        ));
    }

    #[test]
    fn angle_out_matches_transfer_matrix() {
        use crate::coords::{incoming_angle, outgoing_angle};
        let p = [-1.0, 0.0, 1.0];
        let d = PI / 12.0;
        let out = predict_outgoing(&p, d, Family::FamilyA).unwrap();
        let lhs = outgoing_angle(&out).unwrap();
        let rhs = angle_out(incoming_angle(&p).unwrap(), d).unwrap();
        assert!(lhs.abs() < 1e-15 && rhs.abs() < 1e-15);
    }

    #[test]
    fn orbit_constant_examples() {
        let spec = PotentialSpec::family_a(1.0, 0.0);
        let polar = PolarState {
            r: 2.0,
            phi: FRAC_PI_6,
            p_r: -1.0,
            p_phi: 0.5,
        };
        let c = orbit_constants(&spec, &polar, 0.0).unwrap();
        assert!(near(c.energy, 1.65625, 1e-14));
        assert!(near(c.b2(), 4.625, 1e-13));
        assert!(near(c.t0, 2.0 / (2.0 * 1.65625), 1e-14));
        assert!(near(c.r_min(), (4.625f64 / 1.65625).sqrt(), 1e-14));
        assert!(near(c.r_min(), 1.671_063_383, 1e-9));

        let at_min = PolarState { p_r: 0.0, ..polar };
        let c = orbit_constants(&spec, &at_min, 3.5).unwrap();
        assert_eq!(c.t0, 3.5);
    }

    #[test]
    fn orbit_reproduces_anchor() {
        let spec = PotentialSpec::family_a(1.0, 0.2);
        let polar = PolarState {
            r: 2.0,
            phi: 0.5,
            p_r: 0.7,
            p_phi: -0.4,
        };
        let c = orbit_constants(&spec, &polar, 1.25).unwrap();
        let (r, phi) = analytic_state(&c, &spec, 1.25);
        assert!(near(r, 2.0, 1e-14));
        assert!(near(phi, 0.5, 1e-13));
        let (r, _) = analytic_state(&c, &spec, c.t0);
        assert!(near(r, c.r_min(), 1e-14));
        // angular velocity sign from a centered difference
        let h = 1e-6;
        let dphi = (analytic_state(&c, &spec, 1.25 + h).1 - analytic_state(&c, &spec, 1.25 - h).1)
            / (2.0 * h);
        assert!(near(dphi, -0.4 / 4.0, 1e-7));
        assert!(near(analytic_radial_momentum(&c, &spec, 1.25), 0.7, 1e-13));
    }

    #[test]
    fn orbit_rejects_off_manifold_and_family_b() {
        let spec = PotentialSpec::family_a(1.0, 0.0);
        let polar = PolarState {
            r: 2.0,
            phi: 0.3,
            p_r: 0.0,
            p_phi: 0.0,
        };
        // p_phi = 0 is an angular turning point: |cos psi| = k exactly
        assert!(orbit_constants(&spec, &polar, 0.0).is_ok());
        let fb = PotentialSpec::family_b(1.0, 1.0, 0.0);
        assert!(matches!(
            orbit_constants(&fb, &polar, 0.0),
            Err(Error::NoPrediction(_))
        ));
    }
}
