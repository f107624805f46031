//! Inverse-square three-body potentials and their conserved quantities.
//!
//! Every family is a cyclic sum of terms `c / u^2` with `u` linear in the
//! positions, optionally plus the harmonic confinement
//! `omega^2 * sum_{i<j} (x_i - x_j)^2 = 3 omega^2 r^2`. In the relative plane
//! the inverse-square part is `W(phi) / r^2` with
//!
//! ```text
//! interpolating family:  W = 9 g / (2 sin^2 3(phi + delta))
//! two-coupling family:   W = (9/2) [ g / sin^2 3(phi + delta) + f / cos^2 3(phi + delta) ]
//! ```

use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use crate::coords::{Sector, SectorGeometry, SQRT_3};
use crate::error::{Error, Result};

/// Denominators below this fraction of the hyperradius count as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    #[serde(rename = "calogero")]
    Calogero,
    #[serde(rename = "wolfes")]
    Wolfes,
    #[serde(rename = "A")]
    FamilyA,
    #[serde(rename = "B")]
    FamilyB,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Calogero => "calogero",
            Family::Wolfes => "wolfes",
            Family::FamilyA => "A",
            Family::FamilyB => "B",
        }
    }

    /// Families whose walls are spaced by `pi/3` (the interpolating family
    /// and its two limits).
    pub fn is_interpolating(&self) -> bool {
        !matches!(self, Family::FamilyB)
    }
}

/// Cartesian form used for the `f` term of the two-coupling family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyBVariant {
    /// Second wall family at `cos 3(phi + delta) = 0`, sharing the argument
    /// of the first.
    PolarConsistent,
    /// `f / [(x1 - x2) sin(delta) + (x1 + x2 - 2 x3) cos(delta) / sqrt 3]^2`,
    /// whose walls sit at `cos 3(phi - delta) = 0`. Exploration only.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub family: Family,
    pub g: f64,
    pub f: f64,
    pub delta: f64,
    pub omega: f64,
    pub mass: f64,
    pub hbar: f64,
    pub variant: FamilyBVariant,
}

impl PotentialSpec {
    fn base(family: Family, g: f64, f: f64, delta: f64) -> Self {
        Self {
            family,
            g,
            f,
            delta,
            omega: 0.0,
            mass: 1.0,
            hbar: 1.0,
            variant: FamilyBVariant::PolarConsistent,
        }
    }

    pub fn calogero(g: f64) -> Self {
        Self::base(Family::Calogero, g, 0.0, 0.0)
    }

    pub fn wolfes(g: f64) -> Self {
        Self::base(Family::Wolfes, g, 0.0, FRAC_PI_6)
    }

    pub fn family_a(g: f64, delta: f64) -> Self {
        Self::base(Family::FamilyA, g, 0.0, delta)
    }

    pub fn family_b(g: f64, f: f64, delta: f64) -> Self {
        Self::base(Family::FamilyB, g, f, delta)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_units(mut self, mass: f64, hbar: f64) -> Self {
        self.mass = mass;
        self.hbar = hbar;
        self
    }

    pub fn with_variant(mut self, variant: FamilyBVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Angle entering the interpolating formula: the Calogero and Wolfes
    /// potentials sit at `0` and `pi/6`.
    pub fn effective_delta(&self) -> f64 {
        match self.family {
            Family::Calogero => 0.0,
            Family::Wolfes => FRAC_PI_6,
            Family::FamilyA | Family::FamilyB => self.delta,
        }
    }

    fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameter(msg.into())
    }

    /// Structural checks common to every use.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.g, self.f, self.delta, self.omega, self.mass, self.hbar]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Self::invalid("non-finite potential parameter"));
        }
        if self.mass <= 0.0 || self.hbar <= 0.0 {
            return Err(Self::invalid("mass and hbar must be positive"));
        }
        if self.omega < 0.0 {
            return Err(Self::invalid("omega must be non-negative"));
        }
        if self.g == 0.0 {
            return Err(Self::invalid(format!(
                "g must be non-zero for family {}",
                self.family.label()
            )));
        }
        if self.family == Family::FamilyB && self.f == 0.0 {
            return Err(Self::invalid("family B requires f != 0"));
        }
        Ok(())
    }

    /// Classical scattering needs repulsive couplings and no confinement.
    pub fn validate_classical(&self) -> Result<()> {
        self.validate()?;
        if self.g < 0.0 || (self.family == Family::FamilyB && self.f < 0.0) {
            return Err(Self::invalid("classical runs require g >= 0 (and f >= 0)"));
        }
        if self.omega != 0.0 {
            return Err(Self::invalid("scattering runs require omega = 0"));
        }
        Ok(())
    }

    /// Quantum problems need couplings above the collapse bound
    /// `-hbar^2 / 4m`. A vanishing `g` is accepted here: it is the
    /// hard-wall reference problem.
    pub fn validate_quantum(&self) -> Result<()> {
        let mut probe = *self;
        if probe.g == 0.0 {
            probe.g = 1.0;
        }
        if probe.family == Family::FamilyB && probe.f == 0.0 {
            probe.f = 1.0;
        }
        probe.validate()?;
        let bound = -self.hbar * self.hbar / (4.0 * self.mass);
        if self.g <= bound || (self.family == Family::FamilyB && self.f <= bound) {
            return Err(Self::invalid(format!(
                "couplings must exceed -hbar^2/4m = {bound}"
            )));
        }
        Ok(())
    }

    /// Wall spacing of the inverse-square part (polar-consistent forms).
    pub fn wall_spacing(&self) -> f64 {
        if self.family.is_interpolating() {
            FRAC_PI_3
        } else {
            FRAC_PI_6
        }
    }

    pub fn geometry(&self) -> SectorGeometry {
        let d = self.effective_delta();
        match (self.family, self.variant) {
            (Family::FamilyB, FamilyBVariant::AsPrinted) => {
                let walls: Vec<f64> = (0..6)
                    .flat_map(|q| {
                        let s = q as f64 * FRAC_PI_3;
                        [-d + s, d + FRAC_PI_6 + s]
                    })
                    .collect();
                SectorGeometry::from_walls(-d, &walls)
            }
            _ => SectorGeometry::uniform(-d, self.wall_spacing()),
        }
    }

    /// Sector starting at the wall `phi = -delta`.
    pub fn canonical_sector(&self) -> Sector {
        self.geometry().canonical()
    }

    /// `W(phi) = r^2 V` for the inverse-square part.
    pub fn angular_potential(&self, phi: f64) -> Result<f64> {
        let psi = 3.0 * (phi + self.effective_delta());
        let s = psi.sin();
        let guard = |v: f64| {
            if v.abs() < SINGULAR_THRESHOLD {
                Err(Error::SingularConfiguration(v))
            } else {
                Ok(v * v)
            }
        };
        let mut w = 4.5 * self.g / guard(s)?;
        if self.family == Family::FamilyB {
            let c = match self.variant {
                FamilyBVariant::PolarConsistent => psi.cos(),
                FamilyBVariant::AsPrinted => (3.0 * (phi - self.delta)).cos(),
            };
            w += 4.5 * self.f / guard(c)?;
        }
        Ok(w)
    }

    pub fn interaction(&self) -> Interaction {
        Interaction::new(self)
    }
}

/// One term `weight / u^2`, `u = coeffs . x`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coeffs: [f64; 3],
    weight: f64,
}

/// Precomputed linear forms of a potential, for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    terms: Vec<Term>,
    omega2: f64,
}

fn cyclic(coeffs: [f64; 3], weight: f64) -> [Term; 3] {
    // x1 -> x2 -> x3 -> x1 moves the coefficient of x_i onto x_{i+1}
    let rot = |k: usize| Term {
        coeffs: [
            coeffs[(3 - k) % 3],
            coeffs[(4 - k) % 3],
            coeffs[(5 - k) % 3],
        ],
        weight,
    };
    [rot(0), rot(1), rot(2)]
}

impl Interaction {
    fn new(spec: &PotentialSpec) -> Self {
        let mut terms = Vec::with_capacity(6);
        let (s, c) = spec.delta.sin_cos();
        match spec.family {
            Family::Calogero => terms.extend(cyclic([1.0, -1.0, 0.0], spec.g)),
            Family::Wolfes => terms.extend(cyclic([1.0, 1.0, -2.0], 3.0 * spec.g)),
            Family::FamilyA => terms.extend(cyclic(
                [c + s / SQRT_3, -c + s / SQRT_3, -2.0 * s / SQRT_3],
                spec.g,
            )),
            Family::FamilyB => {
                terms.extend(cyclic(
                    [c + s / SQRT_3, -c + s / SQRT_3, -2.0 * s / SQRT_3],
                    spec.g,
                ));
                let second = match spec.variant {
                    FamilyBVariant::PolarConsistent => {
                        [c / SQRT_3 - s, c / SQRT_3 + s, -2.0 * c / SQRT_3]
                    }
                    FamilyBVariant::AsPrinted => {
                        [s + c / SQRT_3, -s + c / SQRT_3, -2.0 * c / SQRT_3]
                    }
                };
                terms.extend(cyclic(second, spec.f));
            }
        }
        Self {
            terms,
            omega2: spec.omega * spec.omega,
        }
    }

    fn scale(x: &[f64; 3]) -> f64 {
        let d = [x[0] - x[1], x[1] - x[2], x[2] - x[0]];
        (d.iter().map(|v| v * v).sum::<f64>() / 3.0).sqrt()
    }

    fn linear(t: &Term, x: &[f64; 3], scale: f64) -> Result<f64> {
        let u = t.coeffs[0] * x[0] + t.coeffs[1] * x[1] + t.coeffs[2] * x[2];
        if !(u.abs() >= SINGULAR_THRESHOLD * scale) || scale == 0.0 {
            return Err(Error::SingularConfiguration(u));
        }
        Ok(u)
    }

    /// Linear forms whose zeros are the singular walls.
    pub fn wall_forms(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.terms.iter().map(|t| t.coeffs)
    }

    /// Inverse-square part only.
    pub fn inverse_square_energy(&self, x: &[f64; 3]) -> Result<f64> {
        let scale = Self::scale(x);
        let mut v = 0.0;
        for t in &self.terms {
            let u = Self::linear(t, x, scale)?;
            v += t.weight / (u * u);
        }
        Ok(v)
    }

    pub fn harmonic_energy(&self, x: &[f64; 3]) -> f64 {
        let d = [x[0] - x[1], x[1] - x[2], x[2] - x[0]];
        self.omega2 * d.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn energy(&self, x: &[f64; 3]) -> Result<f64> {
        Ok(self.inverse_square_energy(x)? + self.harmonic_energy(x))
    }

    /// `F_k = -dV/dx_k`.
    pub fn forces(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        let scale = Self::scale(x);
        let mut f = [0.0; 3];
        for t in &self.terms {
            let u = Self::linear(t, x, scale)?;
            let k = 2.0 * t.weight / (u * u * u);
            for (fk, ck) in f.iter_mut().zip(t.coeffs) {
                *fk += k * ck;
            }
        }
        if self.omega2 != 0.0 {
            let sum = x[0] + x[1] + x[2];
            for (fk, xk) in f.iter_mut().zip(x) {
                // sum_{j != k} (x_k - x_j) = 3 x_k - sum
                *fk -= 2.0 * self.omega2 * (3.0 * xk - sum);
            }
        }
        Ok(f)
    }
}

pub fn potential_energy(spec: &PotentialSpec, positions: &[f64; 3]) -> Result<f64> {
    spec.interaction().energy(positions)
}

pub fn potential_polar(spec: &PotentialSpec, r: f64, phi: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::PolarSingularity);
    }
    Ok(spec.angular_potential(phi)? / (r * r) + 3.0 * spec.omega * spec.omega * r * r)
}

pub fn forces(spec: &PotentialSpec, positions: &[f64; 3]) -> Result<[f64; 3]> {
    spec.interaction().forces(positions)
}

/// The two constants of motion of the scattering problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conserved {
    pub energy: f64,
    pub b2: f64,
}

/// `B^2 = p_phi^2 / 2m + W(phi)` and `E = p_r^2 / 2m + B^2 / r^2`.
pub fn conserved_quantities(
    spec: &PotentialSpec,
    polar: &crate::coords::PolarState,
) -> Result<Conserved> {
    if spec.omega != 0.0 {
        return Err(Error::InvalidParameter(
            "conserved quantities need omega = 0".into(),
        ));
    }
    if !(polar.r > 0.0) {
        return Err(Error::PolarSingularity);
    }
    let m2 = 2.0 * spec.mass;
    let b2 = polar.p_phi * polar.p_phi / m2 + spec.angular_potential(polar.phi)?;
    Ok(Conserved {
        energy: polar.p_r * polar.p_r / m2 + b2 / (polar.r * polar.r),
        b2,
    })
}
