//! Coordinate systems for three equal masses on a line.
//!
//! Cartesian positions `x1, x2, x3` map to Jacobi coordinates
//!
//! ```text
//! R = (x1 + x2 + x3) / 3,   x = (x1 - x2) / sqrt 2,   y = (x1 + x2 - 2 x3) / sqrt 6
//! ```
//!
//! and the relative plane `(x, y)` is parametrized by `x = r sin(phi)`,
//! `y = r cos(phi)`, so `phi` is measured from the `+y` axis toward `+x`.
//! The transformation is orthonormal on the relative subspace, which is why
//! kinetic energy keeps the single mass `m` in every representation.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, PI, TAU};

use crate::error::{Error, Result};

pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub(crate) const SQRT_3: f64 = 1.732_050_807_568_877_2;
pub(crate) const SQRT_6: f64 = 2.449_489_742_783_178;

/// Default tolerance (radians) for deciding that an angle sits on a wall.
pub const WALL_TOLERANCE: f64 = 1e-12;

/// Positions, momenta and time of the three particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticleState {
    pub positions: [f64; 3],
    pub momenta: [f64; 3],
    pub time: f64,
}

impl ParticleState {
    pub fn new(positions: [f64; 3], momenta: [f64; 3], time: f64) -> Self {
        Self {
            positions,
            momenta,
            time,
        }
    }

    pub fn to_cm_frame(&self) -> Self {
        to_cm_frame(self)
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        self.momenta.iter().map(|p| p * p).sum::<f64>() / (2.0 * mass)
    }
}

/// Jacobi coordinates and their conjugate momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiState {
    pub center: f64,
    pub x: f64,
    pub y: f64,
    pub p_center: f64,
    pub p_x: f64,
    pub p_y: f64,
}

/// Hyperradius, angle and the canonical momenta `p_r = m dr/dt`,
/// `p_phi = m r^2 dphi/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

impl PolarState {
    /// Relative-plane Jacobi state (center-of-mass components zero).
    pub fn to_jacobi(&self) -> JacobiState {
        let (s, c) = self.phi.sin_cos();
        let p_t = if self.r > 0.0 {
            self.p_phi / self.r
        } else {
            0.0
        };
        JacobiState {
            center: 0.0,
            x: self.r * s,
            y: self.r * c,
            p_center: 0.0,
            p_x: self.p_r * s + p_t * c,
            p_y: self.p_r * c - p_t * s,
        }
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        (self.p_r * self.p_r + self.p_phi * self.p_phi / (self.r * self.r)) / (2.0 * mass)
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Signed angular difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

fn mean3(v: &[f64; 3]) -> f64 {
    (v[0] + v[1] + v[2]) / 3.0
}

/// Subtract the center-of-mass position and velocity (equal masses).
pub fn to_cm_frame(state: &ParticleState) -> ParticleState {
    let xc = mean3(&state.positions);
    let pc = mean3(&state.momenta);
    ParticleState {
        positions: state.positions.map(|x| x - xc),
        momenta: state.momenta.map(|p| p - pc),
        time: state.time,
    }
}

fn jacobi_components(v: &[f64; 3]) -> (f64, f64, f64) {
    (
        v[0] + v[1] + v[2],
        (v[0] - v[1]) / SQRT_2,
        (v[0] + v[1] - 2.0 * v[2]) / SQRT_6,
    )
}

pub fn jacobi_from_cartesian(state: &ParticleState) -> JacobiState {
    let (sx, x, y) = jacobi_components(&state.positions);
    let (sp, p_x, p_y) = jacobi_components(&state.momenta);
    JacobiState {
        center: sx / 3.0,
        x,
        y,
        p_center: sp,
        p_x,
        p_y,
    }
}

/// Positions from `(R, x, y)`.
pub fn positions_from_jacobi(center: f64, x: f64, y: f64) -> [f64; 3] {
    let (a, b) = (x / SQRT_2, y / SQRT_6);
    [center + a + b, center - a + b, center - 2.0 * b]
}

/// Momenta from `(P_R, P_x, P_y)`.
pub fn momenta_from_jacobi(p_center: f64, p_x: f64, p_y: f64) -> [f64; 3] {
    let c = p_center / 3.0;
    let (a, b) = (p_x / SQRT_2, p_y / SQRT_6);
    [c + a + b, c - a + b, c - 2.0 * b]
}

pub fn cartesian_from_jacobi(j: &JacobiState, time: f64) -> ParticleState {
    ParticleState {
        positions: positions_from_jacobi(j.center, j.x, j.y),
        momenta: momenta_from_jacobi(j.p_center, j.p_x, j.p_y),
        time,
    }
}

pub fn polar_from_jacobi(j: &JacobiState) -> Result<PolarState> {
    let r = j.x.hypot(j.y);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::PolarSingularity);
    }
    Ok(PolarState {
        r,
        phi: j.x.atan2(j.y),
        p_r: (j.x * j.p_x + j.y * j.p_y) / r,
        p_phi: j.y * j.p_x - j.x * j.p_y,
    })
}

/// Polar state of a Cartesian state (center of mass removed first).
pub fn polar_from_cartesian(state: &ParticleState) -> Result<PolarState> {
    polar_from_jacobi(&jacobi_from_cartesian(&to_cm_frame(state)))
}

/// CM-frame positions `x_i = -sqrt(2/3) r cos(phi + 2 pi i / 3)`, `i = 1, 2, 3`.
///
/// The third position is taken as `-(x_1 + x_2)` so that the sum vanishes in
/// floating point.
pub fn cartesian_from_polar(r: f64, phi: f64) -> [f64; 3] {
    let (s, c) = phi.sin_cos();
    let [x1, x2, _] = positions_from_jacobi(0.0, r * s, r * c);
    [x1, x2, -(x1 + x2)]
}

/// One angular sector between two adjacent walls, with `lo < phi < hi`
/// expressed on the same branch as the angle that was located.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Sector {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Strict interior test on the sector's own branch.
    pub fn contains(&self, phi: f64, tol: f64) -> bool {
        let u = self.lo + (phi - self.lo).rem_euclid(TAU);
        u > self.lo + tol && u < self.hi - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectorLocation {
    Interior(Sector),
    Boundary,
}

impl SectorLocation {
    pub fn index(&self) -> Option<usize> {
        match self {
            SectorLocation::Interior(s) => Some(s.index),
            SectorLocation::Boundary => None,
        }
    }

    pub fn sector(&self) -> Option<Sector> {
        match self {
            SectorLocation::Interior(s) => Some(*s),
            SectorLocation::Boundary => None,
        }
    }
}

/// Wall angles of a potential in the relative plane.
///
/// Walls are kept as offsets from `origin` in `[0, 2 pi)`; sector `0` starts
/// at the wall located at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGeometry {
    origin: f64,
    offsets: Vec<f64>,
}

impl SectorGeometry {
    /// Walls at `origin + j * spacing`; `spacing` must divide `2 pi`.
    pub fn uniform(origin: f64, spacing: f64) -> Self {
        let count = (TAU / spacing).round() as usize;
        Self {
            origin,
            offsets: (0..count).map(|j| j as f64 * spacing).collect(),
        }
    }

    /// Arbitrary wall set; the first wall at or after `origin` (mod 2 pi)
    /// opens sector `0`.
    pub fn from_walls(origin: f64, walls: &[f64]) -> Self {
        let mut offsets: Vec<f64> = walls
            .iter()
            .map(|w| (w - origin).rem_euclid(TAU))
            .map(|u| if TAU - u < 1e-14 { 0.0 } else { u })
            .collect();
        offsets.sort_by(f64::total_cmp);
        offsets.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        Self { origin, offsets }
    }

    pub fn count(&self) -> usize {
        self.offsets.len()
    }

    pub fn walls(&self) -> impl Iterator<Item = f64> + '_ {
        self.offsets.iter().map(move |u| self.origin + u)
    }

    pub fn locate(&self, phi: f64, tol: f64) -> SectorLocation {
        let u = (phi - self.origin).rem_euclid(TAU);
        let n = self.offsets.len();
        let first = self.offsets[0];
        // the interval ending at 2 pi + first wraps around to the last sector
        let (index, lo, hi) = match self.offsets.iter().rposition(|&w| w <= u) {
            Some(i) => {
                let hi = if i + 1 < n {
                    self.offsets[i + 1]
                } else {
                    TAU + first
                };
                (i, self.offsets[i], hi)
            }
            None => (n - 1, self.offsets[n - 1] - TAU, first),
        };
        if u - lo <= tol || hi - u <= tol {
            return SectorLocation::Boundary;
        }
        SectorLocation::Interior(Sector {
            index,
            lo: phi - (u - lo),
            hi: phi + (hi - u),
        })
    }

    /// Sector `0` on the branch starting at `origin`.
    pub fn canonical(&self) -> Sector {
        let hi = if self.offsets.len() > 1 {
            self.offsets[1]
        } else {
            TAU
        };
        Sector {
            index: 0,
            lo: self.origin + self.offsets[0],
            hi: self.origin + hi,
        }
    }
}

/// Sector choice for the interpolating family: `index` in `0..6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec {
    pub delta: f64,
    pub index: usize,
}

impl SectorSpec {
    pub fn canonical(delta: f64) -> Self {
        Self { delta, index: 0 }
    }

    pub fn interval(&self) -> (f64, f64) {
        let lo = -self.delta + self.index as f64 * FRAC_PI_3;
        (lo, lo + FRAC_PI_3)
    }
}

/// Six walls at `-delta + q pi/3`.
pub fn family_a_geometry(delta: f64) -> SectorGeometry {
    SectorGeometry::uniform(-delta, FRAC_PI_3)
}

pub fn sector_of(phi: f64, delta: f64) -> SectorLocation {
    sector_of_with_tol(phi, delta, WALL_TOLERANCE)
}

pub fn sector_of_with_tol(phi: f64, delta: f64, tol: f64) -> SectorLocation {
    family_a_geometry(delta).locate(phi, tol)
}

fn relative_momentum(momenta: &[f64; 3]) -> Result<(f64, f64)> {
    let scale = momenta.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let sum = momenta[0] + momenta[1] + momenta[2];
    if sum.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotCmFrame(sum));
    }
    let (_, p_x, p_y) = jacobi_components(momenta);
    if p_x == 0.0 && p_y == 0.0 {
        return Err(Error::NoRelativeMotion);
    }
    Ok((p_x, p_y))
}

/// Polar angle of the configuration as `t -> -inf`: the Jacobi position
/// vector is antiparallel to the Jacobi momentum there.
pub fn incoming_angle(momenta: &[f64; 3]) -> Result<f64> {
    let (p_x, p_y) = relative_momentum(momenta)?;
    Ok((-p_x).atan2(-p_y))
}

/// Polar angle of the configuration as `t -> +inf`.
pub fn outgoing_angle(momenta: &[f64; 3]) -> Result<f64> {
    let (p_x, p_y) = relative_momentum(momenta)?;
    Ok(p_x.atan2(p_y))
}

/// Particle ordering inequalities for the canonical sector at `delta = 0`,
/// read as `(x1 > x3) && (x3 < 0)`. Diagnostic only.
pub fn canonical_ordering_holds(x: &[f64; 3]) -> bool {
    let d12 = (x[0] - x[1]).abs();
    x[0] > x[2] && x[2] < 0.0 && x[1] > x[2] && d12 < x[0] - x[2] && d12 < x[1] - x[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn cm_frame_examples() {
        let s = to_cm_frame(&ParticleState::new([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 0.0));
        assert_eq!(s.positions, [-1.0, 0.0, 1.0]);
        assert_eq!(s.momenta, [0.0, 0.0, 0.0]);

        let s0 = ParticleState::new([1.0, -1.0, 0.0], [-1.0, 0.0, 1.0], 2.0);
        assert_eq!(to_cm_frame(&s0), s0);

        let s = to_cm_frame(&ParticleState::new([5.0, 5.0, 5.0], [2.0, -1.0, -1.0], 0.0));
        assert_eq!(s.positions, [0.0, 0.0, 0.0]);
        assert_eq!(s.momenta, [2.0, -1.0, -1.0]);
    }

    #[test]
    fn jacobi_examples() {
        let j = jacobi_from_cartesian(&ParticleState::new([1.0, -1.0, 0.0], [-1.0, 0.0, 1.0], 0.0));
        assert_eq!(j.center, 0.0);
        assert!(close(j.x, SQRT_2, 1e-15));
        assert_eq!(j.y, 0.0);
        assert!(close(j.p_x, -0.707_106_781_186_547_5, 1e-15));
        assert!(close(j.p_y, -1.224_744_871_391_589, 1e-15));
        assert_eq!(j.p_center, 0.0);

        let h = SQRT_2 / 2.0;
        let j = jacobi_from_cartesian(&ParticleState::new([h, 0.0, -h], [0.0; 3], 0.0));
        assert!(close(j.x, 0.5, 1e-15));
        assert!(close(j.y, 0.866_025_403_784_438_6, 1e-15));
    }

    #[test]
    fn polar_examples() {
        let j = JacobiState {
            center: 0.0,
            x: SQRT_2,
            y: 0.0,
            p_center: 0.0,
            p_x: 0.0,
            p_y: 0.0,
        };
        let p = polar_from_jacobi(&j).unwrap();
        assert!(close(p.r, SQRT_2, 1e-15));
        assert!(close(p.phi, FRAC_PI_2, 1e-15));

        let j = JacobiState {
            x: 0.5,
            y: SQRT_3 / 2.0,
            ..j
        };
        let p = polar_from_jacobi(&j).unwrap();
        assert!(close(p.r, 1.0, 1e-15));
        assert!(close(p.phi, FRAC_PI_6, 1e-15));
    }

    #[test]
    fn kinetic_identity_example() {
        let state = ParticleState::new([0.3, -1.1, 0.8], [-1.0, 0.0, 1.0], 0.0);
        let j = jacobi_from_cartesian(&state);
        let p = polar_from_jacobi(&j).unwrap();
        assert!(close(p.kinetic_energy(1.0), 1.0, 1e-12));
        assert!(close(state.kinetic_energy(1.0), 1.0, 1e-15));
    }

    #[test]
    fn zero_radius_is_singular() {
        let j = jacobi_from_cartesian(&ParticleState::new([2.0; 3], [1.0, 0.0, -1.0], 0.0));
        assert_eq!(polar_from_jacobi(&j), Err(Error::PolarSingularity));
    }

    #[test]
    fn cartesian_from_polar_examples() {
        let x = cartesian_from_polar(1.0, FRAC_PI_6);
        let h = SQRT_2 / 2.0;
        for (a, b) in x.iter().zip([h, 0.0, -h]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(cartesian_from_polar(0.0, 1.234), [0.0; 3]);
        let x = cartesian_from_polar(SQRT_2, FRAC_PI_2);
        for (a, b) in x.iter().zip([1.0, -1.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_of(FRAC_PI_6, 0.0).index(), Some(0));
        assert_eq!(sector_of(0.0, 0.0), SectorLocation::Boundary);
        let s = sector_of(FRAC_PI_6, PI / 12.0).sector().unwrap();
        assert_eq!(s.index, 0);
        assert!(close(s.lo, -PI / 12.0, 1e-15));
        assert!(close(s.hi, PI / 4.0, 1e-15));
        // negative angles land in the last sector
        assert_eq!(sector_of(-FRAC_PI_6, 0.0).index(), Some(5));
        assert_eq!(sector_of(FRAC_PI_3 + 1e-13, 0.0), SectorLocation::Boundary);
        assert_eq!(
            sector_of_with_tol(FRAC_PI_3 + 1e-13, 0.0, 1e-14).index(),
            Some(1)
        );
    }

    #[test]
    fn sector_bounds_follow_the_angle_branch() {
        let s = sector_of(-0.2, 0.0).sector().unwrap();
        assert!(close(s.lo, -FRAC_PI_3, 1e-15) && s.hi.abs() < 1e-15);
        let s = sector_of(3.0, 0.1).sector().unwrap();
        assert!(s.lo < 3.0 && 3.0 < s.hi);
        assert_eq!(s.index, 2);
    }

    #[test]
    fn nonuniform_walls() {
        let g = SectorGeometry::from_walls(0.0, &[0.0, 1.0, 3.0]);
        assert_eq!(g.count(), 3);
        assert_eq!(g.locate(0.5, 1e-12).index(), Some(0));
        assert_eq!(g.locate(2.0, 1e-12).index(), Some(1));
        assert_eq!(g.locate(-0.5, 1e-12).index(), Some(2));
        assert_eq!(g.canonical().hi, 1.0);
    }

    #[test]
    fn asymptotic_angles() {
        assert!(close(
            incoming_angle(&[-1.0, 0.0, 1.0]).unwrap(),
            FRAC_PI_6,
            1e-15
        ));
        assert!(incoming_angle(&[-1.0, -1.0, 2.0]).unwrap().abs() < 1e-15);
        assert!(close(
            outgoing_angle(&[1.0, 0.0, -1.0]).unwrap(),
            FRAC_PI_6,
            1e-15
        ));
        assert_eq!(incoming_angle(&[0.0; 3]), Err(Error::NoRelativeMotion));
        assert!(matches!(
            incoming_angle(&[1.0, 0.0, 0.0]),
            Err(Error::NotCmFrame(_))
        ));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!(close(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, 1e-15));
    }

    #[test]
    fn ordering_diagnostic_near_lower_wall() {
        assert!(canonical_ordering_holds(&cartesian_from_polar(1.0, 0.1)));
    }
}
