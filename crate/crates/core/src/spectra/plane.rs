//! Harmonically confined problem on a Cartesian grid of the Jacobi plane.
//!
//! Unknowns are the grid nodes strictly inside one sector of the box
//! `[-L, L]^2`; every other node carries zero data. The sector is selected by
//! the signs of the wall linear forms and the potential is evaluated from
//! particle positions, so the solver never uses the polar reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_3;

use super::tridiag::{dot, normalize, Eigenpairs, SymTridiagonal};
use super::{GridInfo, SpectrumResult, RESIDUAL_TOLERANCE};
use crate::coords::{cartesian_from_polar, positions_from_jacobi};
use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, SINGULAR_THRESHOLD};

/// Fraction of the half-width beyond which eigenvector mass counts as leakage.
const EDGE_BAND: f64 = 0.9;
const LEAKAGE_LIMIT: f64 = 1e-8;
const MAX_KRYLOV: usize = 400;
const START_SEED: u64 = 0x5eed_1a2c;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneGrid {
    /// Interior nodes per axis.
    pub n: usize,
    /// Half-width `L` of the box `[-L, L]^2`.
    pub extent: f64,
    pub h: f64,
    /// Nodes inside the sector (the matrix dimension).
    pub nodes: usize,
    pub bandwidth: usize,
}

/// `Omega = omega sqrt(6/m)`: frequency of the hyperradial oscillator.
pub fn oscillator_frequency(spec: &PotentialSpec) -> f64 {
    spec.omega * (6.0 / spec.mass).sqrt()
}

pub fn oscillator_length(spec: &PotentialSpec) -> f64 {
    (spec.hbar / (spec.mass * oscillator_frequency(spec))).sqrt()
}

/// Half-width used when none is given: eight oscillator lengths.
pub fn default_extent(spec: &PotentialSpec) -> f64 {
    8.0 * oscillator_length(spec)
}

struct SectorMatrix {
    grid: PlaneGrid,
    /// Per node: diagonal entry of `H`.
    diag: Vec<f64>,
    /// Per node: indices of the in-sector neighbours.
    neighbours: Vec<Vec<usize>>,
    coupling: f64,
    /// Per node: in the edge band.
    edge: Vec<bool>,
    min_potential: f64,
}

impl SectorMatrix {
    fn assemble(spec: &PotentialSpec, n: usize, extent: f64) -> Result<Self> {
        let h = 2.0 * extent / (n + 1) as f64;
        let interaction = spec.interaction();
        let forms: Vec<[f64; 3]> = interaction.wall_forms().collect();
        let reference = cartesian_from_polar(1.0, spec.canonical_sector().mid());
        let signs: Vec<bool> = forms
            .iter()
            .map(|c| c[0] * reference[0] + c[1] * reference[1] + c[2] * reference[2] > 0.0)
            .collect();

        let coord = |i: usize| -extent + (i + 1) as f64 * h;
        let mut index = vec![usize::MAX; n * n];
        let mut diag = Vec::new();
        let mut edge = Vec::new();
        let kin = spec.hbar * spec.hbar / (2.0 * spec.mass * h * h);
        let mut min_potential = f64::INFINITY;
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = (coord(ix), coord(iy));
                let pos = positions_from_jacobi(0.0, x, y);
                let radius = x.hypot(y);
                let inside = forms.iter().zip(&signs).all(|(c, &positive)| {
                    let u = c[0] * pos[0] + c[1] * pos[1] + c[2] * pos[2];
                    u.abs() >= SINGULAR_THRESHOLD * radius && (u > 0.0) == positive
                });
                if !inside {
                    continue;
                }
                let v = interaction.energy(&pos)?;
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "potential not finite at ({x}, {y})"
                    )));
                }
                min_potential = min_potential.min(v);
                index[iy * n + ix] = diag.len();
                diag.push(4.0 * kin + v);
                edge.push(x.abs() > EDGE_BAND * extent || y.abs() > EDGE_BAND * extent);
            }
        }
        if diag.is_empty() {
            return Err(Error::InvalidParameter(
                "no grid nodes inside the sector".into(),
            ));
        }
        let mut neighbours = vec![Vec::with_capacity(4); diag.len()];
        let mut bandwidth = 0;
        for iy in 0..n {
            for ix in 0..n {
                let p = index[iy * n + ix];
                if p == usize::MAX {
                    continue;
                }
                let around = [
                    (ix > 0).then(|| iy * n + ix - 1),
                    (ix + 1 < n).then(|| iy * n + ix + 1),
                    (iy > 0).then(|| (iy - 1) * n + ix),
                    (iy + 1 < n).then(|| (iy + 1) * n + ix),
                ];
                for q in around.into_iter().flatten().map(|q| index[q]) {
                    if q != usize::MAX {
                        neighbours[p].push(q);
                        if q < p {
                            bandwidth = bandwidth.max(p - q);
                        }
                    }
                }
            }
        }
        Ok(Self {
            grid: PlaneGrid {
                n,
                extent,
                h,
                nodes: diag.len(),
                bandwidth,
            },
            diag,
            neighbours,
            coupling: -kin,
            edge,
            min_potential,
        })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|p| {
                self.diag[p] * v[p]
                    + self.coupling * self.neighbours[p].iter().map(|&q| v[q]).sum::<f64>()
            })
            .collect()
    }
}

/// Cholesky factor of a symmetric positive definite band matrix, stored by
/// rows: entry `(i, j)`, `i - b <= j <= i`, sits at `i * (b + 1) + j + b - i`.
struct BandCholesky {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    fn factor(m: &SectorMatrix, shift: f64) -> Result<Self> {
        let n = m.diag.len();
        let b = m.grid.bandwidth;
        let w = b + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            data[i * w + b] = m.diag[i] - shift;
            for &j in &m.neighbours[i] {
                if j < i {
                    data[i * w + j + b - i] = m.coupling;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let k0 = lo.max(j.saturating_sub(b));
                let ri = &data[i * w + k0 + b - i..i * w + j + b - i];
                let rj = &data[j * w + k0 + b - j..j * w + b];
                let s = data[i * w + j + b - i] - dot(ri, rj);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Eigensolver(format!(
                            "shifted matrix not positive definite at row {i}"
                        )));
                    }
                    data[i * w + b] = s.sqrt();
                } else {
                    data[i * w + j + b - i] = s / data[j * w + b];
                }
            }
        }
        Ok(Self { n, b, data })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let row = &self.data[i * w + lo + b - i..i * w + b];
            y[i] = (y[i] - dot(row, &y[lo..i])) / self.data[i * w + b];
        }
        for i in (0..n).rev() {
            y[i] /= self.data[i * w + b];
            let lo = i.saturating_sub(b);
            let yi = y[i];
            for (j, l) in (lo..i).zip(&self.data[i * w + lo + b - i..i * w + b]) {
                y[j] -= l * yi;
            }
        }
        y
    }
}

/// Lowest `want` eigenpairs of `m` by shift-invert Lanczos with full
/// reorthogonalization.
fn lowest_pairs(m: &SectorMatrix, want: usize) -> Result<Eigenpairs> {
    let n = m.diag.len();
    if want > n {
        return Err(Error::InvalidParameter(format!(
            "requested {want} levels from {n} sector nodes"
        )));
    }
    let shift = if m.min_potential >= 0.0 {
        0.0
    } else {
        m.min_potential - 1.0
    };
    let chol = BandCholesky::factor(m, shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let random_vector = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    };

    let max_dim = MAX_KRYLOV.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_vector(&mut rng);
    normalize(&mut v);
    basis.push(v);

    loop {
        let j = basis.len() - 1;
        let mut w = chol.solve(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mut b = dot(&w, &w).sqrt();
        let dim = basis.len();

        let check =
            dim >= want + 2 && (dim.is_multiple_of(5) || dim == max_dim || b < 1e-14 * a.abs());
        if check {
            if let Some(found) = ritz_pairs(m, &basis, &alpha, &beta, b, shift, want)? {
                return Ok(found);
            }
        }
        if dim == max_dim {
            return Err(Error::Eigensolver(format!(
                "Lanczos did not converge within {max_dim} vectors"
            )));
        }
        if b < 1e-14 * a.abs().max(f64::MIN_POSITIVE) {
            // invariant subspace: continue from a fresh orthogonal direction
            w = random_vector(&mut rng);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            b = 0.0;
        }
        beta.push(b);
        if !normalize(&mut w) {
            return Err(Error::Eigensolver("Lanczos breakdown".into()));
        }
        basis.push(w);
    }
}

/// Ritz pairs for the `want` lowest levels if all have converged.
fn ritz_pairs(
    m: &SectorMatrix,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    last_beta: f64,
    shift: f64,
    want: usize,
) -> Result<Option<Eigenpairs>> {
    let dim = alpha.len();
    // largest eigenvalues of T are the lowest levels of H
    let negated = SymTridiagonal::new(
        alpha.iter().map(|a| -a).collect(),
        beta.iter().map(|b| -b).collect(),
    )?;
    let guard = (want + 1).min(dim);
    let (thetas, vecs) = negated.lowest_eigenpairs(guard)?;
    for (theta, s) in thetas.iter().zip(&vecs) {
        if (last_beta * s[dim - 1]).abs() > 1e-11 * theta.abs() {
            return Ok(None);
        }
    }
    let n = m.diag.len();
    let mut values = Vec::with_capacity(want);
    let mut vectors = Vec::with_capacity(want);
    for (theta, s) in thetas.iter().zip(&vecs).take(want) {
        let energy = shift + 1.0 / (-theta);
        let mut x = vec![0.0; n];
        for (c, q) in s.iter().zip(basis) {
            x.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
        }
        normalize(&mut x);
        let hx = m.apply(&x);
        let r = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - energy * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / energy.abs().max(f64::MIN_POSITIVE);
        if !(r <= RESIDUAL_TOLERANCE) {
            return Ok(None);
        }
        values.push(energy);
        vectors.push(x);
    }
    Ok(Some((values, vectors)))
}

/// Lowest `k` levels of `H = -(hbar^2/2m) Laplacian + V + 3 omega^2 r^2`
/// restricted to the canonical sector, on `n x n` interior nodes of
/// `[-extent, extent]^2`.
pub fn confined_spectrum_2d(
    spec: &PotentialSpec,
    n: usize,
    extent: f64,
    k: usize,
) -> Result<SpectrumResult> {
    spec.validate_quantum()?;
    if !(spec.omega > 0.0) {
        return Err(Error::InvalidParameter(
            "confined spectrum needs omega > 0".into(),
        ));
    }
    if !(extent > 0.0 && extent.is_finite()) || n < 8 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "plane grid n = {n}, extent = {extent}, k = {k}"
        )));
    }
    let m = SectorMatrix::assemble(spec, n, extent)?;
    let (values, vectors) = lowest_pairs(&m, k)?;
    let mut residuals = Vec::with_capacity(k);
    for (level, (e, v)) in values.iter().zip(&vectors).enumerate() {
        let mass: f64 = v
            .iter()
            .zip(&m.edge)
            .filter(|(_, &e)| e)
            .map(|(x, _)| x * x)
            .sum();
        if mass > LEAKAGE_LIMIT {
            return Err(Error::ExtentTooSmall { level, mass });
        }
        let hv = m.apply(v);
        residuals.push(
            hv.iter()
                .zip(v)
                .map(|(a, b)| (a - e * b).powi(2))
                .sum::<f64>()
                .sqrt()
                / e.abs(),
        );
    }
    Ok(SpectrumResult {
        eigenvalues: values,
        l: (0..k).collect(),
        parities: None,
        residuals,
        extrapolated: None,
        error_estimates: None,
        grid: GridInfo::Confined(m.grid),
    })
}

/// [`confined_spectrum_2d`] with extrapolation and error estimates taken from
/// a second solve on the grid with half as many nodes per axis.
pub fn confined_spectrum_estimated(
    spec: &PotentialSpec,
    n: usize,
    extent: f64,
    k: usize,
) -> Result<SpectrumResult> {
    let mut fine = confined_spectrum_2d(spec, n, extent, k)?;
    let coarse = confined_spectrum_2d(spec, n / 2, extent, k)?;
    let (GridInfo::Confined(gf), GridInfo::Confined(gc)) = (fine.grid, coarse.grid) else {
        unreachable!("confined solves report plane grids")
    };
    let factor = (gc.h / gf.h).powi(2) - 1.0;
    let extrapolated: Vec<f64> = fine
        .eigenvalues
        .iter()
        .zip(&coarse.eigenvalues)
        .map(|(f, c)| f + (f - c) / factor)
        .collect();
    fine.error_estimates = Some(
        fine.eigenvalues
            .iter()
            .zip(&extrapolated)
            .map(|(f, e)| (f - e).abs())
            .collect(),
    );
    fine.extrapolated = Some(extrapolated);
    Ok(fine)
}

/// The twelve angles `q pi/3 +- delta`, `q = 0..6`, sharing one spectrum.
pub fn isospectral_partners(delta: f64) -> Vec<f64> {
    (0..6)
        .flat_map(|q| {
            let base = q as f64 * FRAC_PI_3;
            [base + delta, base - delta]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDeviation {
    pub level: usize,
    pub n: usize,
    /// One eigenvalue per delta, in input order.
    pub values: Vec<f64>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsospectralityReport {
    pub deltas: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub extent: f64,
    /// Ordered by resolution, then level.
    pub rows: Vec<LevelDeviation>,
    /// Per level: deviation strictly decreasing along the resolutions.
    pub decreasing: Vec<bool>,
}

impl IsospectralityReport {
    /// Largest relative deviation at resolution `n`.
    pub fn max_rel_deviation(&self, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.max_rel_deviation)
            .reduce(f64::max)
    }
}

/// Confined spectra for every `delta` at every resolution, compared level by
/// level after sorting.
pub fn isospectrality_report(
    spec: &PotentialSpec,
    deltas: &[f64],
    resolutions: &[usize],
    extent: f64,
    k: usize,
) -> Result<IsospectralityReport> {
    if deltas.len() < 2 {
        return Err(Error::InvalidParameter("need at least two deltas".into()));
    }
    if resolutions.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one resolution".into(),
        ));
    }
    let jobs: Vec<(usize, f64)> = resolutions
        .iter()
        .flat_map(|&n| deltas.iter().map(move |&d| (n, d)))
        .collect();
    let spectra: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(n, delta)| {
            confined_spectrum_2d(&PotentialSpec { delta, ..*spec }, n, extent, k)
                .map(|s| s.eigenvalues)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (ri, &n) in resolutions.iter().enumerate() {
        let block = &spectra[ri * deltas.len()..(ri + 1) * deltas.len()];
        for level in 0..k {
            let values: Vec<f64> = block.iter().map(|s| s[level]).collect();
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            rows.push(LevelDeviation {
                level,
                n,
                max_abs_deviation: hi - lo,
                max_rel_deviation: (hi - lo) / lo.abs(),
                values,
            });
        }
    }
    let decreasing = (0..k)
        .map(|level| {
            let devs: Vec<f64> = rows
                .iter()
                .filter(|r| r.level == level)
                .map(|r| r.max_abs_deviation)
                .collect();
            devs.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0)
        })
        .collect();
    Ok(IsospectralityReport {
        deltas: deltas.to_vec(),
        resolutions: resolutions.to_vec(),
        extent,
        rows,
        decreasing,
    })
}
