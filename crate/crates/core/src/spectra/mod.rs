//! Finite-difference quantum spectra.
//!
//! The angular operator `-hbar^2/2m d^2/dphi^2 + W(phi)` is discretized on one
//! sector with Dirichlet walls; the harmonically confined problem is solved
//! on a Cartesian grid of the Jacobi plane restricted to one sector.

mod plane;
pub mod tridiag;

pub use plane::{
    confined_spectrum_2d, confined_spectrum_estimated, default_extent, isospectral_partners,
    isospectrality_report, oscillator_frequency, oscillator_length, IsospectralityReport,
    LevelDeviation, PlaneGrid,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{Family, PotentialSpec};
use tridiag::SymTridiagonal;

/// Smallest accepted number of interior angular nodes.
pub const MIN_ANGULAR_NODES: usize = 16;
/// Accepted relative residual `|Hv - Ev| / |Ev|` of a reported pair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Interior nodes `lo + j h`, `j = 1..=n`, of one angular sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularGrid {
    pub delta: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub h: f64,
}

impl AngularGrid {
    pub fn for_spec(spec: &PotentialSpec, n: usize) -> Result<Self> {
        if n < MIN_ANGULAR_NODES {
            return Err(Error::InvalidParameter(format!(
                "angular grid needs at least {MIN_ANGULAR_NODES} nodes, got {n}"
            )));
        }
        let sector = spec.canonical_sector();
        Ok(Self {
            delta: spec.effective_delta(),
            lo: sector.lo,
            hi: sector.hi,
            n,
            h: sector.width() / (n + 1) as f64,
        })
    }

    /// Angle of interior node `j` (0-based).
    pub fn node(&self, j: usize) -> f64 {
        self.lo + (j + 1) as f64 * self.h
    }

    /// Same sector with `2n` interior nodes.
    pub fn refined(&self) -> Self {
        let n = 2 * self.n;
        Self {
            n,
            h: (self.hi - self.lo) / (n + 1) as f64,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridInfo {
    Angular(AngularGrid),
    Confined(PlaneGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Ascending eigenvalues on the requested grid.
    pub eigenvalues: Vec<f64>,
    /// Mode index of each eigenvalue.
    pub l: Vec<usize>,
    /// Reflection parity of each eigenvector (family A angular problems).
    pub parities: Option<Vec<i8>>,
    /// `|Hv - Ev| / |Ev|` for each pair.
    pub residuals: Vec<f64>,
    /// Richardson extrapolation from `n` and `2n`.
    pub extrapolated: Option<Vec<f64>>,
    /// Estimated discretization error of `eigenvalues`.
    pub error_estimates: Option<Vec<f64>>,
    pub grid: GridInfo,
}

fn angular_matrix(spec: &PotentialSpec, grid: &AngularGrid) -> Result<SymTridiagonal> {
    let kin = spec.hbar * spec.hbar / (2.0 * spec.mass * grid.h * grid.h);
    let diag = (0..grid.n)
        .map(|j| {
            let phi = grid.node(j);
            match spec.angular_potential(phi) {
                Ok(w) if w.is_finite() => Ok(2.0 * kin + w),
                _ => Err(Error::InvalidParameter(format!(
                    "potential not finite at node {j} (phi = {phi})"
                ))),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    SymTridiagonal::new(diag, vec![-kin; grid.n - 1])
}

fn check_request(spec: &PotentialSpec, grid: &AngularGrid, k: usize) -> Result<()> {
    spec.validate_quantum()?;
    if k == 0 || k > grid.n {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenvalues on a grid of {} nodes",
            grid.n
        )));
    }
    Ok(())
}

/// Lowest `k` angular eigenvalues without vectors or estimates.
pub fn angular_eigenvalues(spec: &PotentialSpec, grid: &AngularGrid, k: usize) -> Result<Vec<f64>> {
    check_request(spec, grid, k)?;
    angular_matrix(spec, grid)?.lowest_eigenvalues(k)
}

/// Lowest `k` eigenpairs of the angular operator with parities and
/// Richardson estimates from the grid and its refinement.
pub fn angular_spectrum(
    spec: &PotentialSpec,
    grid: &AngularGrid,
    k: usize,
) -> Result<SpectrumResult> {
    check_request(spec, grid, k)?;
    let t = angular_matrix(spec, grid)?;
    let (values, vectors) = t.lowest_eigenpairs(k)?;
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Eigensolver(
            "angular eigenvalues not strictly increasing".into(),
        ));
    }
    let mut residuals = Vec::with_capacity(k);
    for (l, (lambda, v)) in values.iter().zip(&vectors).enumerate() {
        let r = t
            .apply(v)
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / lambda.abs().max(f64::MIN_POSITIVE);
        if !(r <= RESIDUAL_TOLERANCE) {
            return Err(Error::Eigensolver(format!(
                "mode {l}: relative residual {r:e}"
            )));
        }
        residuals.push(r);
    }
    let parities = (spec.family != Family::FamilyB).then(|| {
        vectors
            .iter()
            .map(|v| {
                let overlap: f64 = v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum();
                if overlap >= 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    });

    let fine_grid = grid.refined();
    let fine = angular_matrix(spec, &fine_grid)?.lowest_eigenvalues(k)?;
    let ratio2 = (grid.h / fine_grid.h).powi(2);
    let extrapolated: Vec<f64> = values
        .iter()
        .zip(&fine)
        .map(|(c, f)| f + (f - c) / (ratio2 - 1.0))
        .collect();
    let error_estimates = values
        .iter()
        .zip(&extrapolated)
        .map(|(c, e)| (c - e).abs())
        .collect();

    Ok(SpectrumResult {
        eigenvalues: values,
        l: (0..k).collect(),
        parities,
        residuals,
        extrapolated: Some(extrapolated),
        error_estimates: Some(error_estimates),
        grid: GridInfo::Angular(*grid),
    })
}

/// Continuum angular eigenvalue `b_l` from the Poschl-Teller form of the
/// sector problem; the hard-wall limit `g = 0` is included.
pub fn angular_exact(spec: &PotentialSpec, l: usize) -> Result<f64> {
    spec.validate_quantum()?;
    let (m, hbar) = (spec.mass, spec.hbar);
    let index = |c: f64| 0.5 * (1.0 + (1.0 + 4.0 * m * c / (hbar * hbar)).sqrt());
    let unit = 9.0 * hbar * hbar / (2.0 * m);
    let kappa = index(spec.g);
    let arg = match spec.family {
        Family::FamilyB => kappa + index(spec.f) + 2.0 * l as f64,
        _ => kappa + l as f64,
    };
    if spec.family == Family::FamilyB && spec.variant != crate::FamilyBVariant::PolarConsistent {
        return Err(Error::NoPrediction(
            "no closed form for the as-printed variant".into(),
        ));
    }
    Ok(unit * arg * arg)
}

/// Lowest `k` levels of the radial oscillator
/// `-(hbar^2/2m)(u'' - (nu^2 - 1/4) u / r^2) + m Omega^2 r^2 u / 2`
/// on `(0, r_max)` with `n` interior nodes and Dirichlet ends.
pub fn radial_spectrum(
    nu: f64,
    mass: f64,
    hbar: f64,
    frequency: f64,
    r_max: f64,
    n: usize,
    k: usize,
) -> Result<Vec<f64>> {
    if !(nu >= 0.5 && mass > 0.0 && hbar > 0.0 && frequency > 0.0 && r_max > 0.0) {
        return Err(Error::InvalidParameter(
            "radial problem parameters out of range".into(),
        ));
    }
    if n < MIN_ANGULAR_NODES || k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "radial grid n = {n}, k = {k}"
        )));
    }
    let h = r_max / (n + 1) as f64;
    let kin = hbar * hbar / (2.0 * mass * h * h);
    let centrifugal = hbar * hbar * (nu * nu - 0.25) / (2.0 * mass);
    let diag = (1..=n)
        .map(|j| {
            let r = j as f64 * h;
            2.0 * kin + centrifugal / (r * r) + 0.5 * mass * frequency * frequency * r * r
        })
        .collect();
    SymTridiagonal::new(diag, vec![-kin; n - 1])?.lowest_eigenvalues(k)
}
