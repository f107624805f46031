//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the vectors.

use crate::error::{Error, Result};

/// Eigenvalues with their unit eigenvectors.
pub type Eigenpairs = (Vec<f64>, Vec<Vec<f64>>);

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let scale = self.gershgorin_scale();
        let tiny = f64::MIN_POSITIVE.sqrt() * scale.max(1.0);
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / d
            };
            d = self.diag[i] - x - coupling;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin_scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Eigenvalue of rank `index` (0 = smallest) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue index {index} out of range for dimension {}",
                self.len()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|i| self.eigenvalue(i)).collect()
    }

    /// Unit eigenvector for the eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64, start: &[f64]) -> Vec<f64> {
        let n = self.len();
        let scale = self.gershgorin_scale().max(f64::MIN_POSITIVE);
        let shifted = SymTridiagonal {
            diag: self.diag.iter().map(|d| d - lambda).collect(),
            off: self.off.clone(),
        };
        let lu = PivotedLu::factor(&shifted, f64::EPSILON * scale);
        let mut v = start.to_vec();
        normalize(&mut v);
        for _ in 0..4 {
            v = lu.solve(&v);
            if !normalize(&mut v) {
                v = vec![1.0 / (n as f64).sqrt(); n];
            }
        }
        v
    }

    /// The `k` lowest eigenpairs, with vectors orthonormalized within
    /// clusters of nearly equal eigenvalues.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Eigenpairs> {
        let values = self.lowest_eigenvalues(k)?;
        let n = self.len();
        let scale = self.gershgorin_scale().max(f64::MIN_POSITIVE);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for (i, &lambda) in values.iter().enumerate() {
            // deterministic, non-symmetric start so that no mode is missed
            let start: Vec<f64> = (0..n)
                .map(|j| 1.0 + 0.5 * ((j as f64 + 1.0) * (0.618_034 + i as f64 * 0.1)).sin())
                .collect();
            let mut v = self.eigenvector(lambda, &start);
            for (j, w) in vectors.iter().enumerate() {
                if (values[j] - lambda).abs() <= 1e-8 * scale {
                    let c = dot(&v, w);
                    v.iter_mut().zip(w).for_each(|(a, b)| *a -= c * b);
                }
            }
            normalize(&mut v);
            vectors.push(v);
        }
        Ok((values, vectors))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// LU factorization of a tridiagonal matrix with partial pivoting; `U` gains
/// a second superdiagonal.
struct PivotedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn factor(t: &SymTridiagonal, tiny: f64) -> Self {
        let n = t.len();
        let mut u0 = t.diag.clone();
        let mut u1: Vec<f64> = t.off.iter().copied().chain([0.0]).collect();
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        let mut sub: Vec<f64> = t.off.clone();
        for i in 0..n.saturating_sub(1) {
            if sub[i].abs() > u0[i].abs() {
                // swap rows i and i + 1
                swapped[i] = true;
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = sub[i];
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                sub[i] = a0;
                u0[i + 1] = a1;
                u1[i + 1] = a2;
            }
            if u0[i] == 0.0 {
                u0[i] = tiny;
            }
            let l = sub[i] / u0[i];
            mult[i] = l;
            u0[i + 1] -= l * u1[i];
            u1[i + 1] -= l * u2[i];
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            if i + 1 < n {
                acc -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * x[i + 2];
            }
            x[i] = acc / self.u0[i];
        }
        x
    }
}
