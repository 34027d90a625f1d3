//! Tridiagonal linear algebra: storage, products, the Thomas solver, the
//! diagonal similarity that symmetrises a sign-consistent tridiagonal
//! matrix, Sturm-sequence bisection for symmetric tridiagonal spectra and
//! the principal-minor recurrence.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty matrix")]
    Empty,
    #[error("zero pivot at row {row} in tridiagonal elimination")]
    ZeroPivot { row: usize },
    #[error("off-diagonal product a[{row},{}] * a[{},{row}] = {product} is not positive", .row + 1, .row + 1)]
    OffDiagonalSign { row: usize, product: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Square tridiagonal matrix stored by diagonals.
///
/// Row `p` holds `sub[p-1]`, `diag[p]`, `sup[p]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriDiag {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TriDiag {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        for len in [sub.len(), sup.len()] {
            if len != n - 1 {
                return Err(LinalgError::DimensionMismatch {
                    expected: n - 1,
                    found: len,
                });
            }
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "tridiagonal matrix must be non-empty");
        Self {
            sub: vec![0.0; n - 1],
            diag: vec![0.0; n],
            sup: vec![0.0; n - 1],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n);
        t.diag.fill(1.0);
        t
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub(crate) fn sub_mut(&mut self) -> &mut [f64] {
        &mut self.sub
    }

    pub(crate) fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub(crate) fn sup_mut(&mut self) -> &mut [f64] {
        &mut self.sup
    }

    /// Entry `(row, col)`; zero outside the band.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diag[row]
        } else if col + 1 == row {
            self.sub[col]
        } else if row + 1 == col {
            self.sup[row]
        } else {
            0.0
        }
    }

    /// `(a[p,p-1], a[p,p], a[p,p+1])`, with zeros past the ends.
    pub fn row(&self, p: usize) -> (f64, f64, f64) {
        let lower = if p > 0 { self.sub[p - 1] } else { 0.0 };
        let upper = if p + 1 < self.len() { self.sup[p] } else { 0.0 };
        (lower, self.diag[p], upper)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.len();
        for len in [v.len(), out.len()] {
            if len != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if n == 1 {
            out[0] = self.diag[0] * v[0];
            return Ok(());
        }
        out[0] = self.diag[0] * v[0] + self.sup[0] * v[1];
        for p in 1..n - 1 {
            out[p] = self.sub[p - 1] * v[p - 1] + self.diag[p] * v[p] + self.sup[p] * v[p + 1];
        }
        out[n - 1] = self.sub[n - 2] * v[n - 2] + self.diag[n - 1] * v[n - 1];
        Ok(())
    }

    /// `alpha I + beta T`.
    pub fn shifted(&self, alpha: f64, beta: f64) -> TriDiag {
        TriDiag {
            sub: self.sub.iter().map(|x| beta * x).collect(),
            diag: self.diag.iter().map(|x| alpha + beta * x).collect(),
            sup: self.sup.iter().map(|x| beta * x).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> TriDiag {
        self.shifted(0.0, s)
    }
}

/// Solve `T x = rhs` by the Thomas algorithm (no pivoting).
pub fn thomas_solve(t: &TriDiag, rhs: &[f64]) -> Result<Vec<f64>> {
    let factor = ThomasFactor::new(t)?;
    let mut x = rhs.to_vec();
    factor.solve_in_place(&mut x)?;
    Ok(x)
}

/// LU factors of a tridiagonal matrix for repeated solves with the same
/// operator.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    sub: Vec<f64>,
    /// Modified super-diagonal `c'_p`.
    upper: Vec<f64>,
    /// Reciprocals of the elimination pivots.
    inv_pivot: Vec<f64>,
}

impl ThomasFactor {
    pub fn new(t: &TriDiag) -> Result<Self> {
        let n = t.len();
        let mut upper = vec![0.0; n.saturating_sub(1)];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = t.diag[0];
        for p in 0..n {
            if p > 0 {
                pivot = t.diag[p] - t.sub[p - 1] * upper[p - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(LinalgError::ZeroPivot { row: p });
            }
            inv_pivot[p] = 1.0 / pivot;
            if p + 1 < n {
                upper[p] = t.sup[p] * inv_pivot[p];
            }
        }
        Ok(Self {
            sub: t.sub.clone(),
            upper,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrite `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.len();
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        x[0] *= self.inv_pivot[0];
        for p in 1..n {
            x[p] = (x[p] - self.sub[p - 1] * x[p - 1]) * self.inv_pivot[p];
        }
        for p in (0..n - 1).rev() {
            x[p] -= self.upper[p] * x[p + 1];
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix: main diagonal and the shared off-diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymTriDiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTriDiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(LinalgError::Empty);
        }
        if off.len() + 1 != diag.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: diag.len() - 1,
                found: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_tridiag(&self) -> TriDiag {
        TriDiag {
            sub: self.off.clone(),
            diag: self.diag.clone(),
            sup: self.off.clone(),
        }
    }

    pub fn negated(&self) -> SymTriDiag {
        SymTriDiag {
            diag: self.diag.iter().map(|x| -x).collect(),
            off: self.off.iter().map(|x| -x).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Interval `[lo, hi]` containing the whole spectrum.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in 0..n {
            let mut r = 0.0;
            if p > 0 {
                r += self.off[p - 1].abs();
            }
            if p + 1 < n {
                r += self.off[p].abs();
            }
            lo = lo.min(self.diag[p] - r);
            hi = hi.max(self.diag[p] + r);
        }
        (lo, hi)
    }
}

/// `S = D A D⁻¹` together with the scaling `D = diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedPair {
    pub s: SymTriDiag,
    pub scaling: Vec<f64>,
}

/// Symmetrise a tridiagonal matrix whose off-diagonal pairs have positive
/// products.
///
/// With `d_1 = 1` and `d_{p+1} = d_p (a_{p,p+1} / a_{p+1,p})^{1/2}` the
/// similarity `D A D⁻¹` has equal off-diagonals
/// `sign(a_{p,p+1}) (a_{p,p+1} a_{p+1,p})^{1/2}`.
pub fn symmetrize(a: &TriDiag) -> Result<SymmetrizedPair> {
    let n = a.len();
    let mut scaling = vec![1.0; n];
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for p in 0..n.saturating_sub(1) {
        let upper = a.sup[p];
        let lower = a.sub[p];
        let product = upper * lower;
        if !(product > 0.0) || !product.is_finite() {
            return Err(LinalgError::OffDiagonalSign { row: p, product });
        }
        scaling[p + 1] = scaling[p] * (upper / lower).sqrt();
        off.push(upper.signum() * product.sqrt());
    }
    Ok(SymmetrizedPair {
        s: SymTriDiag {
            diag: a.diag.clone(),
            off,
        },
        scaling,
    })
}

/// Number of eigenvalues of `s` strictly below `x` (Sturm sequence count via
/// the signs of the `LDLᵀ` pivots of `s - x I`).
pub fn sturm_count(s: &SymTriDiag, x: f64) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt() * (1.0 + s.max_abs());
    let mut count = 0;
    let mut q = s.diag[0] - x;
    for p in 0..s.len() {
        if p > 0 {
            let e = s.off[p - 1];
            q = (s.diag[p] - x) - e * e / q;
        }
        if q.abs() < guard {
            q = -guard;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix in ascending order,
/// computed by bisection on Sturm counts.
pub fn eigenvalues(s: &SymTriDiag) -> Vec<f64> {
    let n = s.len();
    let (glo, ghi) = s.gershgorin_interval();
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let tol = 4.0 * f64::EPSILON * scale;
    let lo0 = glo - tol;
    let hi0 = ghi + tol;

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Eigenvalue k is the smallest x with count(x) > k.
        let mut lo = out.last().map_or(lo0, |&prev: &f64| prev.max(lo0) - tol);
        let mut hi = hi0;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if sturm_count(s, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// A determinant stored as `sign · exp(log_abs)` so that leading minors of
/// large, finely meshed operators do not overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledDeterminant {
    /// `-1`, `0` or `1`.
    pub sign: i8,
    pub log_abs: f64,
}

impl ScaledDeterminant {
    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// Plain value; may overflow to ±∞.
    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }
}

/// Leading principal minors `det(S_k)`, `k = 1..N`, from the three-term
/// recurrence `det(S_k) = d_k det(S_{k-1}) − e_k² det(S_{k-2})`.
pub fn principal_minors(s: &SymTriDiag) -> Vec<ScaledDeterminant> {
    const BIG: f64 = 1e150;
    const SMALL: f64 = 1e-150;

    let n = s.len();
    let mut out = Vec::with_capacity(n);
    // Running pair (det_{k-2}, det_{k-1}) sharing the factor exp(log_scale).
    let mut prev2 = 0.0;
    let mut prev1 = 1.0;
    let mut log_scale = 0.0_f64;
    for k in 0..n {
        let e2 = if k > 0 { s.off[k - 1] * s.off[k - 1] } else { 0.0 };
        let cur = s.diag[k] * prev1 - e2 * prev2;
        prev2 = prev1;
        prev1 = cur;

        let m = prev1.abs().max(prev2.abs());
        if m > BIG || (m < SMALL && m > 0.0) {
            let f = m.ln();
            prev1 /= m;
            prev2 /= m;
            log_scale += f;
        }
        out.push(if prev1 == 0.0 {
            ScaledDeterminant {
                sign: 0,
                log_abs: f64::NEG_INFINITY,
            }
        } else {
            ScaledDeterminant {
                sign: if prev1 > 0.0 { 1 } else { -1 },
                log_abs: prev1.abs().ln() + log_scale,
            }
        });
    }
    out
}
