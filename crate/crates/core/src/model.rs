//! Problem representation, energy evaluation and error metrics shared by every solver.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::costs::ActivationSpec;
use crate::error::{Error, Result};

/// Tolerance on column norms accepted as "unit" by [`gram_minus_identity`].
pub const UNIT_COLUMN_TOL: f64 = 1e-10;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
                context: "matrix entries",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        DenseMatrix::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T y`
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o += v * yi;
            }
        }
        out
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Largest eigenvalue of `A^T A` by power iteration from the all-ones vector.
    pub fn gram_spectral_norm(&self, max_iters: usize, tol: f64) -> f64 {
        let mut v = vec![1.0 / (self.cols as f64).sqrt(); self.cols];
        let mut estimate = 0.0;
        for _ in 0..max_iters {
            let w = self.matvec_t(&self.matvec(&v));
            let norm = norm2(&w);
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm;
            v = w.into_iter().map(|x| x / norm).collect();
            let done = (next - estimate).abs() <= tol * next;
            estimate = next;
            if done {
                break;
            }
        }
        estimate
    }

    fn scale_columns(&mut self, scales: &[f64]) {
        for i in 0..self.rows {
            let start = i * self.cols;
            for (v, &s) in self.data[start..start + self.cols].iter_mut().zip(scales) {
                *v /= s;
            }
        }
    }
}

/// `Φᵀ Φ − I` for a matrix with unit-norm columns; the result is exactly symmetric.
pub fn gram_minus_identity(phi: &DenseMatrix) -> Result<DenseMatrix> {
    if let Some((j, norm)) = phi
        .column_norms()
        .into_iter()
        .enumerate()
        .find(|(_, norm)| (norm - 1.0).abs() > UNIT_COLUMN_TOL)
    {
        return Err(Error::InvalidParameter(format!(
            "column {j} has norm {norm}, expected unit norm"
        )));
    }
    let n = phi.cols;
    let mut g = vec![0.0; n * n];
    for i in 0..phi.rows {
        let row = phi.row(i);
        for (j, &rj) in row.iter().enumerate() {
            if rj == 0.0 {
                continue;
            }
            let gj = &mut g[j * n..(j + 1) * n];
            for k in j..n {
                gj[k] += rj * row[k];
            }
        }
    }
    for j in 0..n {
        g[j * n + j] = 0.0;
        for k in j + 1..n {
            g[k * n + j] = g[j * n + k];
        }
    }
    Ok(DenseMatrix {
        rows: n,
        cols: n,
        data: g,
    })
}

/// The observation model `y = Φ a₀ + noise` with tradeoff `λ`.
///
/// Columns of `Φ` are normalized on construction. The applied scale factors are kept in
/// [`MeasurementProblem::column_scales`], and a supplied ground truth is rescaled so that
/// it stays expressed in the coordinates of the normalized dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProblem {
    phi: DenseMatrix,
    y: Vec<f64>,
    lambda: f64,
    groups: Option<Vec<Vec<usize>>>,
    truth: Option<Vec<f64>>,
    column_scales: Vec<f64>,
}

impl MeasurementProblem {
    pub fn new(
        mut phi: DenseMatrix,
        y: Vec<f64>,
        lambda: f64,
        groups: Option<Vec<Vec<usize>>>,
        truth: Option<Vec<f64>>,
    ) -> Result<Self> {
        if y.len() != phi.rows {
            return Err(Error::DimensionMismatch {
                expected: phi.rows,
                got: y.len(),
                context: "measurement vector",
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("measurements must be finite".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let n = phi.cols;
        if let Some(groups) = &groups {
            validate_partition(groups, n)?;
        }
        // Columns already at unit norm to within rounding are left bit-exact, so that
        // reloading a saved problem is idempotent.
        let scales: Vec<f64> = phi
            .column_norms()
            .into_iter()
            .map(|s| if (s - 1.0).abs() <= 1e-13 { 1.0 } else { s })
            .collect();
        if let Some(j) = scales.iter().position(|&s| s == 0.0) {
            return Err(Error::Domain(format!("column {j} is identically zero")));
        }
        phi.scale_columns(&scales);
        let truth = match truth {
            Some(t) if t.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.len(),
                    context: "ground truth",
                })
            }
            Some(t) => Some(t.iter().zip(&scales).map(|(a, s)| a * s).collect()),
            None => None,
        };
        Ok(MeasurementProblem {
            phi,
            y,
            lambda,
            groups,
            truth,
            column_scales: scales,
        })
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn groups(&self) -> Option<&[Vec<usize>]> {
        self.groups.as_deref()
    }

    pub fn truth(&self) -> Option<&[f64]> {
        self.truth.as_deref()
    }

    /// Column norms of the matrix as supplied, before normalization.
    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    /// Number of measurements M.
    pub fn m(&self) -> usize {
        self.phi.rows
    }

    /// Number of coefficients N.
    pub fn n(&self) -> usize {
        self.phi.cols
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(MeasurementProblem {
            lambda,
            ..self.clone()
        })
    }

    pub fn with_groups(&self, groups: Vec<Vec<usize>>) -> Result<Self> {
        validate_partition(&groups, self.n())?;
        Ok(MeasurementProblem {
            groups: Some(groups),
            ..self.clone()
        })
    }

    /// `Φᵀ y`, the constant drive of every node.
    pub fn drive(&self) -> Vec<f64> {
        self.phi.matvec_t(&self.y)
    }

    /// The nonnegative extended problem `[Φ, −Φ]` used by the log-barrier family.
    pub fn split(&self) -> Result<Self> {
        let (m, n) = (self.m(), self.n());
        let mut data = Vec::with_capacity(m * 2 * n);
        for i in 0..m {
            let row = self.phi.row(i);
            data.extend_from_slice(row);
            data.extend(row.iter().map(|v| -v));
        }
        let truth = self.truth.as_ref().map(|t| {
            let mut ext: Vec<f64> = t.iter().map(|v| v.max(0.0)).collect();
            ext.extend(t.iter().map(|v| (-v).max(0.0)));
            ext
        });
        MeasurementProblem::new(
            DenseMatrix::new(m, 2 * n, data)?,
            self.y.clone(),
            self.lambda,
            None,
            truth,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ProblemFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ProblemFile>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn validate_partition(groups: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidParameter("empty group".into()));
        }
        for &i in g {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "group index {i} out of range for n = {n}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!(
                    "index {i} appears in more than one group"
                )));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParameter(format!(
            "groups do not cover index {i}"
        )));
    }
    Ok(())
}

/// On-disk problem schema. `phi` is row-major; group indices are 0-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    pub phi: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
}

impl From<&MeasurementProblem> for ProblemFile {
    fn from(p: &MeasurementProblem) -> Self {
        ProblemFile {
            m: p.m(),
            n: p.n(),
            phi: p.phi.data.clone(),
            y: p.y.clone(),
            lambda: p.lambda,
            groups: p.groups.clone(),
            truth: p.truth.clone(),
        }
    }
}

impl TryFrom<ProblemFile> for MeasurementProblem {
    type Error = Error;

    fn try_from(f: ProblemFile) -> Result<Self> {
        MeasurementProblem::new(
            DenseMatrix::new(f.m, f.n, f.phi)?,
            f.y,
            f.lambda,
            f.groups,
            f.truth,
        )
    }
}

/// One sample of a solver trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Simulated time in units of τ for the LCA, iteration index for baselines.
    pub t_over_tau: f64,
    pub energy: f64,
    /// `‖a(t) − a₀‖₂ / ‖a₀‖₂` when the ground truth is known.
    pub rel_err: Option<f64>,
    /// Relative duality gap, for families that have one.
    pub gap: Option<f64>,
    pub lambda_now: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub a: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub wallclock: f64,
    /// Simulated time in units of τ (zero for digital baselines).
    pub simulated_time: f64,
    /// Iterations or Euler steps taken.
    pub steps: usize,
    /// Per-node thresholds at termination, for solvers that adapt them.
    pub weights: Option<Vec<f64>>,
}

/// `½‖y − Φa‖² + λ C(a)` with `λ` and `C` taken from `spec`.
pub fn energy(problem: &MeasurementProblem, spec: &ActivationSpec, a: &[f64]) -> Result<f64> {
    let data = data_term(problem, a)?;
    let cost = spec.cost_value(a)?;
    let e = data + spec.lambda() * cost;
    if !e.is_finite() {
        return Err(Error::Domain("energy is not finite".into()));
    }
    Ok(e)
}

/// `½‖y − Φa‖²`
pub fn data_term(problem: &MeasurementProblem, a: &[f64]) -> Result<f64> {
    check_len(a, problem.n(), "coefficient vector")?;
    let r = residual(problem, a);
    Ok(0.5 * dot(&r, &r))
}

/// `y − Φa`
pub fn residual(problem: &MeasurementProblem, a: &[f64]) -> Vec<f64> {
    let mut r = problem.phi.matvec(a);
    for (ri, yi) in r.iter_mut().zip(&problem.y) {
        *ri = yi - *ri;
    }
    r
}

/// `‖est − truth‖² / ‖truth‖²`
pub fn rel_mse(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(est, truth.len(), "estimate")?;
    let denom = dot(truth, truth);
    if denom == 0.0 {
        return Err(Error::Domain("reference vector is zero".into()));
    }
    let num: f64 = est.iter().zip(truth).map(|(e, t)| (e - t) * (e - t)).sum();
    Ok(num / denom)
}

/// `‖a_t − a_ref‖ / ‖a_ref‖`
pub fn rel_dist(a_t: &[f64], a_ref: &[f64]) -> Result<f64> {
    rel_mse(a_t, a_ref).map(f64::sqrt)
}

pub(crate) fn check_len(v: &[f64], expected: usize, context: &'static str) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
            context,
        });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
