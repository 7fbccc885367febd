//! Compatibility conditions between the two recurrences, the local
//! reconstruction of `(c, d)` from `(q, a, b)`, and the symmetrizability
//! predicate.
//!
//! Residuals at `(n, m)`:
//!
//! ```text
//! r1 = c_{n,m+1} - c_{n,m} - ((a+b)_{n+1,m} - (a+b)_{n,m+1}) / (c-d)_{n,m}
//! r2 = d_{n+1,m} - d_{n,m} - ((a+b)_{n+1,m} - (a+b)_{n,m+1}) / (c-d)_{n,m}
//! r3 = a_{n,m+1} (c-d)_{n-1,m} - a_{n,m} (c-d)_{n,m}
//! r4 = b_{n+1,m} (c-d)_{n,m-1} - b_{n,m} (c-d)_{n,m}
//! ```
//!
//! All residuals are absolute.

use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::linalg::{Lu, Matrix};
use crate::par::Exec;
use crate::recurrence::CoeffField;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub window: Window,
    pub residual_31: Grid<Option<f64>>,
    pub residual_32: Grid<Option<f64>>,
    pub residual_33: Grid<Option<f64>>,
    pub residual_34: Grid<Option<f64>>,
    /// `a_{n,m+1}/a_{n,m} - (c-d)_{n,m}/(c-d)_{n-1,m}` where both ratios exist.
    pub ratio_33: Grid<Option<f64>>,
    /// `b_{n+1,m}/b_{n,m} - (c-d)_{n,m}/(c-d)_{n,m-1}` where both ratios exist.
    pub ratio_34: Grid<Option<f64>>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CurvatureReport {
    /// Maxima of `residual_31`, `residual_32`, `residual_33`, `residual_34`, in that order.
    pub fn maxima(&self) -> [f64; 4] {
        let max = |g: &Grid<Option<f64>>| g.values().flatten().fold(0.0f64, |acc, &v| nan_max(acc, v.abs()));
        [
            max(&self.residual_31),
            max(&self.residual_32),
            max(&self.residual_33),
            max(&self.residual_34),
        ]
    }
}

fn nan_max(x: f64, y: f64) -> f64 {
    if x.is_nan() || y.is_nan() {
        f64::NAN
    } else {
        x.max(y)
    }
}

fn cmd<T: Real>(f: &CoeffField<T>, n: usize, m: usize) -> T {
    f.c()[(n, m)] - f.d()[(n, m)]
}

fn ab<T: Real>(f: &CoeffField<T>, n: usize, m: usize) -> T {
    f.a()[(n, m)] + f.b()[(n, m)]
}

/// Evaluates all four residual families on the squares `n < N`, `m < M`
/// of the field window, the same sites the zero-curvature identity covers.
pub fn check_curvature<T: Real>(field: &CoeffField<T>, tolerance: f64) -> Result<CurvatureReport> {
    let w = field.window();
    if w.n < 2 || w.m < 2 {
        return Err(Error::Shape(format!(
            "curvature check needs a window of at least (2, 2), got {w:?}"
        )));
    }
    let degenerate: Vec<(usize, usize)> = Window::new(w.n - 1, w.m - 1)
        .indices()
        .into_iter()
        .filter(|&(n, m)| !(cmd(field, n, m).abs().to_f64() >= tolerance))
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateDenominator { indices: degenerate });
    }

    let ratio = |n: usize, m: usize| (ab(field, n + 1, m) - ab(field, n, m + 1)) / cmd(field, n, m);
    let residual_31 = Grid::from_fn(w, |n, m| {
        (n < w.n && m < w.m).then(|| {
            let c = field.c();
            (c[(n, m + 1)] - c[(n, m)] - ratio(n, m)).to_f64()
        })
    });
    let residual_32 = Grid::from_fn(w, |n, m| {
        (n < w.n && m < w.m).then(|| {
            let d = field.d();
            (d[(n + 1, m)] - d[(n, m)] - ratio(n, m)).to_f64()
        })
    });
    let a = field.a();
    let b = field.b();
    let residual_33 = Grid::from_fn(w, |n, m| {
        (n >= 1 && n < w.n && m < w.m)
            .then(|| (a[(n, m + 1)] * cmd(field, n - 1, m) - a[(n, m)] * cmd(field, n, m)).to_f64())
    });
    let residual_34 = Grid::from_fn(w, |n, m| {
        (m >= 1 && m < w.m && n < w.n)
            .then(|| (b[(n + 1, m)] * cmd(field, n, m - 1) - b[(n, m)] * cmd(field, n, m)).to_f64())
    });
    let ratio_33 = Grid::from_fn(w, |n, m| {
        let ok = n >= 1 && n < w.n && m < w.m && a[(n, m)] != T::zero() && cmd(field, n - 1, m) != T::zero();
        ok.then(|| (a[(n, m + 1)] / a[(n, m)] - cmd(field, n, m) / cmd(field, n - 1, m)).to_f64())
    });
    let ratio_34 = Grid::from_fn(w, |n, m| {
        let ok = m >= 1 && m < w.m && n < w.n && b[(n, m)] != T::zero() && cmd(field, n, m - 1) != T::zero();
        ok.then(|| (b[(n + 1, m)] / b[(n, m)] - cmd(field, n, m) / cmd(field, n, m - 1)).to_f64())
    });

    let mut report = CurvatureReport {
        window: w,
        residual_31,
        residual_32,
        residual_33,
        residual_34,
        ratio_33,
        ratio_34,
        max_residual: 0.0,
        tolerance,
        pass: false,
    };
    // NaN propagates into a failing verdict.
    report.max_residual = report.maxima().into_iter().fold(0.0, nan_max);
    report.pass = report.max_residual <= tolerance;
    Ok(report)
}

/// `D_{n,m} = 8 - 4 (a_{n+1,m+1}/a_{n+1,m} + b_{n+1,m+1}/b_{n,m+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyField {
    pub window: Window,
    /// `None` where an index leaves the window or a ratio is undefined.
    pub dvals: Grid<Option<f64>>,
    /// `false` wherever `D` is undefined or `|D| <= tolerance`.
    pub nondegenerate: Grid<bool>,
    pub tolerance: f64,
}

impl DegeneracyField {
    pub fn defined(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.dvals.iter().filter_map(|(idx, v)| v.map(|v| (idx, v)))
    }

    /// `true` when `D` is defined and nonzero at every cell.
    pub fn all_nondegenerate(&self) -> bool {
        self.defined().count() > 0 && self.defined().all(|((n, m), _)| self.nondegenerate[(n, m)])
    }

    /// `true` when no defined cell is nondegenerate.
    pub fn all_degenerate(&self) -> bool {
        self.defined().all(|((n, m), _)| !self.nondegenerate[(n, m)])
    }
}

pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-10;

fn d_value<T: Real>(a: &Grid<T>, b: &Grid<T>, n: usize, m: usize) -> Option<T> {
    let den_a = a[(n + 1, m)];
    let den_b = b[(n, m + 1)];
    if den_a == T::zero() || den_b == T::zero() {
        return None;
    }
    let s = a[(n + 1, m + 1)] / den_a + b[(n + 1, m + 1)] / den_b;
    Some(T::from_f64(8.0) - T::from_f64(4.0) * s)
}

pub fn degeneracy_scan<T: Real>(field: &CoeffField<T>, tolerance: f64) -> DegeneracyField {
    let w = field.window();
    let dvals = Grid::from_fn(w, |n, m| {
        if n < w.n && m < w.m {
            d_value(field.a(), field.b(), n, m).map(Real::to_f64)
        } else {
            None
        }
    });
    let nondegenerate = dvals.map(|v| v.is_some_and(|d| d.abs() > tolerance));
    DegeneracyField {
        window: w,
        dvals,
        nondegenerate,
        tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Cells with `|det| <= degeneracy_tolerance` are rejected.
    pub degeneracy_tolerance: f64,
    /// Largest accepted disagreement between overlapping cells.
    pub consistency_tolerance: f64,
    pub exec: Exec,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            degeneracy_tolerance: DEFAULT_DEGENERACY_TOLERANCE,
            consistency_tolerance: 1e-8,
            exec: Exec::default(),
        }
    }
}

/// Result of [`reconstruct_cd`]. Sites reached by no cell (the far corner)
/// hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T = f64> {
    pub c: Grid<Option<T>>,
    pub d: Grid<Option<T>>,
    /// Maximum absolute disagreement between overlapping cell estimates.
    pub consistency: f64,
    /// Determinant of each cell system, on the window shrunk by one.
    pub determinants: Grid<f64>,
}

/// The local system for cell `(n, m)`. Unknowns are ordered
/// `c_{n,m}, d_{n,m}, c_{n+1,m}, d_{n+1,m}, c_{n,m+1}, d_{n,m+1}`.
pub fn cell_system<T: Real>(q: &Grid<T>, a: &Grid<T>, b: &Grid<T>, n: usize, m: usize) -> Option<(Matrix<T>, Vec<T>)> {
    let den_a = a[(n + 1, m)];
    let den_b = b[(n, m + 1)];
    if den_a == T::zero() || den_b == T::zero() {
        return None;
    }
    let ra = a[(n + 1, m + 1)] / den_a;
    let rb = b[(n + 1, m + 1)] / den_b;
    let o = T::one();
    let z = T::zero();
    let rows = vec![
        vec![o, o, z, z, z, z],
        vec![z, z, o, o, z, z],
        vec![z, z, z, z, o, o],
        vec![o, -o, z, o, -o, z],
        vec![ra, -ra, -o, o, z, z],
        vec![rb, -rb, z, z, -o, o],
    ];
    let two = T::from_f64(2.0);
    let rhs = vec![two * q[(n, m)], two * q[(n + 1, m)], two * q[(n, m + 1)], z, z, z];
    Some((Matrix::from_rows(&rows), rhs))
}

/// Recovers `c, d` from `q = (c+d)/2`, `a` and `b` by solving one local
/// system per cell `(n, m)` with `n < N`, `m < M`.
pub fn reconstruct_cd<T: Real>(
    q: &Grid<T>,
    a: &Grid<T>,
    b: &Grid<T>,
    opts: &ReconstructOptions,
) -> Result<Reconstruction<T>> {
    let w = q.window();
    if a.window() != w || b.window() != w {
        return Err(Error::Shape("q, a and b must share a window".into()));
    }
    let cells_w = w
        .shrink()
        .ok_or_else(|| Error::Shape(format!("reconstruction needs a window of at least (1, 1), got {w:?}")))?;
    let cells = cells_w.indices();
    let solved = opts.exec.map(&cells, |&(n, m)| {
        let Some((mat, rhs)) = cell_system(q, a, b, n, m) else {
            return (f64::NAN, None);
        };
        let lu = Lu::new(&mat);
        let det = lu.det().to_f64();
        if !(det.abs() > opts.degeneracy_tolerance) {
            return (det, None);
        }
        (det, lu.solve(&rhs))
    });
    for (&cell, (det, sol)) in cells.iter().zip(&solved) {
        if sol.is_none() {
            return Err(Error::DegenerateSystem { cell, det: *det });
        }
    }

    let mut c: Grid<Option<T>> = Grid::filled(w, None);
    let mut d: Grid<Option<T>> = Grid::filled(w, None);
    let mut consistency = 0.0f64;
    for (&(n, m), (_, sol)) in cells.iter().zip(&solved) {
        let x = sol.as_ref().expect("checked above");
        for (k, site) in [(n, m), (n + 1, m), (n, m + 1)].into_iter().enumerate() {
            for (grid, v) in [(&mut c, x[2 * k]), (&mut d, x[2 * k + 1])] {
                match grid[site] {
                    Some(prev) => consistency = consistency.max((prev - v).abs().to_f64()),
                    None => grid[site] = Some(v),
                }
            }
        }
    }
    if !(consistency <= opts.consistency_tolerance) {
        return Err(Error::InconsistentOverlap { consistency });
    }
    let determinants = Grid::from_fn(cells_w, |n, m| solved[n * (cells_w.m + 1) + m].0);
    Ok(Reconstruction {
        c,
        d,
        consistency,
        determinants,
    })
}

/// Residuals `(c-d)_{n+1,m} - (c-d)_{n,m+1}` and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub residuals: Grid<Option<f64>>,
    pub max_residual: f64,
    pub symmetrizable: bool,
}

pub fn check_symmetrizable<T: Real>(field: &CoeffField<T>, tolerance: f64) -> SymmetryReport {
    let w = field.window();
    let residuals = Grid::from_fn(w, |n, m| {
        (n < w.n && m < w.m).then(|| (cmd(field, n + 1, m) - cmd(field, n, m + 1)).to_f64())
    });
    let max_residual = residuals
        .values()
        .flatten()
        .fold(0.0f64, |acc, &v| nan_max(acc, v.abs()));
    SymmetryReport {
        residuals,
        max_residual,
        symmetrizable: max_residual <= tolerance,
    }
}
