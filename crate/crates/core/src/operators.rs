//! Five-point lattice operators built from a coefficient field.
//!
//! A stencil acts as
//! `(Op f)_{n,m} = east f_{n+1,m} + north f_{n,m+1} + center f_{n,m} + west f_{n-1,m} + south f_{n,m-1}`.
//! Couplings that would leave the window are stored as zero, so the
//! finite-section matrix is the principal block of the infinite operator on
//! rows whose stencil stays inside.

use std::fmt;
use std::str::FromStr;

use crate::curvature::check_symmetrizable;
use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::linalg::Matrix;
use crate::moments::{MomentSequence, MomentSource};
use crate::mop_table::PolyTable;
use crate::par::Exec;
use crate::poly;
use crate::recurrence::CoeffField;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    H1,
    H2,
    Delta,
    Cross,
    DeltaS,
    J1,
    J2,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 7] = [
        OperatorKind::H1,
        OperatorKind::H2,
        OperatorKind::Delta,
        OperatorKind::Cross,
        OperatorKind::DeltaS,
        OperatorKind::J1,
        OperatorKind::J2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::H1 => "h1",
            OperatorKind::H2 => "h2",
            OperatorKind::Delta => "delta",
            OperatorKind::Cross => "cross",
            OperatorKind::DeltaS => "deltas",
            OperatorKind::J1 => "j1",
            OperatorKind::J2 => "j2",
        }
    }

    fn has_east(self) -> bool {
        !matches!(self, OperatorKind::H2 | OperatorKind::J2)
    }

    fn has_north(self) -> bool {
        !matches!(self, OperatorKind::H1 | OperatorKind::J1)
    }

    /// Kinds whose finite sections are symmetric.
    pub fn is_symmetric(self) -> bool {
        matches!(self, OperatorKind::DeltaS | OperatorKind::J1 | OperatorKind::J2)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown operator kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil<T = f64> {
    pub east: T,
    pub north: T,
    pub center: T,
    pub west: T,
    pub south: T,
}

impl<T: Real> Stencil<T> {
    pub fn zero() -> Self {
        Stencil {
            east: T::zero(),
            north: T::zero(),
            center: T::zero(),
            west: T::zero(),
            south: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator<T = f64> {
    kind: OperatorKind,
    stencils: Grid<Stencil<T>>,
}

impl<T: Real> LatticeOperator<T> {
    /// Assembles an operator, zeroing couplings that leave the window or
    /// that the kind does not have.
    pub fn from_fn(kind: OperatorKind, window: Window, mut f: impl FnMut(usize, usize) -> Stencil<T>) -> Self {
        let stencils = Grid::from_fn(window, |n, m| {
            let mut s = f(n, m);
            if n == window.n || !kind.has_east() {
                s.east = T::zero();
            }
            if m == window.m || !kind.has_north() {
                s.north = T::zero();
            }
            if n == 0 {
                s.west = T::zero();
            }
            if m == 0 {
                s.south = T::zero();
            }
            s
        });
        LatticeOperator { kind, stencils }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn window(&self) -> Window {
        self.stencils.window()
    }

    pub fn stencil(&self, n: usize, m: usize) -> &Stencil<T> {
        &self.stencils[(n, m)]
    }

    pub fn stencils(&self) -> &Grid<Stencil<T>> {
        &self.stencils
    }

    /// Sites whose stencil and neighbors lie inside the window.
    pub fn interior(&self) -> Vec<(usize, usize)> {
        let w = self.window();
        w.indices()
            .into_iter()
            .filter(|&(n, m)| (!self.kind.has_east() || n < w.n) && (!self.kind.has_north() || m < w.m))
            .collect()
    }

    /// Dense finite section; row and column `m (N+1) + n` belong to `(n, m)`.
    pub fn to_dense(&self) -> Matrix<T> {
        let w = self.window();
        let mut a = Matrix::zeros(w.sites(), w.sites());
        for (r, c, v) in self.triplets() {
            a.set(r, c, v);
        }
        a
    }

    /// Nonzero entries `(row, col, value)` of the finite section, in row order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let w = self.window();
        let mut out = Vec::new();
        for idx in 0..w.sites() {
            let (n, m) = w.site(idx);
            let s = &self.stencils[(n, m)];
            let mut entries = Vec::with_capacity(5);
            if m > 0 {
                entries.push((w.linear(n, m - 1), s.south));
            }
            if n > 0 {
                entries.push((w.linear(n - 1, m), s.west));
            }
            entries.push((idx, s.center));
            if n < w.n {
                entries.push((w.linear(n + 1, m), s.east));
            }
            if m < w.m {
                entries.push((w.linear(n, m + 1), s.north));
            }
            for (col, v) in entries {
                if v != T::zero() {
                    out.push((idx, col, v));
                }
            }
        }
        out
    }

    pub fn cast<U: Real>(&self) -> LatticeOperator<U> {
        LatticeOperator {
            kind: self.kind,
            stencils: self.stencils.map(|s| Stencil {
                east: crate::scalar::cast(s.east),
                north: crate::scalar::cast(s.north),
                center: crate::scalar::cast(s.center),
                west: crate::scalar::cast(s.west),
                south: crate::scalar::cast(s.south),
            }),
        }
    }
}

pub fn build_h1<T: Real>(field: &CoeffField<T>) -> LatticeOperator<T> {
    LatticeOperator::from_fn(OperatorKind::H1, field.window(), |n, m| {
        let (a, b, c, _) = field.at(n, m);
        Stencil {
            east: T::one(),
            north: T::zero(),
            center: c,
            west: a,
            south: b,
        }
    })
}

pub fn build_h2<T: Real>(field: &CoeffField<T>) -> LatticeOperator<T> {
    LatticeOperator::from_fn(OperatorKind::H2, field.window(), |n, m| {
        let (a, b, _, d) = field.at(n, m);
        Stencil {
            east: T::zero(),
            north: T::one(),
            center: d,
            west: a,
            south: b,
        }
    })
}

/// `(H1 + H2) / 2`.
pub fn build_delta<T: Real>(field: &CoeffField<T>) -> LatticeOperator<T> {
    let half = T::from_f64(0.5);
    LatticeOperator::from_fn(OperatorKind::Delta, field.window(), |n, m| {
        let (a, b, c, d) = field.at(n, m);
        Stencil {
            east: half,
            north: half,
            center: (c + d) * half,
            west: a,
            south: b,
        }
    })
}

/// Cross-shaped operator with a free diagonal `q`.
pub fn build_cross<T: Real>(q: &Grid<T>, a: &Grid<T>, b: &Grid<T>) -> Result<LatticeOperator<T>> {
    let w = q.window();
    if a.window() != w || b.window() != w {
        return Err(Error::Shape("q, a and b must share a window".into()));
    }
    let half = T::from_f64(0.5);
    Ok(LatticeOperator::from_fn(OperatorKind::Cross, w, |n, m| Stencil {
        east: half,
        north: half,
        center: q[(n, m)],
        west: a[(n, m)],
        south: b[(n, m)],
    }))
}

/// Values of `op f` on the interior; other sites hold `None`.
pub fn apply<T: Real>(op: &LatticeOperator<T>, values: &Grid<T>) -> Result<Grid<Option<T>>> {
    let w = op.window();
    if !values.window().covers(w) {
        return Err(Error::Shape(format!(
            "values on {:?} do not cover operator window {:?}",
            values.window(),
            w
        )));
    }
    let mut out = Grid::filled(w, None);
    for (n, m) in op.interior() {
        out[(n, m)] = Some(apply_at(op, values, n, m));
    }
    Ok(out)
}

fn apply_at<T: Real>(op: &LatticeOperator<T>, f: &Grid<T>, n: usize, m: usize) -> T {
    let s = op.stencil(n, m);
    let mut acc = s.center * f[(n, m)];
    if s.east != T::zero() {
        acc += s.east * f[(n + 1, m)];
    }
    if s.north != T::zero() {
        acc += s.north * f[(n, m + 1)];
    }
    if n > 0 {
        acc += s.west * f[(n - 1, m)];
    }
    if m > 0 {
        acc += s.south * f[(n, m - 1)];
    }
    acc
}

/// Monic tridiagonal matrix: diagonal `diag`, subdiagonal `sub`, ones above.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T = f64> {
    pub diag: Vec<T>,
    pub sub: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn new(diag: Vec<T>, sub: Vec<T>) -> Result<Self> {
        if diag.is_empty() || sub.len() + 1 != diag.len() {
            return Err(Error::Shape(format!(
                "tridiagonal needs k diagonal and k - 1 subdiagonal entries, got {} and {}",
                diag.len(),
                sub.len()
            )));
        }
        Ok(Tridiagonal { diag, sub })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let k = self.size();
        Matrix::from_fn(k, k, |i, j| {
            if i == j {
                self.diag[i]
            } else if j == i + 1 {
                T::one()
            } else if i == j + 1 {
                self.sub[j]
            } else {
                T::zero()
            }
        })
    }

    /// `T v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let k = self.size();
        (0..k)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i + 1 < k {
                    acc += v[i + 1];
                }
                if i > 0 {
                    acc += self.sub[i - 1] * v[i - 1];
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Axis::First),
            "2" => Ok(Axis::Second),
            _ => Err(Error::Parse(format!("axis must be 1 or 2, got `{s}`"))),
        }
    }
}

/// Restriction of `H1` to `m = 0` (diagonal `c_{n,0}`, subdiagonal `a_{n,0}`)
/// or of `H2` to `n = 0` (diagonal `d_{0,m}`, subdiagonal `b_{0,m}`).
pub fn boundary_jacobi<T: Real>(field: &CoeffField<T>, axis: Axis) -> Result<Tridiagonal<T>> {
    let w = field.window();
    let (diag, sub): (Vec<T>, Vec<T>) = match axis {
        Axis::First => (0..=w.n).map(|i| (field.c()[(i, 0)], field.a()[(i, 0)])).unzip(),
        Axis::Second => (0..=w.m).map(|i| (field.d()[(0, i)], field.b()[(0, i)])).unzip(),
    };
    if diag.len() < 2 {
        return Err(Error::Shape(
            "boundary Jacobi matrix needs at least two sites along the axis".into(),
        ));
    }
    Tridiagonal::new(diag, sub[1..].to_vec())
}

/// `s_j = (T^j)_{0,0}` for `j <= max_order`. Only orders up to
/// `2 size - 2` are accepted.
pub fn boundary_moments<T: Real>(jacobi: &Tridiagonal<T>, max_order: usize) -> Result<MomentSequence<T>> {
    let limit = 2 * jacobi.size() - 2;
    if max_order > limit {
        return Err(Error::Domain(format!(
            "order {max_order} exceeds {limit}, the largest order a size-{} truncation reproduces",
            jacobi.size()
        )));
    }
    let mut v = vec![T::zero(); jacobi.size()];
    v[0] = T::one();
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(T::one());
    for _ in 0..max_order {
        v = jacobi.mul_vec(&v);
        out.push(v[0]);
    }
    MomentSequence::new(out, MomentSource::Raw)
}

/// Positive diagonal `h` with `h_{0,0} = 1`, `h_{n+1,m}^2 = 2 a_{n+1,m} h_{n,m}^2`
/// and `h_{n,m+1}^2 = 2 b_{n,m+1} h_{n,m}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrizer<T = f64> {
    h: Grid<T>,
    path_discrepancy: f64,
}

impl<T: Real> Symmetrizer<T> {
    pub fn window(&self) -> Window {
        self.h.window()
    }

    pub fn h(&self) -> &Grid<T> {
        &self.h
    }

    /// Largest relative disagreement between the row and column fills.
    pub fn path_discrepancy(&self) -> f64 {
        self.path_discrepancy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizeOptions {
    /// Bound on `|(c-d)_{n+1,m} - (c-d)_{n,m+1}|`.
    pub symmetry_tolerance: f64,
    /// Bound on the relative disagreement of the two fill orders.
    pub path_tolerance: f64,
}

impl Default for SymmetrizeOptions {
    fn default() -> Self {
        SymmetrizeOptions {
            symmetry_tolerance: 1e-10,
            path_tolerance: 1e-10,
        }
    }
}

pub fn build_symmetrizer<T: Real>(field: &CoeffField<T>, opts: &SymmetrizeOptions) -> Result<Symmetrizer<T>> {
    let sym = check_symmetrizable(field, opts.symmetry_tolerance);
    if !sym.symmetrizable {
        return Err(Error::NotSymmetrizable {
            residual: sym.max_residual,
        });
    }
    let w = field.window();
    for (n, m) in w.indices() {
        let (a, b, _, _) = field.at(n, m);
        if (n > 0 && !(a > T::zero())) || (m > 0 && !(b > T::zero())) {
            return Err(Error::Domain(format!(
                "a and b must be positive off the axes, fails at ({n}, {m})"
            )));
        }
    }
    let two = T::from_f64(2.0);
    let step_a = |n: usize, m: usize| (two * field.a()[(n, m)]).sqrt();
    let step_b = |n: usize, m: usize| (two * field.b()[(n, m)]).sqrt();

    let mut by_rows = Grid::filled(w, T::one());
    let mut by_cols = Grid::filled(w, T::one());
    for n in 0..=w.n {
        for m in 0..=w.m {
            if m > 0 {
                by_rows[(n, m)] = by_rows[(n, m - 1)] * step_b(n, m);
            } else if n > 0 {
                by_rows[(n, 0)] = by_rows[(n - 1, 0)] * step_a(n, 0);
            }
        }
    }
    for m in 0..=w.m {
        for n in 0..=w.n {
            if n > 0 {
                by_cols[(n, m)] = by_cols[(n - 1, m)] * step_a(n, m);
            } else if m > 0 {
                by_cols[(0, m)] = by_cols[(0, m - 1)] * step_b(0, m);
            }
        }
    }
    let mut worst = 0.0f64;
    for (n, m) in w.indices() {
        let x = by_rows[(n, m)];
        let y = by_cols[(n, m)];
        let disc = ((x - y).abs() / x.abs()).to_f64();
        if !(disc <= opts.path_tolerance) {
            return Err(Error::PathInconsistent {
                index: (n, m),
                discrepancy: disc,
            });
        }
        worst = worst.max(disc);
    }
    Ok(Symmetrizer {
        h: by_rows,
        path_discrepancy: worst,
    })
}

/// `Δs = J1 + J2` together with its summands and the symmetrizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDecomposition<T = f64> {
    pub delta_s: LatticeOperator<T>,
    pub j1: LatticeOperator<T>,
    pub j2: LatticeOperator<T>,
    pub symmetrizer: Symmetrizer<T>,
}

pub fn build_delta_s<T: Real>(field: &CoeffField<T>, opts: &SymmetrizeOptions) -> Result<SymmetricDecomposition<T>> {
    let symmetrizer = build_symmetrizer(field, opts)?;
    let w = field.window();
    let half = T::from_f64(0.5);
    let root = |v: T| (v * half).sqrt();
    let a = field.a();
    let b = field.b();
    let east = |n: usize, m: usize| if n < w.n { root(a[(n + 1, m)]) } else { T::zero() };
    let north = |n: usize, m: usize| if m < w.m { root(b[(n, m + 1)]) } else { T::zero() };

    let delta_s = LatticeOperator::from_fn(OperatorKind::DeltaS, w, |n, m| Stencil {
        east: east(n, m),
        north: north(n, m),
        center: field.q(n, m),
        west: root(a[(n, m)]),
        south: root(b[(n, m)]),
    });
    let j1 = LatticeOperator::from_fn(OperatorKind::J1, w, |n, m| Stencil {
        east: east(n, m),
        north: T::zero(),
        center: field.c()[(n, m)] * half,
        west: root(a[(n, m)]),
        south: T::zero(),
    });
    let j2 = LatticeOperator::from_fn(OperatorKind::J2, w, |n, m| Stencil {
        east: T::zero(),
        north: north(n, m),
        center: field.d()[(n, m)] * half,
        west: T::zero(),
        south: root(b[(n, m)]),
    });
    Ok(SymmetricDecomposition {
        delta_s,
        j1,
        j2,
        symmetrizer,
    })
}

/// Max over interior rows of `|Δs - h⁻¹ Δ h|`, relative to the largest entry.
pub fn conjugation_residual<T: Real>(
    delta: &LatticeOperator<T>,
    delta_s: &LatticeOperator<T>,
    sym: &Symmetrizer<T>,
) -> f64 {
    let w = delta.window();
    let h = sym.h();
    let ds = delta_s.to_dense();
    let d = delta.to_dense();
    let scale = d.max_abs().to_f64().max(ds.max_abs().to_f64()).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (n, m) in delta.interior() {
        let r = w.linear(n, m);
        for col in 0..w.sites() {
            let (cn, cm) = w.site(col);
            let conj = d.get(r, col) * h[(cn, cm)] / h[(n, m)];
            worst = worst.max((ds.get(r, col) - conj).abs().to_f64() / scale);
        }
    }
    worst
}

/// `max |A - Aᵀ|` relative to `max |A|`.
pub fn asymmetry<T: Real>(a: &Matrix<T>) -> f64 {
    let scale = a.max_abs().to_f64();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        for j in 0..i {
            worst = worst.max((a.get(i, j) - a.get(j, i)).abs().to_f64());
        }
    }
    worst / scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigencheckReport {
    pub samples: Vec<f64>,
    /// Per sample: `max |(Op π)(z) - z π(z)|` over the interior, divided by
    /// `max |π(z)|` over the window.
    pub residuals: Vec<f64>,
    pub interior: Vec<(usize, usize)>,
    pub max_residual: f64,
}

/// Checks `Op π(z) = z π(z)`. With a symmetrizer, `π_{n,m}` is replaced by
/// `P_{n,m}(z) / h_{n,m}`.
pub fn eigencheck<T: Real>(
    op: &LatticeOperator<T>,
    table: &PolyTable<T>,
    samples: &[f64],
    scaling: Option<&Symmetrizer<T>>,
    exec: Exec,
) -> Result<EigencheckReport> {
    let w = op.window();
    if !table.window().covers(w) {
        return Err(Error::Shape(format!(
            "table window {:?} does not cover operator window {:?}",
            table.window(),
            w
        )));
    }
    if let Some(s) = scaling {
        if !s.window().covers(w) {
            return Err(Error::Shape("symmetrizer does not cover the operator window".into()));
        }
    }
    let interior = op.interior();
    let residuals = exec.map(samples, |&z| {
        let zt = T::from_f64(z);
        let pi = Grid::from_fn(w, |n, m| {
            let v = poly::eval(table.get(n, m), zt);
            match scaling {
                Some(s) => v / s.h()[(n, m)],
                None => v,
            }
        });
        let scale = pi.values().fold(T::zero(), |acc, &v| acc.max_abs(v)).to_f64();
        let worst = interior
            .iter()
            .map(|&(n, m)| (apply_at(op, &pi, n, m) - zt * pi[(n, m)]).abs().to_f64())
            .fold(0.0f64, f64::max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    });
    let max_residual = residuals.iter().copied().fold(0.0f64, f64::max);
    Ok(EigencheckReport {
        samples: samples.to_vec(),
        residuals,
        interior,
        max_residual,
    })
}
