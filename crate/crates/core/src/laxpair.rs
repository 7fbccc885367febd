//! Transfer matrices for the wave vector `Ψ_{n,m} = (P_{n,m}, P_{n-1,m}, P_{n,m-1})`.
//!
//! `Ψ_{n+1,m} = L_{n,m} Ψ_{n,m}` and `Ψ_{n,m+1} = M_{n,m} Ψ_{n,m}` with
//!
//! ```text
//! L = | z - c   -a   -b          |     M = | z - d   -a             -b |
//!     | 1        0    0          |         | 1       (c-d)_{n-1,m}   0 |
//!     | 1        0   (d-c)_{n,m-1} |       | 1        0              0 |
//! ```
//!
//! On the axes the rows that would reference `P_{n,-1}` or `P_{-1,m}` are
//! zero, so `Ψ` keeps its vanishing components exactly.

use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::par::Exec;
use crate::recurrence::CoeffField;
use crate::scalar::Real;

pub type Mat3<T> = [[T; 3]; 3];
pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    L,
    M,
}

/// A 3×3 matrix whose entries are `constant + linear · z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix<T = f64> {
    pub kind: TransferKind,
    pub site: (usize, usize),
    pub constant: Mat3<T>,
    pub linear: Mat3<T>,
}

impl<T: Real> TransferMatrix<T> {
    pub fn eval(&self, z: T) -> Mat3<T> {
        let mut out = self.constant;
        for (row, lin) in out.iter_mut().zip(&self.linear) {
            for (v, &l) in row.iter_mut().zip(lin) {
                *v += l * z;
            }
        }
        out
    }

    /// Coefficients of `det(constant + linear z)` in ascending powers of `z`.
    pub fn det_poly(&self) -> Vec<T> {
        let entry = |i: usize, j: usize| vec![self.constant[i][j], self.linear[i][j]];
        let mut acc = vec![T::zero()];
        for (j, k, l, sign) in [
            (0, 1, 2, 1.0),
            (1, 2, 0, 1.0),
            (2, 0, 1, 1.0),
            (0, 2, 1, -1.0),
            (1, 0, 2, -1.0),
            (2, 1, 0, -1.0),
        ] {
            let term = poly_mul(&poly_mul(&entry(0, j), &entry(1, k)), &entry(2, l));
            acc = crate::poly::axpy(&acc, T::from_f64(sign), &term);
        }
        while acc.len() > 1 && acc[acc.len() - 1] == T::zero() {
            acc.pop();
        }
        acc
    }
}

fn poly_mul<T: Real>(p: &[T], q: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn det3<T: Real>(a: &Mat3<T>) -> T {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn mat_mul<T: Real>(x: &Mat3<T>, y: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            for k in 0..3 {
                *v += x[i][k] * y[k][j];
            }
        }
    }
    out
}

pub fn mat_vec<T: Real>(x: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    let mut out = [T::zero(); 3];
    for (o, row) in out.iter_mut().zip(x) {
        for (a, b) in row.iter().zip(v) {
            *o += *a * *b;
        }
    }
    out
}

fn unit_z<T: Real>() -> Mat3<T> {
    let mut lin = [[T::zero(); 3]; 3];
    lin[0][0] = T::one();
    lin
}

/// East transfer matrix at `(n, m)`.
pub fn build_l<T: Real>(field: &CoeffField<T>, n: usize, m: usize) -> TransferMatrix<T> {
    let (a, b, c, _) = field.at(n, m);
    let o = T::one();
    let z = T::zero();
    let third = if m == 0 {
        [z, z, z]
    } else {
        [o, z, field.d()[(n, m - 1)] - field.c()[(n, m - 1)]]
    };
    TransferMatrix {
        kind: TransferKind::L,
        site: (n, m),
        constant: [[-c, -a, -b], [o, z, z], third],
        linear: unit_z(),
    }
}

/// North transfer matrix at `(n, m)`.
pub fn build_m<T: Real>(field: &CoeffField<T>, n: usize, m: usize) -> TransferMatrix<T> {
    let (a, b, _, d) = field.at(n, m);
    let o = T::one();
    let z = T::zero();
    let second = if n == 0 {
        [z, z, z]
    } else {
        [o, field.c()[(n - 1, m)] - field.d()[(n - 1, m)], z]
    };
    TransferMatrix {
        kind: TransferKind::M,
        site: (n, m),
        constant: [[-d, -a, -b], second, [o, z, z]],
        linear: unit_z(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathPolicy {
    /// Along `m = 0` first, then north in every column.
    RowMajor,
    /// Along `n = 0` first, then east in every row.
    ColumnMajor,
    /// Both orders, compared site by site.
    Both,
}

impl std::str::FromStr for PathPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row_major" | "row-major" | "row" => Ok(PathPolicy::RowMajor),
            "column_major" | "column-major" | "column" => Ok(PathPolicy::ColumnMajor),
            "both" => Ok(PathPolicy::Both),
            _ => Err(Error::Parse(format!("unknown path policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveTable<T = f64> {
    pub z: T,
    pub psi: Grid<Vec3<T>>,
    /// Largest relative disagreement between the two paths, when both ran.
    pub path_discrepancy: Option<f64>,
}

fn sweep<T: Real>(field: &CoeffField<T>, z: T, window: Window, row_major: bool) -> Grid<Vec3<T>> {
    let mut psi = Grid::filled(window, [T::zero(); 3]);
    psi[(0, 0)] = [T::one(), T::zero(), T::zero()];
    let east = |psi: &Grid<Vec3<T>>, n: usize, m: usize| mat_vec(&build_l(field, n - 1, m).eval(z), &psi[(n - 1, m)]);
    let north = |psi: &Grid<Vec3<T>>, n: usize, m: usize| mat_vec(&build_m(field, n, m - 1).eval(z), &psi[(n, m - 1)]);
    if row_major {
        for n in 0..=window.n {
            for m in 0..=window.m {
                if m > 0 {
                    psi[(n, m)] = north(&psi, n, m);
                } else if n > 0 {
                    psi[(n, 0)] = east(&psi, n, 0);
                }
            }
        }
    } else {
        for m in 0..=window.m {
            for n in 0..=window.n {
                if n > 0 {
                    psi[(n, m)] = east(&psi, n, m);
                } else if m > 0 {
                    psi[(0, m)] = north(&psi, 0, m);
                }
            }
        }
    }
    psi
}

/// Propagates `Ψ` from `(1, 0, 0)` over `window`. With [`PathPolicy::Both`]
/// the row-major values are kept and a site-wise relative disagreement above
/// `tolerance` is an error.
pub fn propagate<T: Real>(
    field: &CoeffField<T>,
    z: T,
    window: Window,
    policy: PathPolicy,
    tolerance: f64,
) -> Result<WaveTable<T>> {
    if !field.window().covers(window) {
        return Err(Error::Shape(format!(
            "field window {:?} does not cover {:?}",
            field.window(),
            window
        )));
    }
    match policy {
        PathPolicy::RowMajor | PathPolicy::ColumnMajor => Ok(WaveTable {
            z,
            psi: sweep(field, z, window, policy == PathPolicy::RowMajor),
            path_discrepancy: None,
        }),
        PathPolicy::Both => {
            let rows = sweep(field, z, window, true);
            let cols = sweep(field, z, window, false);
            let mut worst = 0.0f64;
            for (n, m) in window.indices() {
                let (x, y) = (rows[(n, m)], cols[(n, m)]);
                let norm = x.iter().chain(&y).fold(T::zero(), |acc, &v| acc.max_abs(v));
                let diff = (0..3).fold(T::zero(), |acc, k| acc.max_abs(x[k] - y[k]));
                let disc = if norm == T::zero() { 0.0 } else { (diff / norm).to_f64() };
                if !(disc <= tolerance) {
                    return Err(Error::PathInconsistent {
                        index: (n, m),
                        discrepancy: disc,
                    });
                }
                worst = worst.max(disc);
            }
            Ok(WaveTable {
                z,
                psi: rows,
                path_discrepancy: Some(worst),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaxReport {
    pub samples: Vec<f64>,
    /// Per sample, the largest absolute entry of
    /// `L_{n,m+1} M_{n,m} - M_{n+1,m} L_{n,m}` over the sites.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Evaluates the zero-curvature identity at every `(n, m)` with
/// `n < N`, `m < M` and every sample.
pub fn zero_curvature_residual<T: Real>(
    field: &CoeffField<T>,
    window: Window,
    samples: &[f64],
    exec: Exec,
) -> Result<LaxReport> {
    if !field.window().covers(window) || window.n < 1 || window.m < 1 {
        return Err(Error::Shape(format!(
            "zero-curvature check needs a window of at least (1, 1) inside the field, got {window:?}"
        )));
    }
    let sites = Window::new(window.n - 1, window.m - 1).indices();
    let residuals = exec.map(samples, |&z| {
        let zt = T::from_f64(z);
        let mut worst = 0.0f64;
        for &(n, m) in &sites {
            let lhs = mat_mul(&build_l(field, n, m + 1).eval(zt), &build_m(field, n, m).eval(zt));
            let rhs = mat_mul(&build_m(field, n + 1, m).eval(zt), &build_l(field, n, m).eval(zt));
            for i in 0..3 {
                for j in 0..3 {
                    let r = (lhs[i][j] - rhs[i][j]).abs().to_f64();
                    worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
                }
            }
        }
        worst
    });
    let max_residual = residuals.iter().fold(0.0f64, |acc, &r| {
        if r.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(r)
        }
    });
    Ok(LaxReport {
        samples: samples.to_vec(),
        residuals,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite(c1: f64, c2: f64, w: Window) -> CoeffField<f64> {
        CoeffField::from_fn(w, |n, m| (n as f64 / 2.0, m as f64 / 2.0, c1 / 2.0, c2 / 2.0))
    }

    #[test]
    fn hermite_entries() {
        let f = hermite(0.6, 2.0, Window::new(3, 3));
        let l = build_l(&f, 1, 1);
        assert_eq!(l.constant[2], [1.0, 0.0, 0.7]);
        assert_eq!(l.eval(5.0)[0], [5.0 - 0.3, -0.5, -0.5]);
        let m = build_m(&f, 1, 1);
        assert_eq!(m.constant[1], [1.0, -0.7, 0.0]);
        assert_eq!(build_l(&f, 2, 0).constant[2], [0.0; 3]);
        assert_eq!(build_m(&f, 0, 2).constant[1], [0.0; 3]);
    }

    #[test]
    fn only_the_corner_is_linear() {
        let f = hermite(0.0, 1.0, Window::new(2, 2));
        for t in [build_l(&f, 1, 1), build_m(&f, 1, 1)] {
            for i in 0..3 {
                for j in 0..3 {
                    let want = if (i, j) == (0, 0) { 1.0 } else { 0.0 };
                    assert_eq!(t.linear[i][j], want);
                }
            }
        }
    }

    #[test]
    fn determinant_polynomial_matches_expansion() {
        let f = hermite(0.3, -0.9, Window::new(3, 3));
        for t in [
            build_l(&f, 2, 1),
            build_m(&f, 1, 2),
            build_l(&f, 1, 0),
            build_m(&f, 0, 1),
        ] {
            let p = t.det_poly();
            assert!(p.len() <= 2);
            for z in [-1.5, 0.0, 2.5] {
                let direct = det3(&t.eval(z));
                assert!((crate::poly::eval(&p, z) - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn origin_and_policies() {
        let f = hermite(0.0, 1.0, Window::new(2, 2));
        let w = propagate(&f, 0.7, Window::new(2, 2), PathPolicy::Both, 1e-12).unwrap();
        assert_eq!(w.psi[(0, 0)], [1.0, 0.0, 0.0]);
        assert!(w.path_discrepancy.unwrap() < 1e-15);
        assert!("sideways".parse::<PathPolicy>().is_err());
        assert_eq!("both".parse::<PathPolicy>().unwrap(), PathPolicy::Both);
    }

    #[test]
    fn boundary_components_vanish() {
        let f = hermite(0.0, 1.0, Window::new(3, 3));
        for policy in [PathPolicy::RowMajor, PathPolicy::ColumnMajor] {
            let w = propagate(&f, 1.3, Window::new(3, 3), policy, 0.0).unwrap();
            for n in 0..=3 {
                assert_eq!(w.psi[(n, 0)][2], 0.0);
            }
            for m in 0..=3 {
                assert_eq!(w.psi[(0, m)][1], 0.0);
            }
        }
    }

    #[test]
    fn window_checks() {
        let f = hermite(0.0, 1.0, Window::new(2, 2));
        assert!(propagate(&f, 0.0, Window::new(3, 2), PathPolicy::RowMajor, 0.0).is_err());
        assert!(zero_curvature_residual(&f, Window::new(0, 2), &[0.0], Exec::Sequential).is_err());
    }
}
