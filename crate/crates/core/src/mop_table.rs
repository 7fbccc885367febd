//! Type II multiple orthogonal polynomial tables built directly from moments.
//!
//! `P_{n,m}` is the monic polynomial of degree `n + m` with
//! `Σ_k p_k s^{(1)}_{k+j} = 0` for `j < n` and `Σ_k p_k s^{(2)}_{k+j} = 0` for
//! `j < m`. Its lower coefficients solve a linear system whose matrix is the
//! transpose of the moment matrix; `S_{n,m}`, the determinant of that matrix,
//! decides normality of the index.

use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::linalg::{det, solve_equilibrated, Matrix};
use crate::moments::MomentPair;
use crate::par::Exec;
use crate::poly;
use crate::scalar::{cast, Real};

/// Monic polynomials `P_{n,m}` over a window, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTable<T = f64> {
    coeffs: Grid<Vec<T>>,
}

impl<T: Real> PolyTable<T> {
    /// Checks degrees (`n + m`) and monicity of every entry.
    pub fn new(coeffs: Grid<Vec<T>>) -> Result<Self> {
        for ((n, m), p) in coeffs.iter() {
            if p.len() != n + m + 1 {
                return Err(Error::Shape(format!(
                    "P_{{{n},{m}}} has {} coefficients, expected {}",
                    p.len(),
                    n + m + 1
                )));
            }
            if p[n + m] != T::one() {
                return Err(Error::Shape(format!("P_{{{n},{m}}} is not monic")));
            }
        }
        Ok(PolyTable { coeffs })
    }

    pub(crate) fn from_grid_unchecked(coeffs: Grid<Vec<T>>) -> Self {
        PolyTable { coeffs }
    }

    pub fn window(&self) -> Window {
        self.coeffs.window()
    }

    pub fn get(&self, n: usize, m: usize) -> &[T] {
        &self.coeffs[(n, m)]
    }

    pub fn grid(&self) -> &Grid<Vec<T>> {
        &self.coeffs
    }

    /// Every polynomial evaluated at `z`.
    pub fn eval(&self, z: T) -> Grid<T> {
        self.coeffs.map(|p| poly::eval(p, z))
    }

    pub fn restrict(&self, w: Window) -> Option<Self> {
        Some(PolyTable {
            coeffs: self.coeffs.restrict(w)?,
        })
    }

    pub fn cast<U: Real>(&self) -> PolyTable<U> {
        PolyTable {
            coeffs: self.coeffs.map(|p| p.iter().map(|&c| cast(c)).collect()),
        }
    }

    pub fn to_f64(&self) -> PolyTable<f64> {
        self.cast()
    }

    /// Largest entrywise relative coefficient difference over the common
    /// window; see [`poly::rel_diff`].
    pub fn max_rel_diff(&self, other: &PolyTable<T>) -> f64 {
        let w = self.window();
        let ow = other.window();
        let common = Window::new(w.n.min(ow.n), w.m.min(ow.m));
        common
            .indices()
            .into_iter()
            .map(|(n, m)| poly::rel_diff(self.get(n, m), other.get(n, m)))
            .fold(0.0, f64::max)
    }
}

/// Orders of each measure needed to build every polynomial in `window`:
/// `2N + M - 1` for `μ₁` and `N + 2M - 1` for `μ₂`.
pub fn required_orders(window: Window) -> (usize, usize) {
    let (n, m) = (window.n, window.m);
    let o1 = if n > 0 { 2 * n + m - 1 } else { 0 };
    let o2 = if m > 0 { n + 2 * m - 1 } else { 0 };
    (o1, o2)
}

fn check_orders<T: Real>(pair: &MomentPair<T>, o1: usize, o2: usize) -> Result<()> {
    let needed = o1.max(o2);
    if pair.max_order() < needed {
        return Err(Error::InsufficientMoments {
            needed,
            available: pair.max_order(),
        });
    }
    Ok(())
}

fn check_cap<T: Real>(window: Window) -> Result<()> {
    let cap = T::PRECISION.window_cap();
    if window.n + window.m > cap {
        return Err(Error::WindowTooLarge {
            n: window.n,
            m: window.m,
            cap,
            mode: match T::PRECISION {
                crate::Precision::Double => "double",
                crate::Precision::Extended => "extended",
            },
        });
    }
    Ok(())
}

/// The `(n+m)×(n+m)` moment matrix: entry `(i, j)` is `s^{(1)}_{i+j}` for
/// the first `n` columns and `s^{(2)}_{i+j-n}` for the last `m`.
pub fn moment_matrix<T: Real>(pair: &MomentPair<T>, n: usize, m: usize) -> Result<Matrix<T>> {
    let k = n + m;
    let o1 = if n > 0 { 2 * n + m - 2 } else { 0 };
    let o2 = if m > 0 { n + 2 * m - 2 } else { 0 };
    check_orders(pair, o1, o2)?;
    let s1 = pair.mu1.values();
    let s2 = pair.mu2.values();
    Ok(Matrix::from_fn(
        k,
        k,
        |i, j| {
            if j < n {
                s1[i + j]
            } else {
                s2[i + j - n]
            }
        },
    ))
}

/// Determinants `S_{n,m}` and the normality verdicts for a window.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub window: Window,
    pub determinants: Grid<f64>,
    /// Reference magnitude for each determinant: `|S_parent|` times the
    /// largest entry of the last moment-matrix row, where the parent is the
    /// neighbor `(n-1, m)` or `(n, m-1)` whose matrix is a leading minor. The
    /// ratio `|S| / scale` is the last pivot of the row-equilibrated matrix.
    pub scales: Grid<f64>,
    pub normal: Grid<bool>,
    pub threshold: f64,
}

impl NormalityReport {
    pub fn non_normal(&self) -> Vec<(usize, usize)> {
        self.normal.iter().filter(|(_, &ok)| !ok).map(|(idx, _)| idx).collect()
    }

    pub fn all_normal(&self) -> bool {
        self.normal.values().all(|&ok| ok)
    }

    /// `|S_{n,m}| / scale_{n,m}`.
    pub fn pivot_ratio(&self, n: usize, m: usize) -> f64 {
        self.determinants[(n, m)].abs() / self.scales[(n, m)]
    }
}

/// Knobs shared by the table builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub threshold: f64,
    pub exec: Exec,
}

impl TableOptions {
    pub fn for_precision(p: crate::Precision) -> Self {
        TableOptions {
            threshold: p.default_normality_threshold(),
            exec: Exec::default(),
        }
    }
}

/// Computes every `S_{n,m}` in `window` (with `S_{0,0} = 1`) and flags
/// `(n,m)` normal iff `|S_{n,m}| > threshold · scale_{n,m}`.
pub fn normality_scan<T: Real>(pair: &MomentPair<T>, window: Window, threshold: f64) -> Result<NormalityReport> {
    normality_scan_with(pair, window, threshold, Exec::default())
}

pub fn normality_scan_with<T: Real>(
    pair: &MomentPair<T>,
    window: Window,
    threshold: f64,
    exec: Exec,
) -> Result<NormalityReport> {
    let (o1, o2) = required_orders(window);
    // Matrices only reach one order below what the full table needs.
    check_orders(pair, o1.saturating_sub(1), o2.saturating_sub(1))?;
    let indices = window.indices();
    // Per index: (det, max of last row, product of row maxima).
    let raw: Vec<(f64, f64, f64)> = exec.map(&indices, |&(n, m)| {
        if n + m == 0 {
            return (1.0, 1.0, 1.0);
        }
        let a = moment_matrix(pair, n, m).expect("orders checked");
        let k = n + m;
        let row_max = |i: usize| (0..k).fold(T::zero(), |acc, j| acc.max_abs(a.get(i, j))).to_f64();
        let product = (0..k).map(row_max).product();
        (det(&a).to_f64(), row_max(k - 1), product)
    });
    let at = |n: usize, m: usize| raw[n * (window.m + 1) + m];
    let determinants = Grid::from_fn(window, |n, m| at(n, m).0);
    let scales = Grid::from_fn(window, |n, m| {
        if n + m == 0 {
            return 1.0;
        }
        let parents = [
            (n > 0).then(|| determinants[(n - 1, m)].abs()),
            (m > 0).then(|| determinants[(n, m - 1)].abs()),
        ];
        let parent = parents.iter().flatten().fold(0.0f64, |acc, &v| acc.max(v));
        if parent > 0.0 {
            parent * at(n, m).1
        } else {
            // Both neighbors singular: fall back to the row-equilibrated scale.
            at(n, m).2
        }
    });
    let normal = Grid::from_fn(window, |n, m| {
        let s = determinants[(n, m)].abs();
        s > threshold * scales[(n, m)]
    });
    Ok(NormalityReport {
        window,
        determinants,
        scales,
        normal,
        threshold,
    })
}

/// Lower coefficients of `P_{n,m}` from the orthogonality system, with the
/// leading `1` appended. `None` when the system is singular.
pub fn solve_index<T: Real>(pair: &MomentPair<T>, n: usize, m: usize) -> Option<Vec<T>> {
    let k = n + m;
    if k == 0 {
        return Some(vec![T::one()]);
    }
    let s1 = pair.mu1.values();
    let s2 = pair.mu2.values();
    let a = Matrix::from_fn(k, k, |row, col| if row < n { s1[col + row] } else { s2[col + row - n] });
    let rhs: Vec<T> = (0..k)
        .map(|row| if row < n { -s1[k + row] } else { -s2[k + row - n] })
        .collect();
    let mut coeffs = solve_equilibrated(&a, &rhs)?;
    coeffs.push(T::one());
    Some(coeffs)
}

/// Builds the monic table on `window` from moments.
pub fn determinantal_table<T: Real>(pair: &MomentPair<T>, window: Window) -> Result<PolyTable<T>> {
    determinantal_table_with(pair, window, &TableOptions::for_precision(T::PRECISION))
}

pub fn determinantal_table_with<T: Real>(
    pair: &MomentPair<T>,
    window: Window,
    opts: &TableOptions,
) -> Result<PolyTable<T>> {
    check_cap::<T>(window)?;
    let (o1, o2) = required_orders(window);
    check_orders(pair, o1, o2)?;
    let report = normality_scan_with(pair, window, opts.threshold, opts.exec)?;
    let bad = report.non_normal();
    if !bad.is_empty() {
        return Err(Error::NotNormal { indices: bad });
    }
    let indices = window.indices();
    let solved = opts.exec.map(&indices, |&(n, m)| solve_index(pair, n, m));
    let mut polys = Vec::with_capacity(solved.len());
    for (p, &(n, m)) in solved.into_iter().zip(&indices) {
        match p {
            Some(p) => polys.push(p),
            None => return Err(Error::NotNormal { indices: vec![(n, m)] }),
        }
    }
    let mut iter = polys.into_iter();
    let grid = Grid::from_fn(window, |_, _| iter.next().expect("one per index"));
    Ok(PolyTable::from_grid_unchecked(grid))
}

/// Largest orthogonality residual of one entry: `|Σ_k p_k s_{k+j}|` divided
/// by `Σ_k |p_k s_{k+j}|`, over `j < n` for `μ₁` and `j < m` for `μ₂`.
pub fn orthogonality_residual<T: Real>(pair: &MomentPair<T>, p: &[T], n: usize, m: usize) -> f64 {
    let s1 = pair.mu1.values();
    let s2 = pair.mu2.values();
    let mut worst = 0.0f64;
    for (s, count) in [(s1, n), (s2, m)] {
        for j in 0..count {
            let mut acc = T::zero();
            let mut mag = T::zero();
            for (k, &c) in p.iter().enumerate() {
                let term = c * s[k + j];
                acc += term;
                mag += term.abs();
            }
            if mag > T::zero() {
                worst = worst.max((acc.abs() / mag).to_f64());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{hermite_moments, raw_moments, MomentPair};

    fn hermite_pair(c1: f64, c2: f64, order: usize) -> MomentPair<f64> {
        MomentPair::new(hermite_moments(c1, order), hermite_moments(c2, order)).unwrap()
    }

    #[test]
    fn moment_matrix_layout() {
        let pair = hermite_pair(0.6, -1.4, 4);
        let a = moment_matrix(&pair, 1, 1).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, 1.0], vec![0.3, -0.7]]);
        let a = moment_matrix(&pair, 1, 0).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0]]);
        let raw = raw_moments(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(
            moment_matrix(&raw, 1, 1).unwrap().to_rows(),
            vec![vec![1.0, 1.0], vec![1.0, 2.0]]
        );
    }

    #[test]
    fn moment_matrix_needs_enough_orders() {
        let raw = raw_moments(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!(matches!(
            moment_matrix(&raw, 2, 1),
            Err(Error::InsufficientMoments {
                needed: 3,
                available: 1
            })
        ));
    }

    #[test]
    fn normality_examples() {
        let pair = hermite_pair(0.0, 1.0, 4);
        let r = normality_scan(&pair, Window::new(1, 1), 1e-10).unwrap();
        assert_eq!(r.determinants[(1, 1)], 0.5);
        assert!(r.normal[(1, 1)]);
        assert_eq!(r.determinants[(0, 0)], 1.0);
        assert!(r.normal[(0, 0)]);

        let same = hermite_pair(1.0, 1.0, 4);
        let r = normality_scan(&same, Window::new(1, 1), 1e-10).unwrap();
        assert_eq!(r.determinants[(1, 1)], 0.0);
        assert!(!r.normal[(1, 1)]);
        assert_eq!(r.non_normal(), vec![(1, 1)]);
    }

    #[test]
    fn first_entries_from_orthogonality() {
        let pair = hermite_pair(0.0, 2.0, 8);
        let t = determinantal_table(&pair, Window::new(1, 1)).unwrap();
        assert_eq!(t.get(0, 0), &[1.0]);
        assert_eq!(t.get(1, 0), &[0.0, 1.0]);
        assert_eq!(t.get(0, 1), &[-1.0, 1.0]);
        let p11 = t.get(1, 1);
        for (got, want) in p11.iter().zip([-0.5, -1.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_hermite_parameters_are_not_normal() {
        let pair = hermite_pair(1.0, 1.0, 8);
        match determinantal_table(&pair, Window::new(2, 2)) {
            Err(Error::NotNormal { indices }) => assert!(indices.contains(&(1, 1))),
            other => panic!("expected NotNormal, got {other:?}"),
        }
    }

    #[test]
    fn window_cap_enforced() {
        let pair = hermite_pair(0.0, 2.0, 40);
        assert!(matches!(
            determinantal_table(&pair, Window::new(7, 6)),
            Err(Error::WindowTooLarge { cap: 12, .. })
        ));
    }

    #[test]
    fn table_entries_are_monic_with_exact_degree() {
        let pair = hermite_pair(-0.5, 1.5, 20);
        let t = determinantal_table(&pair, Window::new(4, 3)).unwrap();
        for ((n, m), p) in t.grid().iter() {
            assert_eq!(p.len(), n + m + 1);
            assert_eq!(p[n + m], 1.0);
        }
        assert!(PolyTable::new(t.grid().clone()).is_ok());
    }
}
