//! Nearest-neighbor recurrence coefficients and the two routes that step a
//! table forward:
//!
//! ```text
//! P_{n+1,m} = (x - c_{n,m}) P_{n,m} - a_{n,m} P_{n-1,m} - b_{n,m} P_{n,m-1}
//! P_{n,m+1} = (x - d_{n,m}) P_{n,m} - a_{n,m} P_{n-1,m} - b_{n,m} P_{n,m-1}
//! ```
//!
//! with `a_{0,m} = b_{n,0} = 0`.

use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::mop_table::PolyTable;
use crate::par::Exec;
use crate::poly;
use crate::scalar::{cast, Real};

/// The four coefficient grids `a, b, c, d` on a common window.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffField<T = f64> {
    a: Grid<T>,
    b: Grid<T>,
    c: Grid<T>,
    d: Grid<T>,
}

impl<T: Real> CoeffField<T> {
    /// Validates shapes, finiteness and the boundary values
    /// `a_{0,m} = b_{n,0} = 0`.
    pub fn new(a: Grid<T>, b: Grid<T>, c: Grid<T>, d: Grid<T>) -> Result<Self> {
        let w = a.window();
        for (name, g) in [("b", &b), ("c", &c), ("d", &d)] {
            if g.window() != w {
                return Err(Error::Shape(format!(
                    "grid {name} has window {:?}, expected {:?}",
                    g.window(),
                    w
                )));
            }
        }
        for (name, g) in [("a", &a), ("b", &b), ("c", &c), ("d", &d)] {
            if let Some(((n, m), _)) = g.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Domain(format!("{name}_{{{n},{m}}} is not finite")));
            }
        }
        for m in 0..=w.m {
            if a[(0, m)] != T::zero() {
                return Err(Error::Domain(format!("a_{{0,{m}}} must vanish")));
            }
        }
        for n in 0..=w.n {
            if b[(n, 0)] != T::zero() {
                return Err(Error::Domain(format!("b_{{{n},0}} must vanish")));
            }
        }
        Ok(CoeffField { a, b, c, d })
    }

    /// Skips every check. Shapes are still assumed to agree.
    pub fn new_unchecked(a: Grid<T>, b: Grid<T>, c: Grid<T>, d: Grid<T>) -> Self {
        CoeffField { a, b, c, d }
    }

    /// Builds a field from a closure returning `(a, b, c, d)` at each site.
    /// Boundary values are forced to zero.
    pub fn from_fn(window: Window, mut f: impl FnMut(usize, usize) -> (T, T, T, T)) -> Self {
        let vals = Grid::from_fn(window, &mut f);
        CoeffField {
            a: Grid::from_fn(window, |n, m| if n == 0 { T::zero() } else { vals[(n, m)].0 }),
            b: Grid::from_fn(window, |n, m| if m == 0 { T::zero() } else { vals[(n, m)].1 }),
            c: vals.map(|v| v.2),
            d: vals.map(|v| v.3),
        }
    }

    pub fn window(&self) -> Window {
        self.a.window()
    }

    pub fn a(&self) -> &Grid<T> {
        &self.a
    }

    pub fn b(&self) -> &Grid<T> {
        &self.b
    }

    pub fn c(&self) -> &Grid<T> {
        &self.c
    }

    pub fn d(&self) -> &Grid<T> {
        &self.d
    }

    /// `(a, b, c, d)` at one site.
    pub fn at(&self, n: usize, m: usize) -> (T, T, T, T) {
        (self.a[(n, m)], self.b[(n, m)], self.c[(n, m)], self.d[(n, m)])
    }

    /// `(c + d) / 2`.
    pub fn q(&self, n: usize, m: usize) -> T {
        (self.c[(n, m)] + self.d[(n, m)]) / T::from_f64(2.0)
    }

    pub fn restrict(&self, w: Window) -> Option<Self> {
        Some(CoeffField {
            a: self.a.restrict(w)?,
            b: self.b.restrict(w)?,
            c: self.c.restrict(w)?,
            d: self.d.restrict(w)?,
        })
    }

    pub fn cast<U: Real>(&self) -> CoeffField<U> {
        CoeffField {
            a: self.a.map(|&v| cast(v)),
            b: self.b.map(|&v| cast(v)),
            c: self.c.map(|&v| cast(v)),
            d: self.d.map(|&v| cast(v)),
        }
    }

    pub fn to_f64(&self) -> CoeffField<f64> {
        self.cast()
    }

    /// Largest relative difference `|x - y| / max(1, |y|)` over all four grids
    /// on the common window.
    pub fn max_rel_diff(&self, other: &CoeffField<T>) -> f64 {
        let w = self.window();
        let ow = other.window();
        let common = Window::new(w.n.min(ow.n), w.m.min(ow.m));
        let mut worst = 0.0f64;
        for (n, m) in common.indices() {
            let x = self.at(n, m);
            let y = other.at(n, m);
            for (u, v) in [(x.0, y.0), (x.1, y.1), (x.2, y.2), (x.3, y.3)] {
                let (u, v) = (u.to_f64(), v.to_f64());
                worst = worst.max((u - v).abs() / v.abs().max(1.0));
            }
        }
        worst
    }
}

/// Outcome of stepping a table with both routes.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    /// Relative disagreement of the two routes where both reach an index.
    pub discrepancies: Grid<Option<f64>>,
    pub max_discrepancy: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    /// Allowed relative disagreement between the routes.
    pub tolerance: f64,
    pub exec: Exec,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            tolerance: 1e-8,
            exec: Exec::default(),
        }
    }
}

/// `(x - s) P - a P_west - b P_south` from stored neighbors.
fn step<T: Real>(p: &[T], shift: T, a: T, west: Option<&[T]>, b: T, south: Option<&[T]>) -> Vec<T> {
    let mut out = poly::axpy(&poly::shift(p), -shift, p);
    if let Some(w) = west {
        if a != T::zero() {
            out = poly::axpy(&out, -a, w);
        }
    }
    if let Some(s) = south {
        if b != T::zero() {
            out = poly::axpy(&out, -b, s);
        }
    }
    out.truncate(p.len() + 1);
    out
}

fn neighbor<T>(rows: &[Vec<Option<Vec<T>>>], n: Option<usize>, m: Option<usize>) -> Option<&[T]> {
    rows[n?][m?].as_deref()
}

/// Steps `P_{n,m}` from `P_{0,0} = 1` over `window`. Where both routes reach
/// an index their results are compared and the first route's value is kept.
pub fn generate_table<T: Real>(field: &CoeffField<T>, window: Window) -> Result<(PolyTable<T>, GenerationReport)> {
    generate_table_with(field, window, &GenerateOptions::default())
}

pub fn generate_table_with<T: Real>(
    field: &CoeffField<T>,
    window: Window,
    opts: &GenerateOptions,
) -> Result<(PolyTable<T>, GenerationReport)> {
    if !field.window().covers(window) {
        return Err(Error::Shape(format!(
            "field window {:?} does not cover table window {:?}",
            field.window(),
            window
        )));
    }
    let mut rows: Vec<Vec<Option<Vec<T>>>> = vec![vec![None; window.m + 1]; window.n + 1];
    rows[0][0] = Some(vec![T::one()]);
    let mut disc: Grid<Option<f64>> = Grid::filled(window, None);
    let mut worst = 0.0f64;
    for k in 1..=window.n + window.m {
        let diag = window.anti_diagonal(k);
        let computed = opts.exec.map(&diag, |&(n, m)| {
            let first = (n > 0).then(|| {
                let (a, b, c, _) = field.at(n - 1, m);
                let p = neighbor(&rows, Some(n - 1), Some(m)).expect("filled diagonal");
                let west = neighbor(&rows, n.checked_sub(2), Some(m));
                let south = neighbor(&rows, Some(n - 1), m.checked_sub(1));
                step(p, c, a, west, b, south)
            });
            let second = (m > 0).then(|| {
                let (a, b, _, d) = field.at(n, m - 1);
                let p = neighbor(&rows, Some(n), Some(m - 1)).expect("filled diagonal");
                let west = neighbor(&rows, n.checked_sub(1), Some(m - 1));
                let south = neighbor(&rows, Some(n), m.checked_sub(2));
                step(p, d, a, west, b, south)
            });
            match (first, second) {
                (Some(p), Some(q)) => {
                    let dv = poly::rel_diff(&q, &p);
                    (p, Some(dv))
                }
                (Some(p), None) | (None, Some(p)) => (p, None),
                (None, None) => unreachable!("k >= 1"),
            }
        });
        for (&(n, m), (p, dv)) in diag.iter().zip(computed) {
            if let Some(dv) = dv {
                if !(dv <= opts.tolerance) {
                    return Err(Error::InconsistentField {
                        index: (n, m),
                        discrepancy: dv,
                    });
                }
                worst = worst.max(dv);
            }
            disc[(n, m)] = dv;
            rows[n][m] = Some(p);
        }
    }
    let grid = Grid::from_fn(window, |n, m| rows[n][m].take().expect("all filled"));
    Ok((
        PolyTable::from_grid_unchecked(grid),
        GenerationReport {
            discrepancies: disc,
            max_discrepancy: worst,
            tolerance: opts.tolerance,
        },
    ))
}

/// Tolerance for [`extract_coeffs`] residuals, relative to the largest
/// coefficient of the polynomial being reproduced.
pub const DEFAULT_FIT_TOLERANCE: f64 = 1e-8;

/// Recovers `a, b, c, d` from a table. A table on `(N, M)` yields a field on
/// `(N - 1, M - 1)`, since each site needs its east and north neighbors.
pub fn extract_coeffs<T: Real>(table: &PolyTable<T>) -> Result<CoeffField<T>> {
    extract_coeffs_with(table, DEFAULT_FIT_TOLERANCE, Exec::default())
}

pub fn extract_coeffs_with<T: Real>(table: &PolyTable<T>, tolerance: f64, exec: Exec) -> Result<CoeffField<T>> {
    let fw = table.window().shrink().ok_or_else(|| {
        Error::Shape(format!(
            "table window {:?} too small to extract coefficients",
            table.window()
        ))
    })?;
    let indices = fw.indices();
    let fitted = exec.map(&indices, |&(n, m)| fit_site(table, n, m, tolerance));
    let mut vals = Vec::with_capacity(indices.len());
    for r in fitted {
        vals.push(r?);
    }
    let at = |n: usize, m: usize| vals[n * (fw.m + 1) + m];
    Ok(CoeffField {
        a: Grid::from_fn(fw, |n, m| at(n, m).0),
        b: Grid::from_fn(fw, |n, m| at(n, m).1),
        c: Grid::from_fn(fw, |n, m| at(n, m).2),
        d: Grid::from_fn(fw, |n, m| at(n, m).3),
    })
}

fn fit_site<T: Real>(table: &PolyTable<T>, n: usize, m: usize, tol: f64) -> Result<(T, T, T, T)> {
    let k = n + m;
    let p = table.get(n, m);
    let xp = poly::shift(p);
    let west = (n > 0).then(|| table.get(n - 1, m));
    let south = (m > 0).then(|| table.get(n, m - 1));

    // Remainder of the first route: R = -c P - a P_west - b P_south.
    let east = table.get(n + 1, m);
    let r = poly::axpy(east, -T::one(), &xp);
    let c = -r[k];
    let r1 = poly::axpy(&r, c, p);
    let (a, b) = match (west, south) {
        (None, None) => (T::zero(), T::zero()),
        (Some(_), None) => (-r1[k - 1], T::zero()),
        (None, Some(_)) => (T::zero(), -r1[k - 1]),
        (Some(w), Some(s)) => {
            // Both neighbors are monic of degree k-1, so a + b is the next
            // coefficient; their difference separates a from b.
            let sum = -r1[k - 1];
            let rest = poly::axpy(&r1, sum, s);
            let diff = poly::axpy(w, -T::one(), s);
            let mut num = T::zero();
            let mut den = T::zero();
            for (x, y) in rest.iter().zip(&diff) {
                num += *x * *y;
                den += *y * *y;
            }
            if den == T::zero() {
                return Err(Error::Fit {
                    index: (n, m),
                    residual: f64::INFINITY,
                });
            }
            let a = -num / den;
            (a, sum - a)
        }
    };

    let north = table.get(n, m + 1);
    let r2 = poly::axpy(north, -T::one(), &xp);
    let d = -r2[k];

    let predict = |shift: T| {
        let mut out = poly::axpy(&xp, -shift, p);
        if let Some(w) = west {
            out = poly::axpy(&out, -a, w);
        }
        if let Some(s) = south {
            out = poly::axpy(&out, -b, s);
        }
        out
    };
    let res1 = poly::rel_diff(&predict(c), east);
    let res2 = poly::rel_diff(&predict(d), north);
    let residual = res1.max(res2);
    if !(residual <= tol) {
        return Err(Error::Fit {
            index: (n, m),
            residual,
        });
    }
    Ok((a, b, c, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite_field(c1: f64, c2: f64, w: Window) -> CoeffField<f64> {
        CoeffField::from_fn(w, |n, m| (n as f64 / 2.0, m as f64 / 2.0, c1 / 2.0, c2 / 2.0))
    }

    #[test]
    fn boundary_values_validated() {
        let w = Window::new(1, 1);
        let one = Grid::filled(w, 1.0);
        let zero = Grid::filled(w, 0.0);
        assert!(matches!(
            CoeffField::new(one.clone(), zero.clone(), zero.clone(), zero.clone()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            CoeffField::new(zero.clone(), one.clone(), zero.clone(), zero.clone()),
            Err(Error::Domain(_))
        ));
        assert!(CoeffField::new(zero.clone(), zero.clone(), one.clone(), one.clone()).is_ok());
        let small = Grid::filled(Window::new(0, 1), 0.0);
        assert!(matches!(
            CoeffField::new(zero.clone(), small, zero.clone(), zero),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn hermite_first_steps() {
        let field = hermite_field(0.0, 2.0, Window::new(2, 2));
        let (t, report) = generate_table(&field, Window::new(1, 1)).unwrap();
        assert_eq!(t.get(1, 0), &[0.0, 1.0]);
        assert_eq!(t.get(0, 1), &[-1.0, 1.0]);
        assert_eq!(t.get(1, 1), &[-0.5, -1.0, 1.0]);
        assert_eq!(report.max_discrepancy, 0.0);
        assert_eq!(report.discrepancies[(1, 1)], Some(0.0));
        assert_eq!(report.discrepancies[(1, 0)], None);
    }

    #[test]
    fn incompatible_field_is_rejected() {
        let w = Window::new(2, 2);
        let field = CoeffField::from_fn(w, |_, m| (1.0, 1.0, m as f64, 1.0));
        assert!(matches!(
            generate_table(&field, w),
            Err(Error::InconsistentField { index: (1, 1), .. })
        ));
    }

    #[test]
    fn field_must_cover_table() {
        let field = hermite_field(0.0, 1.0, Window::new(1, 1));
        assert!(matches!(
            generate_table(&field, Window::new(2, 1)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn extraction_round_trip() {
        let w = Window::new(4, 4);
        let field = hermite_field(-0.3, 1.1, w);
        let (t, _) = generate_table(&field, w).unwrap();
        let back = extract_coeffs(&t).unwrap();
        assert_eq!(back.window(), Window::new(3, 3));
        assert!(back.max_rel_diff(&field.restrict(Window::new(3, 3)).unwrap()) < 1e-12);
        for m in 0..=3 {
            assert_eq!(back.a()[(0, m)], 0.0);
        }
        for n in 0..=3 {
            assert_eq!(back.b()[(n, 0)], 0.0);
        }
    }

    #[test]
    fn extraction_rejects_non_recurrent_tables() {
        let w = Window::new(1, 1);
        let mut grid = Grid::from_fn(w, |n, m| {
            let mut p = vec![0.0; n + m + 1];
            p[n + m] = 1.0;
            p
        });
        grid[(1, 1)] = vec![5.0, 0.0, 1.0];
        let t = PolyTable::new(grid).unwrap();
        assert!(extract_coeffs(&t).is_ok());
        let w = Window::new(2, 1);
        let mut grid = Grid::from_fn(w, |n, m| {
            let mut p = vec![0.0; n + m + 1];
            p[n + m] = 1.0;
            p
        });
        grid[(2, 0)] = vec![1.0, 0.0, 1.0];
        grid[(1, 1)] = vec![3.0, 0.0, 1.0];
        let t = PolyTable::new(grid).unwrap();
        assert!(matches!(extract_coeffs(&t), Err(Error::Fit { .. })));
    }

    #[test]
    fn extraction_needs_a_nontrivial_window() {
        let t = PolyTable::new(Grid::filled(Window::new(0, 0), vec![1.0])).unwrap();
        assert!(matches!(extract_coeffs(&t), Err(Error::Shape(_))));
    }
}
