//! Rectangular windows of the quarter lattice and arrays indexed over them.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Inclusive extents `(N, M)` of the index window `0..=N × 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub n: usize,
    pub m: usize,
}

impl Window {
    pub const fn new(n: usize, m: usize) -> Self {
        Window { n, m }
    }

    /// Number of lattice sites in the window.
    pub fn sites(&self) -> usize {
        (self.n + 1) * (self.m + 1)
    }

    pub fn contains(&self, n: usize, m: usize) -> bool {
        n <= self.n && m <= self.m
    }

    /// `true` when `other` fits inside `self`.
    pub fn covers(&self, other: Window) -> bool {
        other.n <= self.n && other.m <= self.m
    }

    /// Window shrunk by one along both axes, `None` if either extent is zero.
    pub fn shrink(&self) -> Option<Window> {
        Some(Window::new(self.n.checked_sub(1)?, self.m.checked_sub(1)?))
    }

    pub fn grow(&self) -> Window {
        Window::new(self.n + 1, self.m + 1)
    }

    /// Linear site index used for finite-section matrices: `n` varies fastest.
    pub fn linear(&self, n: usize, m: usize) -> usize {
        m * (self.n + 1) + n
    }

    /// Inverse of [`Window::linear`].
    pub fn site(&self, idx: usize) -> (usize, usize) {
        (idx % (self.n + 1), idx / (self.n + 1))
    }

    /// All sites, `n` outer and `m` inner (lexicographic order).
    pub fn indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.sites());
        for n in 0..=self.n {
            for m in 0..=self.m {
                out.push((n, m));
            }
        }
        out
    }

    /// Sites on the anti-diagonal `n + m = k`, in increasing `n`.
    pub fn anti_diagonal(&self, k: usize) -> Vec<(usize, usize)> {
        (0..=k.min(self.n))
            .filter(|&n| k - n <= self.m)
            .map(|n| (n, k - n))
            .collect()
    }
}

/// Dense array over a [`Window`], addressed by `(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    window: Window,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_fn(window: Window, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(window.sites());
        for n in 0..=window.n {
            for m in 0..=window.m {
                data.push(f(n, m));
            }
        }
        Grid { window, data }
    }

    /// Builds from row-major nested vectors (`rows[n][m]`).
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first()?.len();
        if n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
            return None;
        }
        let window = Window::new(n_rows - 1, n_cols - 1);
        Some(Grid {
            window,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn get(&self, n: usize, m: usize) -> Option<&T> {
        if self.window.contains(n, m) {
            Some(&self.data[n * (self.window.m + 1) + m])
        } else {
            None
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            window: self.window,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    /// Rows as nested vectors, `rows[n][m]`.
    pub fn rows(&self) -> Vec<&[T]> {
        self.data.chunks(self.window.m + 1).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let cols = self.window.m + 1;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i / cols, i % cols), v))
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(window: Window, value: T) -> Self {
        Grid {
            window,
            data: vec![value; window.sites()],
        }
    }

    /// Copy of the sub-window `0..=w.n × 0..=w.m`.
    pub fn restrict(&self, w: Window) -> Option<Grid<T>> {
        if !self.window.covers(w) {
            return None;
        }
        Some(Grid::from_fn(w, |n, m| self[(n, m)].clone()))
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (n, m): (usize, usize)) -> &T {
        assert!(
            self.window.contains(n, m),
            "index ({n}, {m}) outside window ({}, {})",
            self.window.n,
            self.window.m
        );
        &self.data[n * (self.window.m + 1) + m]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (n, m): (usize, usize)) -> &mut T {
        assert!(self.window.contains(n, m));
        &mut self.data[n * (self.window.m + 1) + m]
    }
}
