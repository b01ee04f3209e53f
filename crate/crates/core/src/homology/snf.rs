use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Smith normal form `U·M·V = S` with the inverses of both transforms.
#[derive(Clone, Debug)]
pub struct SnfResult {
    /// Nonzero diagonal entries of `S`, positive, each dividing the next.
    pub diagonal: Vec<BigInt>,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub rows: usize,
    pub cols: usize,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// `S` as a full matrix.
    pub fn s(&self) -> IntMatrix {
        let mut s = IntMatrix::zeros(self.rows, self.cols);
        for (i, d) in self.diagonal.iter().enumerate() {
            s[(i, i)] = d.clone();
        }
        s
    }

    /// All `min(rows, cols)` diagonal entries including trailing zeros.
    pub fn full_diagonal(&self) -> Vec<BigInt> {
        let mut out = self.diagonal.clone();
        out.resize(self.rows.min(self.cols), BigInt::zero());
        out
    }
}

/// Reduction state: the working matrix and the four transforms, kept in
/// step by the elementary operations below.
struct State {
    m: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl State {
    /// `row_dst += k · row_src`.
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.m.add_row(dst, src, k);
        self.u.add_row(dst, src, k);
        self.u_inv.add_col(src, dst, &-k);
    }

    /// `col_dst += k · col_src`.
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.m.add_col(dst, src, k);
        self.v.add_col(dst, src, k);
        self.v_inv.add_row(src, dst, &-k);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    fn negate_row(&mut self, r: usize) {
        self.m.negate_row(r);
        self.u.negate_row(r);
        self.u_inv.negate_col(r);
    }

    /// Position of a nonzero entry of least absolute value in the
    /// submatrix `[t.., t..]`, first in row-major order on ties.
    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for r in t..self.m.rows() {
            for c in t..self.m.cols() {
                let e = &self.m[(r, c)];
                if e.is_zero() {
                    continue;
                }
                let a = e.abs();
                if best.as_ref().is_none_or(|(_, b)| a < *b) {
                    best = Some(((r, c), a));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// Clears row and column `t` outside the diagonal, leaving at `(t, t)`
    /// an entry dividing everything in the remaining submatrix.
    fn reduce_at(&mut self, t: usize) -> bool {
        let Some((r, c)) = self.min_pivot(t) else {
            return false;
        };
        self.swap_rows(t, r);
        self.swap_cols(t, c);
        loop {
            let mut dirty = false;
            for r in t + 1..self.m.rows() {
                if self.m[(r, t)].is_zero() {
                    continue;
                }
                let q = self.m[(r, t)].div_floor(&self.m[(t, t)]);
                self.add_row(r, t, &-q);
                if !self.m[(r, t)].is_zero() {
                    dirty = true;
                }
            }
            for c in t + 1..self.m.cols() {
                if self.m[(t, c)].is_zero() {
                    continue;
                }
                let q = self.m[(t, c)].div_floor(&self.m[(t, t)]);
                self.add_col(c, t, &-q);
                if !self.m[(t, c)].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // A remainder smaller than the pivot is left; move it in.
                let (r, c) = self.min_pivot_in_cross(t);
                self.swap_rows(t, r);
                self.swap_cols(t, c);
                continue;
            }
            let offender = (t + 1..self.m.rows()).find(|&r| {
                (t + 1..self.m.cols()).any(|c| !self.m[(r, c)].is_multiple_of(&self.m[(t, t)]))
            });
            match offender {
                Some(r) => self.add_row(t, r, &BigInt::from(1)),
                None => break,
            }
        }
        if self.m[(t, t)].is_negative() {
            self.negate_row(t);
        }
        true
    }

    /// Smallest nonzero entry in row `t` or column `t`.
    fn min_pivot_in_cross(&self, t: usize) -> (usize, usize) {
        let mut best = ((t, t), self.m[(t, t)].abs());
        for r in t + 1..self.m.rows() {
            let a = self.m[(r, t)].abs();
            if !a.is_zero() && a < best.1 {
                best = ((r, t), a);
            }
        }
        for c in t + 1..self.m.cols() {
            let a = self.m[(t, c)].abs();
            if !a.is_zero() && a < best.1 {
                best = ((t, c), a);
            }
        }
        best.0
    }
}

/// Smith normal form by row and column reduction with least-magnitude
/// pivots, in exact integer arithmetic.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (rows, cols) = (m.rows(), m.cols());
    let mut st = State {
        m: m.clone(),
        u: IntMatrix::identity(rows),
        u_inv: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
        v_inv: IntMatrix::identity(cols),
    };
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        if !st.reduce_at(t) {
            break;
        }
        diagonal.push(st.m[(t, t)].clone());
    }
    SnfResult {
        diagonal,
        u: st.u,
        u_inv: st.u_inv,
        v: st.v,
        v_inv: st.v_inv,
        rows,
        cols,
    }
}
