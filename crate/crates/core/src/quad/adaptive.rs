//! Adaptive bisection cubature over a simplex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::rules::{rule_pair, Rule};
use super::{QuadConfig, QuadError, QuadResult};

/// Error estimates of cells that touch the boundary of the domain are
/// multiplied by this factor, which both refines them first and keeps the
/// reported error honest where the degree-5 comparison is optimistic.
const BOUNDARY_FACTOR: f64 = 10.0;

/// Largest number of cells refined in one parallel round.
const MAX_BATCH: usize = 64;

#[derive(Clone, Debug)]
struct Cell {
    vertices: Vec<Vec<f64>>,
    /// Per vertex, the set of domain faces it lies on.
    masks: Vec<u64>,
    depth: u32,
    value: f64,
    abs_value: f64,
    raw_error: f64,
    error: f64,
}

struct Integrator<'a, F> {
    dim: usize,
    high: Rule,
    low: Rule,
    f: &'a F,
    inv_factorial: f64,
}

impl<F> Integrator<'_, F>
where
    F: Fn(&[f64]) -> Result<f64, QuadError> + Sync,
{
    fn evaluate(&self, vertices: Vec<Vec<f64>>, masks: Vec<u64>, depth: u32) -> Result<Cell, QuadError> {
        let d = self.dim;
        let v0 = &vertices[0];
        let edges: Vec<Vec<f64>> = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
            .collect();
        let volume = determinant(&edges).abs() * self.inv_factorial;
        let map = |p: &[f64]| -> Vec<f64> {
            let mut x = v0.clone();
            for (pi, e) in p.iter().zip(&edges) {
                for (xj, ej) in x.iter_mut().zip(e) {
                    *xj += pi * ej;
                }
            }
            x
        };
        let mut high = 0.0;
        let mut abs_high = 0.0;
        for (p, w) in self.high.points.iter().zip(&self.high.weights) {
            let g = self.sample(&map(p))?;
            high += w * g;
            abs_high += w * g.abs();
        }
        let mut low = 0.0;
        for (p, w) in self.low.points.iter().zip(&self.low.weights) {
            low += w * self.sample(&map(p))?;
        }
        let value = high * volume;
        let raw_error = ((high - low) * volume).abs();
        let touches = masks.iter().any(|m| *m != 0);
        let error = if touches && d > 0 { raw_error * BOUNDARY_FACTOR } else { raw_error };
        Ok(Cell {
            vertices,
            masks,
            depth,
            value,
            abs_value: abs_high * volume,
            raw_error,
            error,
        })
    }

    fn sample(&self, x: &[f64]) -> Result<f64, QuadError> {
        let g = (self.f)(x)?;
        if g.is_finite() {
            Ok(g)
        } else {
            Err(QuadError::NonFinite { point: x.to_vec() })
        }
    }

    fn split(&self, cell: &Cell, i: usize, j: usize) -> Result<[Cell; 2], QuadError> {
        let mid: Vec<f64> = cell.vertices[i]
            .iter()
            .zip(&cell.vertices[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mid_mask = cell.masks[i] & cell.masks[j];
        let mut left = cell.vertices.clone();
        let mut left_masks = cell.masks.clone();
        left[j] = mid.clone();
        left_masks[j] = mid_mask;
        let mut right = cell.vertices.clone();
        let mut right_masks = cell.masks.clone();
        right[i] = mid;
        right_masks[i] = mid_mask;
        Ok([
            self.evaluate(left, left_masks, cell.depth + 1)?,
            self.evaluate(right, right_masks, cell.depth + 1)?,
        ])
    }

    /// Bisects `cell`. The longest edge is always a candidate. In low
    /// dimension, edges whose endpoints lie on different sets of domain
    /// faces are candidates too, and the split with the smallest combined
    /// error is kept. This lets cells flatten against a face carrying a
    /// singularity without producing needles in the interior.
    fn refine(&self, cell: &Cell) -> Result<[Cell; 2], QuadError> {
        let n = cell.vertices.len();
        let len = |i: usize, j: usize| -> f64 {
            cell.vertices[i]
                .iter()
                .zip(&cell.vertices[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let mut longest = (0, 1);
        for i in 0..n {
            for j in i + 1..n {
                if len(i, j) > len(longest.0, longest.1) {
                    longest = (i, j);
                }
            }
        }
        if self.dim > 3 {
            return self.split(cell, longest.0, longest.1);
        }
        let mut candidates = vec![longest];
        for i in 0..n {
            for j in i + 1..n {
                if (i, j) != longest && cell.masks[i] != cell.masks[j] {
                    candidates.push((i, j));
                }
            }
        }
        let mut best: Option<([Cell; 2], f64)> = None;
        for (i, j) in candidates {
            let children = self.split(cell, i, j)?;
            let score = children[0].raw_error + children[1].raw_error;
            if best.as_ref().is_none_or(|(_, s)| score < *s) {
                best = Some((children, score));
            }
        }
        Ok(best.expect("at least one candidate edge").0)
    }
}

fn determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    match n {
        0 => 1.0,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => nalgebra::DMatrix::from_fn(n, n, |r, c| rows[r][c]).determinant(),
    }
}

#[derive(PartialEq)]
struct Key {
    error: f64,
    slot: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.slot.cmp(&self.slot))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Outcome of an adaptive run, before divergence diagnostics.
pub(crate) struct Run {
    pub result: QuadResult,
}

/// Integrates `f` over the simplex with the given vertices (points of `R^d`)
/// to the tolerance in `cfg`.
pub(crate) fn integrate_cell<F>(vertices: Vec<Vec<f64>>, f: &F, cfg: &QuadConfig, rel_tol: f64) -> Result<Run, QuadError>
where
    F: Fn(&[f64]) -> Result<f64, QuadError> + Sync,
{
    let d = vertices.len() - 1;
    let (high, low) = rule_pair(d);
    let inv_factorial = 1.0 / (1..=d).map(|k| k as f64).product::<f64>();
    let integrator = Integrator {
        dim: d,
        high,
        low,
        f,
        inv_factorial,
    };
    // Vertex i of the domain lies on every face except the one opposite it.
    let all_faces: u64 = if d + 1 >= 64 { u64::MAX } else { (1u64 << (d + 1)) - 1 };
    let masks: Vec<u64> = (0..=d).map(|i| all_faces & !(1u64 << i.min(63))).collect();
    let root = integrator.evaluate(vertices, masks, 0)?;
    if d == 0 {
        let result = QuadResult {
            value: root.value,
            error_estimate: 0.0,
            abs_integral_estimate: root.abs_value,
            converged: true,
            subdivisions: 0,
            divergence_detected: false,
        };
        return Ok(Run { result });
    }

    let mut slots: Vec<Option<Cell>> = vec![Some(root)];
    let mut heap = BinaryHeap::new();
    heap.push(Key {
        error: slots[0].as_ref().map_or(0.0, |c| c.error),
        slot: 0,
    });
    // Error held by cells that reached the depth limit and cannot improve.
    let mut frozen_error = 0.0;
    let mut subdivisions = 0usize;
    let tolerance = |value: f64| cfg.abs_tol.max(rel_tol * value.abs());

    let totals = |slots: &[Option<Cell>]| -> (f64, f64, f64) {
        let mut value = 0.0;
        let mut abs = 0.0;
        let mut err = 0.0;
        for c in slots.iter().flatten() {
            value += c.value;
            abs += c.abs_value;
            err += c.error;
        }
        (value, abs, err)
    };

    let (mut value, _, mut error) = totals(&slots);
    let mut rounds = 0usize;
    loop {
        if error <= tolerance(value) {
            let (v, _, e) = totals(&slots);
            value = v;
            error = e;
            if error <= tolerance(value) {
                break;
            }
        }
        if heap.is_empty() || slots.len() >= cfg.max_cells || frozen_error > tolerance(value) {
            break;
        }
        let live = heap.len();
        let batch_size = (live / 8).clamp(1, MAX_BATCH);
        let mut batch = Vec::with_capacity(batch_size);
        while batch.len() < batch_size {
            let Some(Key { slot, .. }) = heap.pop() else { break };
            let depth = slots[slot].as_ref().map_or(0, |c| c.depth);
            if depth >= cfg.max_depth {
                frozen_error += slots[slot].as_ref().map_or(0.0, |c| c.error);
                continue;
            }
            batch.push(slot);
        }
        if batch.is_empty() {
            continue;
        }
        let parents: Vec<Cell> = batch.iter().map(|&s| slots[s].take().expect("live cell")).collect();
        let children: Vec<[Cell; 2]> = parents
            .par_iter()
            .map(|c| integrator.refine(c))
            .collect::<Result<Vec<_>, _>>()?;
        for (parent, kids) in parents.iter().zip(children) {
            value -= parent.value;
            error -= parent.error;
            for kid in kids {
                value += kid.value;
                error += kid.error;
                let slot = slots.len();
                heap.push(Key { error: kid.error, slot });
                slots.push(Some(kid));
            }
            subdivisions += 1;
        }
        rounds += 1;
        if rounds % 64 == 0 {
            let (v, _, e) = totals(&slots);
            value = v;
            error = e;
        }
    }

    let (value, abs, error) = totals(&slots);
    let converged = error <= tolerance(value);
    Ok(Run {
        result: QuadResult {
            value,
            error_estimate: error,
            abs_integral_estimate: abs,
            converged,
            subdivisions,
            divergence_detected: false,
        },
    })
}

/// Vertices of `Δ_d` in `a`-coordinates.
pub(crate) fn standard_vertices(d: usize) -> Vec<Vec<f64>> {
    (0..=d)
        .map(|j| (0..d).map(|i| if i + 1 == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Vertices of the sub-simplex of `Δ_d` where every barycentric coordinate
/// is at least `eps`.
pub(crate) fn shrunken_vertices(d: usize, eps: f64) -> Vec<Vec<f64>> {
    let big = 1.0 - d as f64 * eps;
    (0..=d)
        .map(|j| (0..d).map(|i| if i + 1 == j { big } else { eps }).collect())
        .collect()
}
