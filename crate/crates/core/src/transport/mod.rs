//! Exact squared-Euclidean optimal transport between equal-size uniform
//! empirical measures.
//!
//! With uniform weights `1/k` the transport LP is a linear assignment
//! problem whose optimal vertex is a permutation, so the solver works on
//! permutations directly. Coordinates on which every point of both clouds
//! agrees contribute nothing to any pairwise cost and are skipped; if at most
//! one coordinate remains, the problem is one-dimensional and sorting solves
//! it exactly.

mod lap;

use crate::error::{KvarError, Result};

pub use lap::solve as solve_assignment;

/// `k` points in `ℝᵈ`, each with mass `1/k`. Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    coords: Vec<f64>,
    k: usize,
    d: usize,
}

impl EmpiricalMeasure {
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(KvarError::param("d", "dimension must be at least 1"));
        }
        if coords.is_empty() || coords.len() % d != 0 {
            return Err(KvarError::Shape(format!(
                "{} coordinates do not form a nonempty cloud in dimension {d}",
                coords.len()
            )));
        }
        let k = coords.len() / d;
        Ok(EmpiricalMeasure { coords, k, d })
    }

    pub fn from_1d(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut coords = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(KvarError::Shape(format!(
                    "row of length {} in a cloud of dimension {d}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(coords, d)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    /// Flat row-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Every point shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.d {
            return Err(KvarError::Shape(format!(
                "offset of length {} for a cloud of dimension {}",
                offset.len(),
                self.d
            )));
        }
        let coords = self
            .coords
            .chunks_exact(self.d)
            .flat_map(|p| p.iter().zip(offset).map(|(x, a)| x + a))
            .collect();
        Ok(EmpiricalMeasure { coords, ..*self })
    }

    /// Every point multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        EmpiricalMeasure {
            coords: self.coords.iter().map(|x| factor * x).collect(),
            ..*self
        }
    }
}

/// Optimal matching between two clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentResult {
    /// `(1/k) Σᵢ ‖xᵢ − y_{π(i)}‖²`.
    pub cost: f64,
    /// `permutation[i]` is the index in the second cloud matched to point `i`.
    pub permutation: Vec<usize>,
}

fn check_shapes(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<()> {
    if xs.k != ys.k || xs.d != ys.d {
        return Err(KvarError::Shape(format!(
            "clouds of {}x{} and {}x{} points",
            xs.k, xs.d, ys.k, ys.d
        )));
    }
    Ok(())
}

/// Squared 2-Wasserstein distance between two equal-size empirical measures.
///
/// Uses the sorting path whenever the clouds vary along a single coordinate
/// and the assignment solver otherwise.
pub fn w2sq(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<AssignmentResult> {
    check_shapes(xs, ys)?;
    let active = active_coordinates(xs, ys);
    match active.as_slice() {
        [] => Ok(AssignmentResult {
            cost: 0.0,
            permutation: (0..xs.k).collect(),
        }),
        &[axis] => Ok(sorted_matching(xs, ys, axis)),
        _ => Ok(assignment_matching(xs, ys, &active)),
    }
}

/// Like [`w2sq`] but always goes through the assignment solver, even in one
/// dimension.
pub fn w2sq_assignment(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<AssignmentResult> {
    check_shapes(xs, ys)?;
    let active = active_coordinates(xs, ys);
    Ok(assignment_matching(xs, ys, &active))
}

/// `(1/k) Σᵢ (x₍ᵢ₎ − y₍ᵢ₎)²` for two ascending lists of equal length.
pub fn w2sq_1d(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(KvarError::Shape(format!(
            "sorted lists of lengths {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(ys.windows(2).all(|w| w[0] <= w[1]));
    let sum: f64 = xs.iter().zip(ys).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / xs.len() as f64)
}

/// Dense `k × k` matrix of squared distances, row-major.
pub fn cost_matrix(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<Vec<f64>> {
    check_shapes(xs, ys)?;
    let all: Vec<usize> = (0..xs.d).collect();
    Ok(cost_matrix_on(xs, ys, &all))
}

/// Coordinates on which the two clouds are not all equal to one value.
fn active_coordinates(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Vec<usize> {
    (0..xs.d)
        .filter(|&c| {
            let first = xs.coords[c];
            xs.points().chain(ys.points()).any(|p| p[c] != first)
        })
        .collect()
}

fn cost_matrix_on(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure, axes: &[usize]) -> Vec<f64> {
    let k = xs.k;
    // Gather the active coordinates contiguously so the inner loop is dense.
    let gather = |m: &EmpiricalMeasure| -> Vec<f64> {
        m.points()
            .flat_map(|p| axes.iter().map(move |&c| p[c]))
            .collect()
    };
    let (gx, gy) = (gather(xs), gather(ys));
    let a = axes.len();
    let mut cost = vec![0.0; k * k];
    for (i, row) in cost.chunks_exact_mut(k).enumerate() {
        let x = &gx[i * a..(i + 1) * a];
        for (j, cell) in row.iter_mut().enumerate() {
            let y = &gy[j * a..(j + 1) * a];
            *cell = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
        }
    }
    cost
}

fn assignment_matching(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure, axes: &[usize]) -> AssignmentResult {
    let k = xs.k;
    let cost = cost_matrix_on(xs, ys, axes);
    let permutation = lap::solve(&cost, k);
    let total: f64 = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * k + j])
        .sum();
    AssignmentResult {
        cost: total / k as f64,
        permutation,
    }
}

fn sorted_matching(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure, axis: usize) -> AssignmentResult {
    let k = xs.k;
    let order = |m: &EmpiricalMeasure| {
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| m.point(a)[axis].total_cmp(&m.point(b)[axis]));
        idx
    };
    let (ox, oy) = (order(xs), order(ys));
    let mut permutation = vec![0; k];
    let mut total = 0.0;
    for (&i, &j) in ox.iter().zip(&oy) {
        permutation[i] = j;
        let diff = xs.point(i)[axis] - ys.point(j)[axis];
        total += diff * diff;
    }
    AssignmentResult {
        cost: total / k as f64,
        permutation,
    }
}
