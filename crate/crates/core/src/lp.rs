//! Dense phase-1 simplex for small feasibility problems `A x = b, x >= 0`.
//!
//! Bland's rule picks both the entering and the leaving column, so the
//! method terminates on degenerate problems. When the system is infeasible
//! the final reduced costs of the artificial columns give a Farkas vector
//! `y` with `Aᵀy <= 0` and `bᵀy > 0`.

use thiserror::Error;

/// Phase-1 optimum at or below this value counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint matrix rows have inconsistent lengths")]
    Ragged,
    #[error("right-hand side has {got} entries for {rows} rows")]
    RhsLength { rows: usize, got: usize },
    #[error("simplex did not terminate within {0} pivots")]
    PivotLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    /// Minimal total artificial mass.
    pub infeasibility: f64,
    /// Primal point attaining it (structural columns only).
    pub x: Vec<f64>,
    /// Dual vector in the sign convention of the original rows.
    pub y: Vec<f64>,
}

impl PhaseOne {
    pub fn feasible(&self) -> bool {
        self.infeasibility <= FEASIBILITY_TOL
    }
}

/// Minimises the sum of artificials for `A x + s = b`.
pub fn phase_one(a: &[Vec<f64>], b: &[f64]) -> Result<PhaseOne, LpError> {
    let m = a.len();
    if b.len() != m {
        return Err(LpError::RhsLength { rows: m, got: b.len() });
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(LpError::Ragged);
    }
    let width = n + m + 1;
    let rhs = width - 1;

    let mut sign = vec![1.0; m];
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, row) in a.iter().enumerate() {
        if b[k] < 0.0 {
            sign[k] = -1.0;
        }
        let mut r = vec![0.0; width];
        for j in 0..n {
            r[j] = sign[k] * row[j];
        }
        r[n + k] = 1.0;
        r[rhs] = sign[k] * b[k];
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs with all artificials basic at cost one
    let mut obj = vec![0.0; width];
    obj[n..n + m].fill(1.0);
    for r in &t {
        for j in 0..width {
            obj[j] -= r[j];
        }
    }

    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| obj[j] < -PIVOT_TOL) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for k in 0..m {
            let coef = t[k][enter];
            if coef > PIVOT_TOL {
                let ratio = t[k][rhs] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[k] < basis[l]),
                };
                if better {
                    best = ratio.min(best);
                    leave = Some(k);
                }
            }
        }
        // phase 1 is bounded below by zero, so a missing ratio means the
        // column only looked improving through round-off
        let Some(l) = leave else {
            obj[enter] = 0.0;
            continue;
        };
        pivot(&mut t, &mut obj, l, enter);
        basis[l] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(LpError::PivotLimit(MAX_PIVOTS));
        }
    }

    let mut x = vec![0.0; n];
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[k][rhs].max(0.0);
        }
    }
    let y = (0..m).map(|k| sign[k] * (1.0 - obj[n + k])).collect();
    Ok(PhaseOne {
        infeasibility: (-obj[rhs]).max(0.0),
        x,
        y,
    })
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pr = t[row].clone();
    for (k, r) in t.iter_mut().enumerate() {
        if k != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pr) {
                    *v -= f * pv;
                }
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for (v, pv) in obj.iter_mut().zip(&pr) {
            *v -= f * pv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(r, bi)| (r.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - bi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn feasible_system() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let b = vec![1.0, 2.0];
        let r = phase_one(&a, &b).unwrap();
        assert!(r.feasible());
        assert!(residual(&a, &b, &r.x) < 1e-12);
        assert!(r.x.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn negative_rhs_is_handled() {
        let a = vec![vec![-1.0, -1.0]];
        let r = phase_one(&a, &[-3.0]).unwrap();
        assert!(r.feasible());
        assert!((r.x[0] + r.x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_gives_farkas_vector() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 2.0];
        let r = phase_one(&a, &b).unwrap();
        assert!(!r.feasible());
        assert!((r.infeasibility - 1.0).abs() < 1e-12);
        for j in 0..2 {
            let aty: f64 = (0..2).map(|k| a[k][j] * r.y[k]).sum();
            assert!(aty <= 1e-12);
        }
        let bty: f64 = b.iter().zip(&r.y).map(|(p, q)| p * q).sum();
        assert!((bty - r.infeasibility).abs() < 1e-12);

        // sign convention survives row negation
        let a = vec![vec![1.0], vec![-1.0]];
        let b = vec![1.0, -2.0];
        let r = phase_one(&a, &b).unwrap();
        assert!(!r.feasible());
        let aty = a[0][0] * r.y[0] + a[1][0] * r.y[1];
        assert!(aty <= 1e-12);
        assert!(b[0] * r.y[0] + b[1] * r.y[1] > 0.0);
    }

    #[test]
    fn degenerate_redundant_rows() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]];
        let b = vec![0.5, 0.5, 0.0];
        let r = phase_one(&a, &b).unwrap();
        assert!(r.feasible());
        assert!((r.x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(phase_one(&[vec![1.0]], &[]).unwrap_err(), LpError::RhsLength { rows: 1, got: 0 });
        assert_eq!(phase_one(&[vec![1.0], vec![]], &[1.0, 1.0]).unwrap_err(), LpError::Ragged);
    }
}
