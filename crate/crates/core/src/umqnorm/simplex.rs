//! Exact simplex for min Σ cⱼ|xⱼ| subject to Σ xⱼ aⱼ = b.
//!
//! Each free variable is split as xⱼ = xⱼ⁺ − xⱼ⁻; the two halves share one
//! tableau column up to sign. The LP must contain a unit column of cost 1
//! for every row, which gives an immediately feasible starting basis.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// Sparse column: (row, value) pairs.
pub type SparseColumn = Vec<(usize, Rational)>;

#[derive(Clone, Debug)]
pub struct L1Lp {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub costs: Vec<Rational>,
    pub rhs: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    /// Signed value per column.
    pub x: Vec<Rational>,
    /// Dual multiplier per row.
    pub y: Vec<Rational>,
    pub objective: Rational,
    /// Basic (column, sign) per row.
    pub basis: Vec<(usize, i8)>,
    pub pivots: usize,
}

impl L1Lp {
    fn unit_columns(&self) -> Result<Vec<usize>> {
        let mut unit = vec![usize::MAX; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            if let [(r, v)] = col.as_slice() {
                if *v == int(1) && self.costs[j] == int(1) && unit[*r] == usize::MAX {
                    unit[*r] = j;
                }
            }
        }
        if unit.contains(&usize::MAX) {
            return Err(Error::Internal("LP lacks a unit column for some row".into()));
        }
        Ok(unit)
    }

    pub fn solve(&self) -> Result<L1Solution> {
        let m = self.rows;
        let n = self.columns.len();
        let unit = self.unit_columns()?;

        // Tableau T = B⁻¹A with B = diag(s), s = sign(b).
        let sign: Vec<Rational> = self
            .rhs
            .iter()
            .map(|b| if b.is_negative() { int(-1) } else { int(1) })
            .collect();
        let mut t = vec![vec![Rational::zero(); n]; m];
        for (j, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                t[*r][j] = v * &sign[*r];
            }
        }
        let mut beta: Vec<Rational> = self.rhs.iter().map(|b| b.abs()).collect();
        let mut basis: Vec<(usize, i8)> = (0..m)
            .map(|r| (unit[r], if sign[r].is_negative() { -1 } else { 1 }))
            .collect();
        // z = c_B B⁻¹ A, so the reduced costs are c − z (plus half) and c + z (minus half).
        let mut z = vec![Rational::zero(); n];
        for (r, row) in t.iter().enumerate() {
            let cb = &self.costs[basis[r].0];
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    z[j] += cb * v;
                }
            }
        }

        let mut pivots = 0usize;
        loop {
            // Bland: lowest variable index 2j (plus) or 2j+1 (minus).
            let mut entering = None;
            for j in 0..n {
                if &self.costs[j] - &z[j] < Rational::zero() {
                    entering = Some((j, 1i8));
                    break;
                }
                if &self.costs[j] + &z[j] < Rational::zero() {
                    entering = Some((j, -1i8));
                    break;
                }
            }
            let Some((e, es)) = entering else { break };
            let es_r = int(es as i64);

            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..m {
                let a = &t[r][e] * &es_r;
                if a.is_positive() {
                    let ratio = &beta[r] / &a;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best
                                || (ratio == *best && var_index(basis[r]) < var_index(basis[*lr]))
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, _)) = leave else {
                return Err(Error::Internal("unbounded l1 program".into()));
            };

            let piv = &t[pr][e] * &es_r;
            let inv = piv.recip();
            let prow: Vec<Rational> = t[pr]
                .iter()
                .map(|v| if v.is_zero() { Rational::zero() } else { v * &inv })
                .collect();
            let pbeta = &beta[pr] / &piv;
            let nz: Vec<usize> = (0..n).filter(|&j| !prow[j].is_zero()).collect();
            for r in 0..m {
                if r == pr || t[r][e].is_zero() {
                    continue;
                }
                let f = &t[r][e] * &es_r;
                for &j in &nz {
                    let d = &f * &prow[j];
                    t[r][j] -= d;
                }
                beta[r] -= &f * &pbeta;
            }
            let fz = &z[e] * &es_r - &self.costs[e];
            for &j in &nz {
                let d = &fz * &prow[j];
                z[j] -= d;
            }
            t[pr] = prow;
            beta[pr] = pbeta;
            basis[pr] = (e, es);
            pivots += 1;
        }

        let mut x = vec![Rational::zero(); n];
        for (r, &(j, s)) in basis.iter().enumerate() {
            x[j] += &beta[r] * int(s as i64);
        }
        // For the unit column of row r, z = y_r.
        let y: Vec<Rational> = (0..m).map(|r| z[unit[r]].clone()).collect();
        let objective = x
            .iter()
            .zip(&self.costs)
            .map(|(v, c)| v.abs() * c)
            .fold(Rational::zero(), |a, b| a + b);
        Ok(L1Solution {
            x,
            y,
            objective,
            basis,
            pivots,
        })
    }

    /// Independent optimality check: primal feasibility, dual feasibility
    /// |aⱼ·y| ≤ cⱼ, and equal objectives.
    pub fn verify(&self, sol: &L1Solution) -> Result<()> {
        let mut ax = vec![Rational::zero(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            if sol.x[j].is_zero() {
                continue;
            }
            for (r, v) in col {
                ax[*r] += v * &sol.x[j];
            }
        }
        if ax != self.rhs {
            return Err(Error::Internal("primal certificate infeasible".into()));
        }
        for (j, col) in self.columns.iter().enumerate() {
            let dot = col
                .iter()
                .map(|(r, v)| v * &sol.y[*r])
                .fold(Rational::zero(), |a, b| a + b);
            if dot.abs() > self.costs[j] {
                return Err(Error::Internal(format!("dual certificate violated at column {j}")));
            }
        }
        let dual_obj = self
            .rhs
            .iter()
            .zip(&sol.y)
            .map(|(b, y)| b * y)
            .fold(Rational::zero(), |a, b| a + b);
        let primal_obj = sol
            .x
            .iter()
            .zip(&self.costs)
            .map(|(v, c)| v.abs() * c)
            .fold(Rational::zero(), |a, b| a + b);
        if dual_obj != primal_obj || primal_obj != sol.objective {
            return Err(Error::Internal("duality gap is nonzero".into()));
        }
        Ok(())
    }
}

fn var_index((j, s): (usize, i8)) -> usize {
    2 * j + usize::from(s < 0)
}
