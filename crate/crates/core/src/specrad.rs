//! Spectral radius of nonnegative integral kernels on [0,1]²: midpoint
//! Nyström grids, power iteration with Hopf brackets, and the closed form
//! for kernels of convolution type.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::ReducedKernel;
use crate::par::Exec;
use crate::rational::rat;
use crate::umqnorm::NormValue;

pub const DEFAULT_N: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const PARALLEL_MIN_N: usize = 128;

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<f64>),
    /// `upper[d]` = A[i][i+d], `lower[d]` = A[i+d][i].
    Toeplitz { upper: Vec<f64>, lower: Vec<f64> },
}

/// How the diagonal cell of a two-sided kernel with a jump at s = 0 is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagonal {
    /// Value of the λ branch, K(0⁺).
    LambdaBranch,
    /// Mean of K(0⁺) and K(0⁻).
    Average,
}

/// Nyström matrix A[i][j] = K(t_i, t_j)/n at midpoints t_i = (i+½)/n.
#[derive(Clone, Debug)]
pub struct OperatorGrid {
    n: usize,
    storage: Storage,
    entry_min: f64,
    entry_max: f64,
}

fn check_entries(vals: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidKernel(format!("sample {v} is negative or not finite")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

impl OperatorGrid {
    /// General kernel K(s, t).
    pub fn from_fn(n: usize, k: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("grid needs n >= 2".into()));
        }
        let h = 1.0 / n as f64;
        let mut a = vec![0.0; n * n];
        Exec::default().fill(&mut a, |idx| {
            let (i, j) = (idx / n, idx % n);
            k((i as f64 + 0.5) * h, (j as f64 + 0.5) * h) * h
        });
        let (lo, hi) = check_entries(&a)?;
        Ok(OperatorGrid {
            n,
            storage: Storage::Dense(a),
            entry_min: lo,
            entry_max: hi,
        })
    }

    /// Raw row-major matrix, used as given (no 1/n factor).
    pub fn from_matrix(n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n || n == 0 {
            return Err(Error::InvalidInput("matrix is not n×n".into()));
        }
        let (lo, hi) = check_entries(&a)?;
        Ok(OperatorGrid {
            n,
            storage: Storage::Dense(a),
            entry_min: lo,
            entry_max: hi,
        })
    }

    /// Difference kernel K(t_j − t_i); `diag` replaces the sample at 0.
    pub fn toeplitz(n: usize, k: impl Fn(f64) -> f64, diag: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("grid needs n >= 2".into()));
        }
        let h = 1.0 / n as f64;
        let mut upper: Vec<f64> = (0..n).map(|d| k(d as f64 * h) * h).collect();
        upper[0] = diag * h;
        let mut lower: Vec<f64> = (0..n).map(|d| k(-(d as f64) * h) * h).collect();
        lower[0] = upper[0];
        let (l1, h1) = check_entries(&upper)?;
        let (l2, h2) = check_entries(&lower[1..])?;
        Ok(OperatorGrid {
            n,
            storage: Storage::Toeplitz { upper, lower },
            entry_min: l1.min(l2),
            entry_max: h1.max(h2),
        })
    }

    /// Two-sided assembly of a reduced kernel.
    pub fn from_reduced(kernel: &ReducedKernel, n: usize, diag: Diagonal) -> Result<Self> {
        let d = match diag {
            Diagonal::LambdaBranch => kernel.two_sided(0.0),
            Diagonal::Average => kernel.diagonal_average(),
        };
        Self::toeplitz(n, |s| kernel.two_sided(s), d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| (i as f64 + 0.5) / self.n as f64).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(a) => a[i * self.n + j],
            Storage::Toeplitz { upper, lower } => {
                if j >= i {
                    upper[j - i]
                } else {
                    lower[i - j]
                }
            }
        }
    }

    /// Kernel bounds m ≤ n·A ≤ M.
    pub fn kernel_bounds(&self) -> (f64, f64) {
        (self.entry_min * self.n as f64, self.entry_max * self.n as f64)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        (0..n * n).map(|idx| self.get(idx / n, idx % n)).collect()
    }

    /// Matrix product, the grid form of kernel composition ∫K₁(s,u)K₂(u,t)du.
    pub fn compose(&self, other: &OperatorGrid) -> Result<OperatorGrid> {
        if self.n != other.n {
            return Err(Error::InvalidInput("grid sizes differ".into()));
        }
        let n = self.n;
        let a = self.to_dense();
        let b = other.to_dense();
        let mut c = vec![0.0; n * n];
        Exec::default().fill(&mut c, |idx| {
            let (i, j) = (idx / n, idx % n);
            (0..n).map(|k| a[i * n + k] * b[k * n + j]).sum()
        });
        Self::from_matrix(n, c)
    }

    fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        match &self.storage {
            Storage::Dense(a) => a[i * self.n..(i + 1) * self.n]
                .iter()
                .zip(v)
                .map(|(x, y)| x * y)
                .sum(),
            Storage::Toeplitz { upper, lower } => {
                let mut s = 0.0;
                for j in 0..i {
                    s += lower[i - j] * v[j];
                }
                for j in i..self.n {
                    s += upper[j - i] * v[j];
                }
                s
            }
        }
    }

    /// out = A v. Rows may run in parallel; each row sums in a fixed order.
    /// Grids below `PARALLEL_MIN_N` always run sequentially.
    pub fn apply(&self, v: &[f64], out: &mut [f64], exec: Exec) {
        let exec = if self.n < PARALLEL_MIN_N { Exec::Sequential } else { exec };
        exec.fill(out, |i| self.row_dot(i, v));
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HopfRate {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub rate: f64,
}

impl HopfRate {
    /// Guaranteed width after `k` steps: rate^k (M − m).
    pub fn width_bound(&self, k: usize) -> f64 {
        self.rate.powi(k as i32) * (self.big_m - self.m)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusResult {
    pub radius: f64,
    pub bracket: [f64; 2],
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub eigvec: Vec<f64>,
    /// Stored (nested) brackets, one per iteration.
    #[serde(skip)]
    pub history: Vec<[f64; 2]>,
    /// Largest amount by which a freshly computed bracket stuck out of its
    /// predecessor; zero in exact arithmetic.
    pub nesting_defect: f64,
    /// Present when the kernel is bounded below by m > 0.
    pub hopf: Option<HopfRate>,
}

impl RadiusResult {
    pub fn eigvec_csv(&self) -> String {
        let n = self.eigvec.len();
        let mut s = String::from("t,v\n");
        for (i, v) in self.eigvec.iter().enumerate() {
            s.push_str(&format!("{},{}\n", crate::fmt_sig((i as f64 + 0.5) / n as f64), crate::fmt_sig(*v)));
        }
        s
    }
}

pub fn power_iteration_hopf(grid: &OperatorGrid, tol: f64, max_iter: usize) -> RadiusResult {
    power_iteration_hopf_with(grid, tol, max_iter, Exec::default())
}

/// Power iteration from v = 1 with Hopf brackets [min (Av)ᵢ/vᵢ, max (Av)ᵢ/vᵢ].
///
/// Each bracket is widened by the rounding budget of one row sum, then
/// intersected with its predecessor; `nesting_defect` records how far the
/// widened bracket reached outside. Widths below four times that budget
/// count as converged whatever `tol` asks for.
pub fn power_iteration_hopf_with(grid: &OperatorGrid, tol: f64, max_iter: usize, exec: Exec) -> RadiusResult {
    let n = grid.n;
    let slack = (n as f64 + 2.0) * f64::EPSILON;
    let (m, big_m) = grid.kernel_bounds();
    let hopf = (m > 0.0).then(|| HopfRate {
        m,
        big_m,
        rate: (big_m - m) / (big_m + m),
    });
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut stored = [0.0, f64::INFINITY];
    let mut history = Vec::new();
    let mut defect: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        grid.apply(&v, &mut w, exec);
        iterations += 1;
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        if wmax == 0.0 {
            stored = [0.0, 0.0];
            history.push(stored);
            converged = true;
            break;
        }
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (wi, vi) in w.iter().zip(&v) {
            if *vi > 0.0 {
                let r = wi / vi;
                lo = lo.min(r);
                hi = hi.max(r);
            } else if *wi > 0.0 {
                hi = f64::INFINITY;
            }
        }
        let lo = lo * (1.0 - slack);
        let hi = hi * (1.0 + slack);
        if iterations > 1 {
            defect = defect.max(stored[0] - lo).max(hi - stored[1]);
        }
        stored = [lo.max(stored[0]), hi.min(stored[1])];
        history.push(stored);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wmax;
        }
        if stored[1] - stored[0] <= tol.max(4.0 * slack * stored[1]) {
            converged = true;
            break;
        }
    }
    RadiusResult {
        radius: 0.5 * (stored[0] + stored[1]),
        bracket: stored,
        n,
        iterations,
        converged,
        eigvec: v,
        history,
        nesting_defect: defect.max(0.0),
        hopf,
    }
}

/// (⟨1, Aᵏ1⟩)^{1/k} with the uniform grid weight, computed in log scale.
pub fn moment_root(grid: &OperatorGrid, k: usize) -> f64 {
    let n = grid.n;
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut log_scale = 0.0;
    for _ in 0..k {
        grid.apply(&v, &mut w, Exec::default());
        let s = w.iter().cloned().fold(0.0, f64::max);
        if s == 0.0 {
            return 0.0;
        }
        log_scale += s.ln();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / s;
        }
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    ((log_scale + mean.ln()) / k as f64).exp()
}

/// r = ∫₀¹ K for a kernel of convolution type; with λ = 1/2 that is ½∫K̃.
pub fn convolution_radius(kernel: &ReducedKernel) -> Result<NormValue> {
    if !kernel.is_convolution_type() {
        return Err(Error::InvalidUse(
            "kernel is not of convolution type (needs lambda = 1/2)".into(),
        ));
    }
    Ok(kernel.integral().scale(&rat(1, 2)))
}

/// Result of a grid-refinement run.
#[derive(Clone, Debug, Serialize)]
pub struct RefinedRadius {
    /// Richardson extrapolant of the finest two levels.
    pub radius: f64,
    /// (n, midpoint radius) per level.
    pub levels: Vec<(usize, f64)>,
    pub converged: bool,
    pub finest: RadiusResult,
}

/// Runs the power iteration on grids n₀, 2n₀, 4n₀, … and extrapolates the
/// midpoints assuming an O(n⁻²) discretization error, until successive
/// extrapolants agree within `tol` or the grid would exceed `n_max`.
pub fn radius_refined(
    grid_at: impl Fn(usize) -> Result<OperatorGrid>,
    n0: usize,
    n_max: usize,
    tol: f64,
) -> Result<RefinedRadius> {
    let iter_tol = (tol * 1e-2).max(1e-14);
    let mut levels = Vec::new();
    let mut prev_extrap: Option<f64> = None;
    let mut n = n0;
    let mut finest;
    let mut extrap;
    loop {
        let grid = grid_at(n)?;
        finest = power_iteration_hopf(&grid, iter_tol, 10 * n);
        levels.push((n, finest.radius));
        extrap = finest.radius;
        if levels.len() >= 2 {
            let r0 = levels[levels.len() - 2].1;
            extrap = (4.0 * finest.radius - r0) / 3.0;
        }
        if let Some(p) = prev_extrap {
            if (extrap - p).abs() <= tol {
                return Ok(RefinedRadius {
                    radius: extrap,
                    levels,
                    converged: finest.converged,
                    finest,
                });
            }
        }
        if levels.len() >= 2 {
            prev_extrap = Some(extrap);
        }
        if 2 * n > n_max {
            break;
        }
        n *= 2;
    }
    Ok(RefinedRadius {
        radius: extrap,
        levels,
        converged: false,
        finest,
    })
}
