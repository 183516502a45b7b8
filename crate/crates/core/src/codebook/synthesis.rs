//! Least-squares wide-beam synthesis against the dense grid.
//!
//! Every wide beam solves `min_w || A^H w - xi ||` where the columns of `A`
//! are the array responses at all `16N^2` grid points and `xi` is the beam's
//! buffered on/off target. The normal-equation solution
//! `(A A^H)^{-1} A xi` is computed with one Cholesky factorization of the
//! gram matrix shared by every stage, every beam, and the tracking beams,
//! since the gram depends only on the grid and the element count.
//!
//! The gram entry between elements with index offset `(dy, dz)` is
//! `sum_g exp(j pi (dy h_g + dz v_g)) / N_a`, independent of the absolute
//! element positions, so only `(2N_y - 1)(2N_z - 1)` sums are evaluated, each
//! factored over the grid's separable axes.

use log::warn;
use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::coverage::TargetColumn;
use super::grid::DenseGrid;
use crate::geometry::UpaConfig;
use crate::{Error, Result};

/// Relative Tikhonov floor added to the gram diagonal before factoring.
const GRAM_FLOOR: f64 = 1e-10;
/// Escalation factor applied when the floored gram still fails to factor.
const GRAM_ESCALATION: f64 = 100.0;
const MAX_ESCALATIONS: usize = 5;

/// Norm below which an LS solution is treated as the zero beam.
const ZERO_BEAM_NORM: f64 = 1e-12;

/// Gram matrix `A A^H` of all grid responses, `N_a x N_a`.
pub fn grid_gram(cfg: &UpaConfig, grid: &DenseGrid) -> DMatrix<Complex64> {
    let side = grid.side();
    let x: Vec<f64> = (1..=side).map(|t| grid.axis(t)).collect();
    let sin_el: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
    let ny = cfg.n_y as i64;
    let nz = cfg.n_z as i64;

    // inner[dy][l] = sum_j exp(j pi dy x_j sin_el_l)
    let dy_count = (2 * ny - 1) as usize;
    let mut inner = vec![Complex64::ZERO; dy_count * side];
    for (dyi, dy) in (-(ny - 1)..=(ny - 1)).enumerate() {
        for l in 0..side {
            let mut acc = Complex64::ZERO;
            for &xj in &x {
                acc += Complex64::from_polar(1.0, PI * dy as f64 * xj * sin_el[l]);
            }
            inner[dyi * side + l] = acc;
        }
    }

    // offset[dy][dz] = sum_l exp(j pi dz x_l) inner[dy][l]
    let dz_count = (2 * nz - 1) as usize;
    let mut offset = vec![Complex64::ZERO; dy_count * dz_count];
    for dyi in 0..dy_count {
        for (dzi, dz) in (-(nz - 1)..=(nz - 1)).enumerate() {
            let mut acc = Complex64::ZERO;
            for l in 0..side {
                acc += Complex64::from_polar(1.0, PI * dz as f64 * x[l]) * inner[dyi * side + l];
            }
            offset[dyi * dz_count + dzi] = acc;
        }
    }

    let n_a = cfg.n_a();
    let scale = 1.0 / n_a as f64;
    DMatrix::from_fn(n_a, n_a, |e1, e2| {
        let (iy1, iz1) = (e1 / cfg.n_z, e1 % cfg.n_z);
        let (iy2, iz2) = (e2 / cfg.n_z, e2 % cfg.n_z);
        let dyi = (iy1 as i64 - iy2 as i64 + ny - 1) as usize;
        let dzi = (iz1 as i64 - iz2 as i64 + nz - 1) as usize;
        offset[dyi * dz_count + dzi] * scale
    })
}

/// Shared factorization state for all beam synthesis on one grid.
pub struct SynthesisContext {
    cfg: UpaConfig,
    grid: DenseGrid,
    chol: nalgebra::Cholesky<Complex64, Dyn>,
    /// True when the base Tikhonov floor had to be escalated.
    pub escalated: bool,
}

impl SynthesisContext {
    pub fn new(cfg: &UpaConfig, grid: DenseGrid) -> Result<Self> {
        let gram = grid_gram(cfg, &grid);
        let trace: f64 = gram.diagonal().iter().map(|c| c.re).sum();
        let mut lambda = GRAM_FLOOR * trace / cfg.n_a() as f64;
        let mut escalated = false;
        for attempt in 0..=MAX_ESCALATIONS {
            let mut damped = gram.clone();
            for e in 0..cfg.n_a() {
                damped[(e, e)] += Complex64::new(lambda, 0.0);
            }
            if let Some(chol) = nalgebra::Cholesky::new(damped) {
                return Ok(Self {
                    cfg: *cfg,
                    grid,
                    chol,
                    escalated,
                });
            }
            warn!(
                "grid gram failed to factor at damping {lambda:.3e} (attempt {attempt}), escalating"
            );
            lambda *= GRAM_ESCALATION;
            escalated = true;
        }
        Err(Error::InvalidConfig(format!(
            "grid gram is not positive definite for {}x{} elements on a {} grid",
            cfg.n_y,
            cfg.n_z,
            grid.side()
        )))
    }

    pub fn cfg(&self) -> &UpaConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &DenseGrid {
        &self.grid
    }

    /// Right-hand side `A xi` assembled sparsely from the target's nonzero
    /// rows.
    pub fn rhs_from_target(&self, target: &TargetColumn, chi: f64) -> DVector<Complex64> {
        let mut b = DVector::zeros(self.cfg.n_a());
        let mut add = |g: usize, weight: f64| {
            let (j, l) = self.grid.unflat(g);
            let a = self.grid.response(&self.cfg, j, l);
            for (be, ae) in b.iter_mut().zip(a) {
                *be += ae * weight;
            }
        };
        for &g in &target.ones {
            add(g, 1.0);
        }
        for &g in &target.buffer {
            add(g, chi);
        }
        b
    }

    /// LS solution for one target, without normalization. Multi-face beams
    /// need the raw scale so their parts can be normalized jointly.
    pub fn synthesize_raw(&self, target: &TargetColumn, chi: f64) -> Vec<Complex64> {
        let rhs = self.rhs_from_target(target, chi);
        self.chol.solve(&rhs).iter().copied().collect()
    }

    /// LS solution for one target, unit-normalized. An all-zero target cell
    /// set yields the zero vector.
    pub fn synthesize(&self, target: &TargetColumn, chi: f64) -> Vec<Complex64> {
        let sol = self.synthesize_raw(target, chi);
        let norm = sol.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < ZERO_BEAM_NORM {
            return vec![Complex64::ZERO; self.cfg.n_a()];
        }
        sol.into_iter().map(|c| c / norm).collect()
    }
}

/// All `2^s` wide beams of stage `s`, in face-relative coordinates.
pub fn synthesize_wide_beams(
    ctx: &SynthesisContext,
    s: usize,
    w: usize,
    chi: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let n = ctx.grid().n();
    (1..=(1usize << s))
        .map(|i| {
            let target = TargetColumn::for_stage_beam(s, i, n, w)?;
            Ok(ctx.synthesize(&target, chi))
        })
        .collect()
}
