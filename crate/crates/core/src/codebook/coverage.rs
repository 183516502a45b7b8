//! Stagewise coverage sets on the dense grid and the synthesis targets
//! built from them.
//!
//! The hierarchical codebook has stages `0..=S` with `2^s` beams in stage
//! `s` and `N^2 = 2^S` narrow beams at the bottom. Beam `i` of stage `s`
//! covers a rectangle of middle-band grid cells; refinement alternates
//! between the azimuth and elevation axes, so each beam's rectangle is the
//! disjoint union of its two children's rectangles in the next stage.

use nalgebra::DMatrix;

use super::grid::DenseGrid;
use crate::{Error, Result};

/// Number of wide-beam stages above the narrow stage: `N^2 = 2^S`.
/// Power-of-two `N` makes this even, matching the alternating axis splits.
pub fn stage_count(n_beams: usize) -> usize {
    debug_assert!(n_beams.is_power_of_two());
    2 * n_beams.trailing_zeros() as usize
}

/// Rectangle shape parameters of stage `s`: a beam covers `nu` grid columns
/// by `delta` grid rows, and the stage has `mu` beams per elevation band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageShape {
    pub nu: usize,
    pub delta: usize,
    pub mu: usize,
}

pub fn stage_shape(s: usize, n_beams: usize) -> StageShape {
    let s_total = stage_count(n_beams) as i64;
    let s = s as i64;
    let nu = 1u64 << (div_ceil_i64(s_total - s, 2) + 1);
    let delta = 1u64 << (div_ceil_i64(s_total - s - 1, 2) + 1);
    let mu = 1u64 << div_ceil_i64(s - 1, 2);
    StageShape {
        nu: nu as usize,
        delta: delta as usize,
        mu: mu as usize,
    }
}

#[inline]
fn div_ceil_i64(a: i64, b: i64) -> u64 {
    debug_assert!(b > 0);
    debug_assert!(a >= -1, "stage arithmetic stays above -1");
    a.div_euclid(b) as u64 + u64::from(a.rem_euclid(b) != 0)
}

/// Grid rectangle covered by beam `i` (1-based) of stage `s`: inclusive
/// column range `j`, inclusive row range `l`, all cells in the middle band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageSet {
    pub stage: usize,
    pub index: usize,
    pub j_first: usize,
    pub j_last: usize,
    pub l_first: usize,
    pub l_last: usize,
}

impl CoverageSet {
    /// Free-standing rectangle not tied to a codebook stage (tracking beams
    /// and tests); stage and index are zeroed.
    pub fn rect(j_first: usize, j_last: usize, l_first: usize, l_last: usize) -> Self {
        debug_assert!(j_first <= j_last && l_first <= l_last);
        Self {
            stage: 0,
            index: 0,
            j_first,
            j_last,
            l_first,
            l_last,
        }
    }

    pub fn contains(&self, j: usize, l: usize) -> bool {
        (self.j_first..=self.j_last).contains(&j) && (self.l_first..=self.l_last).contains(&l)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let js = self.j_first..=self.j_last;
        js.flat_map(move |j| (self.l_first..=self.l_last).map(move |l| (j, l)))
    }

    pub fn len(&self) -> usize {
        (self.j_last - self.j_first + 1) * (self.l_last - self.l_first + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn coverage_set(s: usize, i: usize, n_beams: usize) -> Result<CoverageSet> {
    let s_total = stage_count(n_beams);
    if s > s_total {
        return Err(Error::IndexOutOfRange(format!(
            "stage {s}, want 0..={s_total}"
        )));
    }
    if !(1..=(1usize << s)).contains(&i) {
        return Err(Error::IndexOutOfRange(format!(
            "beam {i} of stage {s}, want 1..={}",
            1usize << s
        )));
    }
    let StageShape { nu, delta, mu } = stage_shape(s, n_beams);
    let col_block = (i - 1) % mu;
    let row_block = (i - 1) / mu;
    Ok(CoverageSet {
        stage: s,
        index: i,
        j_first: n_beams + nu * col_block + 1,
        j_last: n_beams + nu * (col_block + 1),
        l_first: n_beams + delta * row_block + 1,
        l_last: n_beams + delta * (row_block + 1),
    })
}

/// Buffer zone of beam `i` of stage `s`: the periphery of its coverage
/// rectangle with width `w`, clipped to the 4N x 4N grid. Cells recruited
/// from an adjacent face across the azimuth seam are handled where composite
/// beams are assembled, not here.
pub fn buffer_zone(s: usize, i: usize, n_beams: usize, w: usize) -> Result<Vec<(usize, usize)>> {
    let cov = coverage_set(s, i, n_beams)?;
    Ok(buffer_around(&cov, n_beams, w))
}

/// Periphery of width `w` around an arbitrary grid rectangle, clipped.
pub fn buffer_around(cov: &CoverageSet, n_beams: usize, w: usize) -> Vec<(usize, usize)> {
    let side = 4 * n_beams;
    let j_lo = cov.j_first.saturating_sub(w).max(1);
    let j_hi = (cov.j_last + w).min(side);
    let l_lo = cov.l_first.saturating_sub(w).max(1);
    let l_hi = (cov.l_last + w).min(side);
    let mut cells = Vec::new();
    for j in j_lo..=j_hi {
        for l in l_lo..=l_hi {
            if !cov.contains(j, l) {
                cells.push((j, l));
            }
        }
    }
    cells
}

/// Synthesis target for one beam as sparse 1-based flat grid indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetColumn {
    /// Rows with target value 1 (the coverage rectangle).
    pub ones: Vec<usize>,
    /// Rows with target value chi (the buffer periphery).
    pub buffer: Vec<usize>,
}

impl TargetColumn {
    pub fn for_stage_beam(s: usize, i: usize, n_beams: usize, w: usize) -> Result<Self> {
        let cov = coverage_set(s, i, n_beams)?;
        let grid = DenseGrid::new(n_beams)?;
        Ok(Self::from_rectangle(&cov, &grid, w))
    }

    pub fn from_rectangle(cov: &CoverageSet, grid: &DenseGrid, w: usize) -> Self {
        let ones = cov.cells().map(|(j, l)| grid.flat(j, l)).collect();
        let buffer = buffer_around(cov, grid.n(), w)
            .into_iter()
            .map(|(j, l)| grid.flat(j, l))
            .collect();
        Self { ones, buffer }
    }
}

/// Dense target matrix of stage `s`: `16N^2 x 2^s`, column `i` holding 1 on
/// coverage rows and `chi` on buffer rows. With `w = 0` this is exactly the
/// unbuffered on/off criterion.
pub fn target_matrix(s: usize, n_beams: usize, w: usize, chi: f64) -> Result<DMatrix<f64>> {
    let grid = DenseGrid::new(n_beams)?;
    let beams = 1usize << s;
    let mut xi = DMatrix::zeros(grid.points(), beams);
    for i in 1..=beams {
        let col = TargetColumn::for_stage_beam(s, i, n_beams, w)?;
        for &g in &col.ones {
            xi[(g - 1, i - 1)] = 1.0;
        }
        for &g in &col.buffer {
            xi[(g - 1, i - 1)] = chi;
        }
    }
    Ok(xi)
}
