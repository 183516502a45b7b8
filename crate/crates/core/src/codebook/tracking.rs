//! Dedicated wide beams for the tracking protocol.
//!
//! Around a center position on the global narrow lattice, the first tracking
//! mode needs one super-wide beam covering the 3x3 narrow neighborhood and
//! three column beams covering 3x1 slices of it. Both are synthesized with
//! the same least-squares machinery and grid as the hierarchical codebook.
//! A neighborhood that crosses an azimuth sector seam recruits columns of
//! the adjacent face, producing a beam with one weight vector per involved
//! face, driven simultaneously; rows past the elevation edge are clamped
//! away, shrinking the covered rectangle instead.

use num_complex::Complex64;
use std::collections::HashMap;

use super::coverage::{CoverageSet, TargetColumn};
use super::grid::GlobalNarrowPos;
use super::synthesis::SynthesisContext;
use crate::geometry::{Beamformer, UpaConfig, UpaIndex};
use crate::Result;

/// Weights for one face of a multi-face beam.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPart {
    pub upa: UpaIndex,
    pub weights: Vec<Complex64>,
}

/// A beam driven on one or more faces at once. The combined weight norm is
/// at most 1, so the transmit power constraint covers the whole transceiver.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeBeam {
    pub parts: Vec<BeamPart>,
}

impl CompositeBeam {
    pub fn single(beam: Beamformer) -> Self {
        Self {
            parts: vec![BeamPart {
                upa: beam.upa,
                weights: beam.weights,
            }],
        }
    }

    pub fn norm(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| p.weights.iter().map(|w| w.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// The four tracking beams for one center position.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingBeamSet {
    pub center: GlobalNarrowPos,
    /// Global columns of the neighborhood, left to right (wrapped).
    pub cols: [usize; 3],
    /// Rows of the neighborhood, clamped to the lattice (may repeat at the
    /// elevation edges; the covered region uses the distinct values).
    pub rows: [usize; 3],
    /// One beam over the full (up to) 3x3 narrow neighborhood.
    pub super_wide: CompositeBeam,
    /// One beam per neighborhood column, each over its (up to) 3 rows.
    pub column_beams: [CompositeBeam; 3],
}

/// Synthesizes the tracking beams for a center position.
pub fn build_tracking_set(
    ctx: &SynthesisContext,
    center: GlobalNarrowPos,
    w: usize,
    chi: f64,
) -> Result<TrackingBeamSet> {
    let n_beams = ctx.grid().n();
    let cols = [
        center.step(-1, 0, n_beams).col,
        center.col,
        center.step(1, 0, n_beams).col,
    ];
    let rows = [
        center.step(0, -1, n_beams).row,
        center.row,
        center.step(0, 1, n_beams).row,
    ];
    let mut distinct_rows: Vec<usize> = rows.to_vec();
    distinct_rows.dedup();

    let super_wide = synthesize_region(ctx, &cols, &distinct_rows, w, chi)?;
    let column_beams = [
        synthesize_region(ctx, &cols[0..1], &distinct_rows, w, chi)?,
        synthesize_region(ctx, &cols[1..2], &distinct_rows, w, chi)?,
        synthesize_region(ctx, &cols[2..3], &distinct_rows, w, chi)?,
    ];
    Ok(TrackingBeamSet {
        center,
        cols,
        rows,
        super_wide,
        column_beams,
    })
}

/// One beam covering the given global narrow columns and rows: columns are
/// grouped by face, each group solved on its own grid, and the parts are
/// normalized jointly.
fn synthesize_region(
    ctx: &SynthesisContext,
    cols: &[usize],
    rows: &[usize],
    w: usize,
    chi: f64,
) -> Result<CompositeBeam> {
    let n_beams = ctx.grid().n();
    let p_min = *rows.iter().min().expect("rows nonempty");
    let p_max = *rows.iter().max().expect("rows nonempty");

    // Group consecutive columns by owning face; at most one seam crossing
    // for a 3-column neighborhood.
    let mut groups: Vec<(UpaIndex, Vec<usize>)> = Vec::new();
    for &col in cols {
        let pos = GlobalNarrowPos { col, row: p_min };
        let k = pos.upa(n_beams);
        let (n_local, _) = pos.local(n_beams);
        match groups.last_mut() {
            Some((gk, locals)) if *gk == k => locals.push(n_local),
            _ => groups.push((k, vec![n_local])),
        }
    }

    let mut raw_parts = Vec::with_capacity(groups.len());
    for (k, locals) in groups {
        let n_min = *locals.iter().min().expect("group nonempty");
        let n_max = *locals.iter().max().expect("group nonempty");
        let cov = CoverageSet::rect(
            n_beams + 2 * n_min - 1,
            n_beams + 2 * n_max,
            n_beams + 2 * p_min - 1,
            n_beams + 2 * p_max,
        );
        let target = TargetColumn::from_rectangle(&cov, ctx.grid(), w);
        let weights = ctx.synthesize_raw(&target, chi);
        raw_parts.push(BeamPart { upa: k, weights });
    }

    let total: f64 = raw_parts
        .iter()
        .map(|p| p.weights.iter().map(|w| w.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if total > 0.0 {
        for part in &mut raw_parts {
            for w in &mut part.weights {
                *w /= total;
            }
        }
    }
    Ok(CompositeBeam { parts: raw_parts })
}

/// Cache of tracking beam sets keyed by center position, sharing one
/// factorized synthesis context.
pub struct TrackingCodebook {
    ctx: SynthesisContext,
    buffer_width: usize,
    buffer_gain: f64,
    cache: HashMap<(usize, usize), TrackingBeamSet>,
}

impl TrackingCodebook {
    pub fn new(cfg: &UpaConfig, n_beams: usize, buffer_width: usize, buffer_gain: f64) -> Result<Self> {
        let grid = super::grid::DenseGrid::new(n_beams)?;
        Ok(Self {
            ctx: SynthesisContext::new(cfg, grid)?,
            buffer_width,
            buffer_gain,
            cache: HashMap::new(),
        })
    }

    /// Wraps an existing context (the one already factorized for the
    /// hierarchical codebook) instead of refactoring the gram.
    pub fn with_context(ctx: SynthesisContext, buffer_width: usize, buffer_gain: f64) -> Self {
        Self {
            ctx,
            buffer_width,
            buffer_gain,
            cache: HashMap::new(),
        }
    }

    pub fn n_beams(&self) -> usize {
        self.ctx.grid().n()
    }

    pub fn set_for(&mut self, center: GlobalNarrowPos) -> Result<&TrackingBeamSet> {
        let key = (center.col, center.row);
        if !self.cache.contains_key(&key) {
            let set = build_tracking_set(&self.ctx, center, self.buffer_width, self.buffer_gain)?;
            self.cache.insert(key, set);
        }
        Ok(&self.cache[&key])
    }

    pub fn cached_sets(&self) -> usize {
        self.cache.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::grid::DenseGrid;
    use crate::geometry::inner;
    use approx::assert_abs_diff_eq;

    fn ctx(n: usize) -> SynthesisContext {
        let cfg = UpaConfig::new(8, 8).unwrap();
        SynthesisContext::new(&cfg, DenseGrid::new(n).unwrap()).unwrap()
    }

    #[test]
    fn interior_center_uses_single_face_beams() {
        let c = ctx(8);
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[1], 4, 4, 8);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        assert_eq!(set.super_wide.parts.len(), 1);
        assert_eq!(set.super_wide.parts[0].upa, UpaIndex::ALL[1]);
        assert_abs_diff_eq!(set.super_wide.norm(), 1.0, epsilon = 1e-9);
        for col in &set.column_beams {
            assert_eq!(col.parts.len(), 1);
            assert_abs_diff_eq!(col.norm(), 1.0, epsilon = 1e-9);
        }
        assert_eq!(set.cols, [11, 12, 13]);
        assert_eq!(set.rows, [3, 4, 5]);
    }

    #[test]
    fn seam_center_recruits_the_adjacent_face() {
        let n = 8;
        let c = ctx(n);
        // Last column of face 1: the right neighbor lives on face 2.
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], n, 3, n);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        assert_eq!(set.super_wide.parts.len(), 2);
        assert_eq!(set.super_wide.parts[0].upa, UpaIndex::ALL[0]);
        assert_eq!(set.super_wide.parts[1].upa, UpaIndex::ALL[1]);
        assert_abs_diff_eq!(set.super_wide.norm(), 1.0, epsilon = 1e-9);
        // Column beams stay single-face.
        for col in &set.column_beams {
            assert_eq!(col.parts.len(), 1);
        }
        assert_eq!(set.column_beams[2].parts[0].upa, UpaIndex::ALL[1]);
        // Wrap all the way around: first column of face 1 recruits face 4.
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], 1, 3, n);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        assert_eq!(set.cols, [4 * n, 1, 2]);
        assert_eq!(set.super_wide.parts.len(), 2);
        assert_eq!(set.super_wide.parts[0].upa, UpaIndex::ALL[3]);
    }

    #[test]
    fn elevation_edge_clamps_the_region() {
        let n = 8;
        let c = ctx(n);
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], 4, 1, n);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        assert_eq!(set.rows, [1, 1, 2]);
        // The clamped region spans rows 1..=2, i.e. grid rows N+1..=N+4.
        let grid = c.grid();
        let cfg = UpaConfig::new(8, 8).unwrap();
        // Gain well inside the clamped region is much higher than two rows
        // above it (outside), for the super wide beam's face-1 part.
        let w = &set.super_wide.parts[0].weights;
        let g_in = inner(&grid.response(&cfg, n + 2 * 4 - 1, n + 2), w).norm();
        let g_out = inner(&grid.response(&cfg, n + 2 * 4 - 1, n + 9), w).norm();
        assert!(g_in > 3.0 * g_out, "in {g_in} out {g_out}");
    }

    #[test]
    fn column_beams_concentrate_on_their_column() {
        let n = 8;
        let c = ctx(n);
        let cfg = UpaConfig::new(8, 8).unwrap();
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], 4, 4, n);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        // Middle column beam: compare gain at own column vs the neighbor
        // column two grid cells away, same row.
        let w = &set.column_beams[1].parts[0].weights;
        let own = inner(&c.grid().response(&cfg, n + 2 * 4 - 1, n + 2 * 4 - 1), w).norm();
        let other = inner(&c.grid().response(&cfg, n + 2 * 6 - 1, n + 2 * 4 - 1), w).norm();
        assert!(own > 2.0 * other, "own {own} other {other}");
    }

    #[test]
    fn in_coverage_floor_of_column_beams() {
        // Post-synthesis quality: each column beam keeps its in-coverage
        // minimum above half its maximum.
        let n = 32;
        let cfg = UpaConfig::new(16, 16).unwrap();
        let c = SynthesisContext::new(&cfg, DenseGrid::new(n).unwrap()).unwrap();
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], 16, 16, n);
        let set = build_tracking_set(&c, center, 1, 0.5).unwrap();
        for (ci, col) in set.column_beams.iter().enumerate() {
            let w = &col.parts[0].weights;
            let n_local = (set.cols[ci] - 1) % n + 1;
            let mut min_g = f64::MAX;
            let mut max_g = 0.0f64;
            for j in [n + 2 * n_local - 1, n + 2 * n_local] {
                for l in (n + 2 * 15 - 1)..=(n + 2 * 17) {
                    let g = inner(&c.grid().response(&cfg, j, l), w).norm();
                    min_g = min_g.min(g);
                    max_g = max_g.max(g);
                }
            }
            assert!(min_g > 0.5 * max_g, "column {ci}: {min_g} vs {max_g}");
        }
    }

    #[test]
    fn cache_reuses_builds() {
        let cfg = UpaConfig::new(8, 8).unwrap();
        let mut tc = TrackingCodebook::new(&cfg, 8, 1, 0.5).unwrap();
        let center = GlobalNarrowPos::from_local(UpaIndex::ALL[0], 4, 4, 8);
        let first = tc.set_for(center).unwrap().clone();
        let second = tc.set_for(center).unwrap().clone();
        assert_eq!(first, second);
        assert_eq!(tc.cached_sets(), 1);
        tc.set_for(center.step(1, 0, 8)).unwrap();
        assert_eq!(tc.cached_sets(), 2);
    }
}
