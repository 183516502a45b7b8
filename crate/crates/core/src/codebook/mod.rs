//! Hierarchical beam codebook per face, benchmark codebooks, and the
//! worst-case gain guarantee of the narrow-beam layout.
//!
//! Stage `S` holds `N^2` narrow beams (plain array response vectors on the
//! lattice of [`grid`]); stages `S-1` down to `0` hold wide beams obtained by
//! least-squares pattern synthesis ([`synthesis`]) against buffered on/off
//! targets on the dense grid ([`coverage`]). The four faces share identical
//! face-relative weights, so one synthesis pass builds all four books.

pub mod benchmarks;
pub mod coverage;
pub mod grid;
pub mod io;
pub mod synthesis;
pub mod tracking;

pub use benchmarks::NarrowFamily;
pub use coverage::{coverage_set, stage_count, CoverageSet, TargetColumn};
pub use grid::{
    narrow_codeword, narrow_direction, narrow_index, narrow_pos, narrow_vh, DenseGrid,
    GlobalNarrowPos,
};
pub use synthesis::SynthesisContext;
pub use tracking::{BeamPart, CompositeBeam, TrackingBeamSet, TrackingCodebook};

use crate::geometry::{dirichlet_ratio, Beamformer, UpaConfig, UpaIndex};
use crate::{Error, Result};
use std::f64::consts::SQRT_2;

/// Closed-form worst-case narrow-beam gain of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseBound {
    pub n_beams: usize,
    pub n_y: usize,
    pub n_z: usize,
    /// `sin(el)` of the beam row nearest the horizon: 1 for odd `N`,
    /// `sin(arccos(sqrt(2)/(2N)))` for even `N`.
    pub beta: f64,
    /// Amplitude gain guaranteed at every in-sector direction, in `(0, 1]`.
    pub eta_worst: f64,
}

/// Worst-case amplitude gain of the `N x N` narrow lattice: the gain at a
/// coverage-cell corner of the row nearest the horizon, where the elevation
/// offset is half a cell and the azimuth offset is half a cell scaled by the
/// row's `sin(el)`.
pub fn eta_worst(n_beams: usize, cfg: &UpaConfig) -> WorstCaseBound {
    let nf = n_beams as f64;
    let beta = if n_beams % 2 == 1 {
        1.0
    } else {
        (SQRT_2 / (2.0 * nf)).acos().sin()
    };
    let dv = SQRT_2 / (2.0 * nf);
    let eta = dirichlet_ratio(cfg.n_z, dv) * dirichlet_ratio(cfg.n_y, beta * dv)
        / cfg.n_a() as f64;
    WorstCaseBound {
        n_beams,
        n_y: cfg.n_y,
        n_z: cfg.n_z,
        beta,
        eta_worst: eta,
    }
}

/// Full beam hierarchy of one face: stage `s` holds `2^s` beams, stage `S`
/// being the narrow lattice. All codewords are unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalCodebook {
    upa: UpaIndex,
    cfg: UpaConfig,
    n_beams: usize,
    buffer_width: usize,
    buffer_gain: f64,
    stages: Vec<Vec<Beamformer>>,
}

impl HierarchicalCodebook {
    /// Index of the bottom (narrow) stage.
    pub fn stage_total(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn upa(&self) -> UpaIndex {
        self.upa
    }

    pub fn cfg(&self) -> &UpaConfig {
        &self.cfg
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn buffer_width(&self) -> usize {
        self.buffer_width
    }

    pub fn buffer_gain(&self) -> f64 {
        self.buffer_gain
    }

    /// Beam `i` (1-based) of stage `s`.
    pub fn beam(&self, s: usize, i: usize) -> Result<&Beamformer> {
        let stage = self.stages.get(s).ok_or_else(|| {
            Error::IndexOutOfRange(format!("stage {s}, want 0..={}", self.stage_total()))
        })?;
        stage.get(i.wrapping_sub(1)).ok_or_else(|| {
            Error::IndexOutOfRange(format!("beam {i} of stage {s}, want 1..={}", stage.len()))
        })
    }

    /// Narrow beam `i` (1-based, `1..=N^2`).
    pub fn narrow(&self, i: usize) -> Result<&Beamformer> {
        self.beam(self.stage_total(), i)
    }

    /// Narrow beam at lattice position `(n, p)`.
    pub fn narrow_at(&self, n: usize, p: usize) -> Result<&Beamformer> {
        self.narrow(grid::narrow_index(n, p, self.n_beams))
    }
}

/// The four per-face hierarchies of one transceiver, built together.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSet {
    cfg: UpaConfig,
    n_beams: usize,
    buffer_width: usize,
    buffer_gain: f64,
    books: Vec<HierarchicalCodebook>,
}

impl CodebookSet {
    pub fn cfg(&self) -> &UpaConfig {
        &self.cfg
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn buffer_width(&self) -> usize {
        self.buffer_width
    }

    pub fn buffer_gain(&self) -> f64 {
        self.buffer_gain
    }

    pub fn book(&self, k: UpaIndex) -> &HierarchicalCodebook {
        &self.books[k.index0()]
    }

    pub fn stage_total(&self) -> usize {
        stage_count(self.n_beams)
    }

    /// Assembles a set from per-face stage weights, validating the shape.
    /// Stage `s` must hold `2^s` weight vectors of `N_a` entries each.
    pub fn from_stage_weights(
        cfg: UpaConfig,
        n_beams: usize,
        buffer_width: usize,
        buffer_gain: f64,
        per_face: Vec<Vec<Vec<Vec<num_complex::Complex64>>>>,
    ) -> Result<Self> {
        let s_total = stage_count(n_beams);
        if per_face.len() != 4 {
            return Err(Error::CodebookFormat(format!(
                "expected 4 faces, got {}",
                per_face.len()
            )));
        }
        let mut books = Vec::with_capacity(4);
        for (k, stages_w) in UpaIndex::ALL.into_iter().zip(per_face) {
            if stages_w.len() != s_total + 1 {
                return Err(Error::CodebookFormat(format!(
                    "expected {} stages, got {}",
                    s_total + 1,
                    stages_w.len()
                )));
            }
            let mut stages = Vec::with_capacity(s_total + 1);
            for (s, beams) in stages_w.into_iter().enumerate() {
                if beams.len() != (1 << s) {
                    return Err(Error::CodebookFormat(format!(
                        "stage {s}: expected {} beams, got {}",
                        1 << s,
                        beams.len()
                    )));
                }
                let mut stage = Vec::with_capacity(beams.len());
                for weights in beams {
                    if weights.len() != cfg.n_a() {
                        return Err(Error::CodebookFormat(format!(
                            "codeword length {} does not match {} elements",
                            weights.len(),
                            cfg.n_a()
                        )));
                    }
                    stage.push(Beamformer::new(k, weights));
                }
                stages.push(stage);
            }
            books.push(HierarchicalCodebook {
                upa: k,
                cfg,
                n_beams,
                buffer_width,
                buffer_gain,
                stages,
            });
        }
        Ok(Self {
            cfg,
            n_beams,
            buffer_width,
            buffer_gain,
            books,
        })
    }
}

/// Builds the full four-face codebook set: one synthesis pass for the wide
/// stages, narrow stage from the lattice response vectors.
pub fn build_codebook_set(
    cfg: &UpaConfig,
    n_beams: usize,
    buffer_width: usize,
    buffer_gain: f64,
) -> Result<CodebookSet> {
    if !(0.0..1.0).contains(&buffer_gain) {
        return Err(Error::InvalidConfig(format!(
            "buffer gain must be in [0, 1), got {buffer_gain}"
        )));
    }
    let grid = DenseGrid::new(n_beams)?;
    let ctx = SynthesisContext::new(cfg, grid)?;
    let s_total = stage_count(n_beams);
    let mut stages: Vec<Vec<Vec<num_complex::Complex64>>> = Vec::with_capacity(s_total + 1);
    for s in 0..s_total {
        stages.push(synthesis::synthesize_wide_beams(
            &ctx,
            s,
            buffer_width,
            buffer_gain,
        )?);
    }
    let narrow: Vec<Vec<num_complex::Complex64>> = (1..=n_beams * n_beams)
        .map(|i| {
            let (n, p) = grid::narrow_pos(i, n_beams)?;
            Ok(grid::narrow_codeword(cfg, n, p, n_beams))
        })
        .collect::<Result<_>>()?;
    stages.push(narrow);
    let per_face = vec![stages.clone(), stages.clone(), stages.clone(), stages];
    CodebookSet::from_stage_weights(*cfg, n_beams, buffer_width, buffer_gain, per_face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{beam_gain, separable_gain, steering_vh, vh_relative};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eta_worst_reference_values() {
        let cfg = UpaConfig::new(16, 16).unwrap();
        let b = eta_worst(16, &cfg);
        assert_abs_diff_eq!(b.beta, 0.999023, epsilon = 1e-6);
        assert_abs_diff_eq!(b.eta_worst, 0.652, epsilon = 1e-3);
        // Odd lattice keeps beta at 1.
        assert_eq!(eta_worst(15, &cfg).beta, 1.0);
        // Lattice much finer than the array: guarantee approaches 1.
        let fine = eta_worst(1 << 12, &cfg);
        assert!(fine.eta_worst > 0.9999);
    }

    #[test]
    fn all_stages_hold_unit_norm_codewords() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        let set = build_codebook_set(&cfg, 4, 1, 0.5).unwrap();
        assert_eq!(set.stage_total(), 4);
        for k in UpaIndex::ALL {
            let book = set.book(k);
            for s in 0..=book.stage_total() {
                for i in 1..=(1usize << s) {
                    let b = book.beam(s, i).unwrap();
                    assert_eq!(b.upa, k);
                    assert_abs_diff_eq!(b.norm(), 1.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn faces_share_relative_weights() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        let set = build_codebook_set(&cfg, 4, 1, 0.5).unwrap();
        let a = set.book(UpaIndex::ALL[0]);
        for k in &UpaIndex::ALL[1..] {
            let b = set.book(*k);
            for s in 0..=a.stage_total() {
                for i in 1..=(1usize << s) {
                    assert_eq!(
                        a.beam(s, i).unwrap().weights,
                        b.beam(s, i).unwrap().weights
                    );
                }
            }
        }
    }

    #[test]
    fn narrow_stage_is_the_lattice_response() {
        let cfg = UpaConfig::new(8, 8).unwrap();
        let set = build_codebook_set(&cfg, 4, 1, 0.5).unwrap();
        let book = set.book(UpaIndex::ALL[2]);
        for i in 1..=16 {
            let (n, p) = narrow_pos(i, 4).unwrap();
            let (v, h) = narrow_vh(n, p, 4);
            assert_eq!(book.narrow(i).unwrap().weights, steering_vh(&cfg, v, h));
            assert_eq!(book.narrow_at(n, p).unwrap().weights, book.narrow(i).unwrap().weights);
        }
    }

    #[test]
    fn row_neighbors_meet_at_equal_gain() {
        // Azimuth-adjacent beams of one row see identical gain at their
        // shared lattice midpoint.
        let cfg = UpaConfig::new(16, 16).unwrap();
        let n_beams = 16;
        let k = UpaIndex::ALL[0];
        for p in [1usize, 8, 16] {
            for n in 1..n_beams {
                let left = Beamformer::new(k, narrow_codeword(&cfg, n, p, n_beams));
                let right = Beamformer::new(k, narrow_codeword(&cfg, n + 1, p, n_beams));
                let (v, h_l) = narrow_vh(n, p, n_beams);
                let (_, h_r) = narrow_vh(n + 1, p, n_beams);
                let h_mid = 0.5 * (h_l + h_r);
                let sin_el = (1.0 - v * v).sqrt();
                let dir = crate::geometry::Direction::new(
                    (h_mid / sin_el).asin() + k.boresight(),
                    v.acos(),
                );
                let g_l = beam_gain(&cfg, &left, &dir);
                let g_r = beam_gain(&cfg, &right, &dir);
                assert!((g_l - g_r).abs() < 1e-9, "row {p} beams {n},{}", n + 1);
            }
        }
    }

    #[test]
    fn lattice_worst_case_matches_closed_form() {
        // Random in-sector directions: the best narrow beam never drops
        // below the closed-form bound, and the empirical worst case
        // approaches it.
        let cfg = UpaConfig::new(16, 16).unwrap();
        let n_beams = 16;
        let bound = eta_worst(n_beams, &cfg).eta_worst;
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let nf = n_beams as f64;
        let mut worst = f64::MAX;
        for _ in 0..1_000_000 {
            let v: f64 = rng.random_range(-SQRT_2 / 2.0..SQRT_2 / 2.0);
            let sin_el = (1.0 - v * v).sqrt();
            let h = rng.random_range(-SQRT_2 / 2.0 * sin_el..SQRT_2 / 2.0 * sin_el);
            // Best beam is within two lattice cells of the direction.
            let p0 = ((v * 2.0 * nf / SQRT_2 + 1.0 + nf) / 2.0).round() as i64;
            let mut best = 0.0f64;
            for p in (p0 - 2)..=(p0 + 2) {
                let p = p.clamp(1, n_beams as i64) as usize;
                let (v_t, _) = narrow_vh(1, p, n_beams);
                let sin_p = (1.0 - v_t * v_t).sqrt();
                let n0 = ((h / sin_p * 2.0 * nf / SQRT_2 + 1.0 + nf) / 2.0).round() as i64;
                for n in (n0 - 2)..=(n0 + 2) {
                    let n = n.clamp(1, n_beams as i64) as usize;
                    let (v_t, h_t) = narrow_vh(n, p, n_beams);
                    best = best.max(separable_gain(&cfg, v, h, v_t, h_t));
                }
            }
            worst = worst.min(best);
        }
        assert!(worst >= bound - 0.01, "worst {worst} vs bound {bound}");
        assert!(worst <= bound + 0.02, "worst {worst} vs bound {bound}");
    }

    #[test]
    fn worst_corner_attains_the_bound_exactly() {
        // The corner construction behind the closed form: half-cell offsets
        // from the beam nearest the horizon.
        let cfg = UpaConfig::new(16, 16).unwrap();
        let n_beams = 16;
        let b = eta_worst(n_beams, &cfg);
        let (n, p) = (8usize, 9usize);
        let (v_t, h_t) = narrow_vh(n, p, n_beams);
        assert_abs_diff_eq!((1.0 - v_t * v_t).sqrt(), b.beta, epsilon = 1e-12);
        let corner_v = v_t + SQRT_2 / (2.0 * n_beams as f64);
        let corner_h = h_t + b.beta * SQRT_2 / (2.0 * n_beams as f64);
        let gain = separable_gain(&cfg, corner_v, corner_h, v_t, h_t);
        assert_abs_diff_eq!(gain, b.eta_worst, epsilon = 1e-12);
        // And through the actual beamformer machinery.
        let k = UpaIndex::ALL[0];
        let beam = Beamformer::new(k, narrow_codeword(&cfg, n, p, n_beams));
        let el = corner_v.acos();
        let az = (corner_h / el.sin()).asin() + k.boresight();
        let dir = crate::geometry::Direction::new(az, el);
        let (vv, hh) = vh_relative(k, &dir);
        assert_abs_diff_eq!(vv, corner_v, epsilon = 1e-12);
        assert_abs_diff_eq!(hh, corner_h, epsilon = 1e-12);
        assert_abs_diff_eq!(beam_gain(&cfg, &beam, &dir), b.eta_worst, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_buffer_gain() {
        let cfg = UpaConfig::new(4, 4).unwrap();
        assert!(build_codebook_set(&cfg, 4, 1, 1.0).is_err());
        assert!(build_codebook_set(&cfg, 4, 1, -0.1).is_err());
    }
}
