//! Benchmark narrow-beam codebooks for comparison against the lattice.
//!
//! Both benchmarks place `N x N` beams per face. The real-angle variant
//! spaces beam directions uniformly in azimuth and elevation angle; the
//! virtual-angle variant spaces them uniformly in the element-phase
//! coordinates, ignoring the elevation coupling of the azimuth response, so
//! all four faces reuse one weight set. Beam ordering matches the lattice:
//! `i = (p-1)N + n` with the azimuth index `n` fastest.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use super::grid::{narrow_codeword, narrow_pos};
use crate::geometry::{array_response, Beamformer, Direction, UpaConfig, UpaIndex};
use crate::Result;

/// Narrow-beam placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NarrowFamily {
    /// The lattice of this crate: uniform direction cosines with the azimuth
    /// axis rescaled per elevation row.
    Proposed,
    /// Uniform azimuth and elevation angles over the sector.
    UniformReal,
    /// Uniform virtual (element-phase) angles over the served band.
    UniformVirtual,
}

impl NarrowFamily {
    pub const ALL: [NarrowFamily; 3] = [
        NarrowFamily::Proposed,
        NarrowFamily::UniformReal,
        NarrowFamily::UniformVirtual,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            NarrowFamily::Proposed => "proposed",
            NarrowFamily::UniformReal => "uniform-real",
            NarrowFamily::UniformVirtual => "uniform-virtual",
        }
    }
}

/// Beam center of the real-angle benchmark: cell centers of the sector split
/// into `N x N` equal angle cells.
pub fn uniform_real_direction(k: UpaIndex, n: usize, p: usize, n_beams: usize) -> Direction {
    let nf = n_beams as f64;
    let az = k.boresight() - FRAC_PI_4 + (2.0 * n as f64 - 1.0) * PI / (4.0 * nf);
    let el = FRAC_PI_4 + (2.0 * p as f64 - 1.0) * PI / (4.0 * nf);
    Direction::new(az, el)
}

/// Virtual-angle center of the virtual benchmark: cell centers of the served
/// band `[-sqrt(2)/2, sqrt(2)/2]` on both phase axes.
pub fn uniform_virtual_center(n: usize, p: usize, n_beams: usize) -> (f64, f64) {
    let nf = n_beams as f64;
    let vt = SQRT_2 * (2.0 * p as f64 - 1.0 - nf) / (2.0 * nf);
    let vp = SQRT_2 * (2.0 * n as f64 - 1.0 - nf) / (2.0 * nf);
    (vt, vp)
}

/// All `N^2` narrow codewords of one face under the given placement rule.
pub fn narrow_codewords(
    cfg: &UpaConfig,
    k: UpaIndex,
    n_beams: usize,
    family: NarrowFamily,
) -> Result<Vec<Beamformer>> {
    (1..=n_beams * n_beams)
        .map(|i| {
            let (n, p) = narrow_pos(i, n_beams)?;
            let weights = match family {
                NarrowFamily::Proposed => narrow_codeword(cfg, n, p, n_beams),
                NarrowFamily::UniformReal => {
                    array_response(cfg, k, &uniform_real_direction(k, n, p, n_beams))
                }
                NarrowFamily::UniformVirtual => {
                    let (vt, vp) = uniform_virtual_center(n, p, n_beams);
                    crate::geometry::steering_vh(cfg, vt, vp)
                }
            };
            Ok(Beamformer::new(k, weights))
        })
        .collect()
}

/// Direction-cosine center `(v, h)` of beam `(n, p)` under a placement rule,
/// face-relative. For the virtual family this is the nominal phase center,
/// which equals the response peak only at the horizon.
pub fn family_center_vh(n: usize, p: usize, n_beams: usize, family: NarrowFamily) -> (f64, f64) {
    match family {
        NarrowFamily::Proposed => super::grid::narrow_vh(n, p, n_beams),
        NarrowFamily::UniformReal => {
            let dir = uniform_real_direction(UpaIndex::ALL[0], n, p, n_beams);
            crate::geometry::vh_relative(UpaIndex::ALL[0], &dir)
        }
        NarrowFamily::UniformVirtual => uniform_virtual_center(n, p, n_beams),
    }
}
