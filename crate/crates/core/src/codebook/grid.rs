//! Dense direction grid and the narrow-beam lattice.
//!
//! Wide-beam synthesis matches beam patterns against a 4N x 4N grid of
//! directions per face. Both grid axes use the same piecewise coordinate
//! formula on the direction-cosine line: the middle 2N cells tile the served
//! band `[-sqrt(2)/2, sqrt(2)/2]` uniformly, and the two outer bands of N
//! cells each tile the rest of `[-1, 1]`, so the full grid spans the front
//! hemisphere of the face. Azimuth uses the coordinate as `sin(az -
//! boresight)`, elevation as `cos(el)`.
//!
//! Narrow beams form an N x N lattice per face; cell `(n, p)` covers grid
//! columns `{N+2n-1, N+2n}` and rows `{N+2p-1, N+2p}`. Chaining the four
//! faces side by side gives a global lattice of 4N columns that is circular
//! in azimuth, which is what the tracking arithmetic steps on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::geometry::{steering_vh, Direction, UpaConfig, UpaIndex};
use crate::{Error, Result};

/// 4N x 4N synthesis grid for one face, in face-relative coordinates
/// (identical for all four faces).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseGrid {
    n: usize,
}

impl DenseGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "beams per axis must be a power of two >= 2, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Narrow beams per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid cells per axis.
    #[inline]
    pub fn side(&self) -> usize {
        4 * self.n
    }

    /// Total grid points.
    #[inline]
    pub fn points(&self) -> usize {
        self.side() * self.side()
    }

    /// Axis coordinate of 1-based cell `t`: ascending, in `(-1, 1)`.
    /// Cells `N+1..=3N` tile the served band with step `sqrt(2)/(2N)`; the
    /// outer cells tile the remainder with step `(1 - sqrt(2)/2)/N`.
    pub fn axis(&self, t: usize) -> f64 {
        debug_assert!((1..=self.side()).contains(&t), "axis index {t}");
        let n = self.n as f64;
        let outer = 1.0 - SQRT_2 / 2.0;
        let t_f = t as f64;
        if t <= self.n {
            outer * (2.0 * t_f - 1.0) / (2.0 * n) - 1.0
        } else if t <= 3 * self.n {
            SQRT_2 * (2.0 * (t_f - n) - 1.0) / (4.0 * n) - SQRT_2 / 2.0
        } else {
            outer * (2.0 * (t_f - 3.0 * n) - 1.0) / (2.0 * n) + SQRT_2 / 2.0
        }
    }

    /// Flattened 1-based index of azimuth cell `j`, elevation cell `l`:
    /// `4N(l-1) + j`, azimuth fastest.
    #[inline]
    pub fn flat(&self, j: usize, l: usize) -> usize {
        debug_assert!((1..=self.side()).contains(&j) && (1..=self.side()).contains(&l));
        self.side() * (l - 1) + j
    }

    /// Inverse of [`flat`](Self::flat): `(j, l)`, both 1-based.
    #[inline]
    pub fn unflat(&self, g: usize) -> (usize, usize) {
        debug_assert!((1..=self.points()).contains(&g));
        let j = (g - 1) % self.side() + 1;
        let l = (g - 1) / self.side() + 1;
        (j, l)
    }

    /// Direction cosines `(v, h)` seen by the face at grid point `(j, l)`:
    /// `v = cos(el)` is the elevation axis coordinate directly, while the
    /// azimuth coordinate is scaled by `sin(el)`.
    pub fn vh(&self, j: usize, l: usize) -> (f64, f64) {
        let v = self.axis(l);
        let h = self.axis(j) * (1.0 - v * v).sqrt();
        (v, h)
    }

    /// Direction of grid point `(j, l)` in the frame of face `k`.
    pub fn direction(&self, k: UpaIndex, j: usize, l: usize) -> Direction {
        Direction::new(self.axis(j).asin() + k.boresight(), self.axis(l).acos())
    }

    /// Steering vector at grid point `(j, l)`, face-relative.
    pub fn response(&self, cfg: &UpaConfig, j: usize, l: usize) -> Vec<Complex64> {
        let (v, h) = self.vh(j, l);
        steering_vh(cfg, v, h)
    }
}

// ── narrow-beam lattice ─────────────────────────────────────────────────────

/// Sequential narrow-beam index `i` (1-based, `1..=N^2`) to lattice position
/// `(n, p)`: azimuth index cycles fastest.
pub fn narrow_pos(i: usize, n_beams: usize) -> Result<(usize, usize)> {
    if !(1..=n_beams * n_beams).contains(&i) {
        return Err(Error::IndexOutOfRange(format!(
            "narrow beam {i}, want 1..={}",
            n_beams * n_beams
        )));
    }
    Ok(((i - 1) % n_beams + 1, (i - 1) / n_beams + 1))
}

/// Lattice position to sequential index: `i = (p-1)N + n`.
pub fn narrow_index(n: usize, p: usize, n_beams: usize) -> usize {
    debug_assert!((1..=n_beams).contains(&n) && (1..=n_beams).contains(&p));
    (p - 1) * n_beams + n
}

/// Direction-cosine center of narrow beam `(n, p)`: the elevation cosine
/// sits on a uniform `sqrt(2)/N` lattice, and the azimuth cosine is the
/// matching uniform lattice scaled by `sin(el)` of the row, which keeps each
/// row's beams inside the sector at every elevation.
pub fn narrow_vh(n: usize, p: usize, n_beams: usize) -> (f64, f64) {
    let nf = n_beams as f64;
    let v = SQRT_2 * (2.0 * p as f64 - 1.0 - nf) / (2.0 * nf);
    let sin_az = SQRT_2 * (2.0 * n as f64 - 1.0 - nf) / (2.0 * nf);
    let h = sin_az * (1.0 - v * v).sqrt();
    (v, h)
}

/// Pointing direction of narrow beam `(n, p)` of face `k`.
pub fn narrow_direction(k: UpaIndex, n: usize, p: usize, n_beams: usize) -> Direction {
    let nf = n_beams as f64;
    let v = SQRT_2 * (2.0 * p as f64 - 1.0 - nf) / (2.0 * nf);
    let sin_az = SQRT_2 * (2.0 * n as f64 - 1.0 - nf) / (2.0 * nf);
    Direction::new(sin_az.asin() + k.boresight(), v.acos())
}

/// Unit-norm narrow codeword `(n, p)` for face `k`: the array response at
/// the beam's pointing direction.
pub fn narrow_codeword(cfg: &UpaConfig, n: usize, p: usize, n_beams: usize) -> Vec<Complex64> {
    let (v, h) = narrow_vh(n, p, n_beams);
    steering_vh(cfg, v, h)
}

/// Position on the global narrow-beam lattice: column `1..=4N` circular in
/// azimuth across the four faces, row `1..=N` clamped in elevation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalNarrowPos {
    pub col: usize,
    pub row: usize,
}

impl GlobalNarrowPos {
    pub fn new(col: usize, row: usize, n_beams: usize) -> Result<Self> {
        if !(1..=4 * n_beams).contains(&col) || !(1..=n_beams).contains(&row) {
            return Err(Error::IndexOutOfRange(format!(
                "global narrow position ({col}, {row}) outside 1..={} x 1..={n_beams}",
                4 * n_beams
            )));
        }
        Ok(Self { col, row })
    }

    /// Global position of local beam `(n, p)` on face `k`.
    pub fn from_local(k: UpaIndex, n: usize, p: usize, n_beams: usize) -> Self {
        debug_assert!((1..=n_beams).contains(&n) && (1..=n_beams).contains(&p));
        Self {
            col: k.index0() * n_beams + n,
            row: p,
        }
    }

    /// Face owning this column.
    pub fn upa(&self, n_beams: usize) -> UpaIndex {
        UpaIndex::new(((self.col - 1) / n_beams) as u8 + 1).expect("column in range")
    }

    /// Face-local `(n, p)`.
    pub fn local(&self, n_beams: usize) -> (usize, usize) {
        ((self.col - 1) % n_beams + 1, self.row)
    }

    /// Offset position: the column wraps around the azimuth circle, the row
    /// clamps at the elevation edges.
    pub fn step(&self, dc: i64, dr: i64, n_beams: usize) -> Self {
        let cols = 4 * n_beams as i64;
        let col = (self.col as i64 - 1 + dc).rem_euclid(cols) + 1;
        let row = (self.row as i64 + dr).clamp(1, n_beams as i64);
        Self {
            col: col as usize,
            row: row as usize,
        }
    }
}
