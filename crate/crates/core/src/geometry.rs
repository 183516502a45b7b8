//! Geometry of a quadruple-UPA transceiver.
//!
//! Four half-wavelength-spaced uniform planar arrays sit on the side faces of
//! a cube. Face `k` points at azimuth `(k-1)*pi/2` and serves the closed
//! sector of azimuth within `pi/4` of its boresight and elevation in
//! `[pi/4, 3pi/4]`; together the faces cover the full azimuth circle and half
//! the elevation range. This module provides direction handling, sector
//! membership, steering vectors, the idealized per-face radiation pattern and
//! its antenna gain, closed-form beam gain, and the wideband gain-reduction
//! figure of phase-shifter beamforming.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

use crate::{Error, Result};

/// Lower elevation edge of every sector.
pub const ELEVATION_MIN: f64 = FRAC_PI_4;
/// Upper elevation edge of every sector.
pub const ELEVATION_MAX: f64 = 3.0 * FRAC_PI_4;

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_azimuth(az: f64) -> f64 {
    let a = az.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Propagation direction in the fixed frame of a transceiver.
///
/// Azimuth is kept in `(-pi, pi]`, elevation in `[0, pi]` measured from the
/// +z axis, so the horizon is `pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        debug_assert!(
            (-1e-9..=PI + 1e-9).contains(&elevation),
            "elevation {elevation} outside [0, pi]"
        );
        Self {
            azimuth: wrap_azimuth(azimuth),
            elevation: elevation.clamp(0.0, PI),
        }
    }

    #[inline]
    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    #[inline]
    pub fn elevation(&self) -> f64 {
        self.elevation
    }
}

/// One of the four array faces, numbered 1 through 4 counterclockwise
/// starting at the +x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UpaIndex(u8);

impl UpaIndex {
    pub const ALL: [UpaIndex; 4] = [UpaIndex(1), UpaIndex(2), UpaIndex(3), UpaIndex(4)];

    pub fn new(k: u8) -> Result<Self> {
        if (1..=4).contains(&k) {
            Ok(Self(k))
        } else {
            Err(Error::IndexOutOfRange(format!("UPA index {k}, want 1..=4")))
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, for array indexing.
    #[inline]
    pub fn index0(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// Boresight azimuth of this face.
    #[inline]
    pub fn boresight(self) -> f64 {
        f64::from(self.0 - 1) * (PI / 2.0)
    }
}

impl std::fmt::Display for UpaIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Element counts of one UPA face. All four faces are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpaConfig {
    pub n_y: usize,
    pub n_z: usize,
}

impl UpaConfig {
    pub fn new(n_y: usize, n_z: usize) -> Result<Self> {
        if n_y == 0 || n_z == 0 {
            return Err(Error::InvalidConfig(format!(
                "UPA element counts must be positive, got {n_y}x{n_z}"
            )));
        }
        Ok(Self { n_y, n_z })
    }

    /// Total element count of one face.
    #[inline]
    pub fn n_a(&self) -> usize {
        self.n_y * self.n_z
    }
}

/// Angular region served by one face: closed on all edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRange {
    pub upa: UpaIndex,
    /// Azimuth interval half width around the boresight.
    pub azimuth_half_width: f64,
    pub elevation_min: f64,
    pub elevation_max: f64,
}

impl SectorRange {
    /// Azimuth bounds without wrapping; the upper bound may exceed pi.
    pub fn azimuth_bounds(&self) -> (f64, f64) {
        let c = self.upa.boresight();
        (c - self.azimuth_half_width, c + self.azimuth_half_width)
    }

    pub fn contains(&self, dir: &Direction) -> bool {
        let delta = wrap_azimuth(dir.azimuth() - self.upa.boresight());
        delta.abs() <= self.azimuth_half_width
            && dir.elevation() >= self.elevation_min
            && dir.elevation() <= self.elevation_max
    }
}

/// Sector served by face `k`.
pub fn sector(k: UpaIndex) -> SectorRange {
    SectorRange {
        upa: k,
        azimuth_half_width: FRAC_PI_4,
        elevation_min: ELEVATION_MIN,
        elevation_max: ELEVATION_MAX,
    }
}

/// Idealized radiation pattern of face `k`: 1 inside its closed sector,
/// 0 outside. A direction exactly on a shared azimuth edge lies in both
/// adjacent sectors; use [`owning_upa`] when a unique owner is needed.
pub fn radiation_pattern(k: UpaIndex, dir: &Direction) -> f64 {
    if sector(k).contains(dir) {
        1.0
    } else {
        0.0
    }
}

/// Unique serving face for a direction, ties on shared azimuth edges going
/// to the lower index. `None` when the elevation is outside every sector.
pub fn owning_upa(dir: &Direction) -> Option<UpaIndex> {
    UpaIndex::ALL.into_iter().find(|k| sector(*k).contains(dir))
}

/// Antenna gain of one face under the idealized sector pattern, linear.
///
/// The sector subtends a solid angle of `sqrt(2)*pi/2` sr, so concentrating
/// the full sphere onto it yields `4*sqrt(2)` per element, times the element
/// count of the face.
pub fn antenna_gain(cfg: &UpaConfig) -> f64 {
    4.0 * 2f64.sqrt() * cfg.n_a() as f64
}

// ── steering vectors ────────────────────────────────────────────────────────

/// Steering vector of one face parameterized directly by the direction
/// cosines seen by the array: `v` along the element columns (vertical axis)
/// and `h` along the element rows (horizontal axis). Element `(iy, iz)` gets
/// phase `pi * ((iy - (n_y-1)/2) * h + (iz - (n_z-1)/2) * v)`, so the phase
/// reference sits at the face center. Unit norm.
pub fn steering_vh(cfg: &UpaConfig, v: f64, h: f64) -> Vec<Complex64> {
    let norm = 1.0 / (cfg.n_a() as f64).sqrt();
    let cy0 = 0.5 * (cfg.n_y as f64 - 1.0);
    let cz0 = 0.5 * (cfg.n_z as f64 - 1.0);
    let mut w = Vec::with_capacity(cfg.n_a());
    for iy in 0..cfg.n_y {
        let py = (iy as f64 - cy0) * h;
        for iz in 0..cfg.n_z {
            let pz = (iz as f64 - cz0) * v;
            w.push(Complex64::from_polar(norm, PI * (py + pz)));
        }
    }
    w
}

/// Array response of face `k` toward a direction: the steering vector at
/// direction cosines `v = cos(el)`, `h = sin(az - boresight) * sin(el)`.
pub fn array_response(cfg: &UpaConfig, k: UpaIndex, dir: &Direction) -> Vec<Complex64> {
    let (v, h) = vh_relative(k, dir);
    steering_vh(cfg, v, h)
}

/// Direction cosines `(V, H) = (cos el, sin el * sin az)` in the frame of
/// face 1.
pub fn vh_transform(dir: &Direction) -> (f64, f64) {
    (
        dir.elevation().cos(),
        dir.elevation().sin() * dir.azimuth().sin(),
    )
}

/// Direction cosines in the frame of face `k` (azimuth measured from its
/// boresight).
pub fn vh_relative(k: UpaIndex, dir: &Direction) -> (f64, f64) {
    (
        dir.elevation().cos(),
        dir.elevation().sin() * (dir.azimuth() - k.boresight()).sin(),
    )
}

/// Flattened grid coordinates of a direction for face `k`:
/// `Phi = sin(az - boresight) + sqrt(2)*(k-1)` chains the four faces into one
/// circular azimuth axis of circumference `4*sqrt(2)`, and `Theta = -cos(el)`
/// runs from -1 (up) to 1 (down).
pub fn grid_transform(k: UpaIndex, dir: &Direction) -> (f64, f64) {
    let phi = (dir.azimuth() - k.boresight()).sin() + 2f64.sqrt() * f64::from(k.get() - 1);
    (phi, -dir.elevation().cos())
}

// ── beamformers and beam gain ───────────────────────────────────────────────

/// Beamforming weight vector bound to one face. Codewords produced by this
/// crate have norm at most 1; narrow codewords have norm exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub upa: UpaIndex,
    pub weights: Vec<Complex64>,
}

impl Beamformer {
    pub fn new(upa: UpaIndex, weights: Vec<Complex64>) -> Self {
        Self { upa, weights }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Inner product `a^H b` of two equal-length complex vectors.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Normalized beam gain `|a_k(dir)^H w|` of a beamformer toward a direction.
/// 1 means perfectly matched; the sector mask is not applied here.
pub fn beam_gain(cfg: &UpaConfig, beam: &Beamformer, dir: &Direction) -> f64 {
    let a = array_response(cfg, beam.upa, dir);
    inner(&a, &beam.weights).norm()
}

// ── closed-form gain kernels ────────────────────────────────────────────────

/// Guard band around the removable singularities of [`dirichlet_ratio`].
const DIRICHLET_GUARD: f64 = 1e-9;

/// `|sin(n*pi*x/2) / sin(pi*x/2)|`, the aperture kernel of an `n`-element
/// uniform line array over a direction-cosine offset `x`.
///
/// The ratio has period 2 in `x`; the argument is reduced to `[-1, 1]` first,
/// and inputs within 1e-9 of a singularity return the limit `n`.
pub fn dirichlet_ratio(n: usize, x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r.abs() < DIRICHLET_GUARD {
        n as f64
    } else {
        (f64::sin(n as f64 * PI * r / 2.0) / f64::sin(PI * r / 2.0)).abs()
    }
}

/// Closed-form beam gain between a steering codeword at `(v_t, h_t)` and a
/// direction at `(v, h)`: the product of the two line-array kernels divided
/// by the element count. Equals [`beam_gain`] of the corresponding vectors.
pub fn separable_gain(cfg: &UpaConfig, v: f64, h: f64, v_t: f64, h_t: f64) -> f64 {
    dirichlet_ratio(cfg.n_z, v - v_t) * dirichlet_ratio(cfg.n_y, h - h_t) / cfg.n_a() as f64
}

// ── wideband squint ─────────────────────────────────────────────────────────

/// Carrier and bandwidth of a wideband link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquintConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl SquintConfig {
    pub fn new(carrier_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        if !(carrier_hz.is_finite() && bandwidth_hz.is_finite())
            || bandwidth_hz <= 0.0
            || bandwidth_hz >= carrier_hz
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < bandwidth < carrier, got B = {bandwidth_hz}, fc = {carrier_hz}"
            )));
        }
        Ok(Self {
            carrier_hz,
            bandwidth_hz,
        })
    }

    #[inline]
    pub fn fractional_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.carrier_hz
    }
}

fn require_square(n_a: usize) -> Result<usize> {
    let root = (n_a as f64).sqrt().round() as usize;
    if root * root == n_a && n_a > 0 {
        Ok(root)
    } else {
        Err(Error::InvalidConfig(format!(
            "wideband figures assume a square array, got {n_a} elements"
        )))
    }
}

/// Band-averaged array gain of a phase-shifter-steered square array at
/// azimuth offset `az` from boresight, relative to the narrowband gain.
/// 1 at boresight, decreasing toward the sector edge.
pub fn wideband_gain(s: &SquintConfig, n_a: usize, az: f64) -> Result<f64> {
    let root = require_square(n_a)? as f64;
    let x = PI * s.fractional_bandwidth() / 4.0 * az.sin();
    if x.abs() < DIRICHLET_GUARD {
        return Ok(1.0);
    }
    Ok((f64::sin(root * x) / (root * f64::sin(x))).abs())
}

/// Fraction of the boresight-to-edge wideband loss removed by serving only
/// azimuth offsets up to `pi/4` instead of `pi/2`:
/// `(A(pi/4) - A(pi/2)) / (1 - A(pi/2))`.
pub fn squint_reduction(s: &SquintConfig, n_a: usize) -> Result<f64> {
    let quarter = wideband_gain(s, n_a, FRAC_PI_4)?;
    let half = wideband_gain(s, n_a, PI / 2.0)?;
    Ok((quarter - half) / (1.0 - half))
}
