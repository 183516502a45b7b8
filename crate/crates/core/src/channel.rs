//! Multipath channel model and link-level measurements.
//!
//! A channel realization is a line-of-sight path plus optional reflected
//! paths, each with a complex gain and a departure/arrival direction pair.
//! Rendering a realization for a transmit face and a receive face applies the
//! idealized sector masks of both faces, the antenna gains, and the outer
//! product of the array responses. Measurements model one pilot slot: a
//! unit-power symbol through the channel plus circularly-symmetric Gaussian
//! receiver noise, returning received power.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::geometry::{
    antenna_gain, array_response, inner, radiation_pattern, Beamformer, Direction, UpaConfig,
    UpaIndex,
};
use crate::{db_to_linear, linear_to_db};

/// Power and spectral parameters of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_per_hz: f64,
    /// Propagation loss applied to the line-of-sight amplitude, in dB
    /// (negative for a loss).
    pub propagation_loss_db: f64,
}

impl LinkBudget {
    /// 0.26 THz carrier, 20 GHz bandwidth, 25 dBm transmit power,
    /// -174 dBm/Hz noise floor, -124.6 dB propagation loss at 100 m.
    pub fn thz_reference() -> Self {
        Self {
            carrier_hz: 0.26e12,
            bandwidth_hz: 20e9,
            tx_power_dbm: 25.0,
            noise_psd_dbm_per_hz: -174.0,
            propagation_loss_db: -124.6,
        }
    }

    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_psd_dbm_per_hz + 10.0 * self.bandwidth_hz.log10()
    }

    pub fn noise_power_mw(&self) -> f64 {
        db_to_linear(self.noise_power_dbm())
    }

    pub fn tx_power_mw(&self) -> f64 {
        db_to_linear(self.tx_power_dbm)
    }

    /// Line-of-sight amplitude gain from the propagation loss.
    pub fn los_amplitude(&self) -> f64 {
        db_to_linear(self.propagation_loss_db / 2.0)
    }

    /// Decoding SNR of a perfectly aligned narrow-beam pair, in dB.
    pub fn aligned_snr_db(&self, cfg: &UpaConfig) -> f64 {
        let g_db = 10.0 * antenna_gain(cfg).log10();
        self.tx_power_dbm + 2.0 * g_db + self.propagation_loss_db - self.noise_power_dbm()
    }

    /// Budget with the transmit power adjusted so the perfectly aligned
    /// decoding SNR equals `target_db`.
    pub fn with_aligned_snr_db(mut self, cfg: &UpaConfig, target_db: f64) -> Self {
        let current = self.aligned_snr_db(cfg);
        self.tx_power_dbm += target_db - current;
        self
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: Complex64,
    pub departure: Direction,
    pub arrival: Direction,
}

/// Channel between two transceivers at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub los: PathComponent,
    pub nlos: Vec<PathComponent>,
}

impl ChannelRealization {
    /// Line-of-sight-only realization with a real positive gain taken from
    /// the budget's propagation loss.
    pub fn los_only(budget: &LinkBudget, departure: Direction, arrival: Direction) -> Self {
        Self {
            los: PathComponent {
                gain: Complex64::new(budget.los_amplitude(), 0.0),
                departure,
                arrival,
            },
            nlos: Vec::new(),
        }
    }

    pub fn paths(&self) -> impl Iterator<Item = &PathComponent> {
        std::iter::once(&self.los).chain(self.nlos.iter())
    }
}

/// Reflected paths with directions uniform over the sphere on both ends,
/// amplitudes `relative_level_db` below the line-of-sight amplitude, and
/// uniform phases.
pub fn sample_nlos<R: Rng>(
    rng: &mut R,
    count: usize,
    los_amplitude: f64,
    relative_level_db: f64,
    ) -> Vec<PathComponent> {
    let amp = los_amplitude * db_to_linear(relative_level_db / 2.0);
    (0..count)
        .map(|_| {
            let departure = random_sphere_direction(rng);
            let arrival = random_sphere_direction(rng);
            let phase = rng.random_range(-PI..PI);
            PathComponent {
                gain: Complex64::from_polar(amp, phase),
                departure,
                arrival,
            }
        })
        .collect()
}

/// Direction uniform over the full sphere.
pub fn random_sphere_direction<R: Rng>(rng: &mut R) -> Direction {
    let az = rng.random_range(-PI..PI);
    let u: f64 = rng.random_range(-1.0..1.0);
    Direction::new(az, u.acos())
}

/// Per-path amplitude weight between transmit face `k` and receive face `m`:
/// sector masks and antenna gains, without the array responses.
fn path_weight(cfg: &UpaConfig, path: &PathComponent, k: UpaIndex, m: UpaIndex) -> f64 {
    let mask = radiation_pattern(k, &path.departure) * radiation_pattern(m, &path.arrival);
    if mask == 0.0 {
        return 0.0;
    }
    (antenna_gain(cfg) * antenna_gain(cfg) * mask).sqrt()
}

/// Dense channel matrix between transmit face `k` and receive face `m`:
/// the sum over paths of `sqrt(G_t G_r F_k F_m) * gain * a_m a_k^H`.
pub fn render_channel(
    cfg: &UpaConfig,
    real: &ChannelRealization,
    k: UpaIndex,
    m: UpaIndex,
) -> DMatrix<Complex64> {
    let n_a = cfg.n_a();
    let mut h = DMatrix::<Complex64>::zeros(n_a, n_a);
    for path in real.paths() {
        let weight = path_weight(cfg, path, k, m);
        if weight == 0.0 {
            continue;
        }
        let a_rx = array_response(cfg, m, &path.arrival);
        let a_tx = array_response(cfg, k, &path.departure);
        let scale = path.gain * weight;
        for (col, at) in a_tx.iter().enumerate() {
            let c = scale * at.conj();
            for (row, ar) in a_rx.iter().enumerate() {
                h[(row, col)] += ar * c;
            }
        }
    }
    h
}

/// `w^H H f` computed from the path list without forming the matrix.
/// Identical to pairing [`render_channel`] with [`bilinear`].
pub fn link_amplitude(
    cfg: &UpaConfig,
    real: &ChannelRealization,
    k: UpaIndex,
    m: UpaIndex,
    w: &[Complex64],
    f: &[Complex64],
) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for path in real.paths() {
        let weight = path_weight(cfg, path, k, m);
        if weight == 0.0 {
            continue;
        }
        let a_rx = array_response(cfg, m, &path.arrival);
        let a_tx = array_response(cfg, k, &path.departure);
        acc += path.gain * weight * inner(w, &a_rx) * inner(&a_tx, f);
    }
    acc
}

/// `w^H H f` for a dense channel matrix.
pub fn bilinear(w: &[Complex64], h: &DMatrix<Complex64>, f: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for (col, fc) in f.iter().enumerate() {
        let mut col_acc = Complex64::ZERO;
        for (row, wr) in w.iter().enumerate() {
            col_acc += wr.conj() * h[(row, col)];
        }
        acc += col_acc * fc;
    }
    acc
}

/// Decoding SNR `P |w^H H f|^2 / sigma^2` in dB. Dead links report the
/// crate-wide floor.
pub fn decoding_snr(
    budget: &LinkBudget,
    w: &Beamformer,
    h: &DMatrix<Complex64>,
    f: &Beamformer,
) -> f64 {
    let amp = bilinear(&w.weights, h, &f.weights);
    snr_from_amplitude(budget, amp)
}

/// Decoding SNR from a precomputed `w^H H f`.
pub fn snr_from_amplitude(budget: &LinkBudget, amplitude: Complex64) -> f64 {
    let signal = budget.tx_power_mw() * amplitude.norm_sqr();
    let noise = budget.noise_power_mw();
    if noise == 0.0 {
        return f64::INFINITY;
    }
    linear_to_db(signal / noise)
}

/// One pilot-slot measurement: received power of a unit symbol through the
/// channel plus receiver noise, in mW.
pub fn measure<R: Rng>(
    budget: &LinkBudget,
    w: &Beamformer,
    h: &DMatrix<Complex64>,
    f: &Beamformer,
    rng: &mut R,
) -> f64 {
    let amp = bilinear(&w.weights, h, &f.weights);
    measure_amplitude(budget, amp, w.norm(), rng, 1)
}

/// Measurement from a precomputed `w^H H f`, averaging `symbols` pilot
/// symbols with independent noise.
pub fn measure_amplitude<R: Rng>(
    budget: &LinkBudget,
    amplitude: Complex64,
    w_norm: f64,
    rng: &mut R,
    symbols: usize,
) -> f64 {
    let signal = amplitude * budget.tx_power_mw().sqrt();
    let sigma = (budget.noise_power_mw() / 2.0).sqrt() * w_norm;
    let mut acc = 0.0;
    for _ in 0..symbols.max(1) {
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let y = signal + Complex64::new(n1 * sigma, n2 * sigma);
        acc += y.norm_sqr();
    }
    acc / symbols.max(1) as f64
}

/// Measured-power to SNR-estimate conversion: the ratio of received power to
/// noise power in dB, the detection statistic used by the tracking triggers.
pub fn measured_snr_db(budget: &LinkBudget, power_mw: f64) -> f64 {
    let noise = budget.noise_power_mw();
    if noise == 0.0 {
        return f64::INFINITY;
    }
    linear_to_db(power_mw / noise)
}
