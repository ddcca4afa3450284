//! Link-level harness: Gray-mapped 16-QAM over OFDM, passage through the
//! tapped-delay-line channel plus AWGN, per-subcarrier zero-forcing
//! equalization with perfect channel knowledge, and SNR/BER accounting over
//! distance.
//!
//! Conventions: the transmitted time-domain waveform has unit average power,
//! so the amplitude scale √(P_t·G_t·G_r) makes the received tap-sum power
//! directly comparable to the noise power P_w. The bulk propagation delay
//! d/c is timing-compensated at the receiver (perfect sync); only excess
//! delays shape the frequency response. One tap set is drawn per OFDM
//! symbol and the state advances one coherence time between symbols.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::channel::{build_tapset, jakes_dopplers, TapSet};
use crate::config::{LinkParams, ScenarioConfig, PROPAGATION_SPEED};
use crate::error::{Error, Result};
use crate::exec;
use crate::path_loss;
use crate::rng::{stream, StreamDomain};
use crate::sde::{SdeEngine, SdeStreams};

const QAM_SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10, unit mean symbol energy

/// Gray-mapped 4-level amplitude for a bit pair: 00→-3, 01→-1, 11→+1, 10→+3.
fn gray_pam(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        (1, 0) => 3.0,
        _ => unreachable!("bits must be 0/1"),
    }
}

fn gray_slice(level: f64) -> (u8, u8) {
    if level < -2.0 {
        (0, 0)
    } else if level < 0.0 {
        (0, 1)
    } else if level < 2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

/// Maps bits (4 per symbol, I then Q pair) onto the unit-energy Gray 16-QAM
/// constellation.
pub fn qam16_mod(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 4 != 0 {
        return Err(Error::Length {
            expected: bits.len().next_multiple_of(4),
            got: bits.len(),
        });
    }
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::Domain("bits must be 0 or 1".into()));
    }
    Ok(bits
        .chunks_exact(4)
        .map(|b| {
            Complex64::new(
                gray_pam(b[0], b[1]) * QAM_SCALE,
                gray_pam(b[2], b[3]) * QAM_SCALE,
            )
        })
        .collect())
}

/// Nearest-neighbour demodulation back to bits.
pub fn qam16_demod(symbols: &[Complex64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 4);
    for s in symbols {
        let (b0, b1) = gray_slice(s.re / QAM_SCALE);
        let (b2, b3) = gray_slice(s.im / QAM_SCALE);
        bits.extend_from_slice(&[b0, b1, b2, b3]);
    }
    bits
}

/// OFDM framing: occupied-subcarrier mapping, inverse transform, cyclic
/// prefix. Guard subcarriers sit contiguously around the Nyquist bin, i.e.
/// split evenly between the band edges in frequency order.
pub struct Ofdm {
    n: usize,
    cp: usize,
    occupied: Vec<usize>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Ofdm {
    pub fn new(lp: &LinkParams) -> Self {
        let n = lp.n_subcarriers;
        let half_guard = lp.n_guard / 2;
        let lo = n / 2 - half_guard;
        let hi = n / 2 + half_guard;
        let occupied = (0..n).filter(|k| *k < lo || *k >= hi).collect();
        let mut planner = FftPlanner::new();
        Ofdm {
            n,
            cp: lp.cp_len,
            occupied,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn occupied_bins(&self) -> &[usize] {
        &self.occupied
    }

    pub fn frame_len(&self) -> usize {
        self.n + self.cp
    }

    /// One OFDM symbol: occupied bins carry `symbols`, guards are zero, the
    /// last cp samples are prepended. The output has unit average power for
    /// unit-energy input symbols.
    pub fn frame(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        if symbols.len() != self.occupied.len() {
            return Err(Error::Length {
                expected: self.occupied.len(),
                got: symbols.len(),
            });
        }
        let mut bins = vec![Complex64::new(0.0, 0.0); self.n];
        for (&k, &s) in self.occupied.iter().zip(symbols) {
            bins[k] = s;
        }
        self.inv.process(&mut bins);
        let scale = 1.0 / (self.occupied.len() as f64).sqrt();
        for b in bins.iter_mut() {
            *b *= scale;
        }
        let mut out = Vec::with_capacity(self.frame_len());
        out.extend_from_slice(&bins[self.n - self.cp..]);
        out.extend_from_slice(&bins);
        Ok(out)
    }

    /// Strips the prefix, forward-transforms the body and returns the
    /// occupied bins. Inverse of [`Ofdm::frame`] in a clean loopback.
    pub fn deframe(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() < self.frame_len() {
            return Err(Error::Length {
                expected: self.frame_len(),
                got: samples.len(),
            });
        }
        let mut body: Vec<Complex64> = samples[self.cp..self.cp + self.n].to_vec();
        self.fwd.process(&mut body);
        let scale = (self.occupied.len() as f64).sqrt() / self.n as f64;
        Ok(self.occupied.iter().map(|&k| body[k] * scale).collect())
    }

    /// Frequency response at the occupied bins of a relative-delay FIR.
    pub fn channel_response(&self, taps: &[(u64, Complex64)]) -> Vec<Complex64> {
        let n = self.n as f64;
        self.occupied
            .iter()
            .map(|&k| {
                taps.iter()
                    .map(|&(delay, gain)| {
                        gain * Complex64::cis(-2.0 * std::f64::consts::PI * k as f64 * delay as f64 / n)
                    })
                    .sum()
            })
            .collect()
    }
}

/// Received-power SNR for one tap set: (P_t·G_t·G_r·Σ|gain|²) / P_w in dB.
pub fn snr_at(tapset: &TapSet, p_t_dbm: f64, p_w_dbm: f64, g_t_db: f64, g_r_db: f64) -> f64 {
    p_t_dbm + g_t_db + g_r_db - p_w_dbm + 10.0 * tapset.total_power().log10()
}

/// Per-distance result row.
#[derive(Debug, Clone)]
pub struct LinkPoint {
    pub d: f64,
    pub snr_db: f64,
    pub ber: f64,
    pub n_bits: usize,
    pub regime: path_loss::Regime,
}

/// Sweep output: one row per distance, optionally the per-symbol small-scale
/// envelopes √(Σ|gain|²/L) alongside.
#[derive(Debug, Clone)]
pub struct LinkTrace {
    pub points: Vec<LinkPoint>,
    pub envelopes: Vec<Vec<f64>>,
}

/// Runs the OFDM/16-QAM link at each distance. Points are independent given
/// their per-point random streams and evaluate in parallel; results are
/// ordered by the input list either way.
pub fn run_link_over_distance(
    cfg: &ScenarioConfig,
    distances: &[f64],
    collect_envelopes: bool,
) -> Result<LinkTrace> {
    let engine = SdeEngine::new(&cfg.mftr, &cfg.sde)?;
    let ofdm = Ofdm::new(&cfg.link);
    let cp_warned = AtomicBool::new(false);

    let results: Vec<Result<(LinkPoint, Vec<f64>)>> = exec::map_indexed(distances.len(), |p| {
        run_point(cfg, &engine, &ofdm, distances[p], p as u64, collect_envelopes, &cp_warned)
    });

    let mut points = Vec::with_capacity(distances.len());
    let mut envelopes = Vec::new();
    for r in results {
        let (point, env) = r?;
        points.push(point);
        if collect_envelopes {
            envelopes.push(env);
        }
    }
    Ok(LinkTrace { points, envelopes })
}

fn run_point(
    cfg: &ScenarioConfig,
    engine: &SdeEngine,
    ofdm: &Ofdm,
    d: f64,
    index: u64,
    collect_envelopes: bool,
    cp_warned: &AtomicBool,
) -> Result<(LinkPoint, Vec<f64>)> {
    let g = &cfg.geometry;
    let lp = &cfg.link;
    let regime = path_loss::path_loss(d, g)?;
    let mu = cfg.mftr.params.mu;

    let mut doppler_rng = stream(cfg.seed, StreamDomain::Doppler, 0, index);
    let dopplers = jakes_dopplers(mu, g.f_d, lp.doppler_mode, &mut doppler_rng);
    let mut bits_rng = stream(cfg.seed, StreamDomain::DataBits, 0, index);
    let mut noise_rng = stream(cfg.seed, StreamDomain::Noise, 0, index);
    let mut sde_streams = SdeStreams::new(cfg.seed, mu, index);
    let mut state = engine.init_state(&mut sde_streams);

    let amp = 10f64.powf((g.p_t_dbm + g.g_t_db + g.g_r_db) / 20.0);
    let p_w = 10f64.powf(g.p_w_dbm / 10.0);
    let noise_sigma = (p_w / 2.0).sqrt();
    let bulk_samples = (d / PROPAGATION_SPEED * g.f_s).round() as u64;
    let steps_per_symbol = (cfg.sde.t_c / engine.dt).round().max(1.0) as usize;
    let n_sub = ofdm.occupied_bins().len();
    let bits_per_symbol = n_sub * 4;

    let mut power_acc = 0.0;
    let mut errors = 0usize;
    let mut envelopes = Vec::new();

    for s in 0..lp.symbols_per_point {
        if s > 0 {
            for _ in 0..steps_per_symbol {
                engine.step(&mut state, &mut sde_streams);
            }
        }
        let t = s as f64 * cfg.sde.t_c;
        let taps = build_tapset(&state, &cfg.mftr, g, d, t, &dopplers)?;

        // Receiver timing advance: only excess delays shape the response.
        let rel: Vec<(u64, Complex64)> = taps
            .taps
            .iter()
            .map(|tap| (tap.delay_samples - bulk_samples, tap.gain))
            .collect();
        let max_rel = rel.iter().map(|(delay, _)| *delay).max().unwrap_or(0);
        if max_rel as usize > lp.cp_len && !cp_warned.swap(true, Ordering::Relaxed) {
            log::warn!(
                "delay spread {max_rel} samples exceeds the cyclic prefix ({} samples); \
                 inter-symbol leakage will degrade the link",
                lp.cp_len
            );
        }

        power_acc += taps.total_power();
        if collect_envelopes {
            envelopes.push((taps.total_power() / regime.gain).sqrt());
        }

        let tx_bits: Vec<u8> = (0..bits_per_symbol).map(|_| bits_rng.gen_range(0..2u8)).collect();
        let symbols = qam16_mod(&tx_bits)?;
        let frame = ofdm.frame(&symbols)?;

        // FIR convolution, truncated at the frame (the receiver window).
        let mut rx = vec![Complex64::new(0.0, 0.0); frame.len()];
        for &(delay, gain) in &rel {
            let delay = delay as usize;
            if delay >= rx.len() {
                continue;
            }
            for (i, &x) in frame[..frame.len() - delay].iter().enumerate() {
                rx[i + delay] += gain * x;
            }
        }
        for sample in rx.iter_mut() {
            let n = Complex64::new(
                StandardNormal.sample(&mut noise_rng),
                StandardNormal.sample(&mut noise_rng),
            ) * noise_sigma;
            *sample = *sample * amp + n;
        }

        let received = ofdm.deframe(&rx)?;
        let response = ofdm.channel_response(&rel);
        let mut equalized = Vec::with_capacity(n_sub);
        let mut dead = Vec::new();
        for (i, (y, h)) in received.iter().zip(&response).enumerate() {
            if h.norm_sqr() == 0.0 {
                dead.push(i);
                equalized.push(Complex64::new(0.0, 0.0));
            } else {
                equalized.push(y / (h * amp));
            }
        }
        let rx_bits = qam16_demod(&equalized);
        for (i, (a, b)) in tx_bits.iter().zip(&rx_bits).enumerate() {
            if dead.contains(&(i / 4)) {
                continue;
            }
            if a != b {
                errors += 1;
            }
        }
        // A vanished subcarrier leaves the equalizer undefined: its bits
        // count as half wrong.
        errors += dead.len() * 2;
        if !dead.is_empty() {
            log::debug!("{} dead subcarriers at d = {d} m, symbol {s}", dead.len());
        }
    }

    let n_bits = lp.symbols_per_point * bits_per_symbol;
    let mean_power = power_acc / lp.symbols_per_point as f64;
    let snr_db = g.p_t_dbm + g.g_t_db + g.g_r_db - g.p_w_dbm + 10.0 * mean_power.log10();
    Ok((
        LinkPoint {
            d,
            snr_db,
            ber: errors as f64 / n_bits as f64,
            n_bits,
            regime: regime.regime,
        },
        envelopes,
    ))
}

/// Per-symbol small-scale envelope samples at a fixed distance, for PDF
/// estimation. Fans out over a fixed realization count like the other
/// stationary samplers.
pub fn collect_envelope_samples(
    cfg: &ScenarioConfig,
    d: f64,
    n_symbols: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    use crate::sde::STATIONARY_REALIZATIONS;
    let engine = SdeEngine::new(&cfg.mftr, &cfg.sde)?;
    let g = &cfg.geometry;
    let large_scale = path_loss::path_loss(d, g)?.gain;
    let mu = cfg.mftr.params.mu;
    let per_real = n_symbols.div_ceil(STATIONARY_REALIZATIONS);
    let steps = (cfg.sde.t_c / engine.dt).round().max(1.0) as usize;

    let chunks: Vec<Result<Vec<f64>>> = exec::map_indexed(STATIONARY_REALIZATIONS, |r| {
        let mut doppler_rng = stream(master_seed, StreamDomain::Doppler, 0, r as u64);
        let dopplers = jakes_dopplers(mu, g.f_d, cfg.link.doppler_mode, &mut doppler_rng);
        let mut streams = SdeStreams::new(master_seed, mu, r as u64);
        let mut state = engine.init_state(&mut streams);
        let mut out = Vec::with_capacity(per_real);
        for s in 0..per_real {
            for _ in 0..steps {
                engine.step(&mut state, &mut streams);
            }
            let t = (s + 1) as f64 * cfg.sde.t_c;
            let taps = build_tapset(&state, &cfg.mftr, g, d, t, &dopplers)?;
            out.push((taps.total_power() / large_scale).sqrt());
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(n_symbols);
    for c in chunks {
        all.extend(c?);
    }
    all.truncate(n_symbols);
    Ok(all)
}

/// AWGN-only calibration path: the OFDM/16-QAM chain with a flat unit
/// channel and noise set for the requested per-subcarrier Es/N0. Returns
/// (BER, bits counted).
pub fn awgn_ber(lp: &LinkParams, es_n0_db: f64, min_bits: usize, master_seed: u64) -> (f64, usize) {
    let ofdm = Ofdm::new(lp);
    let n_sub = ofdm.occupied_bins().len();
    let bits_per_symbol = n_sub * 4;
    let gamma = 10f64.powf(es_n0_db / 10.0);
    // Unit-power framing spreads symbol energy over time: per-subcarrier
    // Es/N0 = N/(N_occ·σ_w²).
    let sigma_w2 = lp.n_subcarriers as f64 / (n_sub as f64 * gamma);
    let noise_sigma = (sigma_w2 / 2.0).sqrt();

    let mut bits_rng = stream(master_seed, StreamDomain::DataBits, 0, 1_000_000);
    let mut noise_rng = stream(master_seed, StreamDomain::Noise, 0, 1_000_000);
    let mut errors = 0usize;
    let mut total = 0usize;
    while total < min_bits {
        let tx: Vec<u8> = (0..bits_per_symbol).map(|_| bits_rng.gen_range(0..2u8)).collect();
        let mut frame = ofdm.frame(&qam16_mod(&tx).unwrap()).unwrap();
        for s in frame.iter_mut() {
            *s += Complex64::new(
                StandardNormal.sample(&mut noise_rng),
                StandardNormal.sample(&mut noise_rng),
            ) * noise_sigma;
        }
        let rx = qam16_demod(&ofdm.deframe(&frame).unwrap());
        errors += tx.iter().zip(&rx).filter(|(a, b)| a != b).count();
        total += bits_per_symbol;
    }
    (errors as f64 / total as f64, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Tap;
    use crate::config::ScenarioConfig;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn config(extra: &str) -> ScenarioConfig {
        let text = format!(
            r#"
[mftr]
k = 10.788
delta = 0.29
mu = 40
m = 90.252

[geometry]
h_t_m = 8.0
h_r_m = 15.0
h_e_m = 35.0
d0_m = 200.0

[radio]
f_c_ghz = 5.0
f_d_hz = 100.0
f_s_mhz = 20.0
p_t_dbm = 40.0
p_w_dbm = -100.0
g_t_db = 0.0
g_r_db = 0.0
v_kmh = 25.0

[sde]
c_phi = 6.283185307179586
c_tau = 1e-10
t_c_ms = 10.0
dt_s = 1e-3

[link]
symbols_per_point = 4

[run]
seed = 11
{extra}
"#
        );
        ScenarioConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn qam_constellation_is_unit_energy_and_invertible() {
        let mut energy = 0.0;
        for word in 0u8..16 {
            let bits = [(word >> 3) & 1, (word >> 2) & 1, (word >> 1) & 1, word & 1];
            let sym = qam16_mod(&bits).unwrap()[0];
            energy += sym.norm_sqr();
            assert_eq!(qam16_demod(&[sym]), bits.to_vec());
        }
        assert_relative_eq!(energy / 16.0, 1.0, max_relative = 1e-12);
        assert!(qam16_mod(&[0, 1, 0]).is_err());
        assert!(qam16_mod(&[0, 1, 2, 0]).is_err());
    }

    #[test]
    fn qam_noiseless_round_trip_bulk() {
        let mut rng = stream(5, StreamDomain::DataBits, 0, 42);
        let bits: Vec<u8> = (0..1_000_000).map(|_| rng.gen_range(0..2u8)).collect();
        let rx = qam16_demod(&qam16_mod(&bits).unwrap());
        assert_eq!(bits, rx);
    }

    #[test]
    fn ofdm_loopback_identity() {
        let lp = LinkParams::default();
        let ofdm = Ofdm::new(&lp);
        let mut rng = stream(6, StreamDomain::DataBits, 0, 43);
        let bits: Vec<u8> = (0..lp.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
        let symbols = qam16_mod(&bits).unwrap();
        let frame = ofdm.frame(&symbols).unwrap();
        assert_eq!(frame.len(), 1280);
        let back = ofdm.deframe(&frame).unwrap();
        let max_err = symbols
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-12, "loopback error {max_err}");

        // Unit average transmit power.
        let p: f64 = frame.iter().map(|s| s.norm_sqr()).sum::<f64>() / frame.len() as f64;
        assert!((p - 1.0).abs() < 0.15, "frame power {p}");
    }

    #[test]
    fn ofdm_guard_bins_stay_empty() {
        let lp = LinkParams::default();
        let ofdm = Ofdm::new(&lp);
        let symbols = vec![Complex64::new(1.0, 0.0); lp.occupied_subcarriers()];
        let frame = ofdm.frame(&symbols).unwrap();
        let mut body: Vec<Complex64> = frame[lp.cp_len..].to_vec();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(lp.n_subcarriers).process(&mut body);
        for k in 480..544 {
            assert!(body[k].norm() < 1e-9, "guard bin {k} carries power");
        }
    }

    #[test]
    fn single_tap_scales_subcarriers_by_phase_ramp() {
        let lp = LinkParams::default();
        let ofdm = Ofdm::new(&lp);
        let mut rng = stream(7, StreamDomain::DataBits, 0, 44);
        let bits: Vec<u8> = (0..lp.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
        let symbols = qam16_mod(&bits).unwrap();
        let frame = ofdm.frame(&symbols).unwrap();
        let gain = Complex64::new(0.4, -0.6);
        let delta = 19u64;

        let mut rx = vec![Complex64::new(0.0, 0.0); frame.len()];
        for (i, &x) in frame[..frame.len() - delta as usize].iter().enumerate() {
            rx[i + delta as usize] += gain * x;
        }
        let received = ofdm.deframe(&rx).unwrap();
        for ((&k, s), y) in ofdm.occupied_bins().iter().zip(&symbols).zip(&received) {
            let expected = gain
                * Complex64::cis(
                    -2.0 * std::f64::consts::PI * k as f64 * delta as f64 / 1024.0,
                )
                * s;
            assert!((y - expected).norm() < 1e-9);
        }
        // And the analytic response matches the same ramp.
        let resp = ofdm.channel_response(&[(delta, gain)]);
        for (&k, h) in ofdm.occupied_bins().iter().zip(&resp) {
            let expected = gain
                * Complex64::cis(-2.0 * std::f64::consts::PI * k as f64 * delta as f64 / 1024.0);
            assert!((h - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn snr_reference_arithmetic() {
        let taps = TapSet {
            taps: vec![Tap {
                gain: Complex64::new(1.0, 0.0),
                delay_samples: 0,
                delay_seconds: 0.0,
            }],
            t: 0.0,
            d: 100.0,
            norm: 1.0,
        };
        assert_relative_eq!(snr_at(&taps, 40.0, -100.0, 0.0, 0.0), 140.0, max_relative = 1e-12);
        let half = TapSet {
            taps: vec![Tap {
                gain: Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                delay_samples: 0,
                delay_seconds: 0.0,
            }],
            ..taps.clone()
        };
        assert!((snr_at(&half, 40.0, -100.0, 0.0, 0.0) - (140.0 - 3.0103)).abs() < 1e-3);
    }

    #[test]
    fn noiseless_link_is_error_free() {
        // Small C_τ keeps the delay spread far inside the cyclic prefix, the
        // precondition for the exact end-to-end identity.
        let mut cfg = config("")
            .with_mftr(crate::config::MftrParams::new(10.788, 0.29, 4, 90.252))
            .unwrap();
        cfg.sde.c_tau = 1e-12;
        cfg.geometry.p_w_dbm = f64::NEG_INFINITY;
        let trace = run_link_over_distance(&cfg, &[1_000.0, 5_000.0], false).unwrap();
        for p in &trace.points {
            assert_eq!(p.ber, 0.0, "noiseless ZF with perfect CSI at d = {}", p.d);
            assert!(p.snr_db.is_infinite() && p.snr_db > 0.0);
        }
    }

    #[test]
    fn link_points_are_deterministic_and_ordered() {
        let cfg = config("");
        let a = run_link_over_distance(&cfg, &[800.0, 3_000.0, 12_000.0], true).unwrap();
        let b = run_link_over_distance(&cfg, &[800.0, 3_000.0, 12_000.0], true).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.snr_db.to_bits(), pb.snr_db.to_bits());
            assert_eq!(pa.ber, pb.ber);
            assert_eq!(pa.n_bits, 4 * 960 * 4);
        }
        for (ea, eb) in a.envelopes.iter().zip(&b.envelopes) {
            assert_eq!(ea.len(), 4);
            let bits_a: Vec<u64> = ea.iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u64> = eb.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
    }

    #[test]
    fn awgn_calibration_hits_analytic_curve() {
        // Exact Gray 16-QAM bit error probability at symbol SNR γ:
        // (3/4)Q(a) + (1/2)Q(3a) - (1/4)Q(5a), a = √(γ/5).
        fn q(x: f64) -> f64 {
            0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
        }
        fn analytic(gamma_db: f64) -> f64 {
            let a = (10f64.powf(gamma_db / 10.0) / 5.0).sqrt();
            0.75 * q(a) + 0.5 * q(3.0 * a) - 0.25 * q(5.0 * a)
        }
        // Frozen from the expression above.
        assert!((analytic(6.0) - 0.1415).abs() < 2e-4);
        assert!((analytic(10.0) - 0.0590).abs() < 1e-4);
        assert!((analytic(14.0) - 9.37e-3).abs() < 5e-5);

        let lp = LinkParams::default();
        let (ber, n) = awgn_ber(&lp, 10.0, 1_000_000, 99);
        assert!(n >= 1_000_000);
        let expected = analytic(10.0);
        assert!(
            (ber - expected).abs() / expected < 0.1,
            "ber {ber} vs analytic {expected}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        /// Modulation/demodulation is the identity on random bit strings.
        #[test]
        fn qam_round_trip(bits in proptest::collection::vec(0u8..2, 4..256)) {
            let len = bits.len() - bits.len() % 4;
            let bits = &bits[..len];
            if !bits.is_empty() {
                prop_assert_eq!(qam16_demod(&qam16_mod(bits).unwrap()), bits.to_vec());
            }
        }
    }
}
