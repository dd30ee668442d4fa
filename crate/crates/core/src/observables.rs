//! Energies, magnetization, spectra, the decorrelator and timescale extraction.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::{effective_field_direct, DriveParams};
use crate::error::{Error, Result};
use crate::lattice::InteractionKernel;
use crate::state::SpinConfig;
use crate::trig::sin_cos_turns;

/// Infinite-temperature value of the decorrelator.
pub const D_INFINITY: f64 = std::f64::consts::SQRT_2;

/// Scalar samples at stroboscopic period indices `n` (time `nT`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    label: String,
    times: Vec<u64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>) -> Self {
        TimeSeries {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn from_parts(label: impl Into<String>, times: Vec<u64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Series(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Series("times must be strictly increasing".into()));
        }
        Ok(TimeSeries {
            label: label.into(),
            times,
            values,
        })
    }

    pub fn push(&mut self, time: u64, value: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if time <= last {
                return Err(Error::Series(format!(
                    "time {time} does not follow {last} in `{}`",
                    self.label
                )));
            }
        }
        self.times.push(time);
        self.values.push(value);
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples at times that are multiples of `every` (the `m(nkT)` view).
    pub fn decimate(&self, every: u64) -> TimeSeries {
        let (times, values) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t % every == 0)
            .map(|(&t, &v)| (t, v))
            .unzip();
        TimeSeries {
            label: self.label.clone(),
            times,
            values,
        }
    }

    /// Value at `time`, if it was recorded.
    pub fn at(&self, time: u64) -> Option<f64> {
        self.times.binary_search(&time).ok().map(|i| self.values[i])
    }
}

/// Period-averaged energy per spin, `H_T / N`, from a precomputed field.
///
/// `H_T = ½ Σ_i S^z_i (κ_i − h) + Σ_i (h/2 S^z_i + ωg S^x_i)`.
pub fn energy_period_averaged_from_field(config: &SpinConfig, field: &[f64], params: &DriveParams) -> f64 {
    let h = params.h();
    let wg = params.omega() * params.g();
    let total: f64 = (0..config.len())
        .map(|i| {
            let sz = config.sz[i];
            0.5 * sz * (field[i] - h) + 0.5 * h * sz + wg * config.sx[i]
        })
        .sum();
    total / config.len() as f64
}

/// First-half Hamiltonian per spin, `H_1 / N = (Σ_i S^z_i (κ_i − h) + h Σ_i S^z_i) / N`.
///
/// Unlike `H_T`, the interaction term carries no factor ½: the double sum
/// over ordered pairs is kept as written.
pub fn energy_first_half_from_field(config: &SpinConfig, field: &[f64], h: f64) -> f64 {
    let total: f64 = (0..config.len())
        .map(|i| {
            let sz = config.sz[i];
            sz * (field[i] - h) + h * sz
        })
        .sum();
    total / config.len() as f64
}

pub fn energy_period_averaged(config: &SpinConfig, kernel: &InteractionKernel, params: &DriveParams) -> Result<f64> {
    let field = effective_field_direct(config, kernel, params.h())?;
    Ok(energy_period_averaged_from_field(config, &field, params))
}

pub fn energy_first_half(config: &SpinConfig, kernel: &InteractionKernel, h: f64) -> Result<f64> {
    let field = effective_field_direct(config, kernel, h)?;
    Ok(energy_first_half_from_field(config, &field, h))
}

/// `m = (1/N) Σ_i S^z_i`.
pub fn magnetization(config: &SpinConfig) -> f64 {
    config.sz.iter().sum::<f64>() / config.len() as f64
}

/// Root-mean-square site-wise distance between two configurations.
pub fn decorrelator(a: &SpinConfig, b: &SpinConfig) -> Result<f64> {
    a.check_len(b.len())?;
    let sum: f64 = (0..a.len())
        .map(|i| {
            let dx = a.sx[i] - b.sx[i];
            let dy = a.sy[i] - b.sy[i];
            let dz = a.sz[i] - b.sz[i];
            dx * dx + dy * dy + dz * dz
        })
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Checks that the first `m` samples are the consecutive periods `0..m`.
fn leading_window(series: &TimeSeries, m: usize) -> Result<&[f64]> {
    if m == 0 {
        return Err(Error::InvalidArgument("Fourier window M must be at least 1".into()));
    }
    if series.len() < m {
        return Err(Error::Series(format!(
            "Fourier window M = {m} exceeds the {} recorded samples",
            series.len()
        )));
    }
    for (k, &t) in series.times()[..m].iter().enumerate() {
        if t != k as u64 {
            return Err(Error::Series(format!(
                "spectrum needs consecutive periods 0..{m}; sample {k} is at period {t}"
            )));
        }
    }
    Ok(&series.values()[..m])
}

/// `m̃_k = (1/M) Σ_{n<M} m(nT) e^{-2πi kn/M}`; bin `k` is `ω' = kω/M` and bin
/// `M − k` is `−kω/M`.
pub fn spectrum(series: &TimeSeries, m: usize) -> Result<Vec<Complex64>> {
    let values = leading_window(series, m)?;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    for b in buf.iter_mut() {
        *b *= inv;
    }
    Ok(buf)
}

/// `|m̃(−ω/n)| + |m̃(+ω/n)|` over the first `m` periods.
///
/// The two bins are summed directly with twiddles reduced in whole turns, so
/// a perfectly `n`-periodic signal gives exact bins.
pub fn subharmonic_order_parameter(series: &TimeSeries, m: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("subharmonic order must be at least 2, got {n}")));
    }
    if !m.is_multiple_of(n) {
        return Err(Error::InvalidArgument(format!(
            "window M = {m} is not a multiple of n = {n}, so ω/{n} falls between bins"
        )));
    }
    let values = leading_window(series, m)?;
    let mut plus = Complex64::default();
    let mut minus = Complex64::default();
    for (k, &v) in values.iter().enumerate() {
        let (s, c) = sin_cos_turns((k % n) as f64 / n as f64);
        plus += Complex64::new(v * c, -v * s);
        minus += Complex64::new(v * c, v * s);
    }
    let inv = 1.0 / m as f64;
    Ok((plus * inv).norm() + (minus * inv).norm())
}

/// Centered moving mean over `window` samples of the recorded grid, with
/// truncated windows at the edges. For even windows the extra sample is
/// taken on the later side.
pub fn moving_average(series: &TimeSeries, window: usize) -> Result<TimeSeries> {
    if window == 0 {
        return Err(Error::InvalidArgument("moving-average window must be at least 1".into()));
    }
    let v = series.values();
    let n = v.len();
    let back = (window - 1) / 2;
    let ahead = window / 2;
    let values = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(back);
            let hi = (i + ahead).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    Ok(TimeSeries {
        label: series.label.clone(),
        times: series.times.clone(),
        values,
    })
}

/// Prethermalization and thermalization times, in periods.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimescalePair {
    pub tau_pth: Option<f64>,
    pub tau_th: Option<f64>,
}

/// Fractions of the saturation value that define the two timescales.
pub const PRETHERMAL_FRACTION: f64 = 0.1;
pub const THERMAL_FRACTION: f64 = 0.9;

/// Threshold crossings of a (smoothed) decorrelator record.
///
/// `tau_pth` is the first time `d` reaches `0.1 d_max`; `tau_th` is the last
/// upward crossing of `0.9 d_max` after which `d` never drops below it.
/// Crossing times are interpolated linearly between samples. Either is
/// `None` if the record never qualifies.
pub fn extract_timescales(d: &TimeSeries, d_max: f64) -> Result<TimescalePair> {
    if d.is_empty() {
        return Err(Error::Series("cannot extract timescales from an empty series".into()));
    }
    let t = d.times();
    let v = d.values();
    let crossing = |k: usize, level: f64| -> f64 {
        if k == 0 {
            return t[0] as f64;
        }
        let (t0, t1) = (t[k - 1] as f64, t[k] as f64);
        let (v0, v1) = (v[k - 1], v[k]);
        t0 + (level - v0) / (v1 - v0) * (t1 - t0)
    };

    let low = PRETHERMAL_FRACTION * d_max;
    let tau_pth = v.iter().position(|&x| x >= low).map(|k| crossing(k, low));

    let high = THERMAL_FRACTION * d_max;
    // Start of the final run of samples at or above the threshold.
    let tau_th = if *v.last().unwrap() >= high {
        let k = v.iter().rposition(|&x| x < high).map_or(0, |j| j + 1);
        Some(crossing(k, high))
    } else {
        None
    };
    Ok(TimescalePair { tau_pth, tau_th })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_kernel, torus_distance, Alpha, LatticeSpec};
    use crate::state::{init_polarized_noisy, Purpose, RngStream};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn series(values: Vec<f64>) -> TimeSeries {
        let times = (0..values.len() as u64).collect();
        TimeSeries::from_parts("m", times, values).unwrap()
    }

    fn random_sphere(n: usize, seed: u64) -> SpinConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = SpinConfig::polarized(n);
        for i in 0..n {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..TAU);
            let r = (1.0 - z * z).sqrt();
            c.set_spin(i, [r * phi.cos(), r * phi.sin(), z]);
        }
        c
    }

    fn mean_se(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    fn params(h: f64) -> DriveParams {
        DriveParams::from_omega(2.2, 0.26, h).unwrap()
    }

    #[test]
    fn time_series_rejects_disorder() {
        assert!(TimeSeries::from_parts("x", vec![0, 2, 1], vec![0.0; 3]).is_err());
        assert!(TimeSeries::from_parts("x", vec![0, 1], vec![0.0]).is_err());
        let mut s = TimeSeries::new("x");
        s.push(3, 1.0).unwrap();
        assert!(s.push(3, 1.0).is_err());
        let s = series((0..12).map(|v| v as f64).collect());
        assert_eq!(s.decimate(4).values(), &[0.0, 4.0, 8.0]);
        assert_eq!(s.at(5), Some(5.0));
    }

    #[test]
    fn energy_examples() {
        let spec = LatticeSpec::new(2, 6, Alpha::Finite(3.0)).unwrap();
        let k = build_kernel(&spec);
        let up = SpinConfig::polarized(36);
        let e = energy_period_averaged(&up, &k, &params(0.1)).unwrap();
        assert!((e - 0.55).abs() < 1e-14);
        let e1 = energy_first_half(&up, &k, 0.1).unwrap();
        assert!((e1 - 1.1).abs() < 1e-14);

        let x = SpinConfig::uniform(36, [1.0, 0.0, 0.0]);
        let p = params(0.3);
        let e = energy_period_averaged(&x, &k, &p).unwrap();
        assert!((e - p.omega() * p.g()).abs() < 1e-14);
        assert_eq!(energy_first_half(&x, &k, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn infinite_temperature_energies_vanish() {
        let spec = LatticeSpec::new(1, 100_000, Alpha::Infinite).unwrap();
        let k = build_kernel(&spec);
        let c = random_sphere(100_000, 1);
        let p = params(0.1);
        let field = effective_field_direct(&c, &k, p.h()).unwrap();
        let n = c.len() as f64;
        // Per-site contributions; their sample mean is the energy per spin.
        let ht: Vec<f64> = (0..c.len())
            .map(|i| 0.5 * c.sz[i] * (field[i] - 0.1) + 0.05 * c.sz[i] + p.omega() * p.g() * c.sx[i])
            .collect();
        let h1: Vec<f64> = (0..c.len()).map(|i| c.sz[i] * (field[i] - 0.1) + 0.1 * c.sz[i]).collect();
        let (m, se) = mean_se(&ht);
        assert!(m.abs() < 3.0 * se, "{m} {se}");
        assert!((energy_period_averaged_from_field(&c, &field, &p) - ht.iter().sum::<f64>() / n).abs() < 1e-12);
        let (m, se) = mean_se(&h1);
        assert!(m.abs() < 3.0 * se, "{m} {se}");
    }

    /// O(N²) double sums over ordered pairs with r computed per pair.
    fn brute_energies(c: &SpinConfig, spec: &LatticeSpec, p: &DriveParams) -> (f64, f64) {
        let shape = spec.shape();
        let n = c.len();
        let alpha = spec.alpha().as_f64();
        let raw = |i: usize, j: usize| {
            let ci = shape.coords(i);
            let cj = shape.coords(j);
            let d: Vec<i64> = ci.iter().zip(&cj).map(|(&a, &b)| b as i64 - a as i64).collect();
            let r = torus_distance(&d, spec.len()).unwrap();
            if r.is_infinite() { 0.0 } else { r.powf(-alpha) }
        };
        let nalpha: f64 = (0..n).map(|j| raw(0, j)).sum();
        let mut pair = 0.0;
        for i in 0..n {
            for j in 0..n {
                pair += c.sz[i] * c.sz[j] * raw(i, j);
            }
        }
        pair /= nalpha;
        let sz: f64 = c.sz.iter().sum();
        let sx: f64 = c.sx.iter().sum();
        let ht = 0.5 * pair + 0.5 * p.h() * sz + p.omega() * p.g() * sx;
        let h1 = pair + p.h() * sz;
        (ht / n as f64, h1 / n as f64)
    }

    #[test]
    fn energies_match_double_sum_oracle() {
        for (dim, len, alpha) in [(1, 8, 1.5), (2, 6, 2.5), (3, 4, 3.5), (2, 8, 5.0)] {
            let spec = LatticeSpec::new(dim, len, Alpha::Finite(alpha)).unwrap();
            let k = build_kernel(&spec);
            let c = init_polarized_noisy(&spec, 0.15, RngStream::new(4, 0, Purpose::Init)).unwrap();
            let p = params(0.1);
            let (ht, h1) = brute_energies(&c, &spec, &p);
            let et = energy_period_averaged(&c, &k, &p).unwrap();
            let e1 = energy_first_half(&c, &k, 0.1).unwrap();
            assert!(((et - ht) / ht).abs() < 1e-10);
            assert!(((e1 - h1) / h1).abs() < 1e-10);
        }
    }

    #[test]
    fn magnetization_examples() {
        assert_eq!(magnetization(&SpinConfig::polarized(10)), 1.0);
        let mut c = SpinConfig::polarized(10);
        for i in 0..5 {
            c.sz[i] = -1.0;
        }
        assert_eq!(magnetization(&c), 0.0);
        let spec = LatticeSpec::new(1, 100_000, Alpha::Infinite).unwrap();
        let c = init_polarized_noisy(&spec, 0.1, RngStream::new(8, 0, Purpose::Init)).unwrap();
        let (_, se) = mean_se(&c.sz);
        let expected = (-(TAU * 0.1).powi(2) / 2.0).exp();
        assert!((expected - 0.8209).abs() < 1e-4);
        assert!((magnetization(&c) - expected).abs() < 3.0 * se);
    }

    /// Naive O(M²) DFT.
    fn dft(values: &[f64]) -> Vec<Complex64> {
        let m = values.len();
        (0..m)
            .map(|k| {
                values
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| {
                        let a = -TAU * (k * n) as f64 / m as f64;
                        Complex64::new(v * a.cos(), v * a.sin())
                    })
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect()
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&series(vec![1.0; 64]), 64).unwrap();
        assert!((s[0].re - 1.0).abs() < 1e-14);
        assert!(s[1..].iter().all(|c| c.norm() < 1e-14));

        let cosine: Vec<f64> = (0..64).map(|n| (PI * n as f64 / 2.0).cos()).collect();
        let s = spectrum(&series(cosine.clone()), 64).unwrap();
        assert!((s[16].norm() - 0.5).abs() < 1e-14);
        assert!((s[48].norm() - 0.5).abs() < 1e-14);
        let oracle = dft(&cosine);
        for (a, b) in s.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn white_noise_bins_scale_as_inverse_sqrt_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = 10_000;
        let sigma = 0.3;
        let v: Vec<f64> = (0..m).map(|_| sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let s = spectrum(&series(v), m).unwrap();
        let scale = sigma / (m as f64).sqrt();
        // |bin|² is exponential with mean σ²/M; the max over 10⁴ bins stays below ~12 means.
        let max = s.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(max < 4.0 * scale, "{max} vs {scale}");
        let mean_sq = s.iter().map(|c| c.norm_sqr()).sum::<f64>() / m as f64;
        assert!((mean_sq / (scale * scale) - 1.0).abs() < 0.1);
    }

    #[test]
    fn spectrum_rejects_gaps() {
        let s = TimeSeries::from_parts("m", vec![0, 1, 3, 4], vec![0.0; 4]).unwrap();
        assert!(spectrum(&s, 4).is_err());
        assert!(spectrum(&s, 2).is_ok());
        assert!(spectrum(&s, 5).is_err());
    }

    #[test]
    fn order_parameter_examples() {
        let cycle: Vec<f64> = (0..1000).map(|n| [1.0, 0.0, -1.0, 0.0][n % 4]).collect();
        assert_eq!(subharmonic_order_parameter(&series(cycle.clone()), 1000, 4).unwrap(), 1.0);
        assert_eq!(subharmonic_order_parameter(&series(vec![0.7; 1000]), 1000, 4).unwrap(), 0.0);
        assert!(subharmonic_order_parameter(&series(cycle.clone()), 1002, 4).is_err());
        assert!(subharmonic_order_parameter(&series(cycle), 1000, 1).is_err());
        let flip: Vec<f64> = (0..100).map(|n| if n % 2 == 0 { 0.8 } else { -0.8 }).collect();
        assert!((subharmonic_order_parameter(&series(flip), 100, 2).unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn decorrelator_examples() {
        let a = SpinConfig::polarized(10);
        assert_eq!(decorrelator(&a, &a).unwrap(), 0.0);
        let b = SpinConfig::uniform(10, [0.0, 0.0, -1.0]);
        assert_eq!(decorrelator(&a, &b).unwrap(), 2.0);
        let d = decorrelator(&random_sphere(10_000, 1), &random_sphere(10_000, 2)).unwrap();
        assert!((d - D_INFINITY).abs() < 0.01, "{d}");
        assert!(decorrelator(&a, &SpinConfig::polarized(9)).is_err());
    }

    #[test]
    fn moving_average_examples() {
        let s = series(vec![1.0, 5.0, -2.0, 3.0]);
        assert_eq!(moving_average(&s, 1).unwrap(), s);
        let c = moving_average(&series(vec![0.3; 20]), 7).unwrap();
        assert!(c.values().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        let alt: Vec<f64> = (0..20).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a = moving_average(&series(alt), 2).unwrap();
        assert!(a.values()[..19].iter().all(|&v| v == 0.0));
        assert!(moving_average(&s, 0).is_err());
    }

    #[test]
    fn timescales_of_logistic() {
        let times: Vec<u64> = (0..=3000).step_by(5).collect();
        let values = times
            .iter()
            .map(|&t| D_INFINITY / (1.0 + (-(t as f64 - 1000.0) / 50.0).exp()))
            .collect();
        let s = TimeSeries::from_parts("d", times, values).unwrap();
        let tau = extract_timescales(&s, D_INFINITY).unwrap();
        let ln9 = 9f64.ln();
        assert!((tau.tau_pth.unwrap() - (1000.0 - 50.0 * ln9)).abs() < 5.0);
        assert!((tau.tau_th.unwrap() - (1000.0 + 50.0 * ln9)).abs() < 5.0);
    }

    #[test]
    fn timescales_of_ramp_and_plateau() {
        let times: Vec<u64> = (0..=100).collect();
        let values = times.iter().map(|&t| D_INFINITY * t as f64 / 100.0).collect();
        let s = TimeSeries::from_parts("d", times, values).unwrap();
        let tau = extract_timescales(&s, D_INFINITY).unwrap();
        assert!((tau.tau_pth.unwrap() - 10.0).abs() < 1.0);
        assert!((tau.tau_th.unwrap() - 90.0).abs() < 1.0);

        let plateau = series((0..200).map(|n| (0.6 * D_INFINITY * n as f64 / 20.0).min(0.6 * D_INFINITY)).collect());
        let tau = extract_timescales(&plateau, D_INFINITY).unwrap();
        assert!(tau.tau_pth.is_some());
        assert_eq!(tau.tau_th, None);

        // A dip below the threshold resets the thermalization time.
        let mut v = vec![1.4; 50];
        v[0] = 0.0;
        v[20] = 1.0;
        let tau = extract_timescales(&series(v), D_INFINITY).unwrap();
        assert!(tau.tau_th.unwrap() > 20.0);
        assert!(extract_timescales(&TimeSeries::new("d"), D_INFINITY).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn decorrelator_is_symmetric(seed in any::<u64>(), n in 1usize..200) {
                let a = random_sphere(n, seed);
                let b = random_sphere(n, seed.wrapping_add(1));
                prop_assert_eq!(decorrelator(&a, &b).unwrap(), decorrelator(&b, &a).unwrap());
            }

            #[test]
            fn parseval(values in proptest::collection::vec(-1.0f64..1.0, 1..300)) {
                let m = values.len();
                let s = spectrum(&series(values.clone()), m).unwrap();
                let lhs: f64 = s.iter().map(|c| c.norm_sqr()).sum();
                let rhs: f64 = values.iter().map(|v| v * v).sum::<f64>() / m as f64;
                prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
            }

            #[test]
            fn order_parameter_is_shift_invariant(
                pattern in proptest::collection::vec(-1.0f64..1.0, 4),
                shift in 0usize..4,
            ) {
                let a: Vec<f64> = (0..400).map(|k| pattern[k % 4]).collect();
                let b: Vec<f64> = (0..400).map(|k| pattern[(k + shift) % 4]).collect();
                let oa = subharmonic_order_parameter(&series(a), 400, 4).unwrap();
                let ob = subharmonic_order_parameter(&series(b), 400, 4).unwrap();
                prop_assert!((oa - ob).abs() < 1e-12);
            }

            #[test]
            fn timescales_are_ordered(values in proptest::collection::vec(0.0f64..1.5, 1..100)) {
                let tau = extract_timescales(&series(values), D_INFINITY).unwrap();
                if let (Some(p), Some(t)) = (tau.tau_pth, tau.tau_th) {
                    prop_assert!(p <= t);
                }
            }
        }
    }
}
