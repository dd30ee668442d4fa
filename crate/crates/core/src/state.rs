//! Spin configurations, noisy polarized initial states and perturbed copies.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Unit-vector spin field stored as structure-of-arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfig {
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
}

impl SpinConfig {
    /// Every spin along +z.
    pub fn polarized(n: usize) -> Self {
        SpinConfig {
            sx: vec![0.0; n],
            sy: vec![0.0; n],
            sz: vec![1.0; n],
        }
    }

    /// Every spin along the same unit vector `dir`.
    pub fn uniform(n: usize, dir: [f64; 3]) -> Self {
        SpinConfig {
            sx: vec![dir[0]; n],
            sy: vec![dir[1]; n],
            sz: vec![dir[2]; n],
        }
    }

    pub fn from_components(sx: Vec<f64>, sy: Vec<f64>, sz: Vec<f64>) -> Result<Self> {
        if sy.len() != sx.len() {
            return Err(Error::SizeMismatch { expected: sx.len(), found: sy.len() });
        }
        if sz.len() != sx.len() {
            return Err(Error::SizeMismatch { expected: sx.len(), found: sz.len() });
        }
        Ok(SpinConfig { sx, sy, sz })
    }

    /// Spins from polar and azimuthal angles; `θ` may be any real number.
    pub fn from_angles(theta: &[f64], phi: &[f64]) -> Self {
        let n = theta.len();
        let mut c = SpinConfig::polarized(n);
        for i in 0..n {
            let (st, ct) = theta[i].sin_cos();
            let (sp, cp) = phi[i].sin_cos();
            c.sx[i] = st * cp;
            c.sy[i] = st * sp;
            c.sz[i] = ct;
        }
        c
    }

    pub fn len(&self) -> usize {
        self.sz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sz.is_empty()
    }

    pub fn spin(&self, i: usize) -> [f64; 3] {
        [self.sx[i], self.sy[i], self.sz[i]]
    }

    pub fn set_spin(&mut self, i: usize, s: [f64; 3]) {
        self.sx[i] = s[0];
        self.sy[i] = s[1];
        self.sz[i] = s[2];
    }

    /// `(θ, φ)` with `θ = arccos(sz)` in `[0, π]` and `φ = atan2(sy, sx)`.
    pub fn angles(&self, i: usize) -> (f64, f64) {
        (self.sz[i].clamp(-1.0, 1.0).acos(), self.sy[i].atan2(self.sx[i]))
    }

    /// Largest `| |S_i| - 1 |` over all sites.
    pub fn max_norm_deviation(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let n2 = self.sx[i] * self.sx[i] + self.sy[i] * self.sy[i] + self.sz[i] * self.sz[i];
                (n2.sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::SizeMismatch { expected, found: self.len() });
        }
        Ok(())
    }
}

/// What a random stream is used for; distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Init,
    Perturb,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Init => 0,
            Purpose::Perturb => 1,
        }
    }
}

/// Identifies an independent, reproducible random stream.
///
/// The master seed keys a ChaCha generator and `(realization, purpose)`
/// selects its stream, so draws never depend on scheduling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub realization: u64,
    pub purpose: Purpose,
}

impl RngStream {
    pub fn new(master_seed: u64, realization: u64, purpose: Purpose) -> Self {
        RngStream { master_seed, realization, purpose }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization.wrapping_mul(2).wrapping_add(self.purpose.code()));
        rng
    }
}

/// Spins tilted away from +z by Gaussian polar angles of standard deviation
/// `2πW` with uniform azimuths.
///
/// Draws `(θ_i, φ_i)` site by site in index order. `θ` is not folded back
/// into `[0, π]`.
pub fn init_polarized_noisy(spec: &LatticeSpec, noise: f64, stream: RngStream) -> Result<SpinConfig> {
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::InvalidArgument(format!("noise strength W must be >= 0, got {noise}")));
    }
    let n = spec.n_sites();
    if noise == 0.0 {
        return Ok(SpinConfig::polarized(n));
    }
    let sigma = TAU * noise;
    let azimuth = Uniform::new(0.0, TAU).expect("valid range");
    let mut rng = stream.rng();
    let mut theta = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        theta.push(sigma * z);
        phi.push(rng.sample(azimuth));
    }
    Ok(SpinConfig::from_angles(&theta, &phi))
}

/// A copy whose angles are displaced by `2πΔ` times standard normal draws
/// (`δθ_i` then `δφ_i`, site by site). `Δ = 0` returns an exact clone.
pub fn perturb_copy(config: &SpinConfig, delta: f64, stream: RngStream) -> Result<SpinConfig> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("perturbation Δ must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(config.clone());
    }
    let scale = TAU * delta;
    let mut rng = stream.rng();
    let n = config.len();
    let mut theta = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let (t, p) = config.angles(i);
        let dt: f64 = rng.sample(StandardNormal);
        let dp: f64 = rng.sample(StandardNormal);
        theta.push(t + scale * dt);
        phi.push(p + scale * dp);
    }
    Ok(SpinConfig::from_angles(&theta, &phi))
}

/// Writes `coordinates..., sx, sy, sz` rows as CSV.
pub fn write_snapshot_csv<W: Write>(config: &SpinConfig, spec: &LatticeSpec, out: W) -> Result<()> {
    config.check_len(spec.n_sites())?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let axes = ["x", "y", "z"];
    let mut header: Vec<&str> = axes[..spec.dim()].to_vec();
    header.extend(["sx", "sy", "sz"]);
    w.write_record(&header)?;
    let shape = spec.shape();
    for i in 0..config.len() {
        let mut row: Vec<String> = shape.coords(i).iter().map(|c| c.to_string()).collect();
        for v in config.spin(i) {
            row.push(format!("{v:.16e}"));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("snapshot", e))?;
    Ok(())
}
