//! Effective longitudinal field `κ_i = h + Σ_δ w(δ) S^z_{i+δ}`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{InteractionKernel, Shape};
use crate::state::SpinConfig;

/// Which algorithm evaluates the kernel sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldPath {
    /// Circular convolution through cached transforms, `O(N log N)`.
    Fft,
    /// Tap-by-tap gather over the nonzero kernel entries.
    Direct,
}

impl FieldPath {
    /// FFT for power-law kernels, the direct stencil for contact interactions.
    pub fn default_for(kernel: &InteractionKernel) -> FieldPath {
        if kernel.spec().alpha().is_infinite() {
            FieldPath::Direct
        } else {
            FieldPath::Fft
        }
    }
}

impl std::str::FromStr for FieldPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fft" => Ok(FieldPath::Fft),
            "direct" => Ok(FieldPath::Direct),
            other => Err(format!("unknown field path `{other}` (expected fft or direct)")),
        }
    }
}

/// Direct evaluation of the kernel sum into `out`.
///
/// Each site accumulates taps in the kernel's fixed order, so the result
/// does not depend on how the work is split.
pub fn effective_field_direct_into(
    sz: &[f64],
    kernel: &InteractionKernel,
    h: f64,
    out: &mut [f64],
) -> Result<()> {
    let shape = kernel.spec().shape();
    let n = shape.n_sites();
    check(sz.len(), n)?;
    check(out.len(), n)?;
    out.fill(h);
    let [n0, n1, n2] = shape.extents();
    let (s0, s1) = (n1 * n2, n2);
    let mut t0 = vec![0usize; n0];
    let mut t1 = vec![0usize; n1];
    let mut t2 = vec![0usize; n2];
    for tap in kernel.taps() {
        shifted(&mut t0, tap.offset[0], s0);
        shifted(&mut t1, tap.offset[1], s1);
        shifted(&mut t2, tap.offset[2], 1);
        let w = tap.weight;
        let mut i = 0;
        for &j0 in &t0 {
            for &j1 in &t1 {
                let base = j0 + j1;
                for (o, &j2) in out[i..i + n2].iter_mut().zip(&t2) {
                    *o += w * sz[base + j2];
                }
                i += n2;
            }
        }
    }
    Ok(())
}

/// `table[c] = ((c + offset) mod extent) * stride`.
fn shifted(table: &mut [usize], offset: usize, stride: usize) {
    let extent = table.len();
    for (c, t) in table.iter_mut().enumerate() {
        *t = ((c + offset) % extent) * stride;
    }
}

pub fn effective_field_direct(config: &SpinConfig, kernel: &InteractionKernel, h: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; config.len()];
    effective_field_direct_into(&config.sz, kernel, h, &mut out)?;
    Ok(out)
}

fn check(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::SizeMismatch { expected, found });
    }
    Ok(())
}

/// Forward and inverse plan for one axis.
type AxisPlans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Cached FFT plans, the transformed kernel and scratch space for one lattice.
///
/// Not shared between threads: each worker builds its own.
pub struct FieldWorkspace {
    shape: Shape,
    plans: Vec<AxisPlans>,
    kernel_hat: Vec<Complex64>,
    buffer: Vec<Complex64>,
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for FieldWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldWorkspace").field("shape", &self.shape).finish_non_exhaustive()
    }
}

impl FieldWorkspace {
    pub fn new(kernel: &InteractionKernel) -> Self {
        let shape = kernel.spec().shape();
        let n = shape.n_sites();
        let mut planner = FftPlanner::new();
        // Every axis has the same length, but keep one plan pair per axis so
        // the code does not rely on it.
        let plans: Vec<_> = (0..shape.dim())
            .map(|_| {
                (
                    planner.plan_fft_forward(shape.len()),
                    planner.plan_fft_inverse(shape.len()),
                )
            })
            .collect();
        let scratch_len = plans
            .iter()
            .map(|(f, i)| f.get_inplace_scratch_len().max(i.get_inplace_scratch_len()))
            .max()
            .unwrap_or(0);
        let mut ws = FieldWorkspace {
            shape,
            plans,
            kernel_hat: Vec::new(),
            buffer: vec![Complex64::default(); n],
            lines: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        };
        let mut hat: Vec<Complex64> = kernel.weights().iter().map(|&w| Complex64::new(w, 0.0)).collect();
        ws.transform(&mut hat, true);
        // Fold the 1/N of the inverse transform into the cached kernel.
        let inv_n = 1.0 / n as f64;
        for v in hat.iter_mut() {
            *v *= inv_n;
        }
        ws.kernel_hat = hat;
        ws
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// The cached kernel transform, scaled by `1/N`.
    pub fn kernel_transform(&self) -> &[Complex64] {
        &self.kernel_hat
    }

    /// Inverse-transforms the cached kernel back to real space.
    pub fn reconstruct_kernel(&mut self) -> Vec<f64> {
        let mut data = self.kernel_hat.clone();
        self.transform(&mut data, false);
        data.iter().map(|c| c.re).collect()
    }

    /// Multidimensional in-place DFT, one axis at a time.
    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        let dim = self.shape.dim();
        let len = self.shape.len();
        let n = data.len();
        for axis in 0..dim {
            let plan = if forward {
                &self.plans[axis].0
            } else {
                &self.plans[axis].1
            };
            // Stride between consecutive elements along this axis.
            let stride = len.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut self.scratch);
                continue;
            }
            // Gather each strided line into a contiguous batch, transform, scatter.
            let block = stride * len;
            let lines = &mut self.lines[..n];
            let mut k = 0;
            for start in (0..n).step_by(block) {
                for offset in 0..stride {
                    for c in 0..len {
                        lines[k] = data[start + offset + c * stride];
                        k += 1;
                    }
                }
            }
            plan.process_with_scratch(lines, &mut self.scratch);
            let mut k = 0;
            for start in (0..n).step_by(block) {
                for offset in 0..stride {
                    for c in 0..len {
                        data[start + offset + c * stride] = lines[k];
                        k += 1;
                    }
                }
            }
        }
    }

    fn convolve_buffer(&mut self) {
        let mut buf = std::mem::take(&mut self.buffer);
        self.transform(&mut buf, true);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.transform(&mut buf, false);
        self.buffer = buf;
    }

    /// FFT evaluation of the field into `out`.
    pub fn field_into(&mut self, sz: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        let n = self.shape.n_sites();
        check(sz.len(), n)?;
        check(out.len(), n)?;
        for (b, &s) in self.buffer.iter_mut().zip(sz) {
            *b = Complex64::new(s, 0.0);
        }
        self.convolve_buffer();
        for (o, b) in out.iter_mut().zip(&self.buffer) {
            *o = h + b.re;
        }
        Ok(())
    }

    /// Fields of two configurations from a single complex convolution.
    ///
    /// The kernel is real, so packing `sz_a + i sz_b` keeps the two
    /// convolutions in the real and imaginary parts.
    pub fn field_pair_into(
        &mut self,
        sz_a: &[f64],
        sz_b: &[f64],
        h: f64,
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) -> Result<()> {
        let n = self.shape.n_sites();
        for len in [sz_a.len(), sz_b.len(), out_a.len(), out_b.len()] {
            check(len, n)?;
        }
        for ((b, &a), &c) in self.buffer.iter_mut().zip(sz_a).zip(sz_b) {
            *b = Complex64::new(a, c);
        }
        self.convolve_buffer();
        for ((oa, ob), b) in out_a.iter_mut().zip(out_b.iter_mut()).zip(&self.buffer) {
            *oa = h + b.re;
            *ob = h + b.im;
        }
        Ok(())
    }
}

pub fn effective_field_fft(config: &SpinConfig, workspace: &mut FieldWorkspace, h: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; config.len()];
    workspace.field_into(&config.sz, h, &mut out)?;
    Ok(out)
}

/// A kernel bound to a field path, with the workspace that path needs.
pub struct FieldSolver {
    kernel: Arc<InteractionKernel>,
    path: FieldPath,
    workspace: Option<FieldWorkspace>,
}

impl FieldSolver {
    pub fn new(kernel: Arc<InteractionKernel>, path: FieldPath) -> Self {
        let workspace = match path {
            FieldPath::Fft => Some(FieldWorkspace::new(&kernel)),
            FieldPath::Direct => None,
        };
        FieldSolver { kernel, path, workspace }
    }

    pub fn with_default_path(kernel: Arc<InteractionKernel>) -> Self {
        let path = FieldPath::default_for(&kernel);
        Self::new(kernel, path)
    }

    pub fn kernel(&self) -> &InteractionKernel {
        &self.kernel
    }

    pub fn path(&self) -> FieldPath {
        self.path
    }

    pub fn field_into(&mut self, sz: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        match &mut self.workspace {
            Some(ws) => ws.field_into(sz, h, out),
            None => effective_field_direct_into(sz, &self.kernel, h, out),
        }
    }

    pub fn field_pair_into(
        &mut self,
        sz_a: &[f64],
        sz_b: &[f64],
        h: f64,
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) -> Result<()> {
        match &mut self.workspace {
            Some(ws) => ws.field_pair_into(sz_a, sz_b, h, out_a, out_b),
            None => {
                effective_field_direct_into(sz_a, &self.kernel, h, out_a)?;
                effective_field_direct_into(sz_b, &self.kernel, h, out_b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_kernel, Alpha, LatticeSpec};
    use crate::state::{init_polarized_noisy, Purpose, RngStream};
    use rand::{Rng, SeedableRng};

    fn kernel(dim: usize, len: usize, alpha: Alpha) -> InteractionKernel {
        build_kernel(&LatticeSpec::new(dim, len, alpha).unwrap())
    }

    /// O(N²) sum over all site pairs, independent of the tap tables.
    fn pairwise_field(sz: &[f64], k: &InteractionKernel, h: f64) -> Vec<f64> {
        let shape = k.spec().shape();
        let n = sz.len();
        (0..n)
            .map(|i| {
                let ci = shape.coords(i);
                h + (0..n)
                    .map(|j| {
                        let cj = shape.coords(j);
                        let d: Vec<i64> = ci.iter().zip(&cj).map(|(&a, &b)| b as i64 - a as i64).collect();
                        k.weight(&d) * sz[j]
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn polarized_field_is_one_plus_h() {
        for alpha in [Alpha::Finite(2.5), Alpha::Infinite] {
            let k = kernel(2, 6, alpha);
            let c = SpinConfig::polarized(36);
            for f in effective_field_direct(&c, &k, 0.1).unwrap() {
                assert!((f - 1.1).abs() < 1e-14);
            }
            let mut ws = FieldWorkspace::new(&k);
            for f in effective_field_fft(&c, &mut ws, 0.1).unwrap() {
                assert!((f - 1.1).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn staggered_chain_field_opposes_each_site() {
        let k = kernel(1, 8, Alpha::Infinite);
        let sz: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c = SpinConfig::from_components(vec![0.0; 8], vec![0.0; 8], sz.clone()).unwrap();
        let expected: Vec<f64> = sz.iter().map(|s| -s).collect();
        assert_eq!(effective_field_direct(&c, &k, 0.0).unwrap(), expected);
    }

    #[test]
    fn impulse_reproduces_kernel_row() {
        let k = kernel(1, 4, Alpha::Finite(2.0));
        let c = SpinConfig::from_components(vec![0.0, 1.0, 1.0, 1.0], vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0])
            .unwrap();
        let f = effective_field_direct(&c, &k, 0.0).unwrap();
        let expected = [0.0, 0.5, 0.0, 0.5];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut ws = FieldWorkspace::new(&k);
        let f = effective_field_fft(&c, &mut ws, 0.3).unwrap();
        for (a, b) in f.iter().zip(expected) {
            assert!((a - 0.3 - b).abs() < 1e-15);
        }

        let k = kernel(3, 5, Alpha::Finite(3.5));
        let mut sz = vec![0.0; 125];
        sz[0] = 1.0;
        let mut ws = FieldWorkspace::new(&k);
        let mut out = vec![0.0; 125];
        ws.field_into(&sz, 0.0, &mut out).unwrap();
        // κ_i = w(0 - i) = w(i) by symmetry.
        for (o, w) in out.iter().zip(k.weights()) {
            assert!((o - w).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_sz_gives_h() {
        let k = kernel(2, 8, Alpha::Finite(3.0));
        let mut ws = FieldWorkspace::new(&k);
        let mut out = vec![0.0; 64];
        ws.field_into(&[0.0; 64], 0.25, &mut out).unwrap();
        assert!(out.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn kernel_transform_round_trips() {
        for (dim, len, alpha) in [(1, 17, 1.5), (2, 12, 3.0), (3, 6, 4.0)] {
            let k = kernel(dim, len, Alpha::Finite(alpha));
            let mut ws = FieldWorkspace::new(&k);
            let back = ws.reconstruct_kernel();
            for (a, b) in back.iter().zip(k.weights()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fft_and_direct_agree_with_pairwise_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for case in 0..12 {
            let dim = 1 + case % 3;
            let len = [5, 8, 9, 4, 7, 6][case % 6];
            let alpha = if case % 4 == 3 {
                Alpha::Infinite
            } else {
                Alpha::Finite(dim as f64 + rng.random_range(0.2..5.0))
            };
            let spec = LatticeSpec::new(dim, len, alpha).unwrap();
            let k = build_kernel(&spec);
            let c = init_polarized_noisy(&spec, 0.3, RngStream::new(case as u64, 0, Purpose::Init)).unwrap();
            let oracle = pairwise_field(&c.sz, &k, 0.1);
            let direct = effective_field_direct(&c, &k, 0.1).unwrap();
            let mut ws = FieldWorkspace::new(&k);
            let fft = effective_field_fft(&c, &mut ws, 0.1).unwrap();
            for i in 0..oracle.len() {
                assert!((direct[i] - oracle[i]).abs() < 1e-13);
                assert!((fft[i] - oracle[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn paired_fields_match_single_fields() {
        let spec = LatticeSpec::new(2, 10, Alpha::Finite(3.0)).unwrap();
        let k = build_kernel(&spec);
        let a = init_polarized_noisy(&spec, 0.2, RngStream::new(1, 0, Purpose::Init)).unwrap();
        let b = init_polarized_noisy(&spec, 0.2, RngStream::new(1, 1, Purpose::Init)).unwrap();
        let mut ws = FieldWorkspace::new(&k);
        let fa = effective_field_fft(&a, &mut ws, 0.1).unwrap();
        let fb = effective_field_fft(&b, &mut ws, 0.1).unwrap();
        let (mut pa, mut pb) = (vec![0.0; 100], vec![0.0; 100]);
        ws.field_pair_into(&a.sz, &b.sz, 0.1, &mut pa, &mut pb).unwrap();
        for i in 0..100 {
            assert!((fa[i] - pa[i]).abs() < 1e-14);
            assert!((fb[i] - pb[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let k = kernel(1, 8, Alpha::Infinite);
        let c = SpinConfig::polarized(7);
        assert!(matches!(
            effective_field_direct(&c, &k, 0.0),
            Err(Error::SizeMismatch { expected: 8, found: 7 })
        ));
        let mut ws = FieldWorkspace::new(&k);
        assert!(effective_field_fft(&c, &mut ws, 0.0).is_err());
    }
}
