//! Hypercubic torus geometry and the Kac-normalized power-law kernel.
//!
//! Sites of an `L^D` lattice are linearized in row-major order: the last
//! coordinate varies fastest. Offsets `δ` use the same layout with every
//! component reduced into `[0, L)`, so the kernel is a dense array of `N`
//! weights indexed exactly like the spins.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Power-law exponent of the interaction. `Infinite` is the contact
/// (nearest-neighbor) limit and is kept symbolic to avoid overflowing `r^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    pub fn is_infinite(self) -> bool {
        matches!(self, Alpha::Infinite)
    }

    /// `f64::INFINITY` for the contact limit.
    pub fn as_f64(self) -> f64 {
        match self {
            Alpha::Finite(a) => a,
            Alpha::Infinite => f64::INFINITY,
        }
    }

    /// Maps `+inf` to `Infinite`; any other value to `Finite`.
    pub fn from_f64(value: f64) -> Alpha {
        if value == f64::INFINITY {
            Alpha::Infinite
        } else {
            Alpha::Finite(value)
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Finite(a) => serializer.serialize_f64(*a),
            Alpha::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(a) => Ok(Alpha::Finite(a)),
            Repr::Text(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "nn" => Ok(Alpha::Infinite),
                other => other.parse::<f64>().map(Alpha::from_f64).map_err(|_| {
                    serde::de::Error::custom(format!(
                        "expected a number or \"inf\" for alpha, found \"{s}\""
                    ))
                }),
            },
        }
    }
}

/// Dimension, linear size and interaction exponent of a periodic lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    dim: usize,
    len: usize,
    alpha: Alpha,
}

impl LatticeSpec {
    pub fn new(dim: usize, len: usize, alpha: Alpha) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Lattice(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if len < 2 {
            return Err(Error::Lattice(format!("linear size must be at least 2, got {len}")));
        }
        if let Alpha::Finite(a) = alpha {
            if !a.is_finite() || a <= dim as f64 {
                return Err(Error::Lattice(format!(
                    "alpha must exceed the dimension D = {dim} for the interaction sums to converge, got {a}"
                )));
            }
            // Every nonzero offset of an L = 2 torus sits on the tangent pole.
            if len == 2 {
                return Err(Error::Lattice(
                    "finite alpha needs L >= 3: on an L = 2 torus every pair is at infinite distance"
                        .into(),
                ));
            }
        }
        len.checked_pow(dim as u32)
            .ok_or_else(|| Error::Lattice(format!("L^D overflows for L = {len}, D = {dim}")))?;
        Ok(LatticeSpec { dim, len, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Linear size `L`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn n_sites(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.dim, self.len)
    }

    /// Tangent-regularized distance of an offset, see [`torus_distance`].
    pub fn torus_distance(&self, delta: &[i64]) -> Result<f64> {
        if delta.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "offset has {} components, lattice dimension is {}",
                delta.len(),
                self.dim
            )));
        }
        torus_distance(delta, self.len)
    }
}

/// Row-major index arithmetic for an `L^D` torus, padded to three axes so
/// loops can be written once: `D = 1` is `[1, 1, L]`, `D = 2` is `[1, L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    dim: usize,
    len: usize,
    extents: [usize; 3],
}

impl Shape {
    pub fn new(dim: usize, len: usize) -> Self {
        let mut extents = [1; 3];
        for e in extents.iter_mut().skip(3 - dim) {
            *e = len;
        }
        Shape { dim, len, extents }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Linear size `L`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn n_sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Coordinates of site `index`, `dim` entries, slowest axis first.
    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for c in out.iter_mut().rev() {
            *c = index % self.len;
            index /= self.len;
        }
        out
    }

    /// Linear index of coordinates; each component is reduced mod `L`.
    pub fn index(&self, coords: &[i64]) -> usize {
        coords.iter().fold(0usize, |acc, &c| {
            acc * self.len + c.rem_euclid(self.len as i64) as usize
        })
    }
}

/// `sqrt(Σ_ν [(L/π)|tan(π δ_ν / L)|]²)`: close to the Euclidean norm for
/// small offsets and divergent when a component reaches `L/2`.
///
/// Components are reduced mod `L` first. Returns `f64::INFINITY` for the
/// zero offset (no self-interaction) and on the tangent pole.
pub fn torus_distance(delta: &[i64], len: usize) -> Result<f64> {
    if len < 2 {
        return Err(Error::InvalidArgument(format!(
            "linear size must be at least 2, got {len}"
        )));
    }
    let mut sum = 0.0;
    let mut all_zero = true;
    for &d in delta {
        let comp = axis_distance(d.rem_euclid(len as i64) as usize, len);
        if comp.is_infinite() {
            return Ok(f64::INFINITY);
        }
        all_zero &= comp == 0.0;
        sum += comp * comp;
    }
    if all_zero {
        return Ok(f64::INFINITY);
    }
    Ok(sum.sqrt())
}

/// `(L/π)|tan(π d / L)|` for `d` in `[0, L)`.
fn axis_distance(d: usize, len: usize) -> f64 {
    // The tangent is symmetric about L/2; fold so the argument stays in [0, π/2].
    let folded = d.min(len - d);
    if 2 * folded == len {
        return f64::INFINITY;
    }
    let l = len as f64;
    (l / PI) * (PI * folded as f64 / l).tan()
}

/// Squared per-axis distances for every component value `0..L`.
fn axis_table(len: usize) -> Vec<f64> {
    (0..len)
        .map(|d| {
            let r = axis_distance(d, len);
            r * r
        })
        .collect()
}

/// Kac normalization `N_α = Σ_{δ≠0} r(δ)^-α`; `2D` in the contact limit.
pub fn kac_normalization(spec: &LatticeSpec) -> f64 {
    match spec.alpha {
        Alpha::Infinite => 2.0 * spec.dim as f64,
        Alpha::Finite(alpha) => raw_power_law(spec, alpha).iter().sum(),
    }
}

/// Unnormalized `r(δ)^-α` over all offsets, zero at the origin and poles.
fn raw_power_law(spec: &LatticeSpec, alpha: f64) -> Vec<f64> {
    let table = axis_table(spec.len);
    let shape = spec.shape();
    let [n0, n1, n2] = shape.extents();
    let mut out = Vec::with_capacity(shape.n_sites());
    for a in 0..n0 {
        for b in 0..n1 {
            for c in 0..n2 {
                let r2 = pad(spec.dim, 0, a, &table) + pad(spec.dim, 1, b, &table) + table[c];
                // r2 == 0 only at the origin; inf at the poles gives 0 below.
                let w = if r2 == 0.0 { 0.0 } else { r2.powf(-0.5 * alpha) };
                out.push(w);
            }
        }
    }
    out
}

// Padded axes have extent 1 and contribute nothing.
fn pad(dim: usize, axis: usize, d: usize, table: &[f64]) -> f64 {
    if axis < 3 - dim {
        0.0
    } else {
        table[d]
    }
}

/// Translation-invariant coupling `weights[δ] = 1 / (N_α r(δ)^α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionKernel {
    spec: LatticeSpec,
    weights: Vec<f64>,
    kac: f64,
    taps: Vec<Tap>,
}

/// A nonzero kernel entry as a per-axis offset (padded to three axes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub offset: [usize; 3],
    pub weight: f64,
}

impl InteractionKernel {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kac(&self) -> f64 {
        self.kac
    }

    /// Nonzero entries in increasing offset index; this fixes the reduction
    /// order of the direct field sum.
    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn weight(&self, delta: &[i64]) -> f64 {
        self.weights[self.spec.shape().index(delta)]
    }
}

pub fn build_kernel(spec: &LatticeSpec) -> InteractionKernel {
    let shape = spec.shape();
    let n = shape.n_sites();
    let kac = kac_normalization(spec);
    let weights = match spec.alpha {
        Alpha::Finite(alpha) => raw_power_law(spec, alpha)
            .into_iter()
            .map(|w| w / kac)
            .collect(),
        Alpha::Infinite => {
            let mut w = vec![0.0; n];
            let per_neighbor = 1.0 / kac;
            for axis in 0..spec.dim {
                for step in [1i64, -1] {
                    let mut delta = vec![0i64; spec.dim];
                    delta[axis] = step;
                    // For L = 2 both steps land on the same offset.
                    w[shape.index(&delta)] += per_neighbor;
                }
            }
            w
        }
    };
    let taps = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, &weight)| {
            let c = shape.coords(i);
            let mut offset = [0; 3];
            offset[3 - spec.dim..].copy_from_slice(&c);
            Tap { offset, weight }
        })
        .collect();
    InteractionKernel {
        spec: *spec,
        weights,
        kac,
        taps,
    }
}
