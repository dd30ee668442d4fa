//! PNG snapshots of spin configurations.
//!
//! Each orientation maps to a colour by blending six anchors with weights
//! `(S^x)², (S^y)², (S^z)²`, choosing the anchor of each axis by sign:
//! +x white, −x black, +y blue, −y yellow, +z red, −z green. The weights
//! are the barycentric coordinates of the spin on its octant, so anchors
//! map exactly and the map is continuous.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::state::SpinConfig;

pub type Rgb = [u8; 3];

pub const PLUS_X: Rgb = [255, 255, 255];
pub const MINUS_X: Rgb = [0, 0, 0];
pub const PLUS_Y: Rgb = [0, 0, 255];
pub const MINUS_Y: Rgb = [255, 255, 0];
pub const PLUS_Z: Rgb = [255, 0, 0];
pub const MINUS_Z: Rgb = [0, 255, 0];

pub fn spin_color(s: [f64; 3]) -> Rgb {
    let norm2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    let anchors = [
        if s[0] >= 0.0 { PLUS_X } else { MINUS_X },
        if s[1] >= 0.0 { PLUS_Y } else { MINUS_Y },
        if s[2] >= 0.0 { PLUS_Z } else { MINUS_Z },
    ];
    let mut rgb = [0.0f64; 3];
    for (axis, anchor) in anchors.iter().enumerate() {
        let w = s[axis] * s[axis] / norm2;
        for c in 0..3 {
            rgb[c] += w * anchor[c] as f64;
        }
    }
    rgb.map(|c| c.round().clamp(0.0, 255.0) as u8)
}

/// An 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Each pixel becomes a `k × k` block.
    pub fn upscale(&self, k: usize) -> Image {
        let k = k.max(1);
        let width = self.width * k;
        let height = self.height * k;
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x / k, y / k)))
            .map(|(x, y)| self.pixel(x, y))
            .collect();
        Image { width, height, pixels }
    }

    pub fn encode_png<W: Write>(&self, out: W) -> Result<()> {
        let mut enc = png::Encoder::new(out, self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header()?;
        let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        w.write_image_data(&data)?;
        w.finish()?;
        Ok(())
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.encode_png(std::io::BufWriter::new(file))
    }
}

/// Renders one configuration: D = 1 as a single row, D = 2 as the lattice,
/// D = 3 as the plane at first-axis index `slice`.
pub fn render_snapshot(config: &SpinConfig, spec: &LatticeSpec, slice: Option<usize>) -> Result<Image> {
    config.check_len(spec.n_sites())?;
    let l = spec.len();
    let (width, height, offset) = match spec.dim() {
        1 => (l, 1, 0),
        2 => (l, l, 0),
        _ => {
            let z = slice.ok_or_else(|| Error::InvalidArgument("a D = 3 snapshot needs a slice index".into()))?;
            if z >= l {
                return Err(Error::InvalidArgument(format!("slice {z} is outside 0..{l}")));
            }
            (l, l, z * l * l)
        }
    };
    if spec.dim() < 3 && slice.is_some_and(|z| z != 0) {
        return Err(Error::InvalidArgument(format!("D = {} has no slices", spec.dim())));
    }
    let pixels = (offset..offset + width * height).map(|i| spin_color(config.spin(i))).collect();
    Ok(Image { width, height, pixels })
}

/// Space-time raster of a chain: one row per frame, time running down.
pub fn render_spacetime(frames: &[SpinConfig], spec: &LatticeSpec) -> Result<Image> {
    if spec.dim() != 1 {
        return Err(Error::InvalidArgument("space-time rasters need D = 1".into()));
    }
    let mut pixels = Vec::with_capacity(frames.len() * spec.len());
    for f in frames {
        pixels.extend(render_snapshot(f, spec, None)?.pixels);
    }
    Ok(Image {
        width: spec.len(),
        height: frames.len(),
        pixels,
    })
}
