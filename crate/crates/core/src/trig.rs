//! Trigonometry on angles measured in full turns.

use std::f64::consts::FRAC_PI_4;

/// `(sin 2πt, cos 2πt)` with the argument reduced in turns before scaling,
/// so that multiples of an eighth turn come out exact (cos 2π/4 is 0, not
/// 6e-17). The exact kicks at g = 1/4 and g = 1/2 depend on this.
pub fn sin_cos_turns(turns: f64) -> (f64, f64) {
    // Reduce to [0, 1) and split off the octant.
    let t = turns - turns.floor();
    let scaled = t * 8.0;
    let octant = scaled.floor();
    let frac = scaled - octant;
    let octant = octant as u8 & 7;
    // Residual angle in [-π/8, π/8) around the nearest octant boundary.
    let (q, r) = if frac < 0.5 {
        (octant, frac)
    } else {
        ((octant + 1) & 7, frac - 1.0)
    };
    let (s, c) = (r * FRAC_PI_4).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Rotate (c, s) by q·π/4.
    match q {
        0 => (s, c),
        1 => (h * (c + s), h * (c - s)),
        2 => (c, -s),
        3 => (h * (c - s), -h * (c + s)),
        4 => (-s, -c),
        5 => (-h * (c + s), -h * (c - s)),
        6 => (-c, s),
        _ => (-h * (c - s), h * (c + s)),
    }
}
