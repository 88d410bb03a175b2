//! Four-phase clock generator.
//!
//! Each zone sees a cosine between `clock_low` and `clock_high`, scaled by the
//! amplitude factor and clipped, so a factor of 2 produces trapezoids with
//! flat hold (low) and relax (high) plateaus of a third of a period each.
//! Zone `k` lags zone 0 by `k` quarter periods, so data flows 0 -> 1 -> 2 -> 3.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::params::SimParams;

/// Tunneling energy of `zone` at `sample`, in joules.
pub fn clock_value(zone: u8, sample: usize, params: &SimParams, period_samples: usize) -> f64 {
    debug_assert!(period_samples >= 4);
    let mid = (params.clock_high_j + params.clock_low_j) / 2.0;
    let span = (params.clock_high_j - params.clock_low_j) / 2.0;
    // Reduce modulo the period first so long runs keep full phase precision.
    let s = (sample % period_samples) as f64;
    let phase = 2.0 * PI * s / period_samples as f64 - f64::from(zone) * FRAC_PI_2;
    let raw = mid + params.clock_amplitude_factor * span * phase.cos() + params.clock_shift;
    raw.clamp(params.clock_low_j, params.clock_high_j)
}

/// Sample offset within a period at which `zone` sits at the centre of its
/// hold plateau (`cos = -1`).
pub fn hold_centre_offset(zone: u8, period_samples: usize) -> usize {
    (period_samples / 2 + usize::from(zone % 4) * period_samples / 4) % period_samples
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        let p = SimParams::default();
        assert_eq!(clock_value(0, 0, &p, 64), p.clock_high_j);
        assert_eq!(clock_value(0, 32, &p, 64), p.clock_low_j);
        assert_eq!(clock_value(1, 16, &p, 64), p.clock_high_j);
        assert_eq!(clock_value(1, 48, &p, 64), p.clock_low_j);
    }

    #[test]
    fn hold_centre_is_low() {
        let p = SimParams::default();
        for z in 0..4 {
            let s = hold_centre_offset(z, 16);
            assert_eq!(clock_value(z, s, &p, 16), p.clock_low_j, "zone {z}");
        }
    }
}
