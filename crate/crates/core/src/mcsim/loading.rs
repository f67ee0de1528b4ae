use crate::magnetics::{BiasWaveform, CurrentWaveform, PiecewiseLinear};
use crate::{Error, Result, Vec3};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// Waveform names used by [`crate::chipgeom::build_loading_layout`].
pub const SINGLE_WIRE: &str = "single";
pub const PAIR: &str = "pair";

/// Three-stage transfer from the side guide into the two-wire guide.
///
/// Over `[0, t_ramp1]` the single-wire current falls linearly from
/// `current` to zero while the pair current rises from zero to `current`
/// and the bias turns from horizontal (+y) to 45°. Over
/// `[t_ramp1, t_ramp1 + t_ramp2]` the bias turns on to vertical (+z). The
/// bias magnitude stays `bias` throughout.
pub fn loading_schedule(t_ramp1: f64, t_ramp2: f64, current: f64, bias: f64) -> Result<(Vec<CurrentWaveform>, BiasWaveform)> {
    if !(t_ramp1 > 0.0 && t_ramp2 > 0.0) {
        return Err(Error::Model(format!(
            "ramp times must be positive, got {t_ramp1} s and {t_ramp2} s"
        )));
    }
    let t_end = t_ramp1 + t_ramp2;
    let single = CurrentWaveform::ramp(SINGLE_WIRE, vec![(0.0, current), (t_ramp1, 0.0)])?;
    let pair = CurrentWaveform::ramp(PAIR, vec![(0.0, 0.0), (t_ramp1, current)])?;
    let bias = BiasWaveform::new(
        PiecewiseLinear::constant(bias),
        PiecewiseLinear::new(vec![(0.0, 0.0), (t_ramp1, FRAC_PI_4), (t_end, FRAC_PI_2)])?,
        Vec3::y(),
        Vec3::z(),
        Vec3::zeros(),
    )?;
    Ok((vec![single, pair], bias))
}
