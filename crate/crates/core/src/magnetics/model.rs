use super::tree::{Chain, FarField};
use super::waveform::{BiasWaveform, CurrentWaveform};
use crate::chipgeom::{chip_normal, WireLayout};
use crate::{Error, Mat3, PhysicalConstants, Result, Vec3};
use std::collections::BTreeMap;

/// Default minimum distance between an evaluation point and any wire centerline.
pub const DEFAULT_GUARD: f64 = 2e-6;
/// Default number of filaments in flat-strip mode.
pub const DEFAULT_STRIP_FILAMENTS: usize = 9;

/// Field, Jacobian and explicit time derivative at one point and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: Vec3,
    pub jacobian: Mat3,
    /// `∂B/∂t` at fixed position.
    pub db_dt: Vec3,
}

#[derive(Debug, Clone)]
struct Source {
    waveform: usize,
    chains: Vec<Chain>,
}

/// Wire layout with bound current waveforms plus a uniform bias.
#[derive(Debug, Clone)]
pub struct FieldModel {
    layout: WireLayout,
    waveforms: Vec<CurrentWaveform>,
    bias: BiasWaveform,
    guard: f64,
    constants: PhysicalConstants,
    strip_filaments: usize,
    far_field: Option<FarField>,
    sources: Vec<Source>,
}

impl FieldModel {
    pub fn new(
        layout: WireLayout,
        waveforms: impl IntoIterator<Item = CurrentWaveform>,
        bias: BiasWaveform,
    ) -> Result<Self> {
        let map: BTreeMap<String, CurrentWaveform> =
            waveforms.into_iter().map(|w| (w.name.clone(), w)).collect();
        for w in map.values() {
            w.validate()?;
        }
        let mut model = Self {
            layout,
            waveforms: map.into_values().collect(),
            bias,
            guard: DEFAULT_GUARD,
            constants: PhysicalConstants::CODATA2018,
            strip_filaments: 1,
            far_field: None,
            sources: Vec::new(),
        };
        model.rebuild()?;
        Ok(model)
    }

    /// Model without wires.
    pub fn bias_only(bias: BiasWaveform) -> Self {
        Self::new(WireLayout::default(), [], bias).expect("empty layout is valid")
    }

    pub fn with_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard.is_finite()) {
            return Err(Error::Model("min_distance_guard must be > 0".into()));
        }
        self.guard = guard;
        Ok(self)
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    /// Replace each wire by `n` parallel filaments spread over its width.
    /// `n = 1` restores the line-current model.
    pub fn with_strip_filaments(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Model("strip mode needs at least one filament".into()));
        }
        self.strip_filaments = n;
        self.rebuild()?;
        Ok(self)
    }

    pub fn with_far_field(mut self, far_field: Option<FarField>) -> Result<Self> {
        if let Some(ff) = far_field {
            if !(ff.theta > 0.0 && ff.theta < 1.0) {
                return Err(Error::Model("far-field opening angle must lie in (0, 1)".into()));
            }
        }
        self.far_field = far_field;
        self.rebuild()?;
        Ok(self)
    }

    pub fn with_bias(mut self, bias: BiasWaveform) -> Self {
        self.bias = bias;
        self
    }

    /// Replaces (or adds) the waveform with the same name.
    pub fn with_waveform(mut self, waveform: CurrentWaveform) -> Result<Self> {
        waveform.validate()?;
        match self.waveforms.iter_mut().find(|w| w.name == waveform.name) {
            Some(w) => *w = waveform,
            None => self.waveforms.push(waveform),
        }
        self.rebuild()?;
        Ok(self)
    }

    fn rebuild(&mut self) -> Result<()> {
        let mut sources = Vec::with_capacity(self.layout.circuits.len());
        for c in &self.layout.circuits {
            let waveform = self
                .waveforms
                .iter()
                .position(|w| w.name == c.waveform_ref)
                .ok_or_else(|| {
                    Error::Model(format!(
                        "circuit '{}' references unknown waveform '{}'",
                        c.name, c.waveform_ref
                    ))
                })?;
            let n = self.strip_filaments;
            let mut chains = Vec::new();
            for pts in c.chains() {
                if n == 1 {
                    chains.push(Chain::new(pts, 1.0, self.far_field));
                } else {
                    let lateral = lateral_directions(&pts);
                    for f in 0..n {
                        let off = c.cross_section.width * (f as f64 / (n - 1) as f64 - 0.5);
                        let shifted = pts.iter().zip(&lateral).map(|(p, l)| p + l * off).collect();
                        chains.push(Chain::new(shifted, 1.0 / n as f64, self.far_field));
                    }
                }
            }
            sources.push(Source { waveform, chains });
        }
        self.sources = sources;
        Ok(())
    }

    pub fn layout(&self) -> &WireLayout {
        &self.layout
    }

    pub fn bias(&self) -> &BiasWaveform {
        &self.bias
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn far_field(&self) -> Option<FarField> {
        self.far_field
    }

    pub fn waveform(&self, name: &str) -> Option<&CurrentWaveform> {
        self.waveforms.iter().find(|w| w.name == name)
    }

    pub fn waveforms(&self) -> &[CurrentWaveform] {
        &self.waveforms
    }

    /// Number of filament segments actually summed.
    pub fn source_segment_count(&self) -> usize {
        self.sources
            .iter()
            .flat_map(|s| &s.chains)
            .map(Chain::segment_count)
            .sum()
    }

    /// Instantaneous current of every circuit, in layout order.
    pub fn currents(&self, t: f64) -> Vec<f64> {
        self.sources.iter().map(|s| self.waveforms[s.waveform].current(t)).collect()
    }

    /// True when no current or bias depends on time.
    pub fn is_static(&self) -> bool {
        self.bias.is_static()
            && self.sources.iter().all(|s| match &self.waveforms[s.waveform].kind {
                super::WaveformKind::Constant { .. } => true,
                super::WaveformKind::Ramp { profile } => profile.knots().len() == 1,
                super::WaveformKind::Sinusoidal { imod, .. } => *imod == 0.0,
            })
    }

    /// Common period of the sinusoidal waveforms in use, if any.
    pub fn modulation_period(&self) -> Option<f64> {
        let periods: Vec<f64> = self
            .sources
            .iter()
            .filter_map(|s| self.waveforms[s.waveform].period())
            .collect();
        let first = *periods.first()?;
        periods
            .iter()
            .all(|p| (p - first).abs() <= 1e-12 * first)
            .then_some(first)
    }

    /// Field and Jacobian of circuit `index` for 1 A, without bias.
    pub fn unit_circuit_field(&self, index: usize, p: &Vec3, with_jacobian: bool) -> Result<(Vec3, Mat3)> {
        let k = self.constants.mu0_over_4pi();
        let mut b = Vec3::zeros();
        let mut j = Mat3::zeros();
        for chain in &self.sources[index].chains {
            chain.accumulate(p, self.guard, &mut b, with_jacobian.then_some(&mut j))?;
        }
        Ok((b * k, j * k))
    }

    /// Per-circuit unit fields (and Jacobians); the full field at any time
    /// is `Σ I_c(t) u_c + bias(t)`.
    pub fn unit_fields(&self, p: &Vec3, with_jacobian: bool) -> Result<Vec<(Vec3, Mat3)>> {
        (0..self.sources.len())
            .map(|i| self.unit_circuit_field(i, p, with_jacobian))
            .collect()
    }

    fn accumulate(&self, p: &Vec3, t: f64, with_jacobian: bool) -> Result<FieldSample> {
        let k = self.constants.mu0_over_4pi();
        let mut b = Vec3::zeros();
        let mut j = Mat3::zeros();
        let mut db = Vec3::zeros();
        let mut ub = Vec3::zeros();
        let mut uj = Mat3::zeros();
        for s in &self.sources {
            let w = &self.waveforms[s.waveform];
            let current = w.current(t);
            let rate = w.derivative(t);
            if current == 0.0 && rate == 0.0 {
                continue;
            }
            ub.fill(0.0);
            uj.fill(0.0);
            for chain in &s.chains {
                chain.accumulate(p, self.guard, &mut ub, with_jacobian.then_some(&mut uj))?;
            }
            b += ub * (k * current);
            db += ub * (k * rate);
            if with_jacobian {
                j += uj * (k * current);
            }
        }
        Ok(FieldSample {
            b: b + self.bias.field(t),
            jacobian: j,
            db_dt: db + self.bias.derivative(t),
        })
    }

    /// Field sample at time `t` assembled from unit fields returned by
    /// [`FieldModel::unit_fields`] at the same point.
    pub fn sample_from_units(&self, units: &[(Vec3, Mat3)], t: f64) -> FieldSample {
        let mut b = self.bias.field(t);
        let mut db = self.bias.derivative(t);
        let mut j = Mat3::zeros();
        for (s, (ub, uj)) in self.sources.iter().zip(units) {
            let w = &self.waveforms[s.waveform];
            let (current, rate) = (w.current(t), w.derivative(t));
            b += ub * current;
            db += ub * rate;
            j += uj * current;
        }
        FieldSample { b, jacobian: j, db_dt: db }
    }

    pub fn field_at(&self, p: &Vec3, t: f64) -> Result<Vec3> {
        self.accumulate(p, t, false).map(|s| s.b)
    }

    pub fn field_jacobian(&self, p: &Vec3, t: f64) -> Result<Mat3> {
        self.accumulate(p, t, true).map(|s| s.jacobian)
    }

    pub fn field_and_jacobian(&self, p: &Vec3, t: f64) -> Result<(Vec3, Mat3)> {
        self.accumulate(p, t, true).map(|s| (s.b, s.jacobian))
    }

    pub fn sample(&self, p: &Vec3, t: f64) -> Result<FieldSample> {
        self.accumulate(p, t, true)
    }

    /// Field of a single named circuit at its instantaneous current, without bias.
    pub fn circuit_field(&self, name: &str, p: &Vec3, t: f64) -> Result<Vec3> {
        let idx = self
            .layout
            .circuits
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Model(format!("unknown circuit '{name}'")))?;
        let s = &self.sources[idx];
        let mut ub = Vec3::zeros();
        for chain in &s.chains {
            chain.accumulate(p, self.guard, &mut ub, None)?;
        }
        Ok(ub * (self.constants.mu0_over_4pi() * self.waveforms[s.waveform].current(t)))
    }

    /// Magnitude |B| in tesla.
    pub fn field_norm(&self, p: &Vec3, t: f64) -> Result<f64> {
        self.field_at(p, t).map(|b| b.norm())
    }
}

/// In-plane unit vectors perpendicular to the polyline at each vertex.
fn lateral_directions(pts: &[Vec3]) -> Vec<Vec3> {
    let up = chip_normal();
    let n = pts.len();
    (0..n)
        .map(|k| {
            let before = (k > 0).then(|| (pts[k] - pts[k - 1]).normalize());
            let after = (k + 1 < n).then(|| (pts[k + 1] - pts[k]).normalize());
            let t = match (before, after) {
                (Some(a), Some(b)) if (a + b).norm() > 1e-9 => (a + b).normalize(),
                (Some(a), _) => a,
                (_, Some(b)) => b,
                _ => Vec3::x(),
            };
            let l = up.cross(&t);
            if l.norm() > 1e-9 {
                l.normalize()
            } else {
                Vec3::x().cross(&t).normalize()
            }
        })
        .collect()
}
