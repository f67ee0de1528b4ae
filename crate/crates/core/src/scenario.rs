//! Scenario documents: a single JSON file describing a geometry, its
//! waveforms and bias schedule, the atomic state and, optionally, an
//! ensemble simulation, a guide scan, a field map or a TOP configuration.
//!
//! Every dimensional quantity is a unit-suffixed string such as `"20 G"`
//! or `"115 um"`; the unit's dimension is checked against the field it
//! fills. Unknown keys are rejected.

use crate::analysis::{Bins, TUBE_RADIUS_HEIGHTS};
use crate::chipgeom::{
    build_loading_layout, build_side_guide, build_spiral_pair, build_straight_pair, build_u_trap, read_geometry,
    GuidePath, LeadSpec, SpiralSpec, UTrapSpec, WireLayout,
};
use crate::guideprops::{ScanOptions, SectionOptions};
use crate::magnetics::{BiasWaveform, CurrentWaveform, FarField, FieldModel};
use crate::mcsim::{loading_schedule, DomainBox, DtPolicy, EnsembleSpec, LossConfig, PotentialMode, Scenario};
use crate::model::units::{parse_dimensioned, Dimension};
use crate::topdynamics::TopConfig;
use crate::{AtomState, Error, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;

/// Shipped presets as `(file name, JSON text)`.
pub const PRESETS: [(&str, &str); 7] = [
    ("sideguide.json", include_str!("../presets/sideguide.json")),
    ("straight_pair_scan.json", include_str!("../presets/straight_pair_scan.json")),
    ("spiral_fig3.json", include_str!("../presets/spiral_fig3.json")),
    ("utrap_lifetime_500uK.json", include_str!("../presets/utrap_lifetime_500uK.json")),
    ("utrap_lifetime.json", include_str!("../presets/utrap_lifetime.json")),
    ("utrap_lifetime_1250uK.json", include_str!("../presets/utrap_lifetime_1250uK.json")),
    ("top_rb87.json", include_str!("../presets/top_rb87.json")),
];

/// JSON text of a shipped preset, by file name with or without `.json`.
pub fn preset(name: &str) -> Option<&'static str> {
    let file = if name.ends_with(".json") {
        name.to_string()
    } else {
        format!("{name}.json")
    };
    PRESETS.iter().find(|(n, _)| *n == file).map(|(_, text)| *text)
}

fn q(text: &str, dim: Dimension, field: &str) -> Result<f64> {
    parse_dimensioned(text, dim).map_err(|e| Error::Scenario(format!("{field}: {e}")))
}

fn q_opt(text: &Option<String>, dim: Dimension, field: &str) -> Result<Option<f64>> {
    text.as_deref().map(|t| q(t, dim, field)).transpose()
}

fn vec3(v: &[String; 3], dim: Dimension, field: &str) -> Result<Vec3> {
    Ok(Vec3::new(
        q(&v[0], dim, field)?,
        q(&v[1], dim, field)?,
        q(&v[2], dim, field)?,
    ))
}

/// Angular frequency from either a cycle frequency (Hz) or rad/s.
fn angular(text: &str, field: &str) -> Result<f64> {
    match parse_dimensioned(text, Dimension::Frequency) {
        Ok(f) => Ok(TAU * f),
        Err(_) => q(text, Dimension::AngularFrequency, field),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadsDoc {
    pub length: String,
    pub splay: String,
}

/// Wire layout and guide centreline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryDoc {
    /// Single wire `single` along x.
    SideGuide { length: String },
    /// Counter-propagating pair `pair` along x at y = ±d.
    StraightPair { length: String, half_separation: String },
    /// Spiral pair `guide` connected at the inner end.
    Spiral {
        inner_radius: String,
        outer_radius: String,
        path_length: String,
        half_separation: String,
        points_per_turn: usize,
        #[serde(default)]
        straight_entry: Option<String>,
        #[serde(default)]
        leads: Option<LeadsDoc>,
    },
    /// Two U-shaped wires driven by waveform `u`.
    UTrap {
        central_length: String,
        half_separation: String,
        lead_length: String,
    },
    /// Side-guide wire `single` next to the pair `pair`.
    Loading {
        length: String,
        half_separation: String,
        single_offset: String,
    },
    /// Straight wires `wire_a` and `wire_b` with the currents and bias of
    /// the `top` section.
    Top { length: String },
    /// Segments from a geometry file, relative paths resolved against the
    /// scenario file; the guide centreline is given explicitly.
    File { path: String, centerline: Vec<[String; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveformDoc {
    Constant {
        name: String,
        current: String,
    },
    /// Piecewise-linear `[time, current]` knots.
    Ramp {
        name: String,
        knots: Vec<[String; 2]>,
    },
    Sinusoidal {
        name: String,
        i0: String,
        imod: String,
        /// Hz or rad/s.
        frequency: String,
        #[serde(default)]
        phase: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BiasDoc {
    Constant { field: [String; 3] },
    /// The loading sequence: single wire ramped down and pair ramped up
    /// while the bias rotates from horizontal to vertical. Generates the
    /// `single` and `pair` waveforms.
    Loading {
        magnitude: String,
        current: String,
        t_ramp1: String,
        t_ramp2: String,
    },
}

impl Default for BiasDoc {
    fn default() -> Self {
        BiasDoc::Constant {
            field: ["0 T".into(), "0 T".into(), "0 T".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDoc {
    pub name: String,
    #[serde(default)]
    pub f: Option<i32>,
    #[serde(default)]
    pub mf: Option<i32>,
    #[serde(default)]
    pub gf: Option<f64>,
}

impl Default for SpeciesDoc {
    fn default() -> Self {
        SpeciesDoc {
            name: "Li7".into(),
            f: None,
            mf: None,
            gf: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    /// Use the far-field tree for long layouts.
    #[serde(default)]
    pub far_field: bool,
    #[serde(default)]
    pub guard: Option<String>,
    #[serde(default)]
    pub strip_filaments: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDoc {
    pub count: usize,
    pub t_transverse: String,
    pub t_longitudinal: String,
    /// Arclength of the loading section.
    pub station: String,
    /// Harmonic confinement along the guide during sampling (Hz or rad/s).
    #[serde(default)]
    pub holding_frequency: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeStepDoc {
    Adaptive { eta: f64 },
    Fixed { dt: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeDoc {
    Instantaneous,
    TopAveraged { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationDoc {
    pub total_time: String,
    #[serde(default)]
    pub snapshots: Vec<String>,
    #[serde(default)]
    pub time_step: Option<TimeStepDoc>,
    #[serde(default)]
    pub mode: Option<ModeDoc>,
    #[serde(default)]
    pub gravity: bool,
    #[serde(default)]
    pub duration_warning: Option<String>,
    #[serde(default)]
    pub max_velocity_kick: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    pub lo: [String; 3],
    pub hi: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossesDoc {
    /// `"inf"` or omitted disables the channel.
    #[serde(default)]
    pub tau_background: Option<String>,
    /// Omitted disables the Majorana channel.
    #[serde(default)]
    pub majorana_threshold: Option<f64>,
    #[serde(default)]
    pub b_floor: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDoc {
    pub biases: Vec<String>,
    #[serde(default)]
    pub station: Option<String>,
    #[serde(default)]
    pub direction: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMapDoc {
    pub lo: [String; 3],
    pub hi: [String; 3],
    pub counts: [usize; 3],
    #[serde(default)]
    pub times: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopDoc {
    pub d: String,
    pub i0: String,
    pub imod: String,
    pub bias: String,
    /// Modulation frequency (Hz or rad/s).
    pub frequency: String,
    #[serde(default)]
    pub delta_phi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsDoc {
    #[serde(default = "default_bins")]
    pub arclength_bins: usize,
    #[serde(default = "default_velocity_range")]
    pub velocity_range: [String; 2],
    #[serde(default = "default_bins")]
    pub velocity_bins: usize,
    /// Defaults to five guide heights at the loading station.
    #[serde(default)]
    pub tube_radius: Option<String>,
    /// Spacing of the survival series used by the lifetime fit.
    #[serde(default)]
    pub survival_interval: Option<String>,
    #[serde(default)]
    pub fit_window: Option<[String; 2]>,
}

fn default_bins() -> usize {
    100
}

fn default_velocity_range() -> [String; 2] {
    ["-1.5 m/s".into(), "1.5 m/s".into()]
}

impl Default for OutputsDoc {
    fn default() -> Self {
        OutputsDoc {
            arclength_bins: default_bins(),
            velocity_range: default_velocity_range(),
            velocity_bins: default_bins(),
            tube_radius: None,
            survival_interval: None,
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub geometry: GeometryDoc,
    #[serde(default)]
    pub model: Option<ModelDoc>,
    #[serde(default)]
    pub waveforms: Vec<WaveformDoc>,
    #[serde(default)]
    pub bias: BiasDoc,
    #[serde(default)]
    pub species: SpeciesDoc,
    #[serde(default)]
    pub ensemble: Option<EnsembleDoc>,
    #[serde(default)]
    pub integration: Option<IntegrationDoc>,
    #[serde(default)]
    pub losses: Option<LossesDoc>,
    #[serde(default)]
    pub scan: Option<ScanDoc>,
    #[serde(default)]
    pub field_map: Option<FieldMapDoc>,
    #[serde(default)]
    pub top: Option<TopDoc>,
    #[serde(default)]
    pub outputs: OutputsDoc,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Field-map request in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMapRequest {
    pub lo: Vec3,
    pub hi: Vec3,
    pub counts: [usize; 3],
    pub times: Vec<f64>,
}

/// Profile and fit settings in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub arclength_bins: usize,
    pub velocity_bins: Bins,
    pub tube_radius: Option<f64>,
    pub survival_interval: Option<f64>,
    pub fit_window: (f64, f64),
}

impl ScenarioDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut doc = Self::from_json(&text)?;
        if let GeometryDoc::File { path: file, .. } = &mut doc.geometry {
            let p = Path::new(file.as_str());
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(p).to_string_lossy().into_owned();
                }
            }
        }
        Ok((doc, text))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialize")
    }

    /// Builds every section present, reporting the first invalid one.
    pub fn validate(&self) -> Result<()> {
        self.field_model()?;
        if self.top.is_some() {
            self.top_config()?;
        }
        if self.ensemble.is_some() || self.integration.is_some() {
            self.scenario(self.seed.unwrap_or(0))?;
        }
        if self.scan.is_some() {
            self.scan_request()?;
        }
        if self.field_map.is_some() {
            self.field_map_request()?;
        }
        self.output_settings()?;
        Ok(())
    }

    pub fn state(&self) -> Result<AtomState> {
        let s = &self.species;
        let base = AtomState::from_table(&s.name)
            .ok_or_else(|| Error::Scenario(format!("species: unknown species {:?}", s.name)))?;
        let state = AtomState {
            f: s.f.unwrap_or(base.f),
            mf: s.mf.unwrap_or(base.mf),
            gf: s.gf.unwrap_or(base.gf),
            ..base
        };
        state.validate()?;
        Ok(state)
    }

    pub fn top_config(&self) -> Result<TopConfig> {
        let t = self
            .top
            .as_ref()
            .ok_or_else(|| Error::Scenario("missing top section".into()))?;
        let cfg = TopConfig {
            d: q(&t.d, Dimension::Length, "top.d")?,
            i0: q(&t.i0, Dimension::Current, "top.i0")?,
            imod: q(&t.imod, Dimension::Current, "top.imod")?,
            bias: q(&t.bias, Dimension::Field, "top.bias")?,
            omega_mod: angular(&t.frequency, "top.frequency")?,
            delta_phi: q_opt(&t.delta_phi, Dimension::Angle, "top.delta_phi")?.unwrap_or(std::f64::consts::FRAC_PI_2),
            state: self.state()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn layout(&self) -> Result<(WireLayout, GuidePath)> {
        use Dimension::Length as L;
        Ok(match &self.geometry {
            GeometryDoc::SideGuide { length } => {
                let (c, p) = build_side_guide(q(length, L, "geometry.length")?, 0.0)?;
                (c.into(), p)
            }
            GeometryDoc::StraightPair {
                length,
                half_separation,
            } => {
                let (c, p) = build_straight_pair(
                    q(length, L, "geometry.length")?,
                    q(half_separation, L, "geometry.half_separation")?,
                    0.0,
                )?;
                (c.into(), p)
            }
            GeometryDoc::Spiral {
                inner_radius,
                outer_radius,
                path_length,
                half_separation,
                points_per_turn,
                straight_entry,
                leads,
            } => {
                let leads = match leads {
                    Some(l) => Some(LeadSpec {
                        length: q(&l.length, L, "geometry.leads.length")?,
                        splay: q(&l.splay, Dimension::Angle, "geometry.leads.splay")?,
                    }),
                    None => None,
                };
                let spec = SpiralSpec {
                    inner_radius: q(inner_radius, L, "geometry.inner_radius")?,
                    outer_radius: q(outer_radius, L, "geometry.outer_radius")?,
                    path_length: q(path_length, L, "geometry.path_length")?,
                    half_separation: q(half_separation, L, "geometry.half_separation")?,
                    points_per_turn: *points_per_turn,
                    straight_entry: q_opt(straight_entry, L, "geometry.straight_entry")?.unwrap_or(0.0),
                    leads,
                    ..SpiralSpec::default()
                };
                let (c, p) = build_spiral_pair(&spec)?;
                (c.into(), p)
            }
            GeometryDoc::UTrap {
                central_length,
                half_separation,
                lead_length,
            } => build_u_trap(&UTrapSpec {
                central_length: q(central_length, L, "geometry.central_length")?,
                half_separation: q(half_separation, L, "geometry.half_separation")?,
                lead_length: q(lead_length, L, "geometry.lead_length")?,
                plane_z: 0.0,
            })?,
            GeometryDoc::Loading {
                length,
                half_separation,
                single_offset,
            } => build_loading_layout(
                q(length, L, "geometry.length")?,
                q(half_separation, L, "geometry.half_separation")?,
                q(single_offset, L, "geometry.single_offset")?,
                0.0,
            )?,
            GeometryDoc::Top { .. } => unreachable!("TOP geometry is built from the top section"),
            GeometryDoc::File { path, centerline } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                let pts = centerline
                    .iter()
                    .map(|p| vec3(p, L, "geometry.centerline"))
                    .collect::<Result<Vec<_>>>()?;
                (read_geometry(&text)?, GuidePath::new(pts)?)
            }
        })
    }

    fn waveforms(&self) -> Result<Vec<CurrentWaveform>> {
        self.waveforms
            .iter()
            .map(|w| match w {
                WaveformDoc::Constant { name, current } => Ok(CurrentWaveform::constant(
                    name,
                    q(current, Dimension::Current, "waveforms.current")?,
                )),
                WaveformDoc::Ramp { name, knots } => {
                    let knots = knots
                        .iter()
                        .map(|[t, i]| {
                            Ok((
                                q(t, Dimension::Time, "waveforms.knots")?,
                                q(i, Dimension::Current, "waveforms.knots")?,
                            ))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    CurrentWaveform::ramp(name, knots)
                }
                WaveformDoc::Sinusoidal {
                    name,
                    i0,
                    imod,
                    frequency,
                    phase,
                } => CurrentWaveform::sinusoidal(
                    name,
                    q(i0, Dimension::Current, "waveforms.i0")?,
                    q(imod, Dimension::Current, "waveforms.imod")?,
                    angular(frequency, "waveforms.frequency")?,
                    q_opt(phase, Dimension::Angle, "waveforms.phase")?.unwrap_or(0.0),
                ),
            })
            .collect()
    }

    /// Field model and guide centreline.
    pub fn field_model(&self) -> Result<(FieldModel, GuidePath)> {
        let (model, path) = if let GeometryDoc::Top { length } = &self.geometry {
            if !self.waveforms.is_empty() || self.bias != BiasDoc::default() {
                return Err(Error::Scenario(
                    "the top geometry takes its currents and bias from the top section".into(),
                ));
            }
            self.top_config()?.field_model(q(length, Dimension::Length, "geometry.length")?)?
        } else {
            let (layout, path) = self.layout()?;
            let (mut waves, bias) = match &self.bias {
                BiasDoc::Constant { field } => (Vec::new(), BiasWaveform::constant(vec3(field, Dimension::Field, "bias.field")?)),
                BiasDoc::Loading {
                    magnitude,
                    current,
                    t_ramp1,
                    t_ramp2,
                } => loading_schedule(
                    q(t_ramp1, Dimension::Time, "bias.t_ramp1")?,
                    q(t_ramp2, Dimension::Time, "bias.t_ramp2")?,
                    q(current, Dimension::Current, "bias.current")?,
                    q(magnitude, Dimension::Field, "bias.magnitude")?,
                )?,
            };
            let explicit = self.waveforms()?;
            if let Some(w) = explicit.iter().find(|w| waves.iter().any(|g| g.name == w.name)) {
                return Err(Error::Scenario(format!(
                    "waveform {:?} is generated by the loading schedule",
                    w.name
                )));
            }
            waves.extend(explicit);
            (FieldModel::new(layout, waves, bias)?, path)
        };
        let mut model = model;
        if let Some(m) = &self.model {
            if m.far_field {
                model = model.with_far_field(Some(FarField::default()))?;
            }
            if let Some(g) = q_opt(&m.guard, Dimension::Length, "model.guard")? {
                model = model.with_guard(g)?;
            }
            if let Some(n) = m.strip_filaments {
                model = model.with_strip_filaments(n)?;
            }
        }
        Ok((model, path))
    }

    /// Monte-Carlo scenario with the given seed.
    pub fn scenario(&self, seed: u64) -> Result<Scenario> {
        let e = self
            .ensemble
            .as_ref()
            .ok_or_else(|| Error::Scenario("missing ensemble section".into()))?;
        let i = self
            .integration
            .as_ref()
            .ok_or_else(|| Error::Scenario("missing integration section".into()))?;
        let (model, path) = self.field_model()?;
        let ensemble = EnsembleSpec {
            count: e.count,
            t_transverse: q(&e.t_transverse, Dimension::Temperature, "ensemble.t_transverse")?,
            t_longitudinal: q(&e.t_longitudinal, Dimension::Temperature, "ensemble.t_longitudinal")?,
            center: None,
            axis: None,
            longitudinal_frequency: e
                .holding_frequency
                .as_deref()
                .map(|f| angular(f, "ensemble.holding_frequency"))
                .transpose()?,
            seed,
        };
        let station = q(&e.station, Dimension::Length, "ensemble.station")?;
        let total = q(&i.total_time, Dimension::Time, "integration.total_time")?;
        let mut sc = Scenario::new(model, path, station, self.state()?, ensemble, total);
        if !i.snapshots.is_empty() {
            sc.snapshot_times = i
                .snapshots
                .iter()
                .map(|t| q(t, Dimension::Time, "integration.snapshots"))
                .collect::<Result<_>>()?;
        }
        if let Some(step) = &i.time_step {
            sc.dt = match step {
                TimeStepDoc::Adaptive { eta } => DtPolicy::Adaptive { eta: *eta },
                TimeStepDoc::Fixed { dt } => DtPolicy::Fixed {
                    dt: q(dt, Dimension::Time, "integration.time_step.dt")?,
                },
            };
        }
        sc.mode = match i.mode {
            None | Some(ModeDoc::Instantaneous) => PotentialMode::Instantaneous,
            Some(ModeDoc::TopAveraged { samples }) => PotentialMode::TopAveraged { samples },
        };
        sc.gravity = i.gravity;
        sc.duration_warning = q_opt(&i.duration_warning, Dimension::Time, "integration.duration_warning")?;
        if let Some(k) = &i.max_velocity_kick {
            sc.max_velocity_kick = parse_speed(k, "integration.max_velocity_kick")?;
        }
        sc.losses = self.loss_config()?;
        sc.section = SectionOptions::default();
        sc.validate()?;
        Ok(sc)
    }

    fn loss_config(&self) -> Result<LossConfig> {
        let Some(l) = &self.losses else {
            return Ok(LossConfig::disabled());
        };
        let tau = match l.tau_background.as_deref() {
            None | Some("inf") => f64::INFINITY,
            Some(t) => q(t, Dimension::Time, "losses.tau_background")?,
        };
        let cfg = LossConfig {
            tau_background: tau,
            majorana_threshold: l.majorana_threshold.unwrap_or(f64::INFINITY),
            b_floor: match (&l.b_floor, l.majorana_threshold) {
                (Some(b), _) => q(b, Dimension::Field, "losses.b_floor")?,
                (None, Some(_)) => LossConfig::default().b_floor,
                (None, None) => 0.0,
            },
            domain: match &l.domain {
                Some(d) => Some(DomainBox::new(
                    vec3(&d.lo, Dimension::Length, "losses.domain.lo")?,
                    vec3(&d.hi, Dimension::Length, "losses.domain.hi")?,
                )?),
                None => None,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bias magnitudes and scan options.
    pub fn scan_request(&self) -> Result<(Vec<f64>, ScanOptions)> {
        let s = self
            .scan
            .as_ref()
            .ok_or_else(|| Error::Scenario("missing scan section".into()))?;
        if s.biases.is_empty() {
            return Err(Error::Scenario("scan.biases: empty bias list".into()));
        }
        let biases = s
            .biases
            .iter()
            .map(|b| q(b, Dimension::Field, "scan.biases"))
            .collect::<Result<Vec<_>>>()?;
        let mut opts = ScanOptions {
            station: q_opt(&s.station, Dimension::Length, "scan.station")?,
            ..ScanOptions::default()
        };
        if let Some([x, y, z]) = s.direction {
            let d = Vec3::new(x, y, z);
            if !(d.norm() > 0.0) {
                return Err(Error::Scenario("scan.direction: zero vector".into()));
            }
            opts.direction = d.normalize();
        }
        Ok((biases, opts))
    }

    pub fn field_map_request(&self) -> Result<FieldMapRequest> {
        let f = self
            .field_map
            .as_ref()
            .ok_or_else(|| Error::Scenario("missing field_map section".into()))?;
        if f.counts.contains(&0) {
            return Err(Error::Scenario("field_map.counts: every count must be at least 1".into()));
        }
        let times = if f.times.is_empty() {
            vec![0.0]
        } else {
            f.times
                .iter()
                .map(|t| q(t, Dimension::Time, "field_map.times"))
                .collect::<Result<_>>()?
        };
        Ok(FieldMapRequest {
            lo: vec3(&f.lo, Dimension::Length, "field_map.lo")?,
            hi: vec3(&f.hi, Dimension::Length, "field_map.hi")?,
            counts: f.counts,
            times,
        })
    }

    pub fn output_settings(&self) -> Result<OutputSettings> {
        let o = &self.outputs;
        if o.arclength_bins < 2 {
            return Err(Error::Scenario("outputs.arclength_bins: need at least two bins".into()));
        }
        let lo = parse_speed(&o.velocity_range[0], "outputs.velocity_range")?;
        let hi = parse_speed(&o.velocity_range[1], "outputs.velocity_range")?;
        let window = match &o.fit_window {
            Some([a, b]) => (
                q(a, Dimension::Time, "outputs.fit_window")?,
                if b == "inf" {
                    f64::INFINITY
                } else {
                    q(b, Dimension::Time, "outputs.fit_window")?
                },
            ),
            None => (crate::analysis::DEFAULT_WINDOW_START, f64::INFINITY),
        };
        Ok(OutputSettings {
            arclength_bins: o.arclength_bins,
            velocity_bins: Bins::new(lo, hi, o.velocity_bins)?,
            tube_radius: q_opt(&o.tube_radius, Dimension::Length, "outputs.tube_radius")?,
            survival_interval: q_opt(&o.survival_interval, Dimension::Time, "outputs.survival_interval")?,
            fit_window: window,
        })
    }
}

/// Speeds are written as `"<number> m/s"`.
fn parse_speed(text: &str, field: &str) -> Result<f64> {
    let value = text
        .trim()
        .strip_suffix("m/s")
        .ok_or_else(|| Error::Scenario(format!("{field}: {text:?} needs the unit m/s")))?;
    value
        .trim()
        .parse()
        .map_err(|_| Error::Scenario(format!("{field}: malformed number in {text:?}")))
}

/// Tube radius for arclength projection: the configured value or five
/// guide heights.
pub fn tube_radius(settings: &OutputSettings, guide_height: f64) -> f64 {
    settings.tube_radius.unwrap_or(TUBE_RADIUS_HEIGHTS * guide_height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (name, text) in PRESETS {
            let doc = ScenarioDocument::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            doc.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = ScenarioDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(again, doc, "{name}");
        }
        assert!(preset("top_rb87").is_some());
        assert!(preset("nope").is_none());
    }

    #[test]
    fn unknown_keys_and_wrong_units_are_rejected() {
        let base = preset("sideguide").unwrap();
        let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
        v["colour"] = "blue".into();
        assert!(ScenarioDocument::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(base).unwrap();
        v["geometry"]["length"] = "10 G".into();
        let doc = ScenarioDocument::from_json(&v.to_string()).unwrap();
        let err = doc.field_model().unwrap_err();
        assert!(err.to_string().contains("geometry.length"), "{err}");
    }
}
