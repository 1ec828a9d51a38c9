//! Case configuration: JSON files, dotted-key overrides and presets.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Piece, Shape, DEFAULT_COEFF_TOL};
use crate::grid::{GridSpec, Point};
use crate::oracle::DiscScatteringParams;
use crate::solver::{GmresOptions, IncidentField, ProblemSetup, Smoothing};
use crate::windowing::{ContrastExtension, ContrastSpec, WindowParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Disc { center: Point, radius: f64 },
    Rect { center: Point, half_widths: [f64; 2] },
    Polygon { vertices: Vec<Point> },
    CuspStar,
    Pieces { pieces: Vec<Piece> },
}

impl ShapeConfig {
    pub fn to_shape(&self) -> Shape {
        match self {
            ShapeConfig::Disc { center, radius } => Shape::disc(*center, *radius),
            ShapeConfig::Rect {
                center,
                half_widths,
            } => Shape::rect(*center, *half_widths),
            ShapeConfig::Polygon { vertices } => Shape::polygon(vertices),
            ShapeConfig::CuspStar => Shape::cusp_star(),
            ShapeConfig::Pieces { pieces } => Shape::Composite(pieces.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContrastConfig {
    Constant { value: f64 },
    /// `(x1^2 + x2^2) exp(-x1^2 - x2^2)`.
    RadialGaussianMoment,
}

impl ContrastConfig {
    pub fn to_extension(self) -> ContrastExtension {
        match self {
            ContrastConfig::Constant { value } => ContrastExtension::Constant(value),
            ContrastConfig::RadialGaussianMoment => ContrastExtension::RadialGaussianMoment,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Fourier-smoothed indicator.
    #[default]
    Fspt,
    /// Sharp indicator samples.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference {
    Analytic,
    /// FSPT solution on a finer nested grid; `2 max(grids)` when absent.
    NestedFiner {
        #[serde(default)]
        n_ref: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    ConvergenceCsv,
    FieldDump,
    TimingCsv,
}

fn default_name() -> String {
    "case".into()
}

fn default_coeff_tol() -> f64 {
    DEFAULT_COEFF_TOL
}

fn default_outputs() -> Vec<Output> {
    vec![Output::ConvergenceCsv, Output::FieldDump, Output::TimingCsv]
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub a: f64,
    pub kappa: f64,
    pub shape: ShapeConfig,
    pub contrast: ContrastConfig,
    pub window: WindowParams,
    pub incident: IncidentField,
    #[serde(default)]
    pub mode: Mode,
    /// Fixed truncation `F`; `n/2` per grid when absent.
    #[serde(default)]
    pub f: Option<usize>,
    /// Grid for single solves; the largest study grid when absent.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub grids: Vec<usize>,
    pub reference: Reference,
    #[serde(default)]
    pub solver: GmresOptions,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_coeff_tol")]
    pub coeff_tol: f64,
    /// Where indicator coefficients and `beta` are cached; `<out>/cache`
    /// when absent.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Also write the `x1,x2,re_u,im_u` companion CSV of a field dump.
    #[serde(default = "default_true")]
    pub field_csv: bool,
}

impl CaseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CaseConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and applies `key=value` overrides (dotted keys reach
    /// into nested objects; values are JSON, or strings when they do not
    /// parse).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: CaseConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with `key=value` overrides applied, validated.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: CaseConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if !(self.a > 0.0) || !(self.kappa > 0.0) {
            return cfg_err(format!("a = {} and kappa = {} must be positive", self.a, self.kappa));
        }
        for &n in self.grids.iter().chain(self.n.iter()) {
            GridSpec::new(self.a, n).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.grids.windows(2).any(|w| w[1] <= w[0]) {
            return cfg_err("grid list must be strictly increasing".into());
        }
        if let Reference::NestedFiner { .. } = self.reference {
            if self.grids.windows(2).any(|w| w[1] % w[0] != 0) {
                return cfg_err("nested study grids must each divide the next".into());
            }
            let n_ref = self.n_ref().unwrap_or(0);
            if let Some(&bad) = self.grids.iter().find(|&&n| n_ref <= n || n_ref % n != 0) {
                return cfg_err(format!("n_ref = {n_ref} must exceed and be a multiple of n = {bad}"));
            }
            GridSpec::new(self.a, n_ref).map_err(|e| Error::Config(e.to_string()))?;
        } else {
            self.analytic_params()?;
        }
        if let Some(f) = self.f {
            if let Some(&n) = self.grids.iter().chain(self.n.iter()).find(|&&n| f > n / 2 || f == 0) {
                return cfg_err(format!("F = {f} is not in 1..=n/2 for n = {n}"));
            }
        }
        if !(self.coeff_tol > 0.0) || !(self.solver.tol > 0.0) || self.solver.restart == 0 {
            return cfg_err("tolerances must be positive and restart at least 1".into());
        }
        self.incident.validate()?;
        let shape = self.shape.to_shape();
        shape.validate(self.a)?;
        self.window.validate(&shape, self.a)
    }

    pub fn n_ref(&self) -> Option<usize> {
        match self.reference {
            Reference::Analytic => None,
            Reference::NestedFiner { n_ref } => {
                n_ref.or_else(|| self.grids.iter().max().map(|n| 2 * n))
            }
        }
    }

    /// Grid for a single solve.
    pub fn solve_n(&self) -> Result<usize> {
        self.n
            .or_else(|| self.grids.last().copied())
            .ok_or_else(|| Error::Config("no grid size given (set n or grids)".into()))
    }

    /// Disc parameters when the analytic reference applies.
    pub fn analytic_params(&self) -> Result<DiscScatteringParams> {
        let (ShapeConfig::Disc { center, radius }, ContrastConfig::Constant { value }) =
            (&self.shape, &self.contrast)
        else {
            return Err(Error::Config(
                "analytic reference needs a disc with constant contrast".into(),
            ));
        };
        if center != &[0.0, 0.0] {
            return Err(Error::Config("analytic reference needs the disc at the origin".into()));
        }
        DiscScatteringParams::new(self.kappa, *radius, *value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn smoothing(&self, n: usize, mode: Mode) -> Smoothing {
        match mode {
            Mode::Plain => Smoothing::None,
            Mode::Fspt => Smoothing::Fourier(self.f.unwrap_or(n / 2).min(n / 2)),
        }
    }

    /// Problem on the `n` grid in the given mode.
    pub fn setup(&self, n: usize, mode: Mode) -> Result<ProblemSetup> {
        let grid = GridSpec::new(self.a, n)?;
        let contrast = ContrastSpec::new(self.contrast.to_extension(), self.shape.to_shape());
        Ok(ProblemSetup {
            grid,
            kappa: self.kappa,
            contrast,
            window: self.window,
            smoothing: self.smoothing(n, mode),
            incident: self.incident,
            beta: self.beta,
            coeff_tol: self.coeff_tol,
        })
    }
}

/// Sets `key=value` in a JSON object; `a.b=1` reaches nested objects.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config(format!("override `{spec}` has an empty key")))
}

/// Built-in cases.
pub mod presets {
    use super::*;

    fn base(name: &str) -> CaseConfig {
        CaseConfig {
            name: name.into(),
            a: 1.1,
            kappa: 10.0,
            shape: ShapeConfig::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            contrast: ContrastConfig::Constant { value: -0.5 },
            window: WindowParams {
                r_in: 1.01,
                r_out: 1.08,
            },
            incident: IncidentField::RadialBessel,
            mode: Mode::Fspt,
            f: None,
            n: None,
            grids: vec![],
            reference: Reference::Analytic,
            solver: GmresOptions::default(),
            outputs: default_outputs(),
            beta: None,
            coeff_tol: DEFAULT_COEFF_TOL,
            cache_dir: None,
            field_csv: true,
        }
    }

    /// Disc `R = 1`, `m = -0.5`, `u^i = J0(10|x|)`, analytic reference.
    pub fn example1() -> CaseConfig {
        CaseConfig {
            grids: vec![32, 64, 128, 256, 512, 1024],
            ..base("example1")
        }
    }

    /// Square of side 2, `kappa d = 50` with `d = 2 sqrt 2`, smooth contrast.
    pub fn corner() -> CaseConfig {
        CaseConfig {
            kappa: 50.0 / (2.0 * SQRT_2),
            shape: ShapeConfig::Rect {
                center: [0.0, 0.0],
                half_widths: [1.0, 1.0],
            },
            contrast: ContrastConfig::RadialGaussianMoment,
            incident: IncidentField::PlaneWave {
                direction: [1.0, 0.0],
            },
            grids: vec![64, 128, 256, 512],
            reference: Reference::NestedFiner { n_ref: Some(1024) },
            ..base("corner")
        }
    }

    /// Cusped star, `kappa d = 50` with `d = 2`, `m = -0.4`.
    pub fn cusp() -> CaseConfig {
        CaseConfig {
            kappa: 25.0,
            shape: ShapeConfig::CuspStar,
            contrast: ContrastConfig::Constant { value: -0.4 },
            incident: IncidentField::PlaneWave {
                direction: [1.0, 0.0],
            },
            grids: vec![64, 128, 256, 512],
            reference: Reference::NestedFiner { n_ref: Some(1024) },
            ..base("cusp")
        }
    }

    /// Cusped star at `kappa d = 100`, `m = -1`, single solve at `n = 512`.
    pub fn cusp_figure() -> CaseConfig {
        CaseConfig {
            kappa: 50.0,
            contrast: ContrastConfig::Constant { value: -1.0 },
            n: Some(512),
            grids: vec![512],
            ..cusp()
        }
        .renamed("cusp_figure")
    }

    /// Small disc `R = 1/4`, `m = -0.1` at high frequency. The domain and
    /// window are not pinned down for this run, so results are qualitative.
    pub fn table2_qualitative(kappa: f64) -> CaseConfig {
        CaseConfig {
            a: 0.5,
            kappa,
            shape: ShapeConfig::Disc {
                center: [0.0, 0.0],
                radius: 0.25,
            },
            contrast: ContrastConfig::Constant { value: -0.1 },
            window: WindowParams {
                r_in: 0.26,
                r_out: 0.45,
            },
            incident: IncidentField::PlaneWave {
                direction: [1.0, 0.0],
            },
            n: Some(256),
            grids: vec![256],
            ..base("table2")
        }
    }

    impl CaseConfig {
        fn renamed(mut self, name: &str) -> Self {
            self.name = name.into();
            self
        }
    }
}
