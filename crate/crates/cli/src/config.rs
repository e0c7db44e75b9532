//! TOML configuration. Every key carries its unit; every default is
//! embedded and can be dumped with `--print-config`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twoframes::lie::{algebra_dim, exp_rot};
use twoframes::scenarios::inertial::InertialNavConfig;
use twoframes::scenarios::lever_arm::LeverArmConfig;
use twoframes::scenarios::monte_carlo::MonteCarloConfig;
use twoframes::scenarios::slammot::SlammotConfig;
use twoframes::{
    Frame, FrameDynamics, OutputModel, StepDynamics, TfgError, TfgShape, TwoFramesSystem,
    VectorDynamics,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    InertialNav,
    LeverArmCar,
    Slammot,
    Custom,
}

impl ScenarioId {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::InertialNav => "inertial_nav",
            ScenarioId::LeverArmCar => "lever_arm_car",
            ScenarioId::Slammot => "slammot",
            ScenarioId::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// System checked by `validate`; all built-in systems when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioId>,
    pub monte_carlo: MonteCarloConfig,
    pub inertial_nav: InertialNavConfig,
    pub lever_arm_car: LeverArmConfig,
    pub slammot: SlammotConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSystem>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, TfgError> {
        let cfg: Config = toml::from_str(text).map_err(|e| TfgError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, TfgError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TfgError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), TfgError> {
        self.monte_carlo.validate()?;
        self.inertial_nav.validate()?;
        self.lever_arm_car.validate()?;
        self.slammot.validate()?;
        if let Some(c) = &self.custom {
            c.build()?;
        }
        if self.scenario == Some(ScenarioId::Custom) && self.custom.is_none() {
            return Err(TfgError::Config(
                "scenario = \"custom\" needs a [custom] table".into(),
            ));
        }
        Ok(())
    }
}

/// Output of a custom system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomOutput {
    pub frame: CustomFrame,
    #[serde(default)]
    pub h_fixed: Vec<Vec<f64>>,
    #[serde(default)]
    pub h_body: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomFrame {
    Fixed,
    Body,
}

/// Constant natural system given by its matrices (row-major nested arrays).
/// Missing `f`/`phi` default to identity; other missing entries to zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CustomSystem {
    pub d: usize,
    pub n1: usize,
    pub n2: usize,
    pub f: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub fixed_drift: Vec<f64>,
    pub body_input: Vec<f64>,
    pub body_drift: Vec<f64>,
    pub fixed_input: Vec<f64>,
    pub o_rad: Vec<f64>,
    pub omega_rad: Vec<f64>,
    pub outputs: Vec<CustomOutput>,
}

fn matrix(
    name: &str,
    rows: &[Vec<f64>],
    r: usize,
    c: usize,
    identity: bool,
) -> Result<DMatrix<f64>, TfgError> {
    if rows.is_empty() {
        return Ok(if identity {
            DMatrix::identity(r, c)
        } else {
            DMatrix::zeros(r, c)
        });
    }
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(TfgError::Config(format!("{name} must be {r}x{c}")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn vector(name: &str, v: &[f64], n: usize) -> Result<DVector<f64>, TfgError> {
    if v.is_empty() {
        return Ok(DVector::zeros(n));
    }
    if v.len() != n {
        return Err(TfgError::Config(format!("{name} must have length {n}")));
    }
    Ok(DVector::from_column_slice(v))
}

impl CustomSystem {
    pub fn shape(&self) -> TfgShape {
        TfgShape::new(self.d, self.n1, self.n2)
    }

    pub fn build(&self) -> Result<TwoFramesSystem<f64>, TfgError> {
        if self.d != 2 && self.d != 3 {
            return Err(TfgError::Config("custom.d must be 2 or 3".into()));
        }
        if self.n1 + self.n2 == 0 && self.outputs.is_empty() {
            return Err(TfgError::Config(
                "custom system is empty: no vectors and no outputs".into(),
            ));
        }
        let shape = self.shape();
        let (q, r, a) = (shape.fixed_len(), shape.body_len(), algebra_dim(self.d));
        let vector_dynamics = VectorDynamics {
            f: matrix("f", &self.f, q, q, true)?,
            c: matrix("c", &self.c, q, r, false)?,
            fixed_drift: vector("fixed_drift", &self.fixed_drift, q)?,
            body_input: vector("body_input", &self.body_input, q)?,
            phi: matrix("phi", &self.phi, r, r, true)?,
            gamma: matrix("gamma", &self.gamma, r, q, false)?,
            body_drift: vector("body_drift", &self.body_drift, r)?,
            fixed_input: vector("fixed_input", &self.fixed_input, r)?,
        };
        let frame = FrameDynamics::Natural {
            o: exp_rot(&vector("o_rad", &self.o_rad, a)?),
            omega: exp_rot(&vector("omega_rad", &self.omega_rad, a)?),
        };
        let outputs = self
            .outputs
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let m = if !o.offset.is_empty() {
                    o.offset.len()
                } else if !o.h_fixed.is_empty() {
                    o.h_fixed.len()
                } else {
                    o.h_body.len()
                };
                if m == 0 || m % self.d != 0 {
                    return Err(TfgError::Config(format!(
                        "output {i}: dimension must be a positive multiple of {}",
                        self.d
                    )));
                }
                Ok(OutputModel {
                    frame: match o.frame {
                        CustomFrame::Fixed => Frame::Fixed,
                        CustomFrame::Body => Frame::Body,
                    },
                    h_fixed: matrix("h_fixed", &o.h_fixed, m, q, false)?,
                    h_body: matrix("h_body", &o.h_body, m, r, false)?,
                    offset: vector("offset", &o.offset, m)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let step = StepDynamics {
            vector: vector_dynamics,
            frame,
        };
        let system = TwoFramesSystem::constant(shape, step, outputs);
        system
            .check_shape(1)
            .map_err(|e| TfgError::Config(format!("custom system: {e}")))?;
        Ok(system)
    }
}
