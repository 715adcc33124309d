//! Graph files as the CLI reads them.
//!
//! On top of the graph schema a file may carry a `[simulate]` table with the
//! solver settings; the graph loader ignores it.

use std::fs;
use std::path::{Path, PathBuf};

use kdv_star::coupling::{check_main_theorem, check_yjunction, YJunctionSpec};
use kdv_star::graph::{load_config, CouplingKind, CouplingSpec};
use kdv_star::krein::YUCoupling;
use kdv_star::{ConditionReport, StarGraph};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-10;

pub struct RunConfig {
    pub path: PathBuf,
    pub source: String,
    pub graph: StarGraph,
    pub coupling: CouplingSpec,
    pub tolerance: f64,
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

impl RunConfig {
    /// Reads a graph file that must include a coupling.
    pub fn load(path: &Path, tol: Option<f64>) -> Result<Self, CliError> {
        let source = read(path)?;
        let cfg = load_config(&source)?;
        let coupling = cfg.coupling.ok_or_else(|| {
            CliError::Config(format!("{} has no [coupling] table", path.display()))
        })?;
        let tolerance = positive("tolerance", tol.or(cfg.tolerance).unwrap_or(DEFAULT_TOL))?;
        Ok(Self {
            path: path.to_path_buf(),
            source,
            graph: cfg.graph,
            coupling,
            tolerance,
        })
    }

    pub fn u(&self) -> Result<DMatrix<f64>, CliError> {
        Ok(self.coupling.u_matrix(&self.graph)?)
    }

    pub fn y_coupling(&self) -> Result<YUCoupling, CliError> {
        let u = self.u()?;
        let yu = match self.coupling.kind {
            CouplingKind::Continuity => YUCoupling::continuity(u),
            CouplingKind::YJunction => YUCoupling::y_junction(self.jump()?, u),
        };
        yu.map_err(|e| CliError::Config(format!("coupling: {e}")))
    }

    fn jump(&self) -> Result<f64, CliError> {
        self.coupling
            .a
            .ok_or_else(|| CliError::Config("y-junction coupling needs `a`".into()))
    }

    /// The checklist matching the coupling kind.
    pub fn checklist(&self) -> Result<ConditionReport, CliError> {
        let u = self.u()?;
        let report = match self.coupling.kind {
            CouplingKind::Continuity => check_main_theorem(&self.graph, &u, self.tolerance),
            CouplingKind::YJunction => {
                let spec = YJunctionSpec::from_graph(&self.graph, self.jump()?, &u)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                check_yjunction(&spec, self.tolerance)
            }
        };
        report.map_err(|e| CliError::Config(e.to_string()))
    }
}

/// The `[simulate]` table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateTable {
    #[serde(default = "SimulateTable::default_length")]
    pub length: f64,
    #[serde(default = "SimulateTable::default_h")]
    pub h: f64,
    /// Explicit time step; by default the largest stable one.
    pub dt: Option<f64>,
    #[serde(default = "SimulateTable::default_c_stab")]
    pub c_stab: f64,
    #[serde(default = "SimulateTable::default_t_final")]
    pub t_final: f64,
    #[serde(default = "SimulateTable::default_frames")]
    pub frames: usize,
    /// Largest accepted relative L² error at the final time.
    #[serde(default = "SimulateTable::default_error")]
    pub error_threshold: f64,
    /// Largest accepted vertex residual over the run.
    #[serde(default = "SimulateTable::default_residual")]
    pub residual_threshold: f64,
    /// Abort when `max |u|` grows past this multiple of its initial value.
    #[serde(default = "SimulateTable::default_blowup")]
    pub blowup_factor: f64,
}

impl SimulateTable {
    fn default_length() -> f64 {
        40.0
    }
    fn default_h() -> f64 {
        0.05
    }
    fn default_c_stab() -> f64 {
        1.0
    }
    fn default_t_final() -> f64 {
        5.0
    }
    fn default_frames() -> usize {
        10
    }
    fn default_error() -> f64 {
        1e-2
    }
    fn default_residual() -> f64 {
        1e-2
    }
    fn default_blowup() -> f64 {
        1e3
    }
}

impl Default for SimulateTable {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Deserialize)]
struct Outer {
    simulate: Option<SimulateTable>,
}

/// The `[simulate]` table of a graph file, or the defaults.
pub fn simulate_table(source: &str) -> Result<SimulateTable, CliError> {
    let table = toml::from_str::<Outer>(source)
        .map_err(|e| CliError::Config(format!("[simulate]: {}", e.message())))?
        .simulate
        .unwrap_or_default();
    for (name, x) in [
        ("length", table.length),
        ("h", table.h),
        ("c_stab", table.c_stab),
        ("t_final", table.t_final),
        ("error_threshold", table.error_threshold),
        ("residual_threshold", table.residual_threshold),
        ("blowup_factor", table.blowup_factor),
    ] {
        positive(name, x)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_table_defaults_and_overrides() {
        let t = simulate_table("edges_minus = []\n").unwrap();
        assert_eq!((t.length, t.h, t.t_final, t.dt), (40.0, 0.05, 5.0, None));
        let t = simulate_table("[simulate]\nh = 0.1\ndt = 1e-4\n").unwrap();
        assert_eq!((t.h, t.dt), (0.1, Some(1e-4)));
        assert!(simulate_table("[simulate]\nh = -0.1\n").is_err());
        assert!(simulate_table("[simulate]\nstep = 0.1\n").is_err());
    }
}
