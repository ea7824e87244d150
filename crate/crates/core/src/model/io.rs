//! Instance files.
//!
//! ```json
//! {
//!   "format": 1,
//!   "hydro": [{"name": "h3", "efficiency": 0.75, "max_turbine": 1688.0,
//!              "reservoir": {"lower": 0.0, "upper": 17217.0, "initial": 10330.2},
//!              "upstream": [], "downstream": []}],
//!   "thermal": [{"name": "f1", "capacity": 20.0, "min_output": 0.0, "cost": 20.0}],
//!   "demand": 1000.0,
//!   "penalty": 500.0,
//!   "inflow": {"realizations": [[1438.0], [243.6]], "probabilities": [0.5, 0.5]},
//!   "c0": 1.0
//! }
//! ```
//!
//! Plant references in `upstream`/`downstream` are zero-based positions in
//! `hydro`. Probabilities are normalized on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::hpop::{HpopInstance, HydroPlant, ThermalPlant};
use crate::model::process::DiscreteProcess;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InflowDoc {
    realizations: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: u32,
    hydro: Vec<HydroPlant>,
    thermal: Vec<ThermalPlant>,
    demand: f64,
    penalty: f64,
    inflow: InflowDoc,
    #[serde(default = "default_c0")]
    c0: f64,
}

fn default_c0() -> f64 {
    1.0
}

fn to_doc(inst: &HpopInstance) -> InstanceDoc {
    InstanceDoc {
        format: FORMAT_VERSION,
        hydro: inst.hydro.clone(),
        thermal: inst.thermal.clone(),
        demand: inst.demand,
        penalty: inst.penalty,
        inflow: InflowDoc {
            realizations: inst.inflow.realizations.iter().map(|r| r.data.clone()).collect(),
            probabilities: inst.inflow.realizations.iter().map(|r| r.probability).collect(),
        },
        c0: inst.c0,
    }
}

pub fn instance_to_json(inst: &HpopInstance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_doc(inst))?)
}

/// Parses and validates an instance document. `origin` is used in messages.
pub fn instance_from_json(text: &str, origin: &Path) -> Result<HpopInstance> {
    let schema = |msg: String| Error::Schema {
        path: origin.to_path_buf(),
        msg,
    };
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if doc.format != FORMAT_VERSION {
        return Err(schema(format!("unsupported format {}", doc.format)));
    }
    let inflow = if doc.hydro.is_empty() && doc.inflow.realizations.is_empty() {
        DiscreteProcess::deterministic(Vec::new())
    } else {
        DiscreteProcess::new(doc.inflow.realizations, doc.inflow.probabilities).map_err(|e| schema(e.to_string()))?
    };
    let inst = HpopInstance {
        hydro: doc.hydro,
        thermal: doc.thermal,
        demand: doc.demand,
        penalty: doc.penalty,
        inflow,
        c0: doc.c0,
    };
    inst.validate().map_err(|e| schema(e.to_string()))?;
    Ok(inst)
}

pub fn save_instance(inst: &HpopInstance, path: &Path) -> Result<()> {
    let text = instance_to_json(inst)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<HpopInstance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instance_from_json(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hpop::{build_hpop, Preset};

    #[test]
    fn round_trip() {
        let inst = build_hpop(Preset::new(1, 1000.0, 5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("i.json");
        save_instance(&inst, &p).unwrap();
        assert_eq!(load_instance(&p).unwrap(), inst);
    }

    #[test]
    fn missing_thermal_is_schema_error() {
        let text = r#"{"format":1,"hydro":[],"demand":1,"penalty":500,
            "inflow":{"realizations":[[]],"probabilities":[1]}}"#;
        let e = instance_from_json(text, Path::new("x.json")).unwrap_err();
        assert!(matches!(e, Error::Schema { .. }), "{e}");
        assert!(e.to_string().contains("thermal"));
    }

    #[test]
    fn minimal_thermal_only() {
        let text = r#"{"format":1,"hydro":[],
            "thermal":[{"name":"g","capacity":10,"cost":3}],
            "demand":4,"penalty":500,
            "inflow":{"realizations":[[]],"probabilities":[1]}}"#;
        let inst = instance_from_json(text, Path::new("m.json")).unwrap();
        assert_eq!(inst.thermal.len(), 1);
        assert_eq!(inst.c0, 1.0);
        assert_eq!(inst.thermal[0].min_output, 0.0);
    }

    #[test]
    fn wrong_version() {
        let inst = build_hpop(Preset::new(1, 1000.0, 5)).unwrap();
        let text = instance_to_json(&inst)
            .unwrap()
            .replace("\"format\": 1", "\"format\": 9");
        assert!(instance_from_json(&text, Path::new("v")).is_err());
    }
}
