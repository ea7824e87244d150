//! Stage templates, random processes and hydrothermal instances.

pub mod hpop;
pub mod io;
pub mod process;
pub mod template;

pub use hpop::{build_hpop, HpopInstance, HydroPlant, Preset, Reservoir, SystemState, ThermalPlant};
pub use io::{load_instance, save_instance};
pub use process::{DiscreteProcess, Realization};
pub use template::{instantiate_stage, Epigraph, MspModel, RandomRhs, StageTemplate};
