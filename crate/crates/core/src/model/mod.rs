//! Parameters, radial grids, profiles and the explicit optimizers.

mod grid;
mod params;
mod profile;
mod profiles;

pub use grid::{make_grid, RadialGrid};
pub use params::{CknParams, ProblemParams, SubcriticalCkn};
pub use profile::{derivative, second_derivative, PowerTail, RadialField, RadialProfile};
pub use profiles::{aubin_talenti, aubin_talenti_scaled, barenblatt, barenblatt_with_scale, pressure_of, OptimizerFamily};
